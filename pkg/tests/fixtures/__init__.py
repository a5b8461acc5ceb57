from . import configs, designs, environment, fake_filesystem, resonators, touchstone_files  # noqa: F401

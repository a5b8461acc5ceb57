"""
Bundled demo files: the direct-lattice, layout-balanced and ladder designs, the
shared wide-band target spec and the three-mode resonator used for fit demos.
"""

import pathlib
from importlib import resources

DEMO_FILES = (
    "direct_lattice.json",
    "layout_balanced.json",
    "ladder.json",
    "compare_spec.json",
    "three_mode_resonator.json",
)


def data_path(name: str) -> pathlib.Path:
    """Filesystem path of a bundled data file"""
    if name not in DEMO_FILES:
        raise FileNotFoundError(f"No bundled file {name!r}; available: {', '.join(DEMO_FILES)}")
    return pathlib.Path(str(resources.files(__name__) / name))

"""pyxbar - Makes lattice XBAR filters simple"""

from . import _version

__all__ = []

__version__ = _version.get_versions()["version"]

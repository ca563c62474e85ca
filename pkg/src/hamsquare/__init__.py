"""Certify hamiltonian cycles and paths with prescribed edges in squares of 2-connected graphs"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("hamsquare")
except PackageNotFoundError:
    __version__ = "unknown"
finally:
    del version, PackageNotFoundError

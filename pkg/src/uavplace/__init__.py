"""Simultaneous 3D placement of multiple UAV base stations from candidate grids."""

__version__ = "0.1.0"

"""Interactive kinematics playground for a planar 2R serial arm and a
five-bar parallel mechanism, with singularity-aware color, cursor-size,
and simulated friction-force feedback."""

__version__ = "0.1.0"

"""Special Lagrangian cones and 3-folds in C^3 built from commuting strand ODEs."""

__version__ = "0.1.0"

"""Define liebtoolbox package."""

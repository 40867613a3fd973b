"""MultiView Blend - multi-view audio classification with adaptive gradient blending."""

__version__ = "0.1.0"

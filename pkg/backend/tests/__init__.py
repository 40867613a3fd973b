"""Tests package for multiview-blend."""

"""Test package for deform-forge."""

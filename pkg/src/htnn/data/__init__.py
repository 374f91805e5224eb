"""Bundled 64x64 RGB test images (downsampled scikit-image samples)."""

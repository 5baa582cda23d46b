"""Heartbeat classification from the Wasserstein scalar curvature of kNN
Gaussian point clouds built over a sliding-window FFT embedding."""

__version__ = "0.1.0"

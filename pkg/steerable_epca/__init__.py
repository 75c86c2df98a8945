"""Steerable ePCA: covariance estimation and denoising of Poisson-noisy images."""

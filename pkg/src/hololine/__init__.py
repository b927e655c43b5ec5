"""Holographic-line MIMO channel models with LoS and NLoS components.

Modules
-------
numerics    Bessel/Hankel kernels and panel quadrature.
geometry    Segment geometry, sampling grids, wavenumber index sets.
scattering  Angular power profiles, variance spectra, ACF and PSD.
channel     LoS and NLoS channel matrices and correlations.
wdm         Channel in the Fourier (wavenumber) basis.
metrics     Eigen-spectra, degrees of freedom, water-filling capacity.
greens      Vector, scalar and paraxial Green's function amplitudes.
"""

__version__ = "0.1.0"

"""Numerical core: lattice, spectra, response kernels, inversion and Lieb search."""

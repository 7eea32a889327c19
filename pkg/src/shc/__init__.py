"""Inverse-square heat operator on (-1,1): spectra, controls, extensions."""

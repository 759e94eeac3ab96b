"""Variational bounds and quasiparticle spectra for the homogeneous Bose gas."""

__version__ = "0.1.0"

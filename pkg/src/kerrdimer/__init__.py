"""Driven-dissipative Kerr dimer: effective and lab-frame models, steady
states, photon correlations, circuit model and measurement chain."""

__version__ = "0.1.0"

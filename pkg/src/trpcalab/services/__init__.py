"""Projections, samplers, dual certificates and the TRPCA solver."""

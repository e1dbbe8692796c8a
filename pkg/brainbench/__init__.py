"""Benchmarking, ablation and interpretability toolkit for connectome prediction."""

__version__ = '0.1.0'

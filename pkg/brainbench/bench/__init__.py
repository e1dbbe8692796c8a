"""Benchmark runner, experiment configuration, reports and the command line."""

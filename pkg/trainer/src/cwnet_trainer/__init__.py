"""Toy-scale trainer and golden-fixture exporter for the cwnet engine."""

__version__ = "0.1.0"

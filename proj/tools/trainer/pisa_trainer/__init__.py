"""Trainer and exporter for the simulator's PISAW1 weight files."""

"""Ensemble experiments, assumption checks, reporting and the CLI."""

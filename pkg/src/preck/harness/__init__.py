"""Experiment drivers and the ``preck`` command line."""

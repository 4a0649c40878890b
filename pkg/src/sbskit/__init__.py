"""Toolkit for tracking how close a dephasing central-spin model is, at any
instant, to an ideal spectrum broadcast structure: closed-form dynamics,
discrimination measurements, distance and information bounds, Monte Carlo
pipelines, and a brute-force oracle that certifies all of it on small
instances.
"""

__version__ = "0.1.0"

"""Anomaly detection and step-wise attack categorization for flow-feature datasets."""

__version__ = "0.1.0"

"""Discharge-planning toolkit: CHAID and baseline classifiers over
patient cohorts, versioned model artifacts, a scoring service, and
patient-flow simulation."""

__version__ = "0.1.0"

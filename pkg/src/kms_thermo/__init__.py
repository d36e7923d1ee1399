"""KMS Thermodynamics package: Hausdorff dimensions, eigenmeasures and KMS-state verification."""

__version__ = "0.1.0"

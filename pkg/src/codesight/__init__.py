"""codesight: PR process mining, DevOps metrics, and remaining-time datasets."""

__version__ = "0.1.0"

"""Default and full-repayment probabilities for loan pools exposed to disasters."""

__version__ = "0.1.0"

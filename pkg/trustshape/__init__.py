"""Trust-aware finite-horizon games with potential-based reward shaping."""

__version__ = "0.3.0"

"""Energy-aware trajectory planning for flapping-wing vehicles."""

__version__ = "0.1.0"

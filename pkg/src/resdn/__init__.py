"""Energy-aware SDN flow routing simulator built around the link-utility
interval metric, with switch power models and an exhaustive desk-scale
optimality oracle."""

__version__ = "0.1.0"

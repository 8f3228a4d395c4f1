"""Outage and error-rate analysis of multi-hop mixed FSO/RF relay networks."""

__version__ = "0.1.0"

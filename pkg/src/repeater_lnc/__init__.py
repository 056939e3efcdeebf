"""LNC capacity bounds and a queueing-network coding simulator for the
two-flow smart-repeater broadcast packet-erasure network."""

__version__ = "0.1.0"

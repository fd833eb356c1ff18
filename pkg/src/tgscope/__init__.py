"""Forensics for messaging-channel archives: forward graphs, clones, fakes, topics, coordinated networks."""

__version__ = "0.1.0"

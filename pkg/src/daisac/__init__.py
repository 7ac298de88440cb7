"""Digital-agent assisted, experience-centric resource management for ISAC networks."""

__version__ = "0.1.0"

"""Commercial-vehicle safety analytics: ingestion, metrics, detours, service."""

__version__ = "0.1.0"

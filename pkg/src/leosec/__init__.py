"""LEO constellation latency engine and centralized / distributed / federated
security-AI architecture simulator."""

__version__ = "0.1.0"

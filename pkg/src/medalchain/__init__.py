"""Hybrid central-authority / decentralised-platform electronic badge ledger."""

__version__ = "0.1.0"

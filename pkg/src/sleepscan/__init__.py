"""Sleepminting defect scanner for ERC-721 smart contracts."""

__version__ = "0.1.0"

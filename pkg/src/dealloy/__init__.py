"""Desk-scale surrogate pipeline for phase-field liquid-metal dealloying."""

__version__ = "0.1.0"

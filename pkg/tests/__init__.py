"""Tests for Soccer Props Value Betting System."""

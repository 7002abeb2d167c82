"""Tests for finite-ages."""

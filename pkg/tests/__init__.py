"""Tests for AI-AfterImage."""

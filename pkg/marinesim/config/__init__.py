"""Scenario and process configuration."""

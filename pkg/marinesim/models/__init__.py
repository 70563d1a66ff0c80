"""Pydantic domain types."""

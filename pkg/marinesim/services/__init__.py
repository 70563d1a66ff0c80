"""Services module for the numerics."""

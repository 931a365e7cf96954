"""Compile simple neural programs into exact integer ReLU networks."""

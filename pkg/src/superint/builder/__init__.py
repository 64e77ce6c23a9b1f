"""Integral construction and compatibility equations in two dimensions."""

"""Represent small simple graphs and their block structure."""

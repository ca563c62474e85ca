"""Search for certificates in squares of graphs and build them from smaller pieces."""

"""Exact geodesic shortest paths on portalgons."""

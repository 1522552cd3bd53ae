"""
Command line interface for Dyson Lab.
"""

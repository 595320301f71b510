"""
Command-line tools: config parsing, sweeps and output writers.
"""

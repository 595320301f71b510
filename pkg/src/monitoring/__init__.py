"""
Run metrics and sweep analytics.
"""

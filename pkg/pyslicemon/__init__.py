"""
PySliceMon: closed-loop, SLA-aware monitoring of network slices.
"""

__version__ = '1.0.0'

"""
Neuronal correlation and kernel-embedding entropy toolkit
"""

# This file marks the directory as a Python package

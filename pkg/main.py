#!/usr/bin/env python3
"""
ncentropy - neuronal correlation and hidden-layer entropy

Measures neuronal and weight correlation in feed-forward networks, estimates
hidden-layer entropy through a kernel embedding into a decorrelated feature
space, and runs the desk-scale experiments.
"""

import logging

from ncentropy import config
from ncentropy.cli import cli

# Configure logging
logging.basicConfig(
    level=getattr(logging, config.LOG_LEVEL, logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
# Get logger
logger = logging.getLogger("ncentropy")


if __name__ == "__main__":
    cli()

"""
moran-wave: exact simulation and analysis of adaptation in the Moran model
"""

__version__ = "0.1.0"

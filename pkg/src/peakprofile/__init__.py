"""Residential smart-meter peak-load analytics.

Hourly household profiles are cleaned, grouped into socio-techno-economic
categories and analysed against the peak hours of an aggregate load series.
"""

from peakprofile.errors import DomainError, FormatError

__version__ = "0.1.0"

__all__ = ["DomainError", "FormatError", "__version__"]

"""Primitive implementations, one module per family pair.

``processing`` holds the data-processing and time-series-processing
families, ``features`` the feature-analysis family, and ``detection`` the
detectors plus the rule-based reinforcement filter. The registry assembles
descriptors from all three.
"""

from . import detection, features, processing  # noqa: F401

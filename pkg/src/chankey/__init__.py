"""Secret key generation from multipath channel randomness.

Subpackages cover the whole chain: channel simulation (``channel``), two-way
sounding (``sounding``), secret key capacity analysis (``capacity``), scalar
quantization and decoder evidence (``quantize``), sparse-code syndrome
reconciliation (``codec``), the end-to-end key session (``pipeline``), and a
command-line harness (``cli``).
"""

__version__ = "0.1.0"

PRECISION = 1.e-12
"""[-] spread below which a min-max normalization is treated as degenerate"""

TIE_DECIMALS = 10
"""[-] decimals kept when comparing eigenvalue magnitudes for ties"""

RECONSTRUCTION_TOLERANCE = 1.e-8
"""[-] maximum entrywise error of a full-rank spectral reconstruction"""

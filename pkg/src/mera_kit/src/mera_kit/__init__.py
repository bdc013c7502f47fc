"""mera-kit

Multi-scale entanglement renormalization ansatz for 1D lattices: causal-cone reduced density
matrices, operator flow, scaling analyses and a brute-force state-vector oracle.
"""

__version__ = "0.1.0"

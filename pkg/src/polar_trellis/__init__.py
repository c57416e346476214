"""Polar coding over finite-state trellis channels.

Modules:
    polar_core  -- GF(2) encoding machinery for both code structures
    trellis     -- finite-state modulators and their classification
    channel     -- Gaussian / discrete state-emission channels
    decoder     -- successive cancellation trellis decoding (SC / SCL)
    analysis    -- capacity estimation, V-A curves, FER experiments
    equivalence -- CPM waveforms and front-end equivalence checks
    cli         -- command-line front end
"""

from .polar_core import CodeSpec, Variant, encode, gen_matrix

__all__ = ["CodeSpec", "Variant", "encode", "gen_matrix"]
__version__ = "0.1.0"

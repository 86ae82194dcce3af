"""cfikit: chemical-function infrastructure toolkit.

A library for simulating noisy chemical challenge-response primitives
(a dye reference scheme, operable random DNA pools, genome-edit encryption),
the fuzzy-extractor pipelines that stabilize them, Monte-Carlo security
games with pluggable adversaries, and a high-precision bounds engine that
reproduces the framework's quantitative robustness, unclonability, and
unpredictability claims at desk scale.
"""

__version__ = "0.1.0"

from . import bounds, codec, core, dye, games, gf256, gse, ordna, probability  # noqa: E402,F401
from .core import (  # noqa: F401
    EMPTY_HELPER,
    CfsHandle,
    SCHEMES,
    authenticate,
    cfs_reconstruct,
    cfs_setup,
    estimate_robustness,
    keygen_enroll,
    keygen_reconstruct,
    make_cfs,
)

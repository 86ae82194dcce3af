"""Minimal reference scheme: a mixture of up to 7 fluorescence dyes.

The response to a challenge (an excitation setting) is a 7-bit presence
vector of colors; measurement flips each bit independently with probability
``flip_prob``.  The extractor is the code-offset form of the perfect (7,4,3)
Hamming code: lock a random 4-bit value z against the enrolled pattern,
unlock from any pattern within Hamming distance 1.  Every security property
of the framework has a closed form here, e.g. the challenge robustness is

    (1 - p)^7 + 7 p (1 - p)^6.

Challenges are small integers; the space size is a profile parameter (a
handful of excitation settings), so exhaustive full-table adversaries are
feasible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .codec import hamming74_decode, hamming74_encode
from .core import (
    EMPTY_HELPER,
    CfsHandle,
    ChallengeError,
    ChemicalFunction,
    Extractor,
    pack_helper,
    register_scheme,
    unpack_helper,
)

HELPER_TAG = 1


class DyeProfile:
    """One 7-bit emission pattern per challenge (the secret composition)."""

    def __init__(self, seed, n_challenges: int = 16):
        self.seed = seed
        self.n_challenges = n_challenges
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
        self.patterns = rng.integers(0, 128, n_challenges).astype(np.uint8)


@dataclass(frozen=True)
class DyeNoise:
    flip_prob: float = 0.05


class DyeCF(ChemicalFunction):
    scheme_id = "dye"

    def __init__(self, profile: DyeProfile, noise: DyeNoise, seed):
        super().__init__(seed)
        self.profile = profile
        self.noise = noise

    def validate_challenge(self, challenge) -> None:
        if not isinstance(challenge, (int, np.integer)):
            raise ChallengeError("dye challenge must be an integer")
        if not 0 <= challenge < self.profile.n_challenges:
            raise ChallengeError(
                f"challenge {challenge} outside [0, {self.profile.n_challenges})")

    def challenge_key(self, challenge) -> bytes:
        self.validate_challenge(challenge)
        return int(challenge).to_bytes(2, "big")

    def sample_challenge(self, rng: np.random.Generator) -> int:
        return int(rng.integers(0, self.profile.n_challenges))

    def reference_response(self, challenge) -> int:
        self.validate_challenge(challenge)
        return int(self.profile.patterns[challenge])

    def respond(self, challenge, rng: Optional[np.random.Generator] = None) -> int:
        self.validate_challenge(challenge)
        if rng is None:
            rng = self._next_rng()
        y = int(self.profile.patterns[challenge])
        flips = rng.random(7) < self.noise.flip_prob
        for b in range(7):
            if flips[b]:
                y ^= 1 << b
        return y

    def with_seed(self, seed) -> "DyeCF":
        return DyeCF(self.profile, self.noise, seed)


class DyeExtractor(Extractor):
    """Code-offset Hamming(7,4): h = encode(z) XOR y, z' = decode(h XOR y')."""

    helper_tag = HELPER_TAG

    def extract(self, response: int, helper: bytes,
                rng: Optional[np.random.Generator] = None):
        if not 0 <= response < 128:
            raise ValueError("dye response must be a 7-bit value")
        if helper == EMPTY_HELPER:
            if rng is None:
                raise ValueError("setup mode needs randomness")
            z = int(rng.integers(0, 16))
            offset = hamming74_encode(z) ^ response
            return bytes([z]), pack_helper(self.helper_tag, bytes([offset]))
        offset = unpack_helper(helper, self.helper_tag)[0]
        z = hamming74_decode(offset ^ response)
        return bytes([z]), helper

    def random_output(self, rng: np.random.Generator) -> bytes:
        return bytes([int(rng.integers(0, 16))])


@register_scheme("dye")
def make_dye(seed, *, n_challenges: int = 16, flip_prob: float = 0.05,
             profile: Optional[DyeProfile] = None) -> CfsHandle:
    if profile is None:
        profile = DyeProfile(seed, n_challenges)
    return CfsHandle("dye", DyeCF(profile, DyeNoise(flip_prob), seed),
                     DyeExtractor())

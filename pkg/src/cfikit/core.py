"""Framework layer: chemical functions, extractors, and their composition.

A chemical function (CF) is a noisy mapping from challenges to responses,
fully determined by a secret profile plus evaluation parameters.  Composing a
CF with an extraction algorithm gives a chemical function system (CFS) that
runs in one of two modes:

* setup -- extraction with *empty* helper data; returns the stable output z
  together with freshly generated, non-empty helper data h;
* reconstruction -- extraction with previously generated helper data; returns
  an output that equals the setup z with the scheme's robustness probability,
  and never mutates h.

Enrollment (the setup evaluation) is modeled noise-free via
``reference_response``: the enrolling party measures under calibrated
conditions (or, for genome edits, simply knows what it wrote).  All stochastic
noise lives in reconstruction evaluations, which is exactly the error model
under which the closed-form robustness values of the built-in schemes hold.

Decode-style failures are explicit values: ``cfs_reconstruct`` returns None
(a disagreement), while an undecodable *setup* raises ``SetupFailure`` since
retrying is the caller's policy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .probability import wilson_interval

#: Explicit empty-helper-data value (setup mode marker).
EMPTY_HELPER = b""

_HELPER_VERSION = 1


class ChallengeError(ValueError):
    """Malformed or out-of-space challenge."""


class SchemeMismatchError(ValueError):
    """Operation mixes handles of different schemes."""


class SetupFailure(RuntimeError):
    """Setup-mode extraction could not produce an output."""


def pack_helper(tag: int, payload: bytes) -> bytes:
    """Serialize helper data: 1-byte scheme tag, 2-byte version, payload."""
    return bytes([tag]) + _HELPER_VERSION.to_bytes(2, "little") + payload


def unpack_helper(blob: bytes, expect_tag: int) -> bytes:
    if len(blob) < 3:
        raise ValueError("helper data blob too short")
    if blob[0] != expect_tag:
        raise SchemeMismatchError(
            f"helper data tagged {blob[0]}, expected {expect_tag}")
    version = int.from_bytes(blob[1:3], "little")
    if version != _HELPER_VERSION:
        raise ValueError(f"unsupported helper data version {version}")
    return blob[3:]


class ChemicalFunction:
    """Base class for scheme CFs.

    Subclasses hold an immutable profile and implement the noisy evaluation.
    Two instances built from the same (profile, parameters, seed) produce
    bit-identical response traces.
    """

    scheme_id: str = "?"

    def __init__(self, seed):
        self._seed = seed
        self._op_counter = 0

    @property
    def seed(self):
        return self._seed

    def _next_rng(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self._seed,
                                    spawn_key=(self._op_counter,))
        self._op_counter += 1
        return np.random.default_rng(ss)

    # -- interface to implement per scheme ---------------------------------
    def respond(self, challenge, rng: Optional[np.random.Generator] = None):
        """One noisy evaluation of the CF."""
        raise NotImplementedError

    def reference_response(self, challenge):
        """Noise-free evaluation used by setup mode (enrollment)."""
        raise NotImplementedError

    def validate_challenge(self, challenge) -> None:
        raise NotImplementedError

    def challenge_key(self, challenge) -> bytes:
        """Canonical byte encoding (encode-decode round-trips exactly)."""
        raise NotImplementedError

    def sample_challenge(self, rng: np.random.Generator):
        """A challenge the desk-scale instance can answer (see scheme docs)."""
        raise NotImplementedError

    def with_seed(self, seed) -> "ChemicalFunction":
        """Same profile and parameters, fresh noise stream (a replica)."""
        raise NotImplementedError


class Extractor:
    """Base class for extraction algorithms (the alpha_X side of a CFS)."""

    helper_tag: int = 0

    def extract(self, response, helper: bytes,
                rng: Optional[np.random.Generator] = None):
        """Return (output, helper'); helper' == helper when helper was given.

        Setup mode (empty helper) draws fresh randomness from ``rng``.
        Reconstruction failures surface as output None.
        """
        raise NotImplementedError

    def random_output(self, rng: np.random.Generator) -> bytes:
        """A uniform draw from the output space (used by guessing adversaries)."""
        raise NotImplementedError

    def is_mute_response(self, response) -> bool:
        """True iff ``extract`` returns output None for ANY helper data.

        Lets Monte-Carlo harnesses skip work that cannot change a trial's
        outcome (e.g. an empty selection); purely an exact short-circuit.
        """
        return False


@dataclass
class VerifyPolicy:
    """Output comparison rule for authentication.

    ``threshold`` None means exact equality; otherwise two outputs verify when
    they disagree in at most ``threshold`` byte positions.
    """

    threshold: Optional[int] = None

    def verify(self, z: Optional[bytes], z_prime: Optional[bytes]) -> bool:
        if z is None or z_prime is None:
            return False
        if self.threshold is None:
            return z == z_prime
        if len(z) != len(z_prime):
            return False
        dist = sum(a != b for a, b in zip(z, z_prime))
        return dist <= self.threshold


@dataclass
class CfsHandle:
    """A chemical function composed with its extraction algorithm."""

    scheme_id: str
    cf: ChemicalFunction
    extractor: Extractor

    def replica(self, seed) -> "CfsHandle":
        """Same profile (and extractor parameters), independent noise."""
        return CfsHandle(self.scheme_id, self.cf.with_seed(seed), self.extractor)


def cfs_setup(cfs: CfsHandle, challenge,
              rng: Optional[np.random.Generator] = None) -> tuple[bytes, bytes]:
    """Setup-mode evaluation: returns (output, non-empty helper data)."""
    cfs.cf.validate_challenge(challenge)
    if rng is None:
        rng = cfs.cf._next_rng()
    y = cfs.cf.reference_response(challenge)
    z, h = cfs.extractor.extract(y, EMPTY_HELPER, rng)
    if z is None:
        raise SetupFailure(f"setup extraction failed for scheme {cfs.scheme_id}")
    assert h != EMPTY_HELPER
    return z, h


def cfs_reconstruct(cfs: CfsHandle, challenge, helper: bytes,
                    rng: Optional[np.random.Generator] = None) -> Optional[bytes]:
    """Reconstruction-mode evaluation; None signals a failed reconstruction."""
    cfs.cf.validate_challenge(challenge)
    if helper == EMPTY_HELPER:
        raise ValueError("reconstruction requires non-empty helper data")
    if rng is None:
        rng = cfs.cf._next_rng()
    y = cfs.cf.respond(challenge, rng)
    z, h_out = cfs.extractor.extract(y, helper, rng)
    assert h_out == helper, "reconstruction must not mutate helper data"
    return z


def authenticate(reference: CfsHandle, candidate: ChemicalFunction, challenge,
                 rng: Optional[np.random.Generator] = None,
                 verify: Optional[VerifyPolicy] = None) -> bool:
    """Challenge both instances, compare extracted outputs (Fig.-4 style flow)."""
    if candidate.scheme_id != reference.scheme_id:
        raise SchemeMismatchError(
            f"candidate scheme {candidate.scheme_id} vs reference {reference.scheme_id}")
    if verify is None:
        verify = VerifyPolicy()
    if rng is None:
        rng = reference.cf._next_rng()
    z, h = cfs_setup(reference, challenge, rng)
    y_prime = candidate.respond(challenge, rng)
    z_prime, _ = reference.extractor.extract(y_prime, h, rng)
    return verify.verify(z, z_prime)


def keygen_enroll(cfs: CfsHandle, challenge,
                  rng: Optional[np.random.Generator] = None) -> tuple[bytes, bytes]:
    """Derive a key from the CFS; the key is the setup output."""
    return cfs_setup(cfs, challenge, rng)


def keygen_reconstruct(cfs_replica: CfsHandle, challenge, helper: bytes,
                       rng: Optional[np.random.Generator] = None) -> Optional[bytes]:
    """Recover the enrolled key on a replica instance (same profile)."""
    return cfs_reconstruct(cfs_replica, challenge, helper, rng)


@dataclass(frozen=True)
class RobustnessEstimate:
    """Monte-Carlo estimate of the challenge robustness."""

    trials: int
    successes: int
    point: float
    wilson_lo: float
    wilson_hi: float

    def covers(self, value: float) -> bool:
        return self.wilson_lo <= value <= self.wilson_hi


def estimate_robustness(cfs: CfsHandle, challenge, trials: int,
                        seed=0) -> RobustnessEstimate:
    """One setup, then ``trials`` reconstructions; agreement frequency."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    root = np.random.SeedSequence(seed)
    streams = root.spawn(trials + 1)
    z, h = cfs_setup(cfs, challenge, np.random.default_rng(streams[0]))
    successes = 0
    for i in range(trials):
        rng = np.random.default_rng(streams[i + 1])
        z_prime = cfs_reconstruct(cfs, challenge, h, rng)
        if z_prime == z:
            successes += 1
    lo, hi = wilson_interval(successes, trials)
    return RobustnessEstimate(trials, successes, successes / trials, lo, hi)


# ---------------------------------------------------------------------------
# Scheme registry
# ---------------------------------------------------------------------------

#: id -> factory(seed, **params) -> CfsHandle
SCHEMES: dict[str, Callable[..., CfsHandle]] = {}


def register_scheme(scheme_id: str):
    def deco(factory):
        SCHEMES[scheme_id] = factory
        return factory
    return deco


def make_cfs(scheme_id: str, seed, **params) -> CfsHandle:
    try:
        factory = SCHEMES[scheme_id]
    except KeyError:
        raise KeyError(f"unknown scheme {scheme_id!r}; known: {sorted(SCHEMES)}")
    return factory(seed, **params)

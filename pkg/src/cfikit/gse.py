"""Genome-edit scheme: key-sites, base-edit reads, ML decisions, BCH offset.

The profile is a set of key-site coordinates in a reference genome.  At a
key-site, a small fraction ``p_edit`` of cells carries the base edit (ABE and
CBE are modeled as one symmetric edit channel).  Reading a position with
coverage q yields a count of edit-reporting reads: Binomial(q, p_detect) at a
key-site and Binomial(q, p_seq_err) elsewhere, with

    p_detect = p_edit (1 - p_seq_err) + (1 - p_edit) p_seq_err.

Each position's bit is decided by the maximum-likelihood threshold from
cfikit.probability (the same rule the full-genome-scan adversary uses; honest
and adversarial evaluations share this code path by design).

The extractor is a binary code-offset over a BCH code, shortened when the
challenge length is not 2^m - 1.  Genome content is not simulated base by
base; only key-site status enters any formula.  The single-read abstraction
with symmetric error rate p_e (used by the robustness grid) is the special
case p_edit = 1, coverage = 1 of this model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .codec import BchCode, ParameterError, ShortenedBch
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
from .probability import detect_rate, ml_threshold

HELPER_TAG = 3


@dataclass(frozen=True)
class SeqModel:
    """Sequencing model: symmetric per-read error rate and reads per position."""

    p_seq_err: float = 0.0005
    coverage: int = 10_000

    def __post_init__(self):
        if not 0.0 <= self.p_seq_err < 0.5:
            raise ValueError("need 0 <= p_seq_err < 0.5")
        if self.coverage < 1:
            raise ValueError("coverage must be >= 1")


class GseProfile:
    """Key-site coordinates with edit types and the per-cell edit rate."""

    def __init__(self, seed, genome_length: int, n_sites: int,
                 p_edit: float = 0.001):
        if n_sites > genome_length:
            raise ValueError("more key-sites than genome positions")
        if not 0.0 <= p_edit <= 1.0:
            raise ValueError("p_edit must be a probability")
        self.seed = seed
        self.genome_length = genome_length
        self.p_edit = p_edit
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
        sites = rng.choice(genome_length, size=n_sites, replace=False)
        self.key_sites = np.sort(sites)
        # ABE converts A/T, CBE converts C/G; one symmetric channel either way.
        self.edit_types = rng.integers(0, 2, n_sites).astype(np.uint8)

    @property
    def n_sites(self) -> int:
        return len(self.key_sites)

    def is_key_site(self, coords: np.ndarray) -> np.ndarray:
        """Boolean vector: which coordinates are key-sites."""
        if len(self.key_sites) == 0:
            return np.zeros(len(coords), dtype=bool)
        pos = np.searchsorted(self.key_sites, coords)
        pos = np.clip(pos, 0, len(self.key_sites) - 1)
        return self.key_sites[pos] == coords

    def to_descriptor(self) -> str:
        return json.dumps({"scheme": "gse", "seed": self.seed,
                           "genome_length": self.genome_length,
                           "n_sites": self.n_sites, "p_edit": self.p_edit})

    @staticmethod
    def from_descriptor(descriptor: str) -> "GseProfile":
        d = json.loads(descriptor)
        if d.get("scheme") != "gse":
            raise ValueError("not a gse profile descriptor")
        return GseProfile(d["seed"], d["genome_length"], d["n_sites"], d["p_edit"])


def gse_gen(genome_length: int = 1_000_000, n_sites: int = 500,
            p_edit: float = 0.001, seed=0) -> GseProfile:
    """Generate a profile with uniformly sampled distinct key-sites."""
    return GseProfile(seed, genome_length, n_sites, p_edit)


def read_edit_counts(truth_bits: np.ndarray, q: int, p_seq_err: float,
                     p_edit: float, rng: np.random.Generator) -> np.ndarray:
    """Per-position counts of edit-reporting reads at coverage q."""
    pd = detect_rate(p_edit, p_seq_err)
    rates = np.where(truth_bits.astype(bool), pd, p_seq_err)
    return rng.binomial(q, rates)


def decide_bits(counts: np.ndarray, q: int, p_seq_err: float,
                p_edit: float) -> np.ndarray:
    """Apply the ML threshold to read counts (ties decide 'not key-site')."""
    ls = ml_threshold(q, p_seq_err, p_edit)
    return (counts > ls).astype(np.uint8)


def gse_respond(profile: GseProfile, challenge: np.ndarray, seq: SeqModel,
                rng: np.random.Generator) -> np.ndarray:
    """Noisy response: per-coordinate ML-decided bits at the given coverage."""
    challenge = np.asarray(challenge, dtype=np.int64)
    truth = profile.is_key_site(challenge).astype(np.uint8)
    counts = read_edit_counts(truth, seq.coverage, seq.p_seq_err,
                              profile.p_edit, rng)
    return decide_bits(counts, seq.coverage, seq.p_seq_err, profile.p_edit)


def adversary_full_scan(profile: GseProfile, q: int, seq: SeqModel,
                        candidates: np.ndarray,
                        rng: np.random.Generator) -> np.ndarray:
    """Full-genome-scan inference: ML-decided key-site bits per candidate.

    With q = 0 there is no data and the tie rule decides "not key-site"
    everywhere.  One full-genome read pass provides one read per position, so
    q passes give per-position counts Binomial(q, rate).
    """
    candidates = np.asarray(candidates, dtype=np.int64)
    if q == 0:
        return np.zeros(len(candidates), dtype=np.uint8)
    truth = profile.is_key_site(candidates).astype(np.uint8)
    counts = read_edit_counts(truth, q, seq.p_seq_err, profile.p_edit, rng)
    return decide_bits(counts, q, seq.p_seq_err, profile.p_edit)


class GseCF(ChemicalFunction):
    scheme_id = "gse"

    def __init__(self, profile: GseProfile, seq: SeqModel, seed,
                 n_chal: int = 20):
        super().__init__(seed)
        self.profile = profile
        self.seq = seq
        self.n_chal = n_chal

    def validate_challenge(self, challenge) -> None:
        arr = np.asarray(challenge)
        if arr.ndim != 1 or arr.dtype.kind not in "ui" or len(arr) == 0:
            raise ChallengeError("challenge must be a non-empty 1-d coordinate array")
        if arr.min() < 0 or arr.max() >= self.profile.genome_length:
            raise ChallengeError("coordinates outside the genome")
        if len(np.unique(arr)) != len(arr):
            raise ChallengeError("duplicate coordinates are forbidden")

    def challenge_key(self, challenge) -> bytes:
        self.validate_challenge(challenge)
        return np.asarray(challenge, dtype=np.int64).tobytes()

    def sample_challenge(self, rng: np.random.Generator,
                         n_chal: Optional[int] = None) -> np.ndarray:
        """An ordered subset with ~half key-sites (the 0.5-prior regime).

        The analysis assumes a position of a challenge is a key-site with
        probability 1/2, so protocol challenges draw half their coordinates
        from the key-site list and half from the rest of the genome.
        """
        n_chal = self.n_chal if n_chal is None else n_chal
        n1 = n_chal // 2
        n0 = n_chal - n1
        sites = rng.choice(self.profile.key_sites, size=n1, replace=False)
        others = set(self.profile.key_sites.tolist())
        rest = []
        while len(rest) < n0:
            c = int(rng.integers(0, self.profile.genome_length))
            if c not in others:
                others.add(c)
                rest.append(c)
        return np.concatenate([sites.astype(np.int64),
                               np.array(rest, dtype=np.int64)])

    def reference_response(self, challenge) -> np.ndarray:
        """Enrollment knows the written bits: the true key-site indicator."""
        self.validate_challenge(challenge)
        coords = np.asarray(challenge, dtype=np.int64)
        return self.profile.is_key_site(coords).astype(np.uint8)

    def respond(self, challenge, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        self.validate_challenge(challenge)
        if rng is None:
            rng = self._next_rng()
        return gse_respond(self.profile, np.asarray(challenge, dtype=np.int64),
                           self.seq, rng)

    def with_seed(self, seed) -> "GseCF":
        return GseCF(self.profile, self.seq, seed, n_chal=self.n_chal)


class GseExtractor(Extractor):
    """Binary code-offset: h = encode(z) XOR y, z' = decode(h XOR y')."""

    helper_tag = HELPER_TAG

    def __init__(self, n_chal: int, t: int):
        self.n = n_chal
        if n_chal >= 7 and (n_chal & (n_chal + 1)) == 0:
            self.code: BchCode | ShortenedBch = BchCode(n_chal, t)
        else:
            self.code = ShortenedBch(n_chal, t)
        self.t = self.code.t
        self.k = self.code.k

    def extract(self, response: np.ndarray, helper: bytes,
                rng: Optional[np.random.Generator] = None):
        y = np.asarray(response, dtype=np.uint8)
        if y.shape != (self.n,):
            raise ValueError(f"response length {y.shape} != code length {self.n}")
        if helper == EMPTY_HELPER:
            if rng is None:
                raise ValueError("setup mode needs randomness")
            z = rng.integers(0, 2, self.k, dtype=np.uint8)
            offset = self.code.encode(z) ^ y
            return np.packbits(z).tobytes(), pack_helper(self.helper_tag,
                                                         offset.tobytes())
        offset = np.frombuffer(unpack_helper(helper, self.helper_tag),
                               dtype=np.uint8)
        z = self.code.decode(offset ^ y)
        if z is None:
            return None, helper
        return np.packbits(z).tobytes(), helper

    def random_output(self, rng: np.random.Generator) -> bytes:
        return np.packbits(rng.integers(0, 2, self.k, dtype=np.uint8)).tobytes()


def gse_extract(response: np.ndarray, helper: bytes, code: GseExtractor,
                rng: Optional[np.random.Generator] = None):
    """Functional form of the code-offset extraction."""
    return code.extract(response, helper, rng)


def challenge_to_csv(challenge: np.ndarray) -> str:
    """Challenge file format: one coordinate per line under a header."""
    lines = ["coordinate"] + [str(int(c)) for c in challenge]
    return "\n".join(lines) + "\n"


def challenge_from_csv(text: str) -> np.ndarray:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "coordinate":
        raise ValueError("challenge CSV must start with a 'coordinate' header")
    return np.array([int(ln) for ln in lines[1:]], dtype=np.int64)


def response_to_string(bits: np.ndarray) -> str:
    """Response dump format: a flat 0/1 string."""
    return "".join("1" if b else "0" for b in bits)


def response_from_string(text: str) -> np.ndarray:
    if set(text) - {"0", "1"}:
        raise ValueError("response string must contain only 0/1")
    return np.array([1 if c == "1" else 0 for c in text], dtype=np.uint8)


@register_scheme("gse")
def make_gse(seed, *, genome_length: int = 1_000_000, n_sites: int = 500,
             p_edit: float = 0.001, p_seq_err: float = 0.0005,
             coverage: int = 10_000, n_chal: int = 20, t: int = 3,
             profile: Optional[GseProfile] = None) -> CfsHandle:
    if profile is None:
        profile = GseProfile(seed, genome_length, n_sites, p_edit)
    cf = GseCF(profile, SeqModel(p_seq_err, coverage), seed, n_chal=n_chal)
    try:
        extractor = GseExtractor(n_chal, t)
    except ParameterError as exc:
        raise ValueError(f"invalid gse extractor parameters: {exc}") from exc
    return CfsHandle("gse", cf, extractor)

"""Executable security games with Monte-Carlo success estimation.

Three games are provided, mirroring the framework's security definitions:

* clone game -- the adversary adaptively queries up to q challenges of an
  authentic instance, then fabricates a counterfeit profile; it wins when the
  counterfeit's extracted output on a fresh challenge equals the authentic
  setup output (the z' = z reduction).
* open clone game -- query access is replaced by a budget of q operations,
  each as expensive as one evaluation of the chemical function (for the
  genome scheme: one full-genome read pass per unit).
* prediction game -- as the clone game, but the adversary merely has to
  output the value the authentic system extracts for the fresh challenge.

Success probabilities far below Monte-Carlo resolution are reported as zero
observed successes with the analytic bound attached; they are never
extrapolated.  Trials are independent with per-trial seed streams, so results
do not depend on scheduling order.

Built-in adversaries document precisely which capabilities exceed the formal
game (idealizations): the perfect-copy adversary is handed the true profile,
and the neighborhood-replay adversary receives the true output whenever the
fresh challenge lands in a Hamming ball around one of its queries, which is
exactly the full-information-inside-the-ball idealization of the
unpredictability analysis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import (
    EMPTY_HELPER,
    CfsHandle,
    ChemicalFunction,
    SetupFailure,
    cfs_setup,
    make_cfs,
)
from .gse import GseCF, GseProfile, SeqModel, decide_bits, read_edit_counts
from .probability import wilson_interval

__all__ = [
    "ADVERSARIES", "AdversaryCaps", "BudgetExceeded", "ChallengeOracle",
    "FullScanAdversary", "FullTableAdversary", "GameEstimate",
    "NeighborhoodReplayAdversary", "OperationMeter", "PerfectCopyAdversary",
    "RandomGuessAdversary", "RandomSynthesisAdversary", "run_clone_game",
    "run_open_clone_game", "run_predict_game", "scheme_sampler",
    "wilson_interval",
]


class BudgetExceeded(RuntimeError):
    """Adversary exceeded its query or operation budget."""


class ChallengeOracle:
    """Metered oracle access to an authentic CFS.

    ``query`` evaluates the chemical function and the (public) extraction
    algorithm in setup mode, returning (response, output).  ``register``
    spends a query without evaluating it; adversaries that never look at the
    response use it so that million-trial games stay tractable, with
    identical budget accounting.
    """

    def __init__(self, cfs: CfsHandle, budget: int, rng: np.random.Generator):
        self._cfs = cfs
        self._budget = budget
        self._rng = rng
        self.queried_keys: set[bytes] = set()
        self.n_queries = 0

    def _spend(self, challenge) -> None:
        if self.n_queries >= self._budget:
            raise BudgetExceeded(f"query budget {self._budget} exhausted")
        self.n_queries += 1
        self.queried_keys.add(self._cfs.cf.challenge_key(challenge))

    def query(self, challenge):
        self._spend(challenge)
        y = self._cfs.cf.respond(challenge, self._rng)
        z, _ = self._cfs.extractor.extract(y, EMPTY_HELPER, self._rng)
        return y, z

    def register(self, challenge) -> None:
        self._spend(challenge)


class OperationMeter:
    """Budget of operations with the complexity of one CF evaluation."""

    def __init__(self, budget: int):
        self.budget = budget
        self.used = 0

    def charge(self, units: int) -> None:
        if self.used + units > self.budget:
            raise BudgetExceeded(f"operation budget {self.budget} exhausted")
        self.used += units


@dataclass
class AdversaryCaps:
    """Capabilities handed to an adversary for one trial."""

    scheme_id: str
    extractor: object
    gen_fresh: Callable[[np.random.Generator], CfsHandle]
    sample_challenge: Callable[[np.random.Generator], object]
    oracle: Optional[ChallengeOracle] = None
    meter: Optional[OperationMeter] = None
    #: idealization: the authentic CF itself (perfect-copy adversary)
    true_cf: Optional[ChemicalFunction] = None
    #: physical access for open games: sequencing the obtained product
    authentic_cfs: Optional[CfsHandle] = None


@dataclass
class GameEstimate:
    """Monte-Carlo estimate of a game's success probability."""

    game: str
    scheme: str
    q: int
    trials: int
    successes: int
    point: float
    wilson_lo: float
    wilson_hi: float
    analytic_log10_bound: Optional[float] = None
    flagged_trials: int = 0
    notes: str = ""

    @staticmethod
    def from_counts(game: str, scheme: str, q: int, trials: int,
                    successes: int, bound: Optional[float] = None,
                    flagged: int = 0, notes: str = "") -> "GameEstimate":
        lo, hi = wilson_interval(successes, trials)
        return GameEstimate(game, scheme, q, trials, successes,
                            successes / trials, lo, hi, bound, flagged, notes)

    def to_json(self) -> str:
        return json.dumps({
            "game": self.game, "scheme": self.scheme, "q": self.q,
            "trials": self.trials, "successes": self.successes,
            "point": self.point, "wilson_lo": self.wilson_lo,
            "wilson_hi": self.wilson_hi,
            "analytic_log10_bound": self.analytic_log10_bound,
            "flagged_trials": self.flagged_trials, "notes": self.notes,
        })


def scheme_sampler(scheme_id: str, **params) -> Callable[[np.random.Generator], CfsHandle]:
    """Factory of fresh authentic instances (the Gen process) for games."""

    def gen(rng: np.random.Generator) -> CfsHandle:
        seed = int(rng.integers(0, 2**63 - 1))
        return make_cfs(scheme_id, seed, **params)

    return gen


class ReplayCF(ChemicalFunction):
    """Counterfeit that replays recorded responses (full-table cloning)."""

    def __init__(self, like: ChemicalFunction, table: dict[bytes, object], seed=0):
        super().__init__(seed)
        self.scheme_id = like.scheme_id
        self._like = like
        self._table = table

    def validate_challenge(self, challenge) -> None:
        self._like.validate_challenge(challenge)

    def challenge_key(self, challenge) -> bytes:
        return self._like.challenge_key(challenge)

    def respond(self, challenge, rng=None):
        key = self.challenge_key(challenge)
        if key not in self._table:
            raise KeyError("challenge was never recorded")
        return self._table[key]

    def reference_response(self, challenge):
        return self.respond(challenge)

    def with_seed(self, seed):
        return ReplayCF(self._like, self._table, seed)


# ---------------------------------------------------------------------------
# Built-in adversaries
# ---------------------------------------------------------------------------

class PerfectCopyAdversary:
    """Idealized: handed the true profile, bypassing the oracle entirely."""

    name = "perfect-copy"
    kind = "clone"

    def synthesize(self, caps: AdversaryCaps, rng: np.random.Generator) -> ChemicalFunction:
        if caps.true_cf is None:
            raise RuntimeError("perfect-copy needs the true-profile capability")
        return caps.true_cf.with_seed(int(rng.integers(0, 2**63 - 1)))


class RandomSynthesisAdversary:
    """Synthesizes a fresh random profile without querying anything."""

    name = "random-synthesis"
    kind = "clone"

    def synthesize(self, caps: AdversaryCaps, rng: np.random.Generator) -> ChemicalFunction:
        return caps.gen_fresh(rng).cf


class FullTableAdversary:
    """Queries every challenge of a small space and replays the table."""

    name = "full-table"
    kind = "clone"

    def __init__(self, challenge_iter: Optional[Callable[[CfsHandle], list]] = None):
        self._challenges = challenge_iter

    def synthesize(self, caps: AdversaryCaps, rng: np.random.Generator) -> ChemicalFunction:
        if caps.oracle is None:
            raise RuntimeError("full-table needs oracle access")
        cf = caps.oracle._cfs.cf
        if self._challenges is not None:
            challenges = self._challenges(caps.oracle._cfs)
        elif hasattr(cf, "profile") and hasattr(cf.profile, "n_challenges"):
            challenges = list(range(cf.profile.n_challenges))
        else:
            raise RuntimeError("full-table needs an enumerable challenge space")
        table = {}
        for x in challenges:
            y, _ = caps.oracle.query(x)
            table[cf.challenge_key(x)] = y
        return ReplayCF(cf, table)


class RandomGuessAdversary:
    """Ignores the oracle and guesses a uniform output."""

    name = "random-guess"
    kind = "predict"

    def prepare(self, caps: AdversaryCaps, rng: np.random.Generator):
        return None

    def predict(self, caps: AdversaryCaps, state, challenge, helper: bytes,
                true_output: bytes, rng: np.random.Generator) -> bytes:
        return caps.extractor.random_output(rng)


class FullTablePredictAdversary:
    """Queries as much of the space as the budget allows, then replays.

    The extraction algorithm is public, so the recorded response for the
    fresh challenge (if it was queried, which requires an exhausted space)
    can be pushed through extraction under the published helper data.
    """

    name = "full-table"
    kind = "predict"

    def prepare(self, caps: AdversaryCaps, rng: np.random.Generator):
        cf = caps.oracle._cfs.cf
        if not (hasattr(cf, "profile") and hasattr(cf.profile, "n_challenges")):
            raise RuntimeError("full-table needs an enumerable challenge space")
        table = {}
        for x in range(cf.profile.n_challenges):
            try:
                y, _ = caps.oracle.query(x)
            except BudgetExceeded:
                break
            table[cf.challenge_key(x)] = y
        return table

    def predict(self, caps: AdversaryCaps, table, challenge, helper: bytes,
                true_output: bytes, rng: np.random.Generator) -> bytes:
        key = caps.oracle._cfs.cf.challenge_key(challenge)
        if key not in table:
            return caps.extractor.random_output(rng)
        z, _ = caps.extractor.extract(table[key], helper, rng)
        return z


class NeighborhoodReplayAdversary:
    """Labeled idealization of the unpredictability analysis.

    Registers q challenges up front; when the fresh challenge later lands in
    the Hamming ball of radius kappa around one of them, the adversary is
    *granted the true output* (full information inside the ball); otherwise
    it guesses uniformly.  Its success probability is therefore exactly the
    quantity the prediction bound dominates.
    """

    name = "neighborhood-replay"
    kind = "predict"

    def __init__(self, kappa: int = 1):
        self.kappa = kappa

    def prepare(self, caps: AdversaryCaps, rng: np.random.Generator):
        queried = []
        while True:
            x = caps.sample_challenge(rng)
            try:
                caps.oracle.register(x)
            except BudgetExceeded:
                break
            queried.append(np.asarray(x))
        return queried

    def predict(self, caps: AdversaryCaps, queried, challenge, helper: bytes,
                true_output: bytes, rng: np.random.Generator) -> bytes:
        target = np.asarray(challenge)
        for x in queried:
            if (x != target).sum() <= self.kappa:
                return true_output
        return caps.extractor.random_output(rng)


class AllZeroSynthesisAdversary:
    """Open-game tie rule with no data: clone with no edits anywhere."""

    name = "all-zero"
    kind = "open-clone"

    def synthesize_open(self, caps: AdversaryCaps, rng: np.random.Generator) -> ChemicalFunction:
        authentic = caps.authentic_cfs.cf
        if not isinstance(authentic, GseCF):
            raise RuntimeError("all-zero synthesis is defined for the gse scheme")
        profile = authentic.profile
        clone = _gse_profile_with_sites(profile, np.empty(0, dtype=np.int64))
        return GseCF(clone, authentic.seq, int(rng.integers(0, 2**63 - 1)),
                     n_chal=authentic.n_chal)


class FullScanAdversary:
    """Open-game genome scan: q read passes, per-position ML inference.

    One operation unit buys one full-genome read pass (the documented cost
    equivalence), so q_ops units give per-position counts Binomial(q_ops, .).
    """

    name = "full-scan"
    kind = "open-clone"

    def synthesize_open(self, caps: AdversaryCaps, rng: np.random.Generator) -> ChemicalFunction:
        authentic = caps.authentic_cfs.cf
        if not isinstance(authentic, GseCF):
            raise RuntimeError("full-scan is defined for the gse scheme")
        q = caps.meter.budget
        caps.meter.charge(q)
        profile = authentic.profile
        if q == 0:
            inferred = np.empty(0, dtype=np.int64)
        else:
            truth = np.zeros(profile.genome_length, dtype=np.uint8)
            truth[profile.key_sites] = 1
            seq = authentic.seq
            counts = read_edit_counts(truth, q, seq.p_seq_err, profile.p_edit, rng)
            bits = decide_bits(counts, q, seq.p_seq_err, profile.p_edit)
            inferred = np.nonzero(bits)[0].astype(np.int64)
        clone = _gse_profile_with_sites(profile, inferred)
        return GseCF(clone, authentic.seq, int(rng.integers(0, 2**63 - 1)),
                     n_chal=authentic.n_chal)


def _gse_profile_with_sites(like: GseProfile, sites: np.ndarray) -> GseProfile:
    clone = GseProfile.__new__(GseProfile)
    clone.seed = None
    clone.genome_length = like.genome_length
    clone.p_edit = like.p_edit
    clone.key_sites = np.sort(np.asarray(sites, dtype=np.int64))
    clone.edit_types = np.zeros(len(clone.key_sites), dtype=np.uint8)
    return clone


#: (game kind, adversary name) -> constructor
ADVERSARIES: dict[tuple[str, str], Callable[[], object]] = {
    ("clone", "perfect-copy"): PerfectCopyAdversary,
    ("clone", "random-synthesis"): RandomSynthesisAdversary,
    ("clone", "full-table"): FullTableAdversary,
    ("predict", "random-guess"): RandomGuessAdversary,
    ("predict", "full-table"): FullTablePredictAdversary,
    ("predict", "neighborhood-replay"): NeighborhoodReplayAdversary,
    ("open-clone", "full-scan"): FullScanAdversary,
    ("open-clone", "all-zero"): AllZeroSynthesisAdversary,
}


# ---------------------------------------------------------------------------
# Game runners
# ---------------------------------------------------------------------------

def _fresh_challenge(cfs: CfsHandle, queried: set[bytes],
                     rng: np.random.Generator, max_tries: int = 200):
    """Uniformly rejection-sample a challenge outside the queried set."""
    for _ in range(max_tries):
        x = cfs.cf.sample_challenge(rng)
        if cfs.cf.challenge_key(x) not in queried:
            return x, False
    # Challenge space exhausted by the adversary (q = |S_C|): freshness is
    # vacuous, fall back to any challenge and flag it.
    return cfs.cf.sample_challenge(rng), True


def _setup_on_fresh(cfs, queried, rng, max_tries=50):
    exhausted_any = False
    for _ in range(max_tries):
        x, exhausted = _fresh_challenge(cfs, queried, rng)
        exhausted_any = exhausted_any or exhausted
        try:
            z, h = cfs_setup(cfs, x, rng)
            return x, z, h, exhausted_any
        except SetupFailure:
            continue  # unanswerable challenge (e.g. empty virtual selection)
    raise SetupFailure("no answerable fresh challenge found")


def run_clone_game(gen: Callable[[np.random.Generator], CfsHandle],
                   adversary, q: int, trials: int, seed=0,
                   analytic_log10_bound: Optional[float] = None,
                   grant_true_profile: bool = False,
                   total_trials: Optional[int] = None,
                   trial_offset: int = 0) -> GameEstimate:
    """Chosen-challenge cloning game; success means z' = z on a fresh x.

    ``total_trials``/``trial_offset`` select a window of the per-trial seed
    streams so that chunked parallel execution reproduces the exact trials a
    sequential run would perform.
    """
    streams = np.random.SeedSequence(seed).spawn(total_trials or (trial_offset + trials))
    streams = streams[trial_offset:trial_offset + trials]
    successes = flagged = 0
    notes = set()
    scheme = None
    for i in range(trials):
        rng = np.random.default_rng(streams[i])
        authentic = gen(rng)
        scheme = authentic.scheme_id
        oracle = ChallengeOracle(authentic, q, rng)
        caps = AdversaryCaps(
            scheme_id=authentic.scheme_id, extractor=authentic.extractor,
            gen_fresh=gen, sample_challenge=authentic.cf.sample_challenge,
            oracle=oracle,
            true_cf=authentic.cf if grant_true_profile else None)
        try:
            counterfeit = adversary.synthesize(caps, rng)
        except BudgetExceeded:
            flagged += 1
            continue  # disqualified trial counts as a failure
        assert oracle.n_queries <= q
        x, exhausted = _fresh_challenge(authentic, oracle.queried_keys, rng)
        if exhausted:
            notes.add("challenge space exhausted; freshness vacuous")
        else:
            assert authentic.cf.challenge_key(x) not in oracle.queried_keys
        try:
            y_prime = counterfeit.respond(x, rng)
        except KeyError:
            continue  # replay table has no entry: counterfeit is mute
        if authentic.extractor.is_mute_response(y_prime):
            continue  # extraction would return None for any helper
        try:
            z, h = cfs_setup(authentic, x, rng)
        except SetupFailure:
            notes.add("setup failed on a fresh challenge; counted as failure")
            continue
        z_prime, _ = authentic.extractor.extract(y_prime, h, rng)
        if z_prime is not None and z_prime == z:
            successes += 1
    return GameEstimate.from_counts("clone", scheme, q, trials, successes,
                                    analytic_log10_bound, flagged,
                                    "; ".join(sorted(notes)))


def run_open_clone_game(gen: Callable[[np.random.Generator], CfsHandle],
                        adversary, q_ops: int, trials: int, seed=0,
                        analytic_log10_bound: Optional[float] = None,
                        total_trials: Optional[int] = None,
                        trial_offset: int = 0) -> GameEstimate:
    """Open cloning game: the budget is operations, not challenge queries."""
    streams = np.random.SeedSequence(seed).spawn(total_trials or (trial_offset + trials))
    streams = streams[trial_offset:trial_offset + trials]
    successes = flagged = 0
    scheme = None
    for i in range(trials):
        rng = np.random.default_rng(streams[i])
        authentic = gen(rng)
        scheme = authentic.scheme_id
        meter = OperationMeter(q_ops)
        caps = AdversaryCaps(
            scheme_id=authentic.scheme_id, extractor=authentic.extractor,
            gen_fresh=gen, sample_challenge=authentic.cf.sample_challenge,
            meter=meter, authentic_cfs=authentic)
        try:
            counterfeit = adversary.synthesize_open(caps, rng)
        except BudgetExceeded:
            flagged += 1
            continue
        assert meter.used <= q_ops
        x, z, h, _ = _setup_on_fresh(authentic, set(), rng)
        y_prime = counterfeit.respond(x, rng)
        z_prime, _ = authentic.extractor.extract(y_prime, h, rng)
        if z_prime is not None and z_prime == z:
            successes += 1
    return GameEstimate.from_counts("open-clone", scheme, q_ops, trials,
                                    successes, analytic_log10_bound, flagged)


def run_predict_game(gen: Callable[[np.random.Generator], CfsHandle],
                     adversary, q: int, trials: int, seed=0,
                     analytic_log10_bound: Optional[float] = None,
                     total_trials: Optional[int] = None,
                     trial_offset: int = 0) -> GameEstimate:
    """Prediction game: the adversary outputs a guess for the fresh z."""
    streams = np.random.SeedSequence(seed).spawn(total_trials or (trial_offset + trials))
    streams = streams[trial_offset:trial_offset + trials]
    successes = flagged = 0
    notes = set()
    scheme = None
    for i in range(trials):
        rng = np.random.default_rng(streams[i])
        authentic = gen(rng)
        scheme = authentic.scheme_id
        oracle = ChallengeOracle(authentic, q, rng)
        caps = AdversaryCaps(
            scheme_id=authentic.scheme_id, extractor=authentic.extractor,
            gen_fresh=gen, sample_challenge=authentic.cf.sample_challenge,
            oracle=oracle)
        try:
            state = adversary.prepare(caps, rng)
        except BudgetExceeded:
            flagged += 1
            continue
        assert oracle.n_queries <= q
        x, exhausted = _fresh_challenge(authentic, oracle.queried_keys, rng)
        if exhausted:
            notes.add("challenge space exhausted; freshness vacuous")
        else:
            assert authentic.cf.challenge_key(x) not in oracle.queried_keys
        try:
            z, h = cfs_setup(authentic, x, rng)
        except SetupFailure:
            notes.add("setup failed on a fresh challenge; counted as failure")
            continue
        guess = adversary.predict(caps, state, x, h, z, rng)
        if guess == z:
            successes += 1
    return GameEstimate.from_counts("predict", scheme, q, trials, successes,
                                    analytic_log10_bound, flagged,
                                    "; ".join(sorted(notes)))

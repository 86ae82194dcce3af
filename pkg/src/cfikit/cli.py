"""Command-line front end: bounds reproduction, simulations, security games.

Every run writes artifacts (CSV and/or JSON) plus a sidecar manifest that
records the resolved parameters, the seed, and the SHA-256 of each artifact;
``cfikit replay <manifest>`` re-executes the manifest and reproduces the
artifacts byte for byte.

Exit codes: 0 success; 2 mismatch-report-only outcomes (the artifact is a
report of a known discrepancy); 1 runtime error; 64 usage error; 65 invalid
scheme parameters or unknown adversary.  Diagnostics go to stderr; stdout
carries artifact content only when --stdout is given.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from . import bounds as bounds_mod
from .codec import ParameterError
from .core import authenticate, cfs_setup, estimate_robustness, keygen_enroll, keygen_reconstruct, make_cfs
from .games import (
    ADVERSARIES,
    NeighborhoodReplayAdversary,
    run_clone_game,
    run_open_clone_game,
    run_predict_game,
    scheme_sampler,
)
from .probability import clone_success_gse, ml_p_err, sigma_bound, wilson_interval

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISMATCH = 2
EXIT_USAGE = 64
EXIT_PARAMS = 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 64
        raise UsageError(message)


def _resolve_seed(args) -> tuple[int, bool]:
    if getattr(args, "seed", None) is not None:
        return int(args.seed), False
    env = os.environ.get("CFI_SEED")
    if env is not None:
        return int(env), False
    return int.from_bytes(os.urandom(8), "little") >> 1, True


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _emit(args, stem: str, files: dict[str, str], replay: dict,
          exit_code: int = EXIT_OK) -> int:
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    manifest = {
        "tool": "cfikit",
        "stem": stem,
        "replay": replay,
        "outputs": {name: _sha256(content) for name, content in files.items()},
    }
    for name, content in files.items():
        with open(os.path.join(out_dir, name), "w") as fh:
            fh.write(content)
        if args.stdout:
            sys.stdout.write(content)
    man_path = os.path.join(out_dir, f"{stem}.manifest.json")
    with open(man_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {len(files)} artifact(s) + {man_path}", file=sys.stderr)
    return exit_code


def _fmt_json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


_NON_REPLAY_ARGS = {"command", "bounds_cmd", "scheme", "game", "manifest",
                    "out", "stdout", "config", "jobs", "seed", "format"}


def _replay_record(args, command: str, positional: list[str],
                   seed=None) -> dict:
    """Canonical record of the CLI flags that reproduce this run."""
    flags = {k: v for k, v in vars(args).items()
             if k not in _NON_REPLAY_ARGS and v is not None}
    return {"command": command, "positional": positional, "flags": flags,
            "seed": seed}


# ---------------------------------------------------------------------------
# bounds subcommands
# ---------------------------------------------------------------------------

def cmd_bounds(args) -> int:
    sub = args.bounds_cmd
    replay = _replay_record(args, "bounds", [sub])
    if sub == "unpredictability":
        art = bounds_mod.table_unpredictability(ell=args.ell)
        files = {"table_unpredictability.csv": art.to_csv(),
                 "table_unpredictability.json": _fmt_json(art.manifest())}
        return _emit(args, "table_unpredictability", files, replay)
    if sub == "unclonability":
        chain = bounds_mod.unclonability_chain(s=args.support, k=args.kmer)
        files = {"unclonability_chain.json": _fmt_json(chain)}
        return _emit(args, "unclonability_chain", files, replay)
    if sub == "ordna-robustness":
        rep = bounds_mod.ordna_robustness_value()
        files = {"ordna_robustness.json": _fmt_json(rep)}
        return _emit(args, "ordna_robustness", files, replay,
                     exit_code=EXIT_MISMATCH)
    if sub == "gse-robustness":
        arts = [bounds_mod.table_gse_robustness(m) for m in ("cdf", "sf")]
        files = {}
        for art in arts:
            mode = art.parameters["interpretation"]
            files[f"table_gse_robustness_{mode}.csv"] = art.to_csv()
            files[f"table_gse_robustness_{mode}.json"] = _fmt_json(art.manifest())
        return _emit(args, "table_gse_robustness", files, replay,
                     exit_code=EXIT_MISMATCH)
    if sub == "decision-boundary":
        pts = bounds_mod.decision_boundary_curve(args.pmin, args.pmax,
                                                 args.steps, args.p_edit)
        files = {"decision_boundary.csv": bounds_mod.decision_boundary_csv(pts)}
        return _emit(args, "decision_boundary", files, replay)
    if sub == "schur":
        rep = bounds_mod.schur_check(args.m, args.s, Fraction(1, args.grid_den))
        files = {"schur_report.json": rep.to_json() + "\n"}
        return _emit(args, "schur_report", files, replay,
                     exit_code=EXIT_OK if rep.ok else EXIT_MISMATCH)
    raise UsageError(f"unknown bounds subcommand {sub!r}")


# ---------------------------------------------------------------------------
# simulate subcommands
# ---------------------------------------------------------------------------

def _chunks(trials: int, jobs: int) -> list[tuple[int, int]]:
    size = math.ceil(trials / jobs)
    return [(i, min(size, trials - i)) for i in range(0, trials, size)]


def _robustness_worker(task):
    scheme, params, challenge_seed, seed, total, offset, count = task
    cfs = make_cfs(scheme, seed=challenge_seed, **params)
    rng = np.random.default_rng(challenge_seed)
    x = cfs.cf.sample_challenge(rng)
    streams = np.random.SeedSequence(seed).spawn(total + 1)
    z, h = cfs_setup(cfs, x, np.random.default_rng(streams[0]))
    hits = 0
    for i in range(offset, offset + count):
        r = np.random.default_rng(streams[i + 1])
        from .core import cfs_reconstruct
        hits += cfs_reconstruct(cfs, x, h, r) == z
    return hits


def _simulate_robustness(scheme: str, params: dict, trials: int, seed: int,
                         jobs: int) -> dict:
    tasks = [(scheme, params, seed, seed, trials, off, cnt)
             for off, cnt in _chunks(trials, jobs)]
    if jobs <= 1 or len(tasks) <= 1:
        hits = sum(_robustness_worker(t) for t in tasks)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            hits = sum(pool.map(_robustness_worker, tasks))
    lo, hi = wilson_interval(hits, trials)
    return {"trials": trials, "successes": hits, "point": hits / trials,
            "wilson_lo": lo, "wilson_hi": hi}


def cmd_simulate(args) -> int:
    seed, drawn = _resolve_seed(args)
    scheme = args.scheme
    if scheme == "dye":
        params = {"flip_prob": args.p, "n_challenges": args.n_challenges}
        analytic = (1 - args.p) ** 7 + 7 * args.p * (1 - args.p) ** 6
    elif scheme == "ordna":
        params = {"pool_size": args.pool_size, "reads": args.reads,
                  "sketch_byte_error": args.byte_error}
        analytic = None
    elif scheme == "gse":
        params = {"genome_length": args.genome_length, "n_sites": args.sites,
                  "coverage": args.coverage, "p_seq_err": args.p_seq_err,
                  "p_edit": args.p_edit, "n_chal": args.n_chal, "t": args.t}
        analytic = None
    else:
        raise UsageError(f"unknown scheme {scheme!r}")

    try:
        report = {"scheme": scheme, "seed": seed, "parameters": params,
                  "robustness": _simulate_robustness(scheme, params,
                                                     args.trials, seed,
                                                     args.jobs)}
    except (ParameterError, ValueError) as exc:
        print(f"invalid scheme parameters: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    if analytic is not None:
        report["robustness"]["analytic"] = analytic

    # authentication and key-generation statistics on a fixed instance
    rng = np.random.default_rng(seed)
    cfs = make_cfs(scheme, seed=seed, **params)
    accepts = rejects = 0
    for i in range(args.auth_trials):
        x = cfs.cf.sample_challenge(rng)
        accepts += authenticate(cfs, cfs.cf.with_seed(i), x, rng)
        fake = make_cfs(scheme, seed=seed + 1 + i, **params)
        rejects += not authenticate(cfs, fake.cf, x, rng)
    key_agree = 0
    for i in range(args.auth_trials):
        x = cfs.cf.sample_challenge(rng)
        key, h = keygen_enroll(cfs, x, rng)
        key_agree += keygen_reconstruct(cfs.replica(7_000 + i), x, h, rng) == key
    report["authentication"] = {"trials": args.auth_trials,
                                "genuine_accepts": accepts,
                                "counterfeit_rejects": rejects}
    report["keygen"] = {"trials": args.auth_trials, "replica_agreements": key_agree}
    if scheme == "gse":
        report["per_position_error_analytic"] = ml_p_err(
            args.coverage, args.p_seq_err, args.p_edit)

    replay = _replay_record(args, "simulate", [scheme], seed=seed)
    if drawn:
        print(f"seed drawn: {seed}", file=sys.stderr)
    files = {f"simulate_{scheme}.json": _fmt_json(report)}
    return _emit(args, f"simulate_{scheme}", files, replay)



# ---------------------------------------------------------------------------
# game subcommand
# ---------------------------------------------------------------------------

def _game_worker(task):
    (game, scheme, params, adversary_name, kappa, q, seed, total,
     offset, count, grant) = task
    gen = scheme_sampler(scheme, **params)
    ctor = ADVERSARIES[(game, adversary_name)]
    adv = ctor(kappa) if ctor is NeighborhoodReplayAdversary else ctor()
    if game == "clone":
        est = run_clone_game(gen, adv, q, count, seed=seed,
                             grant_true_profile=grant,
                             total_trials=total, trial_offset=offset)
    elif game == "open-clone":
        est = run_open_clone_game(gen, adv, q, count, seed=seed,
                                  total_trials=total, trial_offset=offset)
    else:
        est = run_predict_game(gen, adv, q, count, seed=seed,
                               total_trials=total, trial_offset=offset)
    return est.successes, est.flagged_trials, est.notes


def cmd_game(args) -> int:
    seed, drawn = _resolve_seed(args)
    game = args.game
    key = (game, args.adversary)
    if key not in ADVERSARIES:
        known = sorted(n for g, n in ADVERSARIES if g == game)
        print(f"unknown adversary {args.adversary!r} for {game}; "
              f"known: {known}", file=sys.stderr)
        return EXIT_PARAMS
    scheme = args.scheme
    if scheme == "dye":
        params = {"flip_prob": args.p, "n_challenges": args.n_challenges}
    elif scheme == "ordna":
        params = {"pool_size": args.pool_size, "reads": args.reads}
        if args.ell:
            params.update(ell=args.ell, virtual=args.virtual)
    elif scheme == "gse":
        params = {"genome_length": args.genome_length, "n_sites": args.sites,
                  "coverage": args.coverage, "p_seq_err": args.p_seq_err,
                  "p_edit": args.p_edit, "n_chal": args.n_chal, "t": args.t}
    else:
        raise UsageError(f"unknown scheme {scheme!r}")

    bound = None
    if game == "predict" and args.adversary == "random-guess" and scheme == "ordna":
        bound = 32 * math.log10(1 / 256.0)
    if game == "predict" and args.adversary == "neighborhood-replay" and args.ell:
        bound = sigma_bound(args.ell, args.kappa, args.q).log10_value
    if game == "open-clone" and scheme == "gse":
        bound = clone_success_gse(args.t, args.n_chal, args.q,
                                  args.p_seq_err, args.p_edit).log10_value
    if game == "clone" and args.adversary == "random-synthesis" and scheme == "ordna":
        bound = -280.0

    grant = args.adversary == "perfect-copy"
    tasks = [(game, scheme, params, args.adversary, args.kappa, args.q, seed,
              args.trials, off, cnt, grant)
             for off, cnt in _chunks(args.trials, args.jobs)]
    try:
        if args.jobs <= 1 or len(tasks) <= 1:
            parts = [_game_worker(t) for t in tasks]
        else:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                parts = list(pool.map(_game_worker, tasks))
    except (ParameterError, ValueError) as exc:
        print(f"invalid game parameters: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    successes = sum(p[0] for p in parts)
    flagged = sum(p[1] for p in parts)
    notes = "; ".join(sorted({p[2] for p in parts if p[2]}))
    lo, hi = wilson_interval(successes, args.trials)
    report = {
        "game": game, "scheme": scheme, "adversary": args.adversary,
        "q": args.q, "trials": args.trials, "successes": successes,
        "point": successes / args.trials, "wilson_lo": lo, "wilson_hi": hi,
        "analytic_log10_bound": bound, "flagged_trials": flagged,
        "notes": notes, "seed": seed, "parameters": params,
    }
    if drawn:
        print(f"seed drawn: {seed}", file=sys.stderr)
    replay = _replay_record(args, "game", [game], seed=seed)
    replay["flags"]["scheme"] = scheme
    replay["flags"]["adversary"] = args.adversary
    files = {f"game_{game}_{scheme}_{args.adversary}.json": _fmt_json(report)}
    return _emit(args, f"game_{game}_{scheme}_{args.adversary}", files, replay)


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------

def cmd_replay(args) -> int:
    with open(args.manifest) as fh:
        manifest = json.load(fh)
    replay = manifest["replay"]
    argv = [replay["command"]] + [str(p) for p in replay.get("positional", [])]
    for k, v in replay.get("flags", {}).items():
        flag = "--" + k.replace("_", "-")
        if isinstance(v, bool):
            if v:
                argv.append(flag)
        else:
            argv += [flag, str(v)]
    if replay.get("seed") is not None:
        argv += ["--seed", str(replay["seed"])]
    argv += ["--out", args.out, "--jobs", "1"]
    print(f"replaying: {' '.join(argv)}", file=sys.stderr)
    return main(argv)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    p.add_argument("--seed", type=int, default=None,
                   help="root seed (fallback: CFI_SEED env, else drawn)")
    p.add_argument("--out", default="cfikit-out", help="artifact directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--stdout", action="store_true",
                   help="also stream artifacts to stdout")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="parallel trial chunks (default: available parallelism)")
    p.add_argument("--config", default=None,
                   help="JSON file with default parameter values")
    return p


def build_parser() -> _Parser:
    root = _Parser(prog="cfikit", description=__doc__, allow_abbrev=False)
    common = _common_parser()
    sub = root.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="reproduce printed bounds",
                       allow_abbrev=False)
    bs = b.add_subparsers(dest="bounds_cmd", required=True)
    p = bs.add_parser("unpredictability", parents=[common], allow_abbrev=False)
    p.add_argument("--ell", type=int, default=13)
    p = bs.add_parser("unclonability", parents=[common], allow_abbrev=False)
    p.add_argument("--support", type=int, default=200)
    p.add_argument("--kmer", type=int, default=8)
    bs.add_parser("ordna-robustness", parents=[common], allow_abbrev=False)
    bs.add_parser("gse-robustness", parents=[common], allow_abbrev=False)
    p = bs.add_parser("decision-boundary", parents=[common], allow_abbrev=False)
    p.add_argument("--pmin", type=float, default=0.001)
    p.add_argument("--pmax", type=float, default=0.05)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--p-edit", type=float, default=0.001)
    p = bs.add_parser("schur", parents=[common], allow_abbrev=False)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--s", type=int, default=2)
    p.add_argument("--grid-den", type=int, default=10)

    s = sub.add_parser("simulate", help="scheme simulations", parents=[common],
                       allow_abbrev=False)
    s.add_argument("scheme", choices=("dye", "ordna", "gse"))
    s.add_argument("--trials", type=int, default=2_000)
    s.add_argument("--auth-trials", type=int, default=50)
    s.add_argument("--p", type=float, default=0.05, help="dye flip probability")
    s.add_argument("--n-challenges", type=int, default=16)
    s.add_argument("--pool-size", type=int, default=100_000)
    s.add_argument("--reads", type=int, default=48)
    s.add_argument("--byte-error", type=float, default=0.17)
    s.add_argument("--genome-length", type=int, default=1_000_000)
    s.add_argument("--sites", type=int, default=500)
    s.add_argument("--coverage", type=int, default=10_000)
    s.add_argument("--p-seq-err", type=float, default=0.0005)
    s.add_argument("--p-edit", type=float, default=0.001)
    s.add_argument("--n-chal", type=int, default=20)
    s.add_argument("--t", type=int, default=3)

    g = sub.add_parser("game", help="run a security game", parents=[common],
                       allow_abbrev=False)
    g.add_argument("game", choices=("clone", "open-clone", "predict"))
    g.add_argument("--scheme", required=True, choices=("dye", "ordna", "gse"))
    g.add_argument("--adversary", required=True)
    g.add_argument("--q", "--q-ops", dest="q", type=int, default=0)
    g.add_argument("--trials", type=int, default=1_000)
    g.add_argument("--kappa", type=int, default=1)
    g.add_argument("--p", type=float, default=0.05)
    g.add_argument("--n-challenges", type=int, default=16)
    g.add_argument("--pool-size", type=int, default=100_000)
    g.add_argument("--reads", type=int, default=24)
    g.add_argument("--ell", type=int, default=None)
    g.add_argument("--virtual", action="store_true")
    g.add_argument("--genome-length", type=int, default=50_000)
    g.add_argument("--sites", type=int, default=2_000)
    g.add_argument("--coverage", type=int, default=1)
    g.add_argument("--p-seq-err", type=float, default=0.25)
    g.add_argument("--p-edit", type=float, default=1.0)
    g.add_argument("--n-chal", type=int, default=20)
    g.add_argument("--t", type=int, default=2)

    r = sub.add_parser("replay", help="re-run a recorded manifest",
                       parents=[common], allow_abbrev=False)
    r.add_argument("manifest")
    return root


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            # config supplies defaults for flags not given on the command line
            with open(args.config) as fh:
                overrides = json.load(fh)
            for key, value in overrides.items():
                flag = "--" + key.replace("_", "-")
                explicit = any(a == flag or a.startswith(flag + "=")
                               for a in argv)
                if not explicit and hasattr(args, key):
                    setattr(args, key, value)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "bounds":
            return cmd_bounds(args)
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "game":
            return cmd_game(args)
        if args.command == "replay":
            return cmd_replay(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParameterError,) as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except Exception as exc:  # pragma: no cover - defensive
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entry() -> None:  # console_scripts hook
    sys.exit(main())


if __name__ == "__main__":
    entry()

"""Command-line entry point.

Usage::

    pmco optimize --config run.json    --out DIR [--seed N] [--workers W]
    pmco verify   --config sweep.json  --out DIR [--seed N] [--workers W]
    pmco analyze  --config inst.json   --out DIR [--seed N]

Exit codes: 0 success, 1 verification failures, 2 configuration error
(including an infeasible coefficient space), 3 numeric abort.

Every JSON payload is written with sorted keys and no timestamps, so a
fixed seed reproduces the files byte for byte for any worker count.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .eigenspaces import EIGENSPACE_CASES, case_gates, verify_eigenspace_case
from .graphs import Digraph, GdsSchedule, gds_topology, laplacian, random_digraph
from .linalg import null_space, numerical_rank
from .optimizer import (
    ConfigError,
    InfeasibleOmegaError,
    NumericAbort,
    RunConfig,
    convergence_metrics,
    run,
)
from .semistability import ZeroNotEigenvalueError, is_semisimple_zero, random_paracontracting
from .switched import (
    McoCoefficients,
    SwitchedSystemMatrices,
    check_theorem_conditions,
    predicted_rank_A,
    predicted_spectrum_A,
    predicted_spectrum_B,
    rank_case,
    verify_spectrum_containment_A,
    verify_spectrum_containment_B,
)
from .verify import SweepConfig, SweepConfigError, generate_instance, records_to_jsonl, run_sweep, summarize

__all__ = ["main", "build_parser", "cmd_optimize", "cmd_verify", "cmd_analyze", "AnalyzeConfig"]

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write(out: Path, name: str, text: str):
    (out / name).write_text(text, encoding="utf-8")


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None


def _out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc.strerror}") from None
    return out


# ----------------------------------------------------------------------------
# optimize


def cmd_optimize(config_path, output_dir, seed=None, workers=1) -> int:
    """Run the optimizer; writes ``trace.jsonl``, ``summary.csv`` and ``result.json``."""
    try:
        config = RunConfig.from_json(_load_json(config_path))
        if seed is not None:
            config = config.with_seed(seed)
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from None
    out = _out_dir(output_dir)
    result = run(config, workers=workers)
    _write(out, "trace.jsonl", result.trace.to_jsonl())
    _write(out, "summary.csv", result.trace.to_csv())
    _write(out, "result.json", _dump(result.summary()))
    _write(out, "metrics.json", _dump(convergence_metrics(result.trace, stop_tol=config.stop_tol)))
    print(f"best_f={result.best_f:.6e} iterations={result.iterations} converged={result.converged}")
    return EXIT_OK


# ----------------------------------------------------------------------------
# verify


def cmd_verify(config_path, output_dir, seed=None, workers=1) -> int:
    """Run a verification sweep; writes ``verify.jsonl`` and ``verify_summary.json``."""
    try:
        config = SweepConfig.from_json(_load_json(config_path))
        if seed is not None:
            config = SweepConfig(**{**config.__dict__, "seed": seed})
    except SweepConfigError as exc:
        raise ConfigError(str(exc)) from None
    out = _out_dir(output_dir)
    records = run_sweep(config, workers=workers)
    summary = summarize(records)
    summary["config"] = config.to_json()
    _write(out, "verify.jsonl", records_to_jsonl(records))
    _write(out, "verify_summary.json", _dump(summary))
    for name, entry in summary["by_check"].items():
        print(f"{name:<28} pass={entry['pass']:<5d} fail={entry['fail']}")
    if summary["failed"]:
        seeds = sorted({s for e in summary["by_check"].values() for s in e["failing_seeds"]})
        print(f"{summary['failed']} failing record(s); replay seeds: {seeds[:10]}"
              + (" ..." if len(seeds) > 10 else ""), file=sys.stderr)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


# ----------------------------------------------------------------------------
# analyze

_ANALYZE_KEYS = ("n", "q", "coeffs", "j", "graph", "p_matrix", "seed", "instance_seed", "sweep")


class AnalyzeConfig:
    """One switched-system instance described in JSON.

    Either a full description::

        {"n": 1, "q": 2, "coeffs": {"mu": 0, "eta": 0, "kappa": 1, "h": 1},
         "j": 1, "graph": "complete", "p_matrix": "identity", "seed": 0}

    where ``graph`` is ``"complete"``, ``"cycle"``, ``"random"``,
    ``{"edges": [[i, j], ...]}`` or ``{"gds": [all-info ids]}`` and
    ``p_matrix`` is ``"identity"``, an explicit matrix or
    ``{"spectrum_min", "spectrum_max", "ones", "rank"}``; or a replay of a
    sweep instance: ``{"instance_seed": s, "sweep": {...}, "j": 1}``.
    """

    def __init__(self, obj, seed_override=None):
        if not isinstance(obj, dict):
            raise ConfigError("analyze config must be a JSON object")
        unknown = sorted(set(obj) - set(_ANALYZE_KEYS))
        if unknown:
            raise ConfigError(f"unknown field(s) in analyze config: {unknown}")
        try:
            if "instance_seed" in obj:
                self._from_sweep(obj)
            else:
                self._from_description(obj, seed_override)
            j = obj.get("j", 1)
            if isinstance(j, bool) or not isinstance(j, int) or not 1 <= j <= self.q:
                raise ConfigError(f"j must be an integer in 1..{self.q}")
            self.j = j
        except (ValueError, TypeError, KeyError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid instance: {exc}") from None

    def _from_sweep(self, obj):
        extra = sorted(set(obj) - {"instance_seed", "sweep", "j"})
        if extra:
            raise ConfigError(f"fields {extra} cannot be combined with instance_seed")
        seed = obj["instance_seed"]
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError("instance_seed must be a nonnegative integer")
        try:
            sweep = SweepConfig.from_json(obj.get("sweep", {}))
        except SweepConfigError as exc:
            raise ConfigError(str(exc)) from None
        inst = generate_instance(seed, sweep)
        self.n, self.q, self.coeffs = inst.n, inst.q, inst.coeffs
        self.graph, self.p = inst.graph, inst.p
        self.source = {"instance_seed": seed, "sweep": sweep.to_json()}

    def _from_description(self, obj, seed_override):
        for key in ("n", "q", "coeffs"):
            if key not in obj:
                raise ConfigError(f"missing field {key!r}")
        n, q = obj["n"], obj["q"]
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ConfigError("n must be a positive integer")
        if isinstance(q, bool) or not isinstance(q, int) or q < 2:
            raise ConfigError("q must be an integer >= 2")
        cf = obj["coeffs"]
        if not isinstance(cf, dict) or set(cf) - {"mu", "eta", "kappa", "h"}:
            raise ConfigError("coeffs must be an object with keys among mu, eta, kappa, h")
        self.coeffs = McoCoefficients(cf.get("mu", 0.0), cf.get("eta", 0.0), cf.get("kappa", 0.0), cf.get("h", 1.0))
        seed = obj.get("seed", 0) if seed_override is None else seed_override
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        rng = np.random.default_rng(seed)
        self.n, self.q = n, q
        self.graph = self._graph(obj.get("graph", "complete"), q, rng)
        self.p = self._p_matrix(obj.get("p_matrix", "identity"), n, rng)
        self.source = {"seed": seed}

    @staticmethod
    def _graph(spec, q, rng):
        if spec == "complete":
            return Digraph.complete(q)
        if spec == "cycle":
            return Digraph.cycle(q)
        if spec == "random":
            return random_digraph(q, 0.5, rng)
        if isinstance(spec, dict) and set(spec) == {"edges"}:
            return Digraph.from_edges(q, [tuple(e) for e in spec["edges"]])
        if isinstance(spec, dict) and set(spec) == {"gds"}:
            return gds_topology(GdsSchedule(q, tuple(spec["gds"])), rng)
        raise ConfigError("graph must be complete, cycle, random, {'edges': ...} or {'gds': [...]}")

    @staticmethod
    def _p_matrix(spec, n, rng):
        if spec == "identity":
            return np.eye(n)
        if isinstance(spec, list):
            p = np.asarray(spec, dtype=float)
            if p.shape != (n, n) or not np.all(np.isfinite(p)):
                raise ConfigError(f"p_matrix must be a finite {n}x{n} matrix")
            return p
        if isinstance(spec, dict):
            allowed = {"spectrum_min", "spectrum_max", "ones", "rank"}
            if set(spec) - allowed:
                raise ConfigError(f"p_matrix spec keys must be among {sorted(allowed)}")
            rank = spec.get("rank")
            return random_paracontracting(
                n, rng, spec.get("spectrum_min", -0.95), spec.get("spectrum_max", 0.95),
                ones=spec.get("ones", 0), full_rank=rank is None, rank=rank,
            )
        raise ConfigError("p_matrix must be 'identity', a matrix or a spectrum spec")

    def instance(self) -> SwitchedSystemMatrices:
        return SwitchedSystemMatrices.build(self.j, self.coeffs, laplacian(self.graph).astype(float), self.p)


def _complex_list(values):
    vals = sorted(np.asarray(values, dtype=complex), key=lambda z: (round(z.real, 10), round(z.imag, 10)))
    return [[float(z.real), float(z.imag)] for z in vals]


def analyze_instance(cfg: AnalyzeConfig) -> dict:
    """Ranks, kernels, spectra, hypothesis report and eigenspace checks of one instance."""
    inst = cfg.instance()
    n, q, c = inst.n, inst.q, inst.coeffs
    rank_l, rank_p = numerical_rank(inst.l), numerical_rank(inst.p)
    case = rank_case(c)
    a_shift, b_shift = inst.a_shifted, inst.b_shifted
    try:
        semisimple = is_semisimple_zero(a_shift)
    except ZeroNotEigenvalueError:
        semisimple = None
    report = {
        "instance": {
            "n": n, "q": q, "j": inst.j, "coeffs": c.as_dict(),
            "graph": json.loads(cfg.graph.to_json()), "p_matrix": inst.p.tolist(),
            "source": cfg.source,
        },
        "rank_case": case,
        "ranks": {
            "L": rank_l, "P": rank_p,
            "A": numerical_rank(inst.a_j), "A_predicted": predicted_rank_A(c, rank_l, rank_p, n, q),
            "A_shifted": numerical_rank(a_shift), "B_shifted": numerical_rank(b_shift),
        },
        "kernel_dims": {
            "A": null_space(inst.a_j).dim, "A_shifted": null_space(a_shift).dim,
            "B_shifted": null_space(b_shift).dim,
        },
        "zero_semisimple_in_A_shifted": semisimple,
        "conditions": check_theorem_conditions(inst).to_json(),
    }
    if c.h > 0:
        spectra = {}
        for name, pred_fn, verify_fn, mat in (
            ("A_shifted", lambda: predicted_spectrum_A(c, inst.l, inst.j, n, q), verify_spectrum_containment_A, a_shift),
            ("B_shifted", lambda: predicted_spectrum_B(c, inst.l, n, q), verify_spectrum_containment_B, b_shift),
        ):
            rep = verify_fn(inst)
            spectra[name] = {
                "computed": _complex_list(np.linalg.eigvals(mat)),
                "predicted": sorted(pred_fn().to_json(), key=lambda d: (d["tag"], d["value"])),
                "containment": rep.to_json(),
                "applies": rank_p == n if name == "A_shifted" else True,
            }
        report["spectra"] = spectra
        report["eigenspaces"] = {
            case_id: verify_eigenspace_case(inst, case_id).to_json()
            for case_id in EIGENSPACE_CASES if case_gates(inst, case_id)
        }
    return report


def _print_table(rep):
    inst = rep["instance"]
    print(f"instance n={inst['n']} q={inst['q']} j={inst['j']} coeffs={inst['coeffs']} case={rep['rank_case']}")
    for key, val in rep["ranks"].items():
        print(f"  rank {key:<12} {val}")
    for key, val in rep["kernel_dims"].items():
        print(f"  dim ker {key:<9} {val}")
    for name, spec in rep.get("spectra", {}).items():
        cont = spec["containment"]
        print(f"  spectrum {name}: {len(spec['computed'])} computed, {len(spec['predicted'])} predicted, "
              f"max miss {cont['max_miss']:.3e} -> {'PASS' if cont['pass'] else 'FAIL'}")
    conds = rep["conditions"]
    print("  hypotheses " + " ".join(f"{k}={'yes' if conds[k] else 'no'}" for k in ("h1", "h2", "h3", "h4", "h5")))
    for case_id, er in rep.get("eigenspaces", {}).items():
        print(f"  eigenspace {case_id:<5} residual {er['max_residual']:.3e} -> {'PASS' if er['pass'] else 'FAIL'}")


def cmd_analyze(config_path, output_dir, seed=None) -> int:
    """Analyse one instance; writes ``analysis.json`` and prints a summary table."""
    cfg = AnalyzeConfig(_load_json(config_path), seed)
    out = _out_dir(output_dir)
    rep = analyze_instance(cfg)
    _write(out, "analysis.json", _dump(rep))
    _print_table(rep)
    return EXIT_OK


# ----------------------------------------------------------------------------
# entry point


def _u64(text):
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return val


def _positive(text):
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if val < 1:
        raise argparse.ArgumentTypeError("workers must be positive")
    return val


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmco", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("optimize", "run the optimizer"),
        ("verify", "run a randomised verification sweep"),
        ("analyze", "analyse a single switched-system instance"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=_u64, default=None, help="seed override (unsigned 64-bit)")
        if name != "analyze":
            p.add_argument("--workers", type=_positive, default=1, help="worker threads")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, matching the config-error code
        return int(exc.code or 0)
    try:
        if args.command == "optimize":
            return cmd_optimize(args.config, args.out, args.seed, args.workers)
        if args.command == "verify":
            return cmd_verify(args.config, args.out, args.seed, args.workers)
        return cmd_analyze(args.config, args.out, args.seed)
    except InfeasibleOmegaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps(exc.diagnostic, sort_keys=True, default=str), file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericAbort as exc:
        print(f"numeric abort: {exc}", file=sys.stderr)
        print(json.dumps(exc.diagnostic, sort_keys=True, default=str), file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

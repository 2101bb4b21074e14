"""``levy-lab``: reproducible experiment runner.

Exit status is 0 when every check in the report passes, 1 when some check
fails, 2 on a usage error and 3 when the report cannot be written.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from ._parallel import worker_count
from .concentration import estimate_concentration, levy_family_report, named_observable
from .haar import GroupSpec, sample_haar
from .linalg import trace_distance
from .reduction import corner_lower_bound, corner_reduce, estimate_quotient_diameter, reduction_chain
from .report import ExperimentReport, emit_report
from .rng import DEFAULT_SEED, SeededRng
from .selftest import run_selftest

__all__ = ["ConfigError", "ExperimentConfig", "run", "main"]

COMMANDS = ("reduce", "chain", "diameter", "concentrate", "levy-report", "haar-selftest")
TABULAR = ("concentrate", "levy-report")
BOUND_SLACK = 1e-9
EXIT_FAIL, EXIT_USAGE, EXIT_IO = 1, 2, 3


class ConfigError(ValueError):
    def __init__(self, name: str, message: str):
        self.field = name
        super().__init__(f"{name}: {message}")


@dataclass
class ExperimentConfig:
    command: str
    group: str = "unitary"
    n: int | None = None
    ns: list[int] = field(default_factory=list)
    k: int | None = None
    epsilons: list[float] = field(default_factory=list)
    num_samples: int = 1
    refine_budget: int = 200
    seed: int = DEFAULT_SEED
    seeds: list[int] = field(default_factory=list)
    observable: str = "distance-to-identity"
    metric: str = "trace"
    sampler: str = "auto"
    output_format: str = "json"
    output_path: str | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError("command", f"must be one of {', '.join(COMMANDS)}")
        if self.group not in ("unitary", "orthogonal"):
            raise ConfigError("group", "must be 'unitary' or 'orthogonal'")
        for name in ("n", "k"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ConfigError(name, "must be a positive integer")
        for name in ("num_samples", "refine_budget"):
            if getattr(self, name) < (0 if name == "refine_budget" else 1):
                raise ConfigError(name, "must be positive")
        if self.seed < 0:
            raise ConfigError("seed", "must be nonnegative")
        if any(n < 1 for n in self.ns):
            raise ConfigError("ns", "must be positive integers")
        if any(e <= 0 for e in self.epsilons):
            raise ConfigError("epsilons", "must be positive")
        if self.output_format not in ("json", "csv"):
            raise ConfigError("output_format", "must be 'json' or 'csv'")
        if self.output_format == "csv" and self.command not in TABULAR:
            raise ConfigError("output_format", f"csv output is only available for {', '.join(TABULAR)}")
        needs_n = {"reduce", "chain", "concentrate", "diameter"}
        if self.command in needs_n and self.n is None:
            raise ConfigError("n", f"required for {self.command}")
        if self.command == "diameter":
            if self.k is None:
                raise ConfigError("k", "required for diameter")
            if self.k > self.n:
                raise ConfigError("k", "must not exceed n")
        if self.command == "reduce" and self.k is not None and self.k > self.n:
            raise ConfigError("k", "must not exceed n")
        if self.command in TABULAR:
            if not self.epsilons:
                raise ConfigError("epsilons", "at least one epsilon is required")
            if sorted(self.epsilons) != self.epsilons:
                raise ConfigError("epsilons", "must be ascending")
            if self.num_samples < 1000:
                raise ConfigError("num_samples", "concentration estimates need at least 1000 samples")
        if self.command == "levy-report":
            if not self.ns:
                raise ConfigError("ns", "required for levy-report")
            if sorted(set(self.ns)) != self.ns:
                raise ConfigError("ns", "must be strictly ascending")

    def echo(self) -> dict:
        data = asdict(self)
        data.pop("output_path")
        return data


def _check(name: str, ok: bool, **detail) -> dict:
    return {"name": name, "pass": bool(ok), **detail}


def _run_reduce(cfg: ExperimentConfig, report: ExperimentReport) -> None:
    n = cfg.n
    k = cfg.k or n
    u = sample_haar(GroupSpec(cfg.group, k), SeededRng(cfg.seed)).with_ambient(n)
    red = corner_reduce(u, n)
    special = red.branch != "generic-rotation"
    report.records.append(
        {
            "k": k,
            "n": n,
            "branch": red.branch,
            "distance": red.distance,
            "lower_bound": corner_lower_bound(u, n),
            "bound": 4.0 / n,
            "special_bound": 2.0 / n,
            "fixed_vector_residual": red.fixed_vector_residual,
        }
    )
    report.checks.append(_check("distance<=4/n", red.distance <= 4.0 / n + BOUND_SLACK))
    if special:
        report.checks.append(_check("special-branch<=2/n", red.distance <= 2.0 / n + BOUND_SLACK))


def _run_chain(cfg: ExperimentConfig, report: ExperimentReport) -> None:
    n = cfg.n
    rng = SeededRng(cfg.seed)
    for i in range(cfg.num_samples):
        u = sample_haar(GroupSpec(cfg.group, n), rng.substream(i))
        chain = reduction_chain(u)
        d = trace_distance(u.matrix, np.eye(n))
        total = chain.total_distance_bound
        report.records.append(
            {
                "sample": i,
                "total_distance_bound": total,
                "distance_to_identity": d,
                "branches": [s.branch for s in chain.steps],
                "step_distances": list(chain.step_distances),
            }
        )
        report.checks.append(_check(f"sample {i}: total<=4", total <= 4.0))
        report.checks.append(_check(f"sample {i}: total>=d(u,1)", total >= d - BOUND_SLACK))


def _run_diameter(cfg: ExperimentConfig, report: ExperimentReport) -> None:
    est = estimate_quotient_diameter(
        cfg.k, cfg.n, cfg.num_samples, cfg.refine_budget, SeededRng(cfg.seed), cfg.group
    )
    report.records.append(asdict(est))
    report.checks.append(_check("constructive_sup<=4/n", est.constructive_sup <= est.paper_bound + BOUND_SLACK))
    report.checks.append(_check("refined_sup<=constructive_sup", est.refined_sup <= est.constructive_sup))
    if cfg.k <= 2:
        report.checks.append(_check("constructive_sup<=2/n", est.constructive_sup <= 2.0 / cfg.n + BOUND_SLACK))


def _tail_checks(rows, family: str, report: ExperimentReport) -> None:
    for r in rows:
        name = f"n={r['n']} eps={r['epsilon']!r}: upper_tail<=bound"
        if family == "orthogonal" and not r["pass"]:
            report.flags.append(name + " (orthogonal analogue exceeded)")
            continue
        report.checks.append(_check(name, r["pass"]))


def _run_concentrate(cfg: ExperimentConfig, report: ExperimentReport) -> None:
    group = GroupSpec(cfg.group, cfg.n)
    obs = named_observable(cfg.observable, cfg.n, cfg.metric)
    est = estimate_concentration(group, obs, cfg.epsilons, cfg.num_samples, SeededRng(cfg.seed), cfg.sampler)
    summary = est.to_dict()
    rows = summary.pop("rows")
    report.records.extend(rows)
    report.records.append({"estimate": summary})
    if est.bound_trivial:
        report.flags.append(f"n={cfg.n}: bound trivial at this scale")
    _tail_checks(rows, cfg.group, report)


def _run_levy_report(cfg: ExperimentConfig, report: ExperimentReport) -> None:
    lr = levy_family_report(
        cfg.ns, cfg.observable, cfg.epsilons, cfg.num_samples, cfg.seed, cfg.group, cfg.sampler, cfg.metric
    )
    report.records.extend(lr.rows())
    for d in lr.decay:
        report.records.append({"decay": d})
        report.checks.append(
            _check(f"eps={d['epsilon']!r}: tail n={d['n_from']}->{d['n_to']} non-increasing", d["pass"])
        )
    report.flags.extend(lr.flags)
    _tail_checks(lr.rows(), cfg.group, report)


def _run_selftest(cfg: ExperimentConfig, report: ExperimentReport) -> None:
    seeds = tuple(cfg.seeds) if cfg.seeds else (1, 2, 3, 4, 5)
    for rec in run_selftest(cfg.num_samples, seeds):
        report.records.append(rec)
        label = rec["check"] + (f" n={rec['n']}" if "n" in rec else "")
        report.checks.append(_check(label, rec["pass"]))


_DISPATCH = {
    "reduce": _run_reduce,
    "chain": _run_chain,
    "diameter": _run_diameter,
    "concentrate": _run_concentrate,
    "levy-report": _run_levy_report,
    "haar-selftest": _run_selftest,
}


def run(config: ExperimentConfig, record_timing: bool = False) -> ExperimentReport:
    """Run one experiment and return its report (nothing is written)."""
    config.validate()
    report = ExperimentReport(config.command, config.echo())
    start = time.perf_counter()
    _DISPATCH[config.command](config, report)
    if record_timing:
        report.wall_clock_seconds = time.perf_counter() - start
    return report


def _int_list(text: str) -> list[int]:
    return [int(x, 0) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group", choices=("unitary", "orthogonal"), default="unitary")
    common.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED,
                        help=f"64-bit seed (default {DEFAULT_SEED:#x})")
    common.add_argument("--format", dest="output_format", choices=("json", "csv"), default="json")
    common.add_argument("--output", dest="output_path", default=None, help="report path (default stdout)")
    common.add_argument("--record-timing", action="store_true",
                        help="add wall-clock time to the report (breaks byte-identical reruns)")

    parser = argparse.ArgumentParser(prog="levy-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", parents=[common], help="corner-reduce one Haar element of U(k) inside U(n)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int)

    p = sub.add_parser("chain", parents=[common], help="full reduction chains U(n) -> ... -> U(1)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", dest="num_samples", type=int, default=1)

    p = sub.add_parser("diameter", parents=[common], help="estimate the diameter of U(k)/U(k-1) inside U(n)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", dest="num_samples", type=int, default=200)
    p.add_argument("--refine-budget", type=int, default=200)

    for name, help_text in (("concentrate", "tails of one observable at one dimension"),
                            ("levy-report", "tails across dimensions with a decay verdict")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "concentrate":
            p.add_argument("--n", type=int, required=True)
        else:
            p.add_argument("--ns", type=_int_list, required=True)
        p.add_argument("--eps", dest="epsilons", type=_float_list, required=True)
        p.add_argument("--samples", dest="num_samples", type=int, default=2000)
        p.add_argument("--observable", choices=("distance-to-identity", "trace"), default="distance-to-identity")
        p.add_argument("--metric", choices=("trace", "hilbert-schmidt"), default="trace")
        p.add_argument("--sampler", choices=("auto", "dense", "spectral"), default="auto")

    p = sub.add_parser("haar-selftest", parents=[common], help="statistical checks of the Haar sampler")
    p.add_argument("--samples", dest="num_samples", type=int, default=10_000)
    p.add_argument("--seeds", type=_int_list, default=[1, 2, 3, 4, 5])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    record_timing = args.pop("record_timing")
    config = ExperimentConfig(**args)
    try:
        worker_count()
    except ValueError as exc:
        print(f"levy-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = run(config, record_timing)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"levy-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        text = emit_report(report, config.output_format, config.output_path)
    except OSError as exc:
        print(f"levy-lab: {exc}", file=sys.stderr)
        return EXIT_IO
    if config.output_path in (None, "-"):
        sys.stdout.write(text)
    return 0 if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands compute failure-probability sweeps as stable CSV/JSON, check the
protocol's headline numbers, run simulations from config files, and replay
membership event logs:

* ``fig2``     — committee-sampling failure sweep over shard counts
* ``fig4``     — class-based worst-case manipulation sweep over shard counts
* ``claims``   — the headline numbers, each against its documented bound
* ``simulate`` — Monte-Carlo run from a config file (plus exact oracle when
  the instance is small enough)
* ``replay``   — rebuild a court state from an event log and dump it
* ``shards``   — largest shard count meeting a failure target

Everything is deterministic: stochastic paths require an explicit seed, CSV
columns have a fixed order, and floats are formatted to 12 significant
digits.  Exit codes: 0 success, 2 usage or validation error, 3 tractability
guard violation.  Relative ``--out`` paths land in ``$JURYSHARD_OUTDIR`` when
that is set.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

from .analytics import (
    GuardError,
    hypergeom_tail,
    max_manipulation_prob,
    max_shards_for_target,
    throughput,
    time_to_fail,
)
from .membership import (
    AdmissionTriggered,
    CourtState,
    Genesis,
    LogError,
    MembershipError,
    iter_log,
)
from .params import ParameterError, SystemParams
from .sim import EXHAUSTIVE_GUARD, exhaustive, format_float, monte_carlo, strategy_from_config

__all__ = ["main", "RunConfig"]

OUTDIR_ENV = "JURYSHARD_OUTDIR"
CONFIG_SCHEMA = 1


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------


def span(text: str) -> List[int]:
    """Parse an inclusive integer span: '7' or '2:34'."""
    try:
        if ":" in text:
            lo_s, hi_s = text.split(":", 1)
            lo, hi = int(lo_s), int(hi_s)
            if lo > hi:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected N or LO:HI with LO <= HI, got {text!r}"
        ) from None


def int_list(text: str) -> List[int]:
    """Parse a comma-separated integer list: '666,1000'."""
    try:
        values = [int(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("expected at least one value")
    return values


def resolve_out(path: Optional[str]) -> Optional[str]:
    if path is None or os.path.isabs(path):
        return path
    outdir = os.environ.get(OUTDIR_ENV)
    return os.path.join(outdir, path) if outdir else path


def write_text(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"wrote {path}")


def _cell(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def render_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _jsonable(value):
    if isinstance(value, float) and math.isinf(value):
        return None
    return value


def render_json_rows(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    records = [
        {name: _jsonable(value) for name, value in zip(header, row)} for row in rows
    ]
    return json.dumps(records, indent=2) + "\n"


def emit_rows(args, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    if args.format == "json":
        text = render_json_rows(header, rows)
    else:
        text = render_csv(header, rows)
    write_text(resolve_out(args.out), text)


def _majority(committee: int) -> int:
    return (committee + 1) // 2


def _class_threshold(jury_size: int, tfrac: float) -> int:
    threshold = int(math.ceil(tfrac * jury_size))
    return min(max(threshold, 1), jury_size)


# ---------------------------------------------------------------------------
# fig2 / fig4 sweeps
# ---------------------------------------------------------------------------


def cmd_fig2(args) -> int:
    if args.n < 1:
        raise ParameterError(f"--n must be >= 1, got {args.n}")
    for t in args.t:
        if not 0 <= t <= args.n:
            raise ParameterError(f"--t values must be in [0, {args.n}], got {t}")
    if args.s[0] < 1 or args.s[-1] > args.n:
        raise ParameterError(f"--s values must be in [1, {args.n}]")
    rows = []
    for t in args.t:
        for s in args.s:
            m = args.n // s
            tail = hypergeom_tail(args.n, t, m, _majority(m))
            rows.append((t, s, m, tail.log10))
    emit_rows(args, ("t", "s", "m", "log10_failure"), rows)
    return 0


def cmd_fig4(args) -> int:
    if args.n < 1:
        raise ParameterError(f"--n must be >= 1, got {args.n}")
    if not 0 <= args.ad <= args.n:
        raise ParameterError(f"--ad must be in [0, {args.n}], got {args.ad}")
    if not 0 < args.tfrac <= 1:
        raise ParameterError(f"--tfrac must be in (0, 1], got {args.tfrac}")
    if args.s[0] < 1 or args.s[-1] > args.n:
        raise ParameterError(f"--s values must be in [1, {args.n}]")
    rows = []
    for s in args.s:
        m = args.n // s
        threshold = _class_threshold(m, args.tfrac)
        params = SystemParams(
            shards=s,
            jury_size=m,
            threshold=threshold,
            adversaries=min(args.ad, m * s),
        )
        bound = max_manipulation_prob(params, clamp=True)
        rows.append(
            (s, m, threshold, bound.exact.log10, bound.approximation_log10, bound.overflowed)
        )
    emit_rows(
        args,
        ("s", "m", "threshold", "log10_exact", "log10_approx", "overflowed"),
        rows,
    )
    return 0


# ---------------------------------------------------------------------------
# claims
# ---------------------------------------------------------------------------


def cmd_claims(args) -> int:
    n = args.n
    if n < 10:
        raise ParameterError(f"--n must be >= 10, got {n}")
    at_defaults = n == 2000
    target = Fraction(1, 10**6)

    years_1e6 = time_to_fail(target, 1800.0)
    sampling = max_shards_for_target(n, n // 3, target, model="traditional")
    tx_rate = throughput(10, 1000, 1800.0)

    jury_size = n // 10
    headline = SystemParams(
        shards=10,
        jury_size=jury_size,
        threshold=_class_threshold(jury_size, 0.7),
        adversaries=min(n // 2, jury_size * 10),
    )
    manipulation = max_manipulation_prob(headline, clamp=True).exact
    years_30min = time_to_fail(manipulation, 1800.0)
    years_10min = time_to_fail(manipulation, 600.0)
    class_limit = max_shards_for_target(n, n // 2, target, model="class")

    def status(ok: bool) -> str:
        if not at_defaults:
            return "n/a"
        return "pass" if ok else "fail"

    rows = [
        (
            "years-to-fail-at-1e-6",
            years_1e6,
            "57 < years < 58",
            status(57 < years_1e6 < 58),
        ),
        (
            "sampling-shard-limit",
            sampling.shards if sampling.shards is not None else "",
            "8 <= shards <= 12",
            status(sampling.shards is not None and 8 <= sampling.shards <= 12),
        ),
        (
            "throughput-at-10-shards",
            tx_rate,
            "== 20000 tx/h",
            status(tx_rate == 20000.0),
        ),
        (
            "manipulation-at-10-shards",
            manipulation.log10,
            "log10 < -20",
            status(manipulation.exact < Fraction(1, 10**20)),
        ),
        (
            "class-shard-limit",
            class_limit.shards if class_limit.shards is not None else "",
            "31 <= shards <= 35",
            status(class_limit.shards is not None and 31 <= class_limit.shards <= 35),
        ),
        (
            "years-to-fail-30min-blocks",
            years_30min,
            "> 1e15 years",
            status(years_30min > 1e15),
        ),
        (
            "years-to-fail-10min-blocks",
            years_10min,
            "> 1e14 years",
            status(years_10min > 1e14),
        ),
    ]
    emit_rows(args, ("name", "computed", "requirement", "status"), rows)
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

_CONFIG_KEYS = {
    "schema", "shards", "jury_size", "threshold", "adversaries", "epoch_seconds",
    "strategy", "trials", "seed", "workers", "exhaustive", "out", "format",
}


@dataclass(frozen=True)
class RunConfig:
    """A validated simulation run: parameters, strategy, trials, seed."""

    params: SystemParams
    strategy_kind: str
    strategy_counts: Optional[tuple]
    trials: int
    seed: int
    workers: int
    exhaustive_mode: str  # auto | always | never
    out: Optional[str]
    format: str
    raw: dict

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ParameterError("config must be a JSON object")
        if raw.get("schema") != CONFIG_SCHEMA:
            raise ParameterError(
                f"config schema must be {CONFIG_SCHEMA}, got {raw.get('schema')!r}"
            )
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise ParameterError(f"unknown config key(s): {sorted(unknown)}")
        missing = {"shards", "jury_size", "threshold", "adversaries", "trials"} - set(raw)
        if missing:
            raise ParameterError(f"config missing key(s): {sorted(missing)}")
        if "seed" not in raw:
            raise ParameterError("config must set an explicit seed (no silent entropy)")
        params = SystemParams(
            shards=raw["shards"],
            jury_size=raw["jury_size"],
            threshold=raw["threshold"],
            adversaries=raw["adversaries"],
            epoch_seconds=raw.get("epoch_seconds", 1800.0),
        )
        strategy = raw.get("strategy", {"kind": "front_loaded"})
        if not isinstance(strategy, dict) or "kind" not in strategy:
            raise ParameterError('config "strategy" must be an object with a "kind"')
        counts = strategy.get("counts")
        trials = raw["trials"]
        if not isinstance(trials, int) or trials < 1:
            raise ParameterError(f"trials must be a positive integer, got {trials!r}")
        seed = raw["seed"]
        if not isinstance(seed, int) or seed < 0:
            raise ParameterError(f"seed must be a non-negative integer, got {seed!r}")
        workers = raw.get("workers", 1)
        exhaustive_mode = raw.get("exhaustive", "auto")
        if exhaustive_mode not in ("auto", "always", "never"):
            raise ParameterError(
                f'config "exhaustive" must be auto, always, or never, got {exhaustive_mode!r}'
            )
        fmt = raw.get("format", "json")
        if fmt not in ("json", "csv"):
            raise ParameterError(f"format must be json or csv, got {fmt!r}")
        return cls(
            params=params,
            strategy_kind=strategy["kind"],
            strategy_counts=tuple(counts) if counts is not None else None,
            trials=trials,
            seed=seed,
            workers=workers,
            exhaustive_mode=exhaustive_mode,
            out=raw.get("out"),
            format=fmt,
            raw=raw,
        )

    @classmethod
    def from_path(cls, path: str) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as err:
                raise ParameterError(f"config {path}: invalid JSON ({err.msg})") from err
        return cls.from_dict(raw)


def _exhaustive_section(config: RunConfig, strategy) -> Optional[dict]:
    allocation = strategy.allocation(config.params)
    if config.exhaustive_mode == "never":
        return None
    if config.exhaustive_mode == "auto":
        space = math.factorial(config.params.shards) ** config.params.jury_size
        if space > EXHAUSTIVE_GUARD:
            return None
    result = exhaustive(config.params, allocation)  # may raise GuardError (exit 3)
    section = {}
    for name in ("designated_safety", "any_safety", "designated_liveness", "any_liveness"):
        value = getattr(result, name)
        section[name] = float(value)
        section[name + "_exact"] = f"{value.numerator}/{value.denominator}"
    return section


def cmd_simulate(args) -> int:
    config = RunConfig.from_path(args.config)
    overrides = {}
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.threshold is not None:
        overrides["threshold"] = args.threshold
    if overrides:
        config = RunConfig.from_dict({**config.raw, **overrides})

    strategy = strategy_from_config(config.strategy_kind, config.strategy_counts)
    report = monte_carlo(
        config.params, strategy, config.trials, config.seed, workers=config.workers
    )
    fmt = args.format or config.format
    out = args.out if args.out is not None else (config.out or f"report.{fmt}")

    if fmt == "csv":
        text = report.to_csv()
    else:
        document = {
            "schema": CONFIG_SCHEMA,
            "config": config.raw,
            "report": report.to_dict(),
            "exhaustive": _exhaustive_section(config, strategy),
        }
        text = json.dumps(document, indent=2) + "\n"
    write_text(resolve_out(out), text)
    return 0


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------


def cmd_replay(args) -> int:
    state: Optional[CourtState] = None
    admissions = []
    with open(args.log, "r", encoding="utf-8") as fh:
        for lineno, event in iter_log(fh):
            if isinstance(event, Genesis):
                state = CourtState(event)
                continue
            if isinstance(event, AdmissionTriggered):
                admissions.append(
                    {
                        "line": lineno,
                        "batch": event.batch,
                        "queue_lengths_before": state.queue_lengths,
                    }
                )
            try:
                state.apply(event)
            except MembershipError as err:
                raise LogError(lineno, str(err)) from err
            state._record(event)
    document = state.to_dict()
    document["admissions"] = admissions
    write_text(resolve_out(args.out), json.dumps(document, indent=2) + "\n")
    return 0


# ---------------------------------------------------------------------------
# shards
# ---------------------------------------------------------------------------


def cmd_shards(args) -> int:
    result = max_shards_for_target(
        args.n,
        args.ad,
        args.target,
        model=args.model,
        threshold_fraction=args.tfrac,
        majority_rounding=args.majority,
    )
    row = (
        args.model,
        args.n,
        args.ad,
        args.target,
        result.shards if result.shards is not None else "",
        result.prob.log10 if result.prob is not None else "",
        result.next_prob.log10 if result.next_prob is not None else "",
        result.achievable,
        result.unbounded,
    )
    header = (
        "model", "n", "ad", "target", "shards",
        "log10_at", "log10_next", "achievable", "unbounded",
    )
    emit_rows(args, header, [row])
    return 0


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="juryshard",
        description="failure-probability workbench for class-based jury sharding",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_output_flags(p, formats=("csv", "json"), default="csv"):
        p.add_argument("--format", choices=formats, default=default,
                       help=f"output format (default {default})")
        p.add_argument("--out", default=None,
                       help=f"output path (default stdout; relative paths join ${OUTDIR_ENV})")

    p_fig2 = sub.add_parser("fig2", help="committee-sampling failure sweep")
    p_fig2.add_argument("--n", type=int, default=2000, help="population size")
    p_fig2.add_argument("--t", type=int_list, default=[666, 1000],
                        help="comma-separated adversary counts")
    p_fig2.add_argument("--s", type=span, default=list(range(2, 35)),
                        help="shard counts, N or LO:HI")
    add_output_flags(p_fig2)
    p_fig2.set_defaults(func=cmd_fig2)

    p_fig4 = sub.add_parser("fig4", help="class-based manipulation sweep")
    p_fig4.add_argument("--n", type=int, default=2000, help="population size")
    p_fig4.add_argument("--ad", type=int, default=1000, help="adversary count")
    p_fig4.add_argument("--tfrac", type=float, default=0.7,
                        help="vote threshold as a fraction of jury size")
    p_fig4.add_argument("--s", type=span, default=list(range(2, 601)),
                        help="shard counts, N or LO:HI")
    add_output_flags(p_fig4)
    p_fig4.set_defaults(func=cmd_fig4)

    p_claims = sub.add_parser("claims", help="headline numbers vs documented bounds")
    p_claims.add_argument("--n", type=int, default=2000,
                          help="population size (pass/fail only asserted at 2000)")
    add_output_flags(p_claims)
    p_claims.set_defaults(func=cmd_claims)

    p_sim = sub.add_parser("simulate", help="Monte-Carlo run from a config file")
    p_sim.add_argument("config", help="path to a JSON run config")
    p_sim.add_argument("--trials", type=int, default=None, help="override config trials")
    p_sim.add_argument("--seed", type=int, default=None, help="override config seed")
    p_sim.add_argument("--threshold", type=int, default=None,
                       help="override config vote threshold")
    p_sim.add_argument("--format", choices=("csv", "json"), default=None,
                       help="override config output format")
    p_sim.add_argument("--out", default=None, help="override config output path")
    p_sim.set_defaults(func=cmd_simulate)

    p_replay = sub.add_parser("replay", help="replay a membership event log")
    p_replay.add_argument("log", help="path to a line-delimited event log")
    p_replay.add_argument("--format", choices=("json",), default="json")
    p_replay.add_argument("--out", default=None)
    p_replay.set_defaults(func=cmd_replay)

    p_shards = sub.add_parser("shards", help="largest shard count meeting a target")
    p_shards.add_argument("--n", type=int, required=True, help="population size")
    p_shards.add_argument("--ad", type=int, required=True, help="adversary count")
    p_shards.add_argument("--target", default="1e-6",
                          help="failure target, parsed exactly (e.g. 1e-6)")
    p_shards.add_argument("--model", choices=("class", "traditional"), default="class")
    p_shards.add_argument("--tfrac", type=float, default=0.7,
                          help="class model: threshold fraction of jury size")
    p_shards.add_argument("--majority", choices=("ceil", "floor"), default="ceil",
                          help="traditional model: majority rounding")
    add_output_flags(p_shards, default="json")
    p_shards.set_defaults(func=cmd_shards)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GuardError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except (ParameterError, MembershipError, LogError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end.

Four subcommands share one flat ``key = value`` configuration format:

* ``check``       run a solvability criterion or a hypothesis check
* ``solve``       solve the Dirichlet problem, optionally inside constructed bounds
* ``bounds``      construct lower/upper bounds and verify them pointwise
* ``quadrature``  dump the refinement-family quadrature trail

Tabular results are CSV with ``#`` comment blocks (resolved configuration on
top, summary at the bottom); check and quadrature results are JSON lines.
Output is byte-reproducible: fixed default seed, sorted keys, no timestamps.

Exit codes: 0 success or convergent, 2 failure/divergent/domain error,
3 inconclusive or iteration limit, 4 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
from typing import Sequence

from . import __version__
from .criteria import (
    CriterionReport,
    LowerWeight,
    Verdict,
    check_lipschitz_bound,
    check_monotone_in_state,
    check_scaling_exponents,
    construct_bounds,
    construct_lower,
    criterion_necessary,
    criterion_sufficient,
    family_quadrature,
    verify_lower,
    verify_upper,
)
from .criteria import DEFAULT_SEED
from .errors import ConfigError, CriterionNotSatisfied, ShapeViolation, TsdynError
from .model import DirichletProblem, Nonlinearity
from .solver import RhsMode, SolveConfig, Status, Strategy, solve
from .timescale import Kind, TimeScale, from_points, quantum, quantum_family, uniform, uniform_family

log = logging.getLogger("tsdyn")

_EXIT_OK = 0
_EXIT_FAIL = 2
_EXIT_UNDECIDED = 3
_EXIT_CONFIG = 4

_BOOL = {
    "true": True, "yes": True, "1": True,
    "false": False, "no": False, "0": False,
}

_EXACT_KEYS = {
    "scale.kind", "scale.start", "scale.end", "scale.points",
    "scale.q", "scale.depth", "scale.values",
    "f.count", "bc.left", "bc.right",
    "solve.strategy", "solve.tol_residual", "solve.tol_step",
    "solve.max_iters", "solve.damping", "solve.rhs_mode", "solve.use_bounds",
    "bounds.kind", "bounds.weight",
    "check.criterion", "check.eval_point", "check.samples",
    "check.band", "check.component",
    "family.sizes", "family.depths",
    "quadrature.weight",
}
_F_KEY = re.compile(r"f\.[1-9]\d*\.(expr|lambda|mu)$")


class Config:
    """Flat dotted-key configuration with typed, error-reporting access."""

    def __init__(self, entries: dict[str, tuple[str, int]]):
        self.entries = entries

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def _raw(self, key: str, default):
        if key in self.entries:
            return self.entries[key][0]
        if default is not None:
            return default
        raise ConfigError("missing required entry", key=key)

    def line(self, key: str) -> int | None:
        return self.entries[key][1] if key in self.entries else None

    def get_str(self, key: str, default: str | None = None) -> str:
        return str(self._raw(key, default))

    def get_float(self, key: str, default: float | None = None) -> float:
        raw = self._raw(key, default)
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"expected a number, got {raw!r}", key=key, line=self.line(key))

    def get_int(self, key: str, default: int | None = None) -> int:
        raw = self._raw(key, default)
        try:
            return int(str(raw))
        except ValueError:
            raise ConfigError(f"expected an integer, got {raw!r}", key=key, line=self.line(key))

    def get_bool(self, key: str, default: bool | None = None) -> bool:
        raw = self._raw(key, default)
        if isinstance(raw, bool):
            return raw
        try:
            return _BOOL[str(raw).strip().lower()]
        except KeyError:
            raise ConfigError(f"expected a boolean, got {raw!r}", key=key, line=self.line(key))

    def get_floats(self, key: str, default: Sequence[float] | None = None) -> tuple[float, ...]:
        if key not in self.entries and default is not None:
            return tuple(default)
        raw = self.get_str(key)
        try:
            return tuple(float(part) for part in raw.split(","))
        except ValueError:
            raise ConfigError(f"expected comma-separated numbers, got {raw!r}",
                              key=key, line=self.line(key))

    def get_ints(self, key: str, default: Sequence[int] | None = None) -> tuple[int, ...]:
        if key not in self.entries and default is not None:
            return tuple(default)
        raw = self.get_str(key)
        try:
            return tuple(int(part) for part in raw.split(","))
        except ValueError:
            raise ConfigError(f"expected comma-separated integers, got {raw!r}",
                              key=key, line=self.line(key))

    def get_enum(self, key: str, enum_cls, default):
        raw = self._raw(key, default.value if default is not None else None)
        if isinstance(raw, enum_cls):
            return raw
        try:
            return enum_cls(str(raw).strip().lower())
        except ValueError:
            options = ", ".join(m.value for m in enum_cls)
            raise ConfigError(f"expected one of {options}, got {raw!r}",
                              key=key, line=self.line(key))


def read_config(path: str) -> Config:
    entries: dict[str, tuple[str, int]] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc}")
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, _, value = text.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError("empty key", line=lineno)
        if key in entries:
            raise ConfigError("duplicate entry", key=key, line=lineno)
        if key not in _EXACT_KEYS and not _F_KEY.fullmatch(key):
            raise ConfigError("unknown entry", key=key, line=lineno)
        entries[key] = (value, lineno)
    return Config(entries)


# --- model building ---------------------------------------------------------


def build_scale(cfg: Config) -> TimeScale:
    kind = cfg.get_str("scale.kind").strip().lower()
    if kind == "uniform":
        return uniform(
            cfg.get_float("scale.start", 0.0),
            cfg.get_float("scale.end", 1.0),
            cfg.get_int("scale.points"),
        )
    if kind == "quantum":
        return quantum(cfg.get_float("scale.q"), cfg.get_int("scale.depth"))
    if kind == "explicit":
        return from_points(cfg.get_floats("scale.values"))
    raise ConfigError(
        f"expected uniform, quantum, or explicit, got {kind!r}",
        key="scale.kind", line=cfg.line("scale.kind"),
    )


def build_nonlinearities(cfg: Config) -> tuple[Nonlinearity, ...]:
    count = cfg.get_int("f.count", 1)
    if count < 1:
        raise ConfigError("need at least one component", key="f.count",
                          line=cfg.line("f.count"))
    out = []
    for i in range(1, count + 1):
        expr_key = f"f.{i}.expr"
        text = cfg.get_str(expr_key)
        try:
            fi = Nonlinearity.from_expression(
                text,
                arity=count,
                component_index=i,
                degree_low=cfg.get_floats(f"f.{i}.lambda", (0.0,) * count),
                degree_high=cfg.get_floats(f"f.{i}.mu", (0.0,) * count),
            )
        except TsdynError as exc:
            raise ConfigError(str(exc), key=expr_key, line=cfg.line(expr_key))
        out.append(fi)
    return tuple(out)


def build_problem(cfg: Config, scale: TimeScale) -> DirichletProblem:
    f = build_nonlinearities(cfg)
    n = len(f)

    def bc(key: str) -> tuple[float, ...]:
        vec = cfg.get_floats(key, (0.0,))
        if len(vec) == 1 and n > 1:
            vec = vec * n
        if len(vec) != n:
            raise ConfigError(f"expected {n} boundary values, got {len(vec)}",
                              key=key, line=cfg.line(key))
        return vec

    return DirichletProblem(scale, f, bc("bc.left"), bc("bc.right"))


def _family(cfg: Config, scale: TimeScale, override: str | None):
    """Explicit refinement family, or None to use the default for the scale."""
    sizes = None
    if override:
        try:
            sizes = tuple(int(p) for p in override.split(","))
        except ValueError:
            raise ConfigError(f"expected comma-separated integers, got {override!r}",
                              key="--family")
    quantum_kind = scale.kind is Kind.QUANTUM and scale.q is not None
    if sizes is None:
        if quantum_kind and "family.depths" in cfg:
            sizes = cfg.get_ints("family.depths")
        elif not quantum_kind and "family.sizes" in cfg:
            sizes = cfg.get_ints("family.sizes")
        else:
            return None
    if quantum_kind:
        return quantum_family(scale.q, sizes)
    return uniform_family(scale.a, scale.sigma2_b, sizes)


# --- output helpers ----------------------------------------------------------


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        log.info("wrote %s", out_path)


def _config_block(cfg: Config, args) -> list[str]:
    lines = [f"# tsdyn {__version__}", f"# command = {args.command}"]
    for key in sorted(cfg.entries):
        lines.append(f"# cfg.{key} = {cfg.entries[key][0]}")
    for name in ("seed", "strategy", "family"):
        value = getattr(args, name, None)
        if value is not None:
            lines.append(f"# override.{name} = {value}")
    return lines

def _csv(cfg, args, header: list[str], columns: list[Sequence[float]],
         summary: list[tuple[str, str]]) -> str:
    lines = _config_block(cfg, args)
    lines.append(",".join(header))
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    for key, value in summary:
        lines.append(f"# {key} = {value}")
    return "\n".join(lines) + "\n"


def _json_lines(records: list[dict]) -> str:
    return "".join(
        json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n"
        for rec in records
    )


def _verdict_exit(verdict: Verdict) -> int:
    if verdict is Verdict.CONVERGENT:
        return _EXIT_OK
    if verdict is Verdict.DIVERGENT:
        return _EXIT_FAIL
    return _EXIT_UNDECIDED


def _criterion_records(report: CriterionReport) -> list[dict]:
    records = []
    for i, verdict in enumerate(report.per_component, start=1):
        records.append({
            "component": i,
            "verdict": verdict.verdict.value,
            "limit": verdict.limit,
            "last": verdict.last_value,
            "stability": verdict.stability,
            "ratios": list(verdict.ratios),
            "positive": verdict.positive,
        })
    records.append({
        "overall": report.verdict.value,
        "points": list(report.scale_sizes),
        "notes": list(report.notes),
    })
    return records


# --- command handlers ----------------------------------------------------------


def _cmd_check(cfg: Config, args) -> int:
    scale = build_scale(cfg)
    criterion = cfg.get_str("check.criterion", "sufficient").strip().lower()
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    f = build_nonlinearities(cfg)
    if criterion in ("sufficient", "necessary"):
        family = _family(cfg, scale, args.family)
        if criterion == "sufficient":
            report = criterion_sufficient(f, family, reference=scale)
        else:
            override = (cfg.get_float("check.eval_point")
                        if "check.eval_point" in cfg else None)
            report = criterion_necessary(
                f, family, reference=scale, eval_point_override=override
            )
        _emit(_json_lines(_criterion_records(report)), args.out)
        return _verdict_exit(report.verdict)
    component = cfg.get_int("check.component", 1)
    if not 1 <= component <= len(f):
        raise ConfigError(f"component {component} outside 1..{len(f)}",
                          key="check.component", line=cfg.line("check.component"))
    fi = f[component - 1]
    samples = cfg.get_int("check.samples", 0)
    if criterion == "scaling":
        report = check_scaling_exponents(
            fi, scale, samples=samples or 64, seed=seed
        )
        _emit(_json_lines([{
            "ok": report.ok, "shape_ok": report.shape_ok,
            "checked": report.checked, "witness": report.witness,
            "notes": list(report.notes),
        }]), args.out)
        return _EXIT_OK if report.ok else _EXIT_FAIL
    if criterion == "monotone":
        report = check_monotone_in_state(
            fi, scale, samples=samples or 200, seed=seed
        )
        _emit(_json_lines([{
            "ok": report.ok, "checked": report.checked,
            "witness": report.witness,
        }]), args.out)
        return _EXIT_OK if report.ok else _EXIT_FAIL
    if criterion == "lipschitz":
        band = cfg.get_floats("check.band", (0.1, 1.0))
        if len(band) != 2:
            raise ConfigError("expected 'lo,hi'", key="check.band",
                              line=cfg.line("check.band"))
        report = check_lipschitz_bound(
            fi, scale, (band[0], band[1]), samples=samples or 400, seed=seed
        )
        _emit(_json_lines([{
            "bound": report.bound, "checked": report.checked, "at": report.at,
        }]), args.out)
        return _EXIT_OK
    raise ConfigError(
        f"expected sufficient, necessary, scaling, monotone, or lipschitz, "
        f"got {criterion!r}",
        key="check.criterion", line=cfg.line("check.criterion"),
    )


def _solve_config(cfg: Config) -> SolveConfig:
    mode = None
    if "solve.rhs_mode" in cfg:
        mode = cfg.get_enum("solve.rhs_mode", RhsMode, None)
    return SolveConfig(
        tol_residual=cfg.get_float("solve.tol_residual", 1e-10),
        tol_step=cfg.get_float("solve.tol_step", 1e-12),
        max_iters=cfg.get_int("solve.max_iters", 10_000),
        damping=cfg.get_float("solve.damping", 1.0),
        rhs_mode=mode,
    )


def _cmd_solve(cfg: Config, args) -> int:
    problem = build_problem(cfg, build_scale(cfg))
    if args.strategy is not None:
        try:
            strategy = Strategy(args.strategy.strip().lower())
        except ValueError:
            raise ConfigError(
                f"expected one of {', '.join(s.value for s in Strategy)}, "
                f"got {args.strategy!r}", key="--strategy")
    else:
        strategy = cfg.get_enum("solve.strategy", Strategy, Strategy.PICARD)
    brackets = None
    bounds = None
    if cfg.get_bool("solve.use_bounds", True) and problem.is_positive_system:
        try:
            bounds = construct_bounds(problem)
            brackets = bounds.pair
        except (ShapeViolation, CriterionNotSatisfied) as exc:
            log.info("solving without bounds: %s", exc)
    report = solve(problem, strategy=strategy, brackets=brackets,
                   config=_solve_config(cfg))
    ts = problem.scale
    header = ["t"] + [f"u{i}" for i in range(1, problem.n_components + 1)]
    columns = [ts.points] + [report.solution.component(i)
                             for i in range(1, problem.n_components + 1)]
    if brackets is not None:
        for name, grid in (("alpha", brackets[0]), ("beta", brackets[1])):
            for i in range(1, problem.n_components + 1):
                header.append(f"{name}{i}")
                columns.append(grid.component(i))
    summary = [
        ("status", report.status.value),
        ("strategy", report.strategy.value),
        ("iterations", str(report.iterations)),
        ("residual", _fmt(report.final_residual)),
        ("bracket_respected", str(report.bracket_respected).lower()),
    ]
    if report.nest_trail is not None:
        summary.append(("nest_trail", ";".join(_fmt(v) for v in report.nest_trail)))
    summary.extend(("note", note) for note in report.notes)
    _emit(_csv(cfg, args, header, columns, summary), args.out)
    if report.status is Status.CONVERGED:
        return _EXIT_OK
    if report.status is Status.MAX_ITERS:
        return _EXIT_UNDECIDED
    return _EXIT_FAIL


def _cmd_bounds(cfg: Config, args) -> int:
    problem = build_problem(cfg, build_scale(cfg))
    kind = cfg.get_str("bounds.kind", "pair").strip().lower()
    if kind == "pair":
        pair = construct_bounds(problem)
    elif kind == "lower":
        pair = construct_lower(
            problem, cfg.get_enum("bounds.weight", LowerWeight,
                                  LowerWeight.DIAGONAL_DEGREE)
        )
    else:
        raise ConfigError(f"expected pair or lower, got {kind!r}",
                          key="bounds.kind", line=cfg.line("bounds.kind"))
    ts = problem.scale
    n = problem.n_components
    header = ["t"] + [f"alpha{i}" for i in range(1, n + 1)]
    columns = [ts.points] + [pair.alpha.component(i) for i in range(1, n + 1)]
    if pair.beta is not None:
        header += [f"beta{i}" for i in range(1, n + 1)]
        columns += [pair.beta.component(i) for i in range(1, n + 1)]
    summary = []
    for name, value in sorted(pair.constants.items()):
        if isinstance(value, tuple):
            for i, v in enumerate(value, start=1):
                summary.append((f"{name}.{i}", _fmt(v)))
        else:
            summary.append((name, _fmt(value)))
    ok = True
    lower_report = verify_lower(problem, pair.alpha)
    summary.append(("verify_lower.ok", str(lower_report.ok).lower()))
    summary.append(("verify_lower.worst", _fmt(lower_report.worst)))
    ok &= lower_report.ok
    if pair.beta is not None:
        upper_report = verify_upper(problem, pair.beta)
        summary.append(("verify_upper.ok", str(upper_report.ok).lower()))
        summary.append(("verify_upper.worst", _fmt(upper_report.worst)))
        ok &= upper_report.ok
    summary.extend(("note", note) for note in pair.notes)
    _emit(_csv(cfg, args, header, columns, summary), args.out)
    return _EXIT_OK if ok else _EXIT_FAIL


def _cmd_quadrature(cfg: Config, args) -> int:
    scale = build_scale(cfg)
    f = build_nonlinearities(cfg)
    weight = cfg.get_str("quadrature.weight", "plain").strip().lower()
    if weight not in ("plain", "necessary", "envelope"):
        raise ConfigError(f"expected plain, necessary, or envelope, got {weight!r}",
                          key="quadrature.weight", line=cfg.line("quadrature.weight"))
    override = (cfg.get_float("check.eval_point")
                if "check.eval_point" in cfg else None)
    family = _family(cfg, scale, args.family)
    report = family_quadrature(f, family, reference=scale, weight=weight,
                               eval_point_override=override)
    records = [
        {"points": size, "integrals": [trail[m] for trail in report.trails]}
        for m, size in enumerate(report.scale_sizes)
    ]
    records.extend(_criterion_records(report))
    _emit(_json_lines(records), args.out)
    return _verdict_exit(report.verdict)


# --- entry point -----------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsdyn",
        description="Dirichlet problems on finite time-scale realizations",
    )
    parser.add_argument("--version", action="version", version=f"tsdyn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in (
        ("check", "run a solvability criterion or hypothesis check"),
        ("solve", "solve the Dirichlet problem"),
        ("bounds", "construct and verify lower/upper bounds"),
        ("quadrature", "dump the refinement-family quadrature trail"),
    ):
        p = sub.add_parser(name, help=blurb)
        p.add_argument("config", help="path to a key = value configuration file")
        p.add_argument("--out", default=None, help="write results to this file")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for sampled checks")
        p.add_argument("--strategy", default=None,
                       help="override the solve strategy")
        p.add_argument("--family", default=None,
                       help="override the refinement family (sizes or depths)")
    return parser


def _setup_logging() -> None:
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    name = os.environ.get("TSDYN_LOG", "error").strip().lower()
    logging.basicConfig(
        level=level.get(name, logging.ERROR),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


_HANDLERS = {
    "check": _cmd_check,
    "solve": _cmd_solve,
    "bounds": _cmd_bounds,
    "quadrature": _cmd_quadrature,
}


def main(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return _EXIT_OK if exc.code in (0, None) else _EXIT_CONFIG
    try:
        cfg = read_config(args.config)
        return _HANDLERS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"tsdyn: configuration error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except TsdynError as exc:
        print(f"tsdyn: {exc}", file=sys.stderr)
        return _EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

"""Solvers for the discrete Dirichlet problem.

Every strategy works on the fixed-point form ``u = phi + G f(., u^sigma)``
where ``phi`` is the affine interpolant of the boundary values and ``G`` the
kernel solve.  When a lower/upper pair is supplied, the state fed to ``f``
can be clamped into the band (``TRUNCATED``) or clamped plus a bounded
correction term that pushes escaped iterates back (``MODIFIED``); ``RAW``
evaluates as-is.  Reported residuals always use the raw right hand side, so
a report can only claim convergence on the original problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .calculus import GridFunction, delta_second
from .errors import (
    BracketViolation,
    DomainViolation,
    NonFiniteResult,
    SupportMismatch,
    TooFewPoints,
)
from .green import affine_interpolant, green_apply
from .model import DirichletProblem, rhs_matrix
from .timescale import from_points

#: Iterates or residuals beyond this magnitude are declared divergent.
DIVERGENCE_LIMIT = 1e12

#: Picard damping is halved after this many non-improving steps, down to 1/64.
_STALL_STREAK = 5
_MIN_DAMPING = 1.0 / 64.0
_LINE_SEARCH_HALVINGS = 40


class Strategy(Enum):
    PICARD = "picard"
    MONOTONE_UP = "monotone_up"
    MONOTONE_DOWN = "monotone_down"
    NEWTON_ORACLE = "newton_oracle"
    TRUNCATED_NEST = "truncated_nest"


class Status(Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    DIVERGED = "diverged"


class RhsMode(Enum):
    MODIFIED = "modified"
    TRUNCATED = "truncated"
    RAW = "raw"


@dataclass(frozen=True)
class SolveConfig:
    tol_residual: float = 1e-10
    tol_step: float = 1e-12
    max_iters: int = 10_000
    damping: float = 1.0
    rhs_mode: RhsMode | None = None  # resolved per strategy when left unset


@dataclass(frozen=True)
class SolveReport:
    solution: GridFunction
    strategy: Strategy
    status: Status
    iterations: int
    final_residual: float
    bracket_respected: bool
    nest_trail: tuple[float, ...] | None = None
    notes: tuple[str, ...] = ()

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


def clamp_to_band(
    u: GridFunction, alpha: GridFunction, beta: GridFunction
) -> GridFunction:
    """Clip ``u`` pointwise into ``[alpha, beta]`` on ``u``'s support."""
    lo = alpha.restrict(u.lo, u.hi).values
    hi = beta.restrict(u.lo, u.hi).values
    return GridFunction(u.scale, np.clip(u.values, lo, hi), u.lo, u.hi)


def _check_brackets(problem: DirichletProblem, brackets) -> tuple:
    alpha, beta = brackets
    N = problem.scale.last_index
    for g in (alpha, beta):
        if g.lo > 0 or g.hi < N:
            raise SupportMismatch("brackets must cover the whole realization")
        if g.n_components != problem.n_components:
            raise SupportMismatch("bracket component count differs from the system")
    if np.any(alpha.values > beta.values):
        bad = int(np.argwhere(alpha.values > beta.values)[0][0])
        raise BracketViolation(bad)
    return alpha, beta


def _resolve_mode(
    strategy: Strategy, config: SolveConfig, has_brackets: bool
) -> RhsMode:
    if strategy in (Strategy.MONOTONE_UP, Strategy.MONOTONE_DOWN):
        # bracket preservation of the iteration map is only exact without
        # the correction term, so monotone runs always truncate
        return RhsMode.TRUNCATED
    if config.rhs_mode is not None:
        return config.rhs_mode
    return RhsMode.MODIFIED if has_brackets else RhsMode.RAW


def regularized_rhs(
    problem: DirichletProblem,
    u: GridFunction,
    brackets=None,
    mode: RhsMode = RhsMode.RAW,
) -> GridFunction:
    """Right-hand-side grid ``f*(t_k, u^sigma)`` on the equation points.

    With a band, states are clamped into it; ``MODIFIED`` adds the bounded
    correction ``(d - x) / (1 + |d - x|)`` per component, which vanishes
    exactly on in-band iterates.
    """
    ts = problem.scale
    N = ts.last_index
    if u.lo > 0 or u.hi < N:
        raise SupportMismatch("iterate must cover the whole realization")
    shifted = u.values[1 - u.lo : N - u.lo]
    if mode is not RhsMode.RAW:
        if brackets is None:
            raise BracketViolation(-1, f"{mode.value} evaluation needs brackets")
        alpha, beta = brackets
        states = np.clip(
            shifted, alpha.values[1 : N - alpha.lo], beta.values[1 : N - beta.lo]
        )
    else:
        states = shifted
    vals, _ = rhs_matrix(problem, states)
    if mode is RhsMode.MODIFIED:
        gap = states - shifted
        vals = vals + gap / (1.0 + np.abs(gap))
    return GridFunction.from_values(ts, vals, lo=0)


def apply_green_operator(
    problem: DirichletProblem,
    u: GridFunction,
    brackets=None,
    mode: RhsMode = RhsMode.RAW,
) -> GridFunction:
    """One application of ``u -> phi + G f*(., u^sigma)``."""
    ts = problem.scale
    rhs = regularized_rhs(problem, u, brackets, mode)
    base = affine_interpolant(ts, problem.boundary_left, problem.boundary_right)
    return base + green_apply(ts, rhs)


def residual_norm(problem: DirichletProblem, u: GridFunction) -> float:
    """Max-norm defect of ``-u^DD = f(., u^sigma)`` over the equation points.

    Uses the raw right hand side; an iterate outside ``f``'s domain scores
    infinity rather than raising.
    """
    try:
        rhs = regularized_rhs(problem, u, mode=RhsMode.RAW)
    except (DomainViolation, NonFiniteResult):
        return math.inf
    lhs = -delta_second(u)
    return float(np.max(np.abs(lhs.values - rhs.values)))


def _bracket_slack(alpha: GridFunction, beta: GridFunction) -> float:
    return 1e-8 * max(1.0, alpha.max_abs(), beta.max_abs())


def _bracket_respected(u: GridFunction, brackets) -> bool:
    if brackets is None:
        return True
    alpha, beta = brackets
    slack = _bracket_slack(alpha, beta)
    return bool(
        np.all(u.values >= alpha.values - slack)
        and np.all(u.values <= beta.values + slack)
    )


def _interpolant(problem: DirichletProblem) -> GridFunction:
    return affine_interpolant(
        problem.scale, problem.boundary_left, problem.boundary_right
    )


def solve(
    problem: DirichletProblem,
    *,
    strategy: Strategy = Strategy.PICARD,
    brackets=None,
    config: SolveConfig | None = None,
) -> SolveReport:
    """Solve the Dirichlet problem with the chosen strategy.

    ``brackets`` is an optional ``(alpha, beta)`` pair of grid functions on
    the full realization; monotone and nested strategies require it.  The
    report's status is ``CONVERGED`` only when the raw residual meets the
    tolerance and the solution respects the band.
    """
    config = config or SolveConfig()
    if brackets is not None:
        brackets = _check_brackets(problem, brackets)
    mode = _resolve_mode(strategy, config, brackets is not None)
    if strategy is Strategy.PICARD:
        return _picard(problem, brackets, mode, config)
    if strategy in (Strategy.MONOTONE_UP, Strategy.MONOTONE_DOWN):
        return _monotone(problem, brackets, config, strategy)
    if strategy is Strategy.NEWTON_ORACLE:
        return _newton(problem, brackets, mode, config)
    if strategy is Strategy.TRUNCATED_NEST:
        return _nested(problem, brackets, config)
    raise ValueError(f"unknown strategy {strategy!r}")


def _start_iterate(problem: DirichletProblem, brackets) -> GridFunction:
    if brackets is None:
        return _interpolant(problem)
    alpha, beta = brackets
    mid = 0.5 * (alpha.values + beta.values)
    mid = np.array(mid)
    mid[0] = problem.boundary_left
    mid[-1] = problem.boundary_right
    return GridFunction(problem.scale, mid, 0, problem.scale.last_index)


def _picard(problem, brackets, mode, config, strategy=Strategy.PICARD):
    u = _start_iterate(problem, brackets)
    theta = config.damping
    best = math.inf
    streak = 0
    notes: list[str] = []
    residual = math.inf
    status = Status.MAX_ITERS
    it = 0
    for it in range(1, config.max_iters + 1):
        try:
            image = apply_green_operator(problem, u, brackets, mode)
            mixed = (1.0 - theta) * u.values + theta * image.values
            u_next = GridFunction(problem.scale, mixed, 0, problem.scale.last_index)
        except (DomainViolation, NonFiniteResult) as exc:
            notes.append(f"iteration {it}: {exc}")
            status = Status.DIVERGED
            break
        step = float(np.max(np.abs(u_next.values - u.values)))
        u = u_next
        residual = residual_norm(problem, u)
        if residual <= config.tol_residual and _bracket_respected(u, brackets):
            status = Status.CONVERGED
            break
        if u.max_abs() > DIVERGENCE_LIMIT or residual > DIVERGENCE_LIMIT:
            notes.append(f"iteration {it}: residual {residual:.3e}")
            status = Status.DIVERGED
            break
        if residual < best:
            best = residual
            streak = 0
        else:
            streak += 1
            if streak >= _STALL_STREAK and theta > _MIN_DAMPING:
                theta = max(0.5 * theta, _MIN_DAMPING)
                streak = 0
                notes.append(f"iteration {it}: damping reduced to {theta:g}")
        if step <= config.tol_step * max(1.0, u.max_abs()):
            notes.append(f"iteration {it}: step stalled at {step:.3e}")
            break
    return SolveReport(
        solution=u,
        strategy=strategy,
        status=status,
        iterations=it,
        final_residual=residual,
        bracket_respected=_bracket_respected(u, brackets),
        notes=tuple(notes),
    )


def _monotone(problem, brackets, config, strategy):
    if brackets is None:
        raise BracketViolation(
            -1, "monotone iteration needs a lower and an upper solution"
        )
    upward = strategy is Strategy.MONOTONE_UP
    u = brackets[0] if upward else brackets[1]
    notes: list[str] = []
    residual = residual_norm(problem, u)
    status = Status.MAX_ITERS
    it = 0
    for it in range(1, config.max_iters + 1):
        try:
            v = apply_green_operator(problem, u, brackets, RhsMode.TRUNCATED)
        except (DomainViolation, NonFiniteResult) as exc:
            notes.append(f"iteration {it}: {exc}")
            status = Status.DIVERGED
            break
        drift = v.values - u.values if upward else u.values - v.values
        slack = 1e-12 * max(1.0, u.max_abs(), v.max_abs())
        if np.min(drift) < -slack:
            k, i = np.unravel_index(int(np.argmin(drift)), drift.shape)
            notes.append(
                f"iteration {it}: monotonicity violated by {-np.min(drift):.3e} "
                f"at index {k}, component {i + 1}"
            )
            status = Status.DIVERGED
            break
        step = float(np.max(np.abs(drift)))
        u = v
        residual = residual_norm(problem, u)
        if residual <= config.tol_residual and _bracket_respected(u, brackets):
            status = Status.CONVERGED
            break
        if step <= config.tol_step * max(1.0, u.max_abs()):
            notes.append(f"iteration {it}: step stalled at {step:.3e}")
            break
    return SolveReport(
        solution=u,
        strategy=strategy,
        status=status,
        iterations=it,
        final_residual=residual,
        bracket_respected=_bracket_respected(u, brackets),
        notes=tuple(notes),
    )


def _system_map(problem, brackets, mode):
    """Residual map F(z) = 0 of the full discrete system, z component-major."""
    ts = problem.scale
    N = ts.last_index
    n = problem.n_components
    mu = ts.mu
    left = np.asarray(problem.boundary_left)
    right = np.asarray(problem.boundary_right)
    if brackets is not None:
        clip_lo = brackets[0].values[1:N]
        clip_hi = brackets[1].values[1:N]

    def F(z: np.ndarray) -> np.ndarray:
        vals = z.reshape((N + 1, n), order="F")
        shifted = vals[1:N]
        if mode is not RhsMode.RAW and brackets is not None:
            states = np.clip(shifted, clip_lo, clip_hi)
        else:
            states = shifted
        fvals, _ = rhs_matrix(problem, states)
        if mode is RhsMode.MODIFIED:
            gap = states - shifted
            fvals = fvals + gap / (1.0 + np.abs(gap))
        d1 = np.diff(vals, axis=0) / mu[:, None]
        d2 = np.diff(d1, axis=0) / mu[: N - 1, None]
        eq = -d2 - fvals
        rows = [
            np.concatenate(([vals[0, i] - left[i]], eq[:, i], [vals[N, i] - right[i]]))
            for i in range(n)
        ]
        return np.concatenate(rows)

    return F


def _newton(problem, brackets, mode, config):
    if mode is not RhsMode.RAW and brackets is None:
        raise BracketViolation(-1, f"{mode.value} evaluation needs brackets")
    ts = problem.scale
    N = ts.last_index
    n = problem.n_components
    dim = (N + 1) * n
    F = _system_map(problem, brackets, mode)
    u = _start_iterate(problem, brackets)
    z = u.values.flatten(order="F")
    notes: list[str] = []
    status = Status.MAX_ITERS
    it = 0

    def clipped(zv: np.ndarray) -> np.ndarray:
        vals = zv.reshape((N + 1, n), order="F")
        vals = np.array(vals)
        if brackets is not None:
            vals = np.clip(vals, brackets[0].values, brackets[1].values)
        vals[0] = problem.boundary_left
        vals[-1] = problem.boundary_right
        return vals.flatten(order="F")

    def safe_norm(zv: np.ndarray) -> float:
        try:
            fz = F(zv)
        except (DomainViolation, NonFiniteResult):
            return math.inf
        if not np.all(np.isfinite(fz)):
            return math.inf
        return float(np.max(np.abs(fz)))

    residual = math.inf
    for it in range(1, config.max_iters + 1):
        u = GridFunction(ts, z.reshape((N + 1, n), order="F"), 0, N)
        residual = residual_norm(problem, u)
        if residual <= config.tol_residual and _bracket_respected(u, brackets):
            status = Status.CONVERGED
            break
        try:
            Fz = F(z)
        except (DomainViolation, NonFiniteResult) as exc:
            notes.append(f"iteration {it}: {exc}")
            status = Status.DIVERGED
            break
        J = np.empty((dim, dim))
        for j in range(dim):
            h = 1e-6 * max(1.0, abs(z[j]))
            zp = np.array(z)
            zm = np.array(z)
            zp[j] += h
            zm[j] -= h
            try:
                J[:, j] = (F(zp) - F(zm)) / (2.0 * h)
            except (DomainViolation, NonFiniteResult):
                # fall back to a one-sided difference toward the iterate
                J[:, j] = (F(z) - F(zm)) / h
        try:
            direction = np.linalg.solve(J, -Fz)
        except np.linalg.LinAlgError:
            notes.append(f"iteration {it}: singular jacobian")
            status = Status.DIVERGED
            break
        base = float(np.max(np.abs(Fz)))
        lam = 1.0
        accepted = False
        for _ in range(_LINE_SEARCH_HALVINGS + 1):
            z_try = clipped(z + lam * direction)
            if safe_norm(z_try) < base:
                z = z_try
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            notes.append(f"iteration {it}: line search failed at |F| = {base:.3e}")
            break
    return SolveReport(
        solution=u,
        strategy=Strategy.NEWTON_ORACLE,
        status=status,
        iterations=it,
        final_residual=residual,
        bracket_respected=_bracket_respected(u, brackets),
        notes=tuple(notes),
    )


def _nested(problem, brackets, config):
    """Solve a nest of centered truncations, widening back to the full scale.

    Each level keeps indices ``k .. N-k`` of the realization, pins the
    truncated boundary to the band midpoints there, and runs the damped
    fixed-point iteration.  The reported residual is the widest level's own
    residual; the trail records max-abs changes between consecutive levels
    on shared indices.
    """
    if brackets is None:
        raise BracketViolation(-1, "nested truncation needs a band for its boundaries")
    ts = problem.scale
    N = ts.last_index
    k_max = (N - 3) // 2
    if k_max < 1:
        raise TooFewPoints("nested truncation needs at least six points")
    alpha, beta = brackets
    trail: list[float] = []
    notes: list[str] = []
    prev = None
    total_iters = 0
    sub_report = None
    for k in range(k_max, 0, -1):
        sub_ts = from_points(ts.points[k : N - k + 1])
        sub_alpha = GridFunction.from_values(sub_ts, alpha.values[k : N - k + 1])
        sub_beta = GridFunction.from_values(sub_ts, beta.values[k : N - k + 1])
        mid_left = 0.5 * (sub_alpha.values[0] + sub_beta.values[0])
        mid_right = 0.5 * (sub_alpha.values[-1] + sub_beta.values[-1])
        sub_problem = DirichletProblem(
            sub_ts, problem.f, tuple(mid_left), tuple(mid_right)
        )
        sub_report = _picard(
            sub_problem,
            (sub_alpha, sub_beta),
            RhsMode.MODIFIED,
            config,
            strategy=Strategy.TRUNCATED_NEST,
        )
        total_iters += sub_report.iterations
        notes.append(
            f"level {k}: {sub_ts.npoints} points, {sub_report.iterations} iterations, "
            f"residual {sub_report.final_residual:.3e}"
        )
        if prev is not None:
            # current level rows 1..-2 sit on the previous level's indices
            trail.append(
                float(np.max(np.abs(sub_report.solution.values[1:-1] - prev)))
            )
        prev = sub_report.solution.values
    assembled = np.empty((N + 1, problem.n_components))
    assembled[0] = problem.boundary_left
    assembled[-1] = problem.boundary_right
    assembled[1:N] = prev
    solution = GridFunction(ts, assembled, 0, N)
    return SolveReport(
        solution=solution,
        strategy=Strategy.TRUNCATED_NEST,
        status=sub_report.status,
        iterations=total_iters,
        final_residual=sub_report.final_residual,
        bracket_respected=_bracket_respected(solution, brackets),
        nest_trail=tuple(trail),
        notes=tuple(notes),
    )

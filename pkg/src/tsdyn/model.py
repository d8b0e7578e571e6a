"""Problem data: nonlinearities with declared scaling degrees, and the
Dirichlet boundary value problem they feed.

A :class:`Nonlinearity` wraps one component ``f_i(t, x1..xn)`` of the system
right hand side together with a two-sided bracket on its homogeneity degrees.
The bracket states that for every coordinate ``j`` and every ``0 < c <= 1``

    c**degree_high[j] * f(t, x)  <=  f(t, x with x_j*c)  <=  c**degree_low[j] * f(t, x)

with the two comparisons swapped for ``c >= 1``.  A pure power ``x_j**g``
sits on both edges with ``degree_low[j] == degree_high[j] == g``; genuinely
strict brackets are what the shape constraints below ask for.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    DomainViolation,
    NonFiniteResult,
    ShapeViolation,
    UnknownVariable,
)
from .expressions import ExpressionTree, parse_expression
from .timescale import TimeScale

Body = Union[ExpressionTree, Callable[[float, Sequence[float]], float]]

#: States below this are outside every nonlinearity's declared domain.
DEFAULT_DOMAIN_FLOOR = 1e-12


def _fmt_exponent(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


@dataclass(frozen=True)
class Nonlinearity:
    """One component of the system right hand side.

    ``component_index`` is 1-based and selects which degree-bracket entries
    are "diagonal" for the shape constraints.  ``body`` is either a parsed
    expression in ``t, x1..xn`` or any callable ``(t, x) -> float``.
    """

    arity: int
    component_index: int
    body: Body
    degree_low: tuple[float, ...]
    degree_high: tuple[float, ...]
    domain_floor: float = DEFAULT_DOMAIN_FLOOR

    def __post_init__(self):
        if self.arity < 1:
            raise DimensionMismatch("arity must be at least 1")
        if not 1 <= self.component_index <= self.arity:
            raise DimensionMismatch(
                f"component index {self.component_index} outside 1..{self.arity}"
            )
        object.__setattr__(self, "degree_low", tuple(float(v) for v in self.degree_low))
        object.__setattr__(self, "degree_high", tuple(float(v) for v in self.degree_high))
        if len(self.degree_low) != self.arity or len(self.degree_high) != self.arity:
            raise DimensionMismatch(
                f"degree rows must have {self.arity} entries, got "
                f"{len(self.degree_low)} and {len(self.degree_high)}"
            )
        if isinstance(self.body, ExpressionTree):
            used = self.body.max_state_index()
            if used > self.arity:
                raise UnknownVariable(
                    f"expression uses x{used} but arity is {self.arity}"
                )
        if not self.domain_floor > 0.0:
            raise DomainViolation("domain floor must be positive")

    @classmethod
    def from_expression(
        cls,
        text: str,
        *,
        arity: int,
        component_index: int = 1,
        degree_low: Sequence[float] | None = None,
        degree_high: Sequence[float] | None = None,
    ) -> "Nonlinearity":
        """Parse ``text``; missing degree rows default to all zeros."""
        zeros = (0.0,) * arity
        return cls(
            arity=arity,
            component_index=component_index,
            body=parse_expression(text),
            degree_low=tuple(degree_low) if degree_low is not None else zeros,
            degree_high=tuple(degree_high) if degree_high is not None else zeros,
        )

    def evaluate(self, t: float, x: Sequence[float]) -> float:
        if len(x) != self.arity:
            raise DimensionMismatch(
                f"expected {self.arity} state values, got {len(x)}"
            )
        if isinstance(self.body, ExpressionTree):
            return self.body.evaluate(t, x)
        try:
            v = float(self.body(t, x))
        except ZeroDivisionError as exc:
            raise DomainViolation(str(exc) or "division by zero") from exc
        except ValueError as exc:
            raise DomainViolation(str(exc) or "math domain error") from exc
        except OverflowError as exc:
            raise NonFiniteResult(str(exc) or "overflow") from exc
        if not np.isfinite(v):
            raise NonFiniteResult(f"nonlinearity evaluated to {v!r}")
        return v

    @property
    def diagonal_low(self) -> float:
        return self.degree_low[self.component_index - 1]

    @property
    def diagonal_high(self) -> float:
        return self.degree_high[self.component_index - 1]

    def validate_shape(self) -> None:
        """Enforce the strict shape constraints on the degree bracket.

        Diagonal entries must straddle zero with the upper edge below one;
        off-diagonal entries must be negative on both edges and strictly
        ordered.  Raises :class:`ShapeViolation` naming the first failure.
        """
        i = self.component_index - 1
        for j in range(self.arity):
            lo, hi = self.degree_low[j], self.degree_high[j]
            if not lo < hi:
                raise ShapeViolation(
                    f"degree bracket for x{j + 1} is not strictly ordered "
                    f"({lo:g} !< {hi:g})"
                )
            if j == i:
                if not (lo < 0.0 < hi < 1.0):
                    raise ShapeViolation(
                        f"diagonal bracket must satisfy low < 0 < high < 1, "
                        f"got ({lo:g}, {hi:g})"
                    )
            elif not hi < 0.0:
                raise ShapeViolation(
                    f"off-diagonal bracket for x{j + 1} must stay negative, "
                    f"upper edge is {hi:g}"
                )


def emden_fowler(
    exponents: Sequence[float],
    *,
    component_index: int = 1,
    coefficient: float = 1.0,
    t_power: float = 0.0,
) -> Nonlinearity:
    """Separable power nonlinearity ``c * t^p * x1^g1 * ... * xn^gn``.

    The degree bracket collapses onto the exact exponents, so the scaling
    inequalities hold with equality and the strict shape constraints do not;
    widen the bracket by hand where a strict version is needed.
    """
    if not coefficient > 0.0:
        raise ShapeViolation("coefficient must be positive")
    exps = tuple(float(g) for g in exponents)
    parts = []
    if coefficient != 1.0 or (t_power == 0.0 and all(g == 0.0 for g in exps)):
        parts.append(_fmt_exponent(coefficient))
    if t_power != 0.0:
        parts.append("t" if t_power == 1.0 else f"t^{_fmt_exponent(t_power)}")
    for j, g in enumerate(exps, start=1):
        if g != 0.0:
            parts.append(f"x{j}" if g == 1.0 else f"x{j}^{_fmt_exponent(g)}")
    return Nonlinearity(
        arity=len(exps),
        component_index=component_index,
        body=parse_expression("*".join(parts)),
        degree_low=exps,
        degree_high=exps,
    )


@dataclass(frozen=True)
class DirichletProblem:
    """``-x^DD(t) = f(t, x^sigma(t))`` with pinned values at both ends.

    ``boundary_left`` pins each component at the first point and
    ``boundary_right`` at the last.  The positive-solution theory (bound
    construction, envelope displays) applies only when both vectors vanish;
    :attr:`is_positive_system` reports that.
    """

    scale: TimeScale
    f: tuple[Nonlinearity, ...]
    boundary_left: tuple[float, ...] = (0.0,)
    boundary_right: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        object.__setattr__(self, "f", tuple(self.f))
        n = len(self.f)
        if n == 0:
            raise DimensionMismatch("need at least one nonlinearity")
        for pos, fi in enumerate(self.f, start=1):
            if fi.arity != n:
                raise DimensionMismatch(
                    f"component {pos} declares arity {fi.arity}, system has {n}"
                )
            if fi.component_index != pos:
                raise DimensionMismatch(
                    f"component at position {pos} carries index {fi.component_index}"
                )
        left = tuple(float(v) for v in self.boundary_left)
        right = tuple(float(v) for v in self.boundary_right)
        if len(left) != n or len(right) != n:
            raise DimensionMismatch(
                f"boundary vectors must have {n} entries, got "
                f"{len(left)} and {len(right)}"
            )
        object.__setattr__(self, "boundary_left", left)
        object.__setattr__(self, "boundary_right", right)

    @property
    def n_components(self) -> int:
        return len(self.f)

    @property
    def is_positive_system(self) -> bool:
        return all(v == 0.0 for v in self.boundary_left + self.boundary_right)

    def evaluate_rhs(self, t: float, x: Sequence[float]) -> np.ndarray:
        return np.array([fi.evaluate(t, x) for fi in self.f], dtype=float)


def rhs_matrix(
    problem: DirichletProblem,
    states: np.ndarray,
    *,
    improper_head: bool = True,
) -> tuple[np.ndarray, tuple[int, ...]]:
    """Evaluate every ``f_i`` at the equation points ``k = 0 .. N-2``.

    ``states[k]`` is the state vector fed to row ``k`` (normally the
    sigma-shifted iterate).  A domain error in the first row only is the
    improper-cell case: that entry is recorded and replaced by zero, which
    truncates the offending graininess cell out of every quadrature built on
    top.  Errors at interior rows always propagate.
    """
    ts = problem.scale
    rows = ts.last_index - 1
    n = problem.n_components
    if states.shape != (rows, n):
        raise DimensionMismatch(
            f"states must have shape {(rows, n)}, got {states.shape}"
        )
    out = np.empty((rows, n), dtype=float)
    skipped: list[int] = []
    for k in range(rows):
        t = float(ts.points[k])
        for i in range(n):
            try:
                out[k, i] = problem.f[i].evaluate(t, states[k])
            except (DomainViolation, NonFiniteResult):
                if k == 0 and improper_head:
                    out[k, i] = 0.0
                    skipped.append(i + 1)
                else:
                    raise
    return out, tuple(skipped)

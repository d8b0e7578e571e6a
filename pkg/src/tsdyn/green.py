"""Green kernel for the two-point Dirichlet problem on a realization.

For the sign convention ``-u^DeltaDelta = h`` with ``u(a) = u(sigma^2(b)) = 0``
the kernel on a realization with span ``D = sigma^2(b) - a`` is

    G(t, s) = (t - a) (sigma^2(b) - sigma(s)) / D      if t <= sigma(s),
    G(t, s) = (sigma(s) - a) (sigma^2(b) - t) / D      if sigma(s) <= t.

The two formulas agree at the seam ``t = sigma(s)``; this module always takes
the first branch there so no float comparison can flip the choice.  The kernel
is piecewise affine in ``t`` with its only kink at the seam, which is why the
discrete identity ``-(G h)^DeltaDelta = h`` holds exactly at every equation
point ``k = 0..N-2``, not merely in a refinement limit.

``green_apply`` is a direct weighted summation, O(N^2).  That is the
production path on purpose: it is branch-free per row, deterministic, and
exact where it matters.  A banded linear solve is kept in the test suite as
an independent oracle, not here.
"""

from __future__ import annotations

import weakref

import numpy as np

from .calculus import GridFunction, delta_second
from .errors import IndexOutOfRange, SupportMismatch
from .timescale import TimeScale

#: Largest realization the construction self-check runs on (debug builds only).
_SELF_CHECK_MAX_N = 64

_checked_scales: "weakref.WeakSet[TimeScale]" = weakref.WeakSet()
_matrix_cache: "weakref.WeakKeyDictionary[TimeScale, np.ndarray]" = (
    weakref.WeakKeyDictionary()
)


def green_value(ts: TimeScale, t_idx: int, s_idx: int) -> float:
    """Kernel value G(p_{t_idx}, p_{s_idx}); ``s_idx`` ranges over 0..N-1."""
    N = ts.last_index
    if not 0 <= t_idx <= N:
        raise IndexOutOfRange(f"t index {t_idx} outside [0, {N}]")
    if not 0 <= s_idx <= N - 1:
        raise IndexOutOfRange(f"s index {s_idx} outside [0, {N - 1}]")
    pts = ts.points
    a, s2b = ts.a, ts.sigma2_b
    D = s2b - a
    t = float(pts[t_idx])
    sig_s = float(pts[s_idx + 1])
    if t <= sig_s:
        return (t - a) * (s2b - sig_s) / D
    return (sig_s - a) * (s2b - t) / D


def green_matrix(ts: TimeScale) -> np.ndarray:
    """Weighted kernel W[j, k] = mu_k * G(p_j, p_k) for k = 0..N-2.

    Cached per realization.  Applying W to right-hand-side samples is the
    delta integral of G(t, .) times the integrand over [a, sigma(b)).
    """
    cached = _matrix_cache.get(ts)
    if cached is not None:
        return cached
    pts = ts.points
    N = ts.last_index
    a, s2b = ts.a, ts.sigma2_b
    D = s2b - a
    t = pts[:, None]                      # (N+1, 1)
    sig_s = pts[1:N][None, :]             # sigma(p_k), k = 0..N-2
    first = (t - a) * (s2b - sig_s) / D
    second = (sig_s - a) * (s2b - t) / D
    W = np.where(t <= sig_s, first, second) * ts.mu[:N - 1][None, :]
    W.setflags(write=False)
    _matrix_cache[ts] = W
    if __debug__ and ts.npoints <= _SELF_CHECK_MAX_N + 1:
        _self_check(ts, W)
    return W


def green_apply(ts: TimeScale, h: GridFunction) -> GridFunction:
    """Solve -u^DeltaDelta = h with zero boundary values.

    ``h`` must cover the equation points 0..N-2; extra top entries are
    ignored.  Row sums run in a fixed pairwise order so results do not
    depend on thread count.
    """
    N = ts.last_index
    if h.lo > 0 or h.hi < N - 2:
        raise SupportMismatch(
            f"right-hand side must cover indices [0, {N - 2}], got [{h.lo}, {h.hi}]"
        )
    W = green_matrix(ts)
    rhs = h.values[: N - 1]
    out = np.empty((ts.npoints, rhs.shape[1]))
    for c in range(rhs.shape[1]):
        out[:, c] = np.sum(W * rhs[:, c][None, :], axis=1)
    out[0] = 0.0
    out[-1] = 0.0
    return GridFunction(ts, out, 0, N)


def affine_interpolant(ts: TimeScale, A, B) -> GridFunction:
    """Straight line through (a, A) and (sigma^2(b), B), one row per point."""
    Avec = np.atleast_1d(np.asarray(A, dtype=float))
    Bvec = np.atleast_1d(np.asarray(B, dtype=float))
    if Avec.shape != Bvec.shape:
        raise SupportMismatch("boundary vectors must have equal length")
    frac = (ts.points - ts.a) / ts.span
    vals = Avec[None, :] + (Bvec - Avec)[None, :] * frac[:, None]
    return GridFunction(ts, vals, 0, ts.last_index)


def envelope_weight(ts: TimeScale) -> GridFunction:
    """Scalar weight e(t) = (t - a)(sigma^2(b) - t) / (sigma^2(b) - a).

    e vanishes at both closed-interval endpoints and dominates every kernel
    column: G(t, s) <= e(t) for all s.
    """
    vals = (ts.points - ts.a) * (ts.sigma2_b - ts.points) / ts.span
    return GridFunction(ts, vals, 0, ts.last_index)


def _self_check(ts: TimeScale, W: np.ndarray) -> None:
    # One-off per realization: the discrete identity -(W h)^DD = h must hold
    # to roundoff for a generic h, and the boundary rows must vanish.  The
    # second difference amplifies float noise by 1/mu_min^2, so the check is
    # skipped on realizations where that noise floor would swamp it.
    if ts in _checked_scales:
        return
    _checked_scales.add(ts)
    amplification = (ts.span / float(np.min(ts.mu))) ** 2
    if amplification * 2.3e-16 > 1e-8:
        return
    N = ts.last_index
    rng = np.random.default_rng(0x5EED)
    h = rng.standard_normal(N - 1)
    u = np.sum(W * h[None, :], axis=1)
    assert abs(u[0]) == 0.0 and abs(u[-1]) == 0.0, "kernel must vanish at the ends"
    resid = delta_second(GridFunction(ts, u, 0, N)).values[:, 0] + h
    tol = 1e-6 * float(np.max(np.abs(h)))
    assert float(np.max(np.abs(resid))) <= tol, (
        "Green identity self-check failed on this realization"
    )

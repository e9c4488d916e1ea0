"""Shared quadrature helpers.

scipy.integrate.quad covers scalar real integrands well; the helpers here cover
the recurring patterns it does not: fixed-order Gauss rules applied to vectorized
integrands over graded cell lists (known singularity location, geometric
refinement toward it), power-law endpoint flattening, and an adaptive
Gauss-Kronrod rule for complex-valued line integrals.
"""

from __future__ import annotations

import heapq
import math

import numpy as np
from scipy.integrate import quad

__all__ = [
    "QuadratureError",
    "gauss_rule",
    "gauss_cells",
    "graded_edges",
    "gauss_graded",
    "integrate_power_endpoint",
    "quad_complex",
    "quad_scalar",
]


class QuadratureError(RuntimeError):
    """Raised when an integration routine cannot certify its tolerance."""


_RULE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1], cached per order."""
    if n not in _RULE_CACHE:
        _RULE_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _RULE_CACHE[n]


def gauss_cells(fn, edges, n: int = 15):
    """Integrate a vectorized integrand over the cells defined by `edges`.

    `edges` is an increasing 1-d array; cell i is [edges[i], edges[i+1]].
    Gauss nodes are strictly interior, so an integrable singularity sitting
    exactly on an edge is never evaluated.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2:
        return 0.0
    x, w = gauss_rule(n)
    a = edges[:-1]
    h = np.diff(edges)
    nodes = a[:, None] + (x[None, :] + 1.0) * (0.5 * h[:, None])
    vals = np.asarray(fn(nodes.ravel())).reshape(nodes.shape)
    return ((vals @ w) * (0.5 * h)).sum()


def graded_edges(a: float, b: float, focus: float, min_scale: float) -> np.ndarray:
    """Cell edges on [a, b], geometrically refined toward `focus`.

    Edge distances from `focus` double starting at `min_scale`; edges outside
    (a, b) are dropped, so a focus outside the interval just grades the near
    endpoint. `focus` itself becomes an edge when interior.
    """
    if not (b > a):
        raise ValueError("need a < b")
    if min_scale <= 0.0:
        raise ValueError("min_scale must be positive")
    out = {a, b}
    if a < focus < b:
        out.add(focus)
    d = min_scale
    dmax = max(abs(a - focus), abs(b - focus))
    while d < dmax:
        for s in (focus - d, focus + d):
            if a < s < b:
                out.add(s)
        d *= 2.0
    return np.array(sorted(out))


def _halve_cells(edges: np.ndarray) -> np.ndarray:
    mids = 0.5 * (edges[:-1] + edges[1:])
    return np.sort(np.concatenate([edges, mids]))


def gauss_graded(fn, a, b, focus, min_scale, n: int = 15, tol: float | None = None,
                 max_rounds: int = 3):
    """Graded-cell Gauss integration with an optional certified tolerance.

    With tol set, the result at order n is compared against order n+8; cells are
    halved until the two agree within tol (absolute or relative, whichever is
    looser), else QuadratureError.
    """
    edges = graded_edges(a, b, focus, min_scale)
    v1 = gauss_cells(fn, edges, n)
    if tol is None:
        return v1
    for _ in range(max_rounds):
        v2 = gauss_cells(fn, edges, n + 8)
        err = abs(v1 - v2)
        if err <= max(tol, tol * abs(v2)):
            return v2
        edges = _halve_cells(edges)
        v1 = gauss_cells(fn, edges, n)
    raise QuadratureError(f"graded Gauss rule stalled at error {err:.3e} (tol {tol:.3e})")


def integrate_power_endpoint(fn, a, b, p, side: str, n: int = 15,
                             tol: float | None = None):
    """Integrate fn over [a, b] with an |x-endpoint|^(-p) singularity, p < 1.

    Substituting x = endpoint +/- sigma^(1/(1-p)) turns the integrand into a
    bounded one:  dx = (1/(1-p)) sigma^(p/(1-p)) d sigma, and the product
    fn * dx/dsigma stays O(1) near sigma = 0. The sigma integral is then done
    on cells graded toward 0 (residual log-type variation is harmless there).
    """
    if not 0.0 <= p < 1.0:
        raise ValueError("power exponent must lie in [0, 1)")
    if side not in ("a", "b"):
        raise ValueError("side must be 'a' or 'b'")
    q = 1.0 / (1.0 - p)
    length = b - a
    smax = length ** (1.0 - p)

    # Nodes whose image rounds onto an endpoint would evaluate fn at the
    # singularity; their flattened contribution is O(sig_min) of the total,
    # so they are zeroed instead (fn is never called there).
    if side == "a":
        def g(sig):
            x = np.asarray(a + sig ** q)
            col = ~((x > a) & (x < b))
            vals = np.asarray(fn(np.where(col, 0.5 * (a + b), x)))
            return np.where(col, 0.0, vals * (q * sig ** (q - 1.0)))
    else:
        def g(sig):
            x = np.asarray(b - sig ** q)
            col = ~((x > a) & (x < b))
            vals = np.asarray(fn(np.where(col, 0.5 * (a + b), x)))
            return np.where(col, 0.0, vals * (q * sig ** (q - 1.0)))

    return gauss_graded(g, 0.0, smax, 0.0, smax * 1e-12, n=n, tol=tol)


# 15-point Kronrod rule with embedded 7-point Gauss (standard constants).
_XK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])
_G_IDX = np.array([1, 3, 5, 7, 9, 11, 13])


def _gk15(fn, a: float, b: float):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    vals = np.array([fn(mid + half * t) for t in _XK])
    ik = half * np.sum(_WK * vals)
    ig = half * np.sum(_WG * vals[_G_IDX])
    return ik, abs(ik - ig)


def quad_complex(fn, a: float, b: float, tol: float = 1e-12, limit: int = 400):
    """Adaptive Gauss-Kronrod integration of a scalar (possibly complex) fn.

    Returns (value, error_estimate); raises QuadratureError past `limit`
    subdivisions. Interval endpoints are never evaluated exactly unless they
    coincide with a Kronrod node image, so mild endpoint singularities that are
    merely large (not NaN) integrate cleanly.
    """
    if a == b:
        return 0.0 + 0.0j, 0.0
    val, err = _gk15(fn, a, b)
    heap = [(-err, a, b, val, err)]
    total = val
    total_err = err
    splits = 0
    while total_err > max(tol, tol * abs(total)) and splits < limit:
        neg, lo, hi, v, e = heapq.heappop(heap)
        m = 0.5 * (lo + hi)
        v1, e1 = _gk15(fn, lo, m)
        v2, e2 = _gk15(fn, m, hi)
        total += (v1 + v2) - v
        total_err += (e1 + e2) - e
        heapq.heappush(heap, (-e1, lo, m, v1, e1))
        heapq.heappush(heap, (-e2, m, hi, v2, e2))
        splits += 1
    if total_err > max(tol, tol * abs(total)):
        raise QuadratureError(
            f"complex GK15 stalled at error {total_err:.3e} (tol {tol:.3e})")
    return total, total_err


def quad_scalar(fn, a, b, tol: float = 1e-10, points=None, limit: int = 300) -> float:
    """scipy.integrate.quad with the error estimate promoted to an exception."""
    kw = {}
    if points is not None and math.isfinite(a) and math.isfinite(b):
        kw["points"] = points
    y, err = quad(fn, a, b, epsabs=tol, epsrel=tol, limit=limit, **kw)
    if err > 100.0 * max(tol, tol * abs(y)) + 1e-15:
        raise QuadratureError(f"quad error estimate {err:.3e} exceeds tol {tol:.3e}")
    return y

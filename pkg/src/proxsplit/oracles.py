"""Independent reference computations for verification.

Nothing here uses a closed-form proximity formula: proxes are found by
direct minimization of ``f(y) + ||x - y||^2 / (2 gamma)``, gradients by
central differences, and operators by materializing their matrices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .hilbert import LinOp, as_vector, inner, norm

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OracleReport:
    """Outcome of comparing a candidate against a reference value."""

    quantity: str
    reference: object
    candidate: object
    abs_error: float
    rel_error: float
    tol: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.quantity}: abs_err={self.abs_error:.3e} "
                f"rel_err={self.rel_error:.3e} tol={self.tol:.1e}")


def compare(quantity: str, reference, candidate, tol: float,
            relative: bool = False) -> OracleReport:
    """Build an :class:`OracleReport`; ``relative`` selects which error the
    tolerance applies to."""
    ref = np.asarray(reference, dtype=np.float64)
    cand = np.asarray(candidate, dtype=np.float64)
    abs_err = float(np.max(np.abs(ref - cand))) if ref.size else 0.0
    scale = float(np.max(np.abs(ref))) if ref.size else 0.0
    rel_err = abs_err / max(scale, 1e-300) if abs_err else 0.0
    err = rel_err if relative else abs_err
    return OracleReport(quantity, reference, candidate, abs_err, rel_err,
                        float(tol), bool(err <= tol))


def _value_fn(F) -> Callable:
    return F.value if hasattr(F, "value") else F


def _golden(obj: Callable, a: float, b: float, tol: float) -> float:
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = obj(c), obj(d)
    while abs(b - a) > tol * (1.0 + abs(c) + abs(d)):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = obj(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = obj(d)
    return 0.5 * (a + b)


def _golden_inf(obj: Callable, a: float, b: float, tol: float) -> tuple[float, float]:
    """Golden section for a convex function that may be ``inf`` outside an
    interval; returns the best evaluated ``(t, value)`` (value ``inf`` when
    no finite value was found)."""
    seen = {}

    def f(t):
        v = obj(t)
        seen[t] = v
        return v

    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol * (1.0 + abs(a) + abs(b)):
        if math.isinf(fc) and math.isinf(fd):
            ts = np.linspace(a, b, 17)
            vals = [f(t) for t in ts]
            k = int(np.argmin(vals))
            if math.isinf(vals[k]):
                break
            a, b = ts[max(k - 1, 0)], ts[min(k + 1, 16)]
            c = b - _INVPHI * (b - a)
            d = a + _INVPHI * (b - a)
            fc, fd = f(c), f(d)
        elif fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    f(0.5 * (a + b))
    t = min(seen, key=seen.get)
    return t, seen[t]


def _nested_min(obj: Callable, center: np.ndarray, width: float,
                tol: float) -> tuple[np.ndarray, float]:
    """Exact minimization of a convex function over a cube by nested golden
    sections; partial minimization preserves convexity at every level.

    Inner levels run to near machine precision: their error enters the
    outer objective as noise, and along a curved boundary an objective
    error ``e`` moves the outer minimizer by about ``sqrt(e)``.
    """
    d = center.size
    inner_tol = min(tol, 1e-14)
    # last (parent coordinate, solution) per level, for warm-started brackets
    last = {}

    def search(g, k, lo, hi):
        return _golden_inf(g, lo, hi, tol if k == 0 else inner_tol)

    def level(prefix: list, k: int):
        if k == d:
            return np.array(prefix), obj(np.array(prefix))
        best = {}

        def g(t):
            y, v = level(prefix + [t], k + 1)
            best[t] = y
            return v

        lo, hi = center[k] - width, center[k] + width
        prev = last.get(k)
        t = None
        if k > 0 and prev is not None:
            # the inner minimizer moves continuously with the outer point;
            # accept a narrow-bracket result only when it is interior
            w = 8.0 * abs(prefix[-1] - prev[0]) + 1e-9 * (1.0 + abs(prev[1]))
            a, b = max(lo, prev[1] - w), min(hi, prev[1] + w)
            if b - a < hi - lo:
                t, v = search(g, k, a, b)
                margin = 0.02 * (b - a)
                edge = (t - a < margin and a > lo) or (b - t < margin and b < hi)
                if edge or math.isinf(v):
                    t = None
        if t is None:
            t, v = search(g, k, lo, hi)
        if k > 0:
            last[k] = (prefix[-1], t)
        return best[t], v

    return level([], 0)


def prox_bruteforce_1d(phi, gamma: float, x: float, bracket=None,
                       tol: float = 1e-10, max_expand: int = 60) -> float:
    """Minimize ``phi(y) + (x - y)^2 / (2 gamma)`` over the real line.

    Golden-section search on a bracket that is doubled until the minimizer
    is interior, followed by a parabolic refinement that is kept only when
    it lowers the objective.

    Parameters
    ----------
    phi : ScalarFun or callable
        Convex function, finite near the minimizer.
    bracket : (float, float), optional
        Initial search interval; defaults to ``x +- max(1, |x|)``.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    f = _value_fn(phi)
    x = float(x)

    def obj(y):
        return float(f(np.float64(y))) + (x - y) ** 2 / (2.0 * gamma)

    if bracket is None:
        s = max(1.0, abs(x))
        a, b = x - s, x + s
    else:
        a, b = map(float, bracket)
    for _ in range(max_expand):
        y = _golden(obj, a, b, tol)
        margin = 1e-3 * (b - a)
        if y - a > margin and b - y > margin:
            break
        w = b - a
        a, b = a - w, b + w
    else:
        raise RuntimeError("could not bracket the minimizer")

    # parabolic polish through three nearby points
    h = 1e-5 * (1.0 + abs(y))
    f0, fm, fp = obj(y), obj(y - h), obj(y + h)
    curv = fp - 2.0 * f0 + fm
    if curv > 0:
        v = y - 0.5 * h * (fp - fm) / curv
        if abs(v - y) <= h and obj(v) <= f0:
            y = v
    return y


def _directions(d: int, rng: np.random.Generator, n_random: int) -> np.ndarray:
    base = [np.array(s, dtype=np.float64)
            for s in itertools.product((-1.0, 0.0, 1.0), repeat=d) if any(s)]
    base = [v / np.linalg.norm(v) for v in base]
    rand = rng.standard_normal((n_random, d))
    rand /= np.linalg.norm(rand, axis=1, keepdims=True)
    return np.vstack([np.array(base), rand, -rand])


def prox_bruteforce_nd(F, gamma: float, x, grid: int = 11, tol: float = 1e-9,
                       radius: float | None = None, seed: int = 0,
                       n_random: int | None = None, n_fail: int = 2,
                       polish: bool | None = None) -> np.ndarray:
    """Minimize ``F(y) + ||x - y||^2 / (2 gamma)`` for dimension <= 3.

    A coarse grid scan around ``x`` (enlarged until the best node is
    interior) seeds a pattern search over axis, diagonal and ``n_random``
    random directions; the step is halved after ``n_fail`` consecutive
    sweeps without improvement.  A nested golden-section search over a
    small cube around that point then removes the stalling that pattern
    search suffers along curved or oblique constraint boundaries.  The
    polish costs ``O(log(1/tol)^d)`` evaluations and is on by default only
    for ``d <= 2``.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    x = as_vector(x)
    shape = x.shape
    d = x.size
    if d > 3:
        raise ValueError("brute-force prox limited to dimension <= 3")
    f = _value_fn(F)
    xf = x.ravel()

    def obj(y):
        v = float(f(y.reshape(shape)))
        if not math.isfinite(v):
            return math.inf
        r = xf - y
        return v + float(r @ r) / (2.0 * gamma)

    r = radius if radius is not None else 1.0 + norm(x)
    axes = np.linspace(-1.0, 1.0, grid)
    for _ in range(40):
        pts = np.array(list(itertools.product(axes, repeat=d))) * r + xf
        vals = np.array([obj(p) for p in pts])
        k = int(np.argmin(vals))
        if not math.isfinite(vals[k]):
            r *= 2.0
            continue
        offset = np.abs(pts[k] - xf)
        if np.all(offset < r * (1.0 - 1e-12)):
            break
        r *= 2.0
    best, fbest = pts[k].copy(), vals[k]

    if polish is None:
        polish = d <= 2
    if n_random is None:
        n_random = 16 if d <= 2 else 8
    # fresh random directions on every sweep so that thin descent wedges
    # along constraint boundaries are eventually hit; when the exact polish
    # follows, the search only needs to land inside its cube
    rng = np.random.default_rng(seed)
    step = 2.0 * r / (grid - 1)
    stop = max(tol, 1e-3) if polish else tol
    while step > stop * (1.0 + np.linalg.norm(best)):
        failures = 0
        while failures < n_fail:
            improved = False
            for u in _directions(d, rng, n_random):
                cand = best + step * u
                fc = obj(cand)
                if fc < fbest:
                    best, fbest = cand, fc
                    improved = True
            failures = 0 if improved else failures + 1
        step *= 0.5

    if polish:
        # exact polish; widen the cube while the optimum sits on its boundary
        width = 1e-2 * (1.0 + np.linalg.norm(best))
        for _ in range(20):
            center = best
            y, v = _nested_min(obj, center, width, tol)
            if v <= fbest:
                best, fbest = y, v
            if not np.any(np.abs(y - center) > 0.98 * width):
                break
            width *= 4.0
    return best.reshape(shape)


def finite_diff_gradient(F, x, step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of a real-valued function."""
    f = _value_fn(F)
    x = as_vector(x)
    g = np.zeros_like(x)
    flat = g.reshape(-1)
    for k in range(x.size):
        e = np.zeros_like(x)
        e.reshape(-1)[k] = step
        flat[k] = (float(f(x + e)) - float(f(x - e))) / (2.0 * step)
    return g


def dense_reference(L: LinOp, max_dim: int = 64) -> np.ndarray:
    """Matrix of ``L`` on flattened vectors, built column by column."""
    n = math.prod(L.in_shape)
    if n > max_dim:
        raise ValueError(f"input dimension {n} exceeds max_dim={max_dim}")
    cols = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        cols.append(np.asarray(L.apply(e.reshape(L.in_shape))).ravel())
    return np.stack(cols, axis=1)


def adjoint_report(L: LinOp, n_pairs: int = 100, seed: int = 0,
                   tol: float = 1e-10) -> OracleReport:
    """Worst adjoint mismatch ``|<Lx, y> - <x, L*y>| / (||x|| ||y|| + 1)``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_pairs):
        x = rng.standard_normal(L.in_shape)
        y = rng.standard_normal(L.out_shape)
        gap = abs(inner(L.apply(x), y) - inner(x, L.apply_adjoint(y)))
        worst = max(worst, gap / (norm(x) * norm(y) + 1.0))
    return OracleReport("adjoint", 0.0, worst, worst, worst, tol, worst <= tol)


def prox_report(F, gamma: float, x, tol: float = 1e-5,
                scalar: bool = False) -> OracleReport:
    """Compare ``F.prox`` against brute-force minimization at ``(gamma, x)``."""
    if scalar:
        ref = prox_bruteforce_1d(F, gamma, float(x))
    else:
        ref = prox_bruteforce_nd(F, gamma, x)
    cand = F.prox(gamma, x)
    return compare(f"prox[{type(F).__name__}]", ref, cand, tol)


def gradient_report(F, x, tol: float = 1e-5, step: float = 1e-6) -> OracleReport:
    """Relative comparison of ``F.gradient`` with central differences."""
    ref = finite_diff_gradient(F, x, step)
    cand = F.gradient(x)
    abs_err = float(np.max(np.abs(ref - cand)))
    rel_err = norm(np.asarray(ref) - cand) / max(norm(ref), 1e-300)
    return OracleReport(f"gradient[{type(F).__name__}]", ref, cand, abs_err,
                        rel_err, tol, rel_err <= tol)

"""Convex functions with closed-form proximity operators.

Two layers:

* :class:`ScalarFun` -- convex functions of one real variable, evaluated
  entrywise on arrays (``value``, ``prox``, ``derivative``).
* :class:`ProxFun` -- convex functions on a vector space exposing
  ``value``, ``prox(gamma, x)`` and, for smooth functions, ``gradient`` and
  the Lipschitz constant ``lipschitz`` of the gradient.

Most smooth entries are built from a scalar even function composed with the
distance to a convex set; the prox then moves a point along the segment
joining it to its projection.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .convex_sets import ConvexSet
from .hilbert import LinOp, as_vector, norm, solve_normal


class NotSmoothError(TypeError):
    """Raised when the gradient of a nonsmooth function is requested."""


# ---------------------------------------------------------------------------
# Scalar functions
# ---------------------------------------------------------------------------

class ScalarFun:
    """Convex function on the real line, applied entrywise.

    Attributes
    ----------
    lipschitz : float or None
        Lipschitz constant of the derivative, ``None`` if not differentiable.
    subgrad_max_at_zero : float
        ``max of the subdifferential at 0`` (``0`` for smooth even functions,
        ``inf`` when the domain is ``{0}``).
    zero_domain : bool
        Whether the domain reduces to ``{0}``.
    even : bool
        Declared evenness; checked by sampling wherever it matters.
    """

    lipschitz: float | None = None
    subgrad_max_at_zero: float = 0.0
    zero_domain: bool = False
    even: bool = True

    @property
    def smooth(self) -> bool:
        return self.lipschitz is not None

    def value(self, xi):
        raise NotImplementedError

    def prox(self, gamma, xi):
        raise NotImplementedError

    def derivative(self, xi):
        raise NotSmoothError(f"{type(self).__name__} is not differentiable")


def _newton_prox(deriv: Callable, second: Callable | None, gamma, xi,
                 tol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
    """Root of ``p + gamma * deriv(p) = xi`` by bracketed Newton/bisection.

    The map is increasing, and ``[xi - gamma*deriv(xi), xi]`` (in either
    order) brackets the root because ``deriv`` is nondecreasing.
    """
    xi = np.asarray(xi, dtype=np.float64)
    gamma = np.broadcast_to(np.asarray(gamma, dtype=np.float64), xi.shape)
    a = xi - gamma * deriv(xi)
    lo, hi = np.minimum(a, xi), np.maximum(a, xi)
    p = 0.5 * (lo + hi)
    for _ in range(max_iter):
        F = p + gamma * deriv(p) - xi
        lo = np.where(F < 0, p, lo)
        hi = np.where(F > 0, p, hi)
        if second is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                step = p - F / (1.0 + gamma * second(p))
            ok = np.isfinite(step) & (step > lo) & (step < hi)
            p_new = np.where(ok, step, 0.5 * (lo + hi))
        else:
            p_new = 0.5 * (lo + hi)
        p_new = np.where(F == 0, p, p_new)
        width = hi - lo
        done = (width <= tol * (1.0 + np.abs(xi))) | (F == 0)
        p = p_new
        if np.all(done):
            break
    return p


class ZeroScalar(ScalarFun):
    lipschitz = 0.0

    def value(self, xi):
        return np.zeros_like(np.asarray(xi, dtype=np.float64))

    def prox(self, gamma, xi):
        return np.array(xi, dtype=np.float64)

    def derivative(self, xi):
        return np.zeros_like(np.asarray(xi, dtype=np.float64))


class Abs(ScalarFun):
    """``w |xi|``."""

    def __init__(self, weight: float = 1.0):
        if weight <= 0:
            raise ValueError("weight must be positive")
        self.weight = float(weight)
        self.subgrad_max_at_zero = self.weight

    def value(self, xi):
        return self.weight * np.abs(xi)

    def prox(self, gamma, xi):
        xi = np.asarray(xi, dtype=np.float64)
        return np.sign(xi) * np.maximum(np.abs(xi) - gamma * self.weight, 0.0)


def soft_threshold(x, t):
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


class Square(ScalarFun):
    """``w xi^2 / 2``."""

    def __init__(self, weight: float = 1.0):
        if weight <= 0:
            raise ValueError("weight must be positive")
        self.weight = float(weight)
        self.lipschitz = self.weight

    def value(self, xi):
        return 0.5 * self.weight * np.square(xi)

    def prox(self, gamma, xi):
        return np.asarray(xi, dtype=np.float64) / (1.0 + gamma * self.weight)

    def derivative(self, xi):
        return self.weight * np.asarray(xi, dtype=np.float64)


class Huber(ScalarFun):
    """Standard Huber function with threshold ``rho``."""

    lipschitz = 1.0

    def __init__(self, rho: float):
        if rho <= 0:
            raise ValueError("rho must be positive")
        self.rho = float(rho)

    def value(self, xi):
        a = np.abs(xi)
        r = self.rho
        return np.where(a > r, r * a - 0.5 * r * r, 0.5 * a * a)

    def prox(self, gamma, xi):
        xi = np.asarray(xi, dtype=np.float64)
        lin = np.abs(xi) > (gamma + 1.0) * self.rho
        return np.where(lin, xi - gamma * self.rho * np.sign(xi),
                        xi / (1.0 + gamma))

    def derivative(self, xi):
        return np.clip(np.asarray(xi, dtype=np.float64), -self.rho, self.rho)


class LogAbs(ScalarFun):
    """``w |xi| - ln(1 + w |xi|)``; derivative is ``w^2``-Lipschitz."""

    def __init__(self, omega: float):
        if omega <= 0:
            raise ValueError("omega must be positive")
        self.omega = float(omega)
        self.lipschitz = self.omega ** 2

    def value(self, xi):
        a = self.omega * np.abs(xi)
        return a - np.log1p(a)

    def prox(self, gamma, xi):
        xi = np.asarray(xi, dtype=np.float64)
        w = self.omega
        a = np.abs(xi)
        # positive root of w p^2 + (1 + gamma w^2 - w a) p - a = 0, written
        # without cancellation
        c = 1.0 + gamma * w * w - w * a
        disc = np.sqrt(c * c + 4.0 * w * a)
        with np.errstate(divide="ignore", invalid="ignore"):
            p = np.where(c > 0, 2.0 * a / (c + disc), (disc - c) / (2.0 * w))
        return np.sign(xi) * np.where(a > 0, p, 0.0)

    def derivative(self, xi):
        xi = np.asarray(xi, dtype=np.float64)
        return self.omega ** 2 * xi / (1.0 + self.omega * np.abs(xi))


class IndicatorZero(ScalarFun):
    """Indicator of ``{0}``; composing it with ``d_C`` gives ``iota_C``."""

    zero_domain = True
    subgrad_max_at_zero = math.inf

    def value(self, xi):
        xi = np.asarray(xi, dtype=np.float64)
        return np.where(xi == 0, 0.0, math.inf)

    def prox(self, gamma, xi):
        return np.zeros_like(np.asarray(xi, dtype=np.float64))


class Scaled(ScalarFun):
    """``c * phi`` for ``c > 0``."""

    def __init__(self, c: float, phi: ScalarFun):
        if c <= 0:
            raise ValueError("scale must be positive")
        self.c = float(c)
        self.phi = phi
        self.even = phi.even
        self.zero_domain = phi.zero_domain
        self.subgrad_max_at_zero = self.c * phi.subgrad_max_at_zero
        self.lipschitz = None if phi.lipschitz is None else self.c * phi.lipschitz

    def value(self, xi):
        return self.c * self.phi.value(xi)

    def prox(self, gamma, xi):
        return self.phi.prox(self.c * np.asarray(gamma), xi)

    def derivative(self, xi):
        return self.c * self.phi.derivative(xi)


class Vapnik(ScalarFun):
    """``psi(max(|xi| - eps, 0))`` for a smooth even ``psi``."""

    def __init__(self, psi: ScalarFun, eps: float):
        if eps <= 0:
            raise ValueError("eps must be positive")
        if not psi.smooth:
            raise ValueError("psi must be differentiable")
        self.psi = psi
        self.eps = float(eps)
        self.lipschitz = psi.lipschitz

    def value(self, xi):
        return self.psi.value(np.maximum(np.abs(xi) - self.eps, 0.0))

    def prox(self, gamma, xi):
        xi = np.asarray(xi, dtype=np.float64)
        a = np.abs(xi)
        out = (self.eps + self.psi.prox(gamma, a - self.eps)) * np.sign(xi)
        return np.where(a > self.eps, out, xi)

    def derivative(self, xi):
        xi = np.asarray(xi, dtype=np.float64)
        a = np.abs(xi)
        d = self.psi.derivative(a - self.eps) * np.sign(xi)
        return np.where(a > self.eps, d, 0.0)


class IntervalDistance(ScalarFun):
    """``psi(d_[lo, hi](xi))``; with ``psi = |.|^2/2`` and ``[1, inf)`` this
    is the squared hinge loss.  Not even unless the interval is symmetric."""

    def __init__(self, lo: float, hi: float, psi: ScalarFun | None = None):
        if lo > hi:
            raise ValueError("empty interval")
        self.lo, self.hi = float(lo), float(hi)
        self.psi = Square() if psi is None else psi
        self.even = (self.lo == -self.hi)
        self.lipschitz = self.psi.lipschitz
        self.subgrad_max_at_zero = 0.0 if lo <= 0 <= hi else math.nan

    def _proj(self, xi):
        return np.clip(xi, self.lo, self.hi)

    def value(self, xi):
        xi = np.asarray(xi, dtype=np.float64)
        return self.psi.value(np.abs(xi - self._proj(xi)))

    def prox(self, gamma, xi):
        xi = np.asarray(xi, dtype=np.float64)
        p = self._proj(xi)
        d = np.abs(xi - p)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(d > 0, self.psi.prox(gamma, d) / d, 1.0)
        return p + ratio * (xi - p)

    def derivative(self, xi):
        xi = np.asarray(xi, dtype=np.float64)
        r = xi - self._proj(xi)
        return self.psi.derivative(np.abs(r)) * np.sign(r)


class SmoothScalar(ScalarFun):
    """User-supplied smooth convex function; prox by guarded Newton.

    Parameters
    ----------
    value, derivative : callable
        Vectorized ``phi`` and ``phi'``.
    lipschitz : float
        Lipschitz constant of ``phi'``.
    second : callable, optional
        ``phi''`` to accelerate the root search.
    """

    def __init__(self, value: Callable, derivative: Callable, lipschitz: float,
                 second: Callable | None = None, even: bool = True):
        self._value = value
        self._deriv = derivative
        self._second = second
        self.lipschitz = float(lipschitz)
        self.even = even

    def value(self, xi):
        return self._value(np.asarray(xi, dtype=np.float64))

    def derivative(self, xi):
        return self._deriv(np.asarray(xi, dtype=np.float64))

    def prox(self, gamma, xi):
        return _newton_prox(self._deriv, self._second, gamma, xi)


def check_even(phi: ScalarFun, n: int = 20, rtol: float = 1e-12) -> bool:
    """Sample ``phi(xi) == phi(-xi)`` on ``n`` points spread over scales."""
    xi = np.geomspace(1e-3, 1e3, n)
    a, b = phi.value(xi), phi.value(-xi)
    same_inf = np.isinf(a) & np.isinf(b)
    with np.errstate(invalid="ignore"):
        close = np.abs(a - b) <= rtol * np.maximum(1.0, np.abs(a))
    return bool(np.all(same_inf | close))


# ---------------------------------------------------------------------------
# Functions on vector spaces
# ---------------------------------------------------------------------------

class ProxFun:
    """Convex function with a computable proximity operator.

    ``value`` returns ``math.inf`` outside the domain; :meth:`in_domain` is
    the explicit membership test callers should use before doing arithmetic
    with values.
    """

    shape: tuple[int, ...] | None = None
    lipschitz: float | None = None

    @property
    def smooth(self) -> bool:
        return self.lipschitz is not None

    def _check(self, x) -> np.ndarray:
        return as_vector(x, self.shape)

    def in_domain(self, x, tol: float = 1e-8) -> bool:
        return True

    def value(self, x) -> float:
        raise NotImplementedError

    def prox(self, gamma: float, x) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        raise NotSmoothError(f"{type(self).__name__} is not differentiable")


class ZeroFun(ProxFun):
    lipschitz = 0.0

    def __init__(self, shape=None):
        self.shape = None if shape is None else tuple(shape)

    def value(self, x):
        self._check(x)
        return 0.0

    def prox(self, gamma, x):
        return self._check(x).copy()

    def gradient(self, x):
        return np.zeros_like(self._check(x))


class Indicator(ProxFun):
    """Indicator function of a convex set; its prox is the projector."""

    def __init__(self, C: ConvexSet, tol: float = 1e-8):
        self.C = C
        self.shape = C.shape
        self.tol = tol

    def in_domain(self, x, tol=None):
        return self.C.contains(x, self.tol if tol is None else tol)

    def value(self, x):
        return 0.0 if self.in_domain(x) else math.inf

    def prox(self, gamma, x):
        return self.C.project(x)


class Scale(ProxFun):
    """``c * F`` for ``c > 0``."""

    def __init__(self, c: float, F: ProxFun):
        if c <= 0:
            raise ValueError("scale must be positive")
        self.c = float(c)
        self.F = F
        self.shape = F.shape
        self.lipschitz = None if F.lipschitz is None else self.c * F.lipschitz

    def in_domain(self, x, tol=1e-8):
        return self.F.in_domain(x, tol)

    def value(self, x):
        return self.c * self.F.value(x)

    def prox(self, gamma, x):
        return self.F.prox(self.c * gamma, x)

    def gradient(self, x):
        return self.c * self.F.gradient(x)


class L1BoxFun(ProxFun):
    """``w ||x||_1 + iota_box(x)``; prox is the box projector after soft
    thresholding."""

    def __init__(self, box: ConvexSet, weight: float = 1.0):
        self.box = box
        self.weight = float(weight)
        self.shape = box.shape

    def in_domain(self, x, tol=1e-8):
        return self.box.contains(x, tol)

    def value(self, x):
        x = self._check(x)
        if not self.in_domain(x):
            return math.inf
        return self.weight * float(np.abs(x).sum())

    def prox(self, gamma, x):
        return self.box.project(soft_threshold(self._check(x), gamma * self.weight))


class QuadTerm:
    """One term ``(alpha/2) ||P (L x - r)||^2`` where ``P`` projects onto the
    orthogonal complement of a subspace (``None``: the identity)."""

    def __init__(self, alpha: float, L: LinOp, r=None, perp: LinOp | None = None):
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        self.alpha = float(alpha)
        self.L = L
        self.r = np.zeros(L.out_shape) if r is None else as_vector(r, L.out_shape)
        self.perp = perp

    def residual(self, x):
        res = self.L.apply(x) - self.r
        return res if self.perp is None else self.perp.apply(res)


class QuadraticSubspace(ProxFun):
    """``h(x) = 1/2 sum_i alpha_i d^2_{V_i}(L_i x - r_i)``.

    Gradient ``sum_i alpha_i L_i^* P_i (L_i x - r_i)`` with ``P_i`` the
    projector onto the orthogonal complement of ``V_i``; prox
    ``Q(x + gamma sum_i alpha_i L_i^* P_i r_i)`` with
    ``Q = (Id + gamma sum_i alpha_i L_i^* P_i L_i)^{-1}``.
    """

    def __init__(self, terms: Sequence[QuadTerm]):
        self.terms = list(terms)
        if not self.terms:
            raise ValueError("at least one term required")
        shape = self.terms[0].L.in_shape
        if any(t.L.in_shape != shape for t in self.terms):
            raise ValueError("all terms must act on the same space")
        self.shape = shape
        self.lipschitz = sum(t.alpha * t.L.norm_bound ** 2 for t in self.terms)

    def value(self, x):
        x = self._check(x)
        return 0.5 * sum(t.alpha * norm(t.residual(x)) ** 2 for t in self.terms)

    def gradient(self, x):
        x = self._check(x)
        g = np.zeros(self.shape)
        for t in self.terms:
            g += t.alpha * t.L.apply_adjoint(t.residual(x))
        return g

    def prox(self, gamma, x):
        x = self._check(x)
        rhs = x.copy()
        for t in self.terms:
            pr = t.r if t.perp is None else t.perp.apply(t.r)
            rhs += gamma * t.alpha * t.L.apply_adjoint(pr)
        return solve_normal([t.alpha for t in self.terms],
                            [t.L for t in self.terms],
                            [t.perp for t in self.terms], gamma, rhs)


def least_squares(H: LinOp, y, weight: float = 1.0) -> QuadraticSubspace:
    """``(weight/2) ||H x - y||^2``."""
    return QuadraticSubspace([QuadTerm(weight, H, y)])


def quadratic_subspace(alphas, ops, perps, rs) -> QuadraticSubspace:
    return QuadraticSubspace([QuadTerm(a, L, r, P)
                              for a, L, P, r in zip(alphas, ops, perps, rs)])


def _ray_prox(x, p, d, target):
    """Point ``p + (target/d)(x - p)`` on the ray from ``p`` through ``x``."""
    return p + (target / d) * (x - p)


class DistCompose(ProxFun):
    """``phi(d_C(x))`` for an even convex scalar ``phi``.

    When ``phi`` is differentiable the function is smooth with the same
    Lipschitz constant.  Otherwise the prox follows the three-branch rule:
    identity inside ``C``, projection when ``d_C(x)`` does not exceed
    ``max d(gamma phi)(0)``, and a move toward the projection beyond it.
    """

    def __init__(self, phi: ScalarFun, C: ConvexSet):
        if not check_even(phi):
            raise ValueError("phi must be even")
        self.phi = phi
        self.C = C
        self.shape = C.shape
        self.lipschitz = phi.lipschitz

    def in_domain(self, x, tol=1e-8):
        if self.phi.zero_domain:
            return self.C.contains(x, tol)
        return True

    def value(self, x):
        if not self.in_domain(x):
            return math.inf
        d = self.C.distance(self._check(x))
        if self.phi.zero_domain:
            return 0.0
        return float(self.phi.value(d))

    def gradient(self, x):
        if not self.smooth:
            raise NotSmoothError("phi is not differentiable")
        x = self._check(x)
        p, d = self.C.project_and_distance(x)
        if d == 0.0:
            return np.zeros_like(x)
        return (float(self.phi.derivative(d)) / d) * (x - p)

    def prox(self, gamma, x):
        x = self._check(x)
        p, d = self.C.project_and_distance(x)
        if d == 0.0:
            return x.copy()
        if self.phi.zero_domain:
            return p
        if d <= gamma * self.phi.subgrad_max_at_zero:
            return p
        return _ray_prox(x, p, d, float(self.phi.prox(gamma, d)))


def dist_compose(phi: ScalarFun, C: ConvexSet) -> DistCompose:
    return DistCompose(phi, C)


class VapnikDist(ProxFun):
    """``psi(max(d_C(x) - eps, 0))``: zero on the ``eps``-enlargement of C."""

    def __init__(self, psi: ScalarFun, eps: float, C: ConvexSet):
        if eps <= 0:
            raise ValueError("eps must be positive")
        if not psi.smooth:
            raise ValueError("psi must be differentiable")
        if not check_even(psi):
            raise ValueError("psi must be even")
        self.psi, self.eps, self.C = psi, float(eps), C
        self.shape = C.shape
        self.lipschitz = psi.lipschitz

    def value(self, x):
        d = self.C.distance(self._check(x))
        return float(self.psi.value(max(d - self.eps, 0.0)))

    def gradient(self, x):
        x = self._check(x)
        p, d = self.C.project_and_distance(x)
        if d <= self.eps:
            return np.zeros_like(x)
        return (float(self.psi.derivative(d - self.eps)) / d) * (x - p)

    def prox(self, gamma, x):
        x = self._check(x)
        p, d = self.C.project_and_distance(x)
        if d <= self.eps:
            return x.copy()
        t = self.eps + float(self.psi.prox(gamma, d - self.eps))
        return _ray_prox(x, p, d, t)


def vapnik_smooth(psi: ScalarFun, eps: float, C: ConvexSet) -> VapnikDist:
    return VapnikDist(psi, eps, C)


class HuberDist(ProxFun):
    """Huber function of the distance to ``C``; gradient is nonexpansive."""

    lipschitz = 1.0

    def __init__(self, rho: float, C: ConvexSet):
        if rho <= 0:
            raise ValueError("rho must be positive")
        self.rho = float(rho)
        self.C = C
        self.shape = C.shape

    def value(self, x):
        d = self.C.distance(self._check(x))
        r = self.rho
        return r * d - 0.5 * r * r if d > r else 0.5 * d * d

    def gradient(self, x):
        x = self._check(x)
        p, d = self.C.project_and_distance(x)
        if d > self.rho:
            return (self.rho / d) * (x - p)
        return x - p

    def prox(self, gamma, x):
        x = self._check(x)
        p, d = self.C.project_and_distance(x)
        if d > (gamma + 1.0) * self.rho:
            return x + (gamma * self.rho / d) * (p - x)
        return (x + gamma * p) / (gamma + 1.0)


def huber_dist(rho: float, C: ConvexSet) -> HuberDist:
    return HuberDist(rho, C)


class LogDist(ProxFun):
    """``w d_C - ln(1 + w d_C)`` with a ``w^2``-Lipschitz gradient."""

    def __init__(self, omega: float, C: ConvexSet):
        if omega <= 0:
            raise ValueError("omega must be positive")
        self.omega = float(omega)
        self.C = C
        self.shape = C.shape
        self.lipschitz = self.omega ** 2

    def value(self, x):
        a = self.omega * self.C.distance(self._check(x))
        return a - math.log1p(a)

    def gradient(self, x):
        x = self._check(x)
        p, d = self.C.project_and_distance(x)
        if d == 0.0:
            return np.zeros_like(x)
        return (self.omega ** 2 / (1.0 + self.omega * d)) * (x - p)

    def prox(self, gamma, x):
        x = self._check(x)
        p, d = self.C.project_and_distance(x)
        if d == 0.0:
            return x.copy()
        w = self.omega
        wd = w * d
        coef = (gamma * w * w + 1.0 - wd
                - math.sqrt((wd - gamma * w * w - 1.0) ** 2 + 4.0 * wd)) / (2.0 * wd)
        return p + coef * (p - x)


def log_dist(omega: float, C: ConvexSet) -> LogDist:
    return LogDist(omega, C)


class SemiOrthogonalCompose(ProxFun):
    """``phi(d_D(M x))`` where ``M M^* = theta Id``.

    The semi-orthogonality is checked on random vectors at construction.
    """

    def __init__(self, phi: ScalarFun, D: ConvexSet, M: LinOp, theta: float,
                 n_checks: int = 5, tol: float = 1e-8, seed: int = 0):
        if theta <= 0:
            raise ValueError("theta must be positive")
        if not check_even(phi):
            raise ValueError("phi must be even")
        rng = np.random.default_rng(seed)
        for _ in range(n_checks):
            y = rng.standard_normal(M.out_shape)
            err = norm(M.apply(M.apply_adjoint(y)) - theta * y)
            if err > tol * theta * norm(y):
                raise ValueError(f"M M* != theta Id (error {err:.3e})")
        self.phi, self.D, self.M, self.theta = phi, D, M, float(theta)
        self.shape = M.in_shape
        self.lipschitz = None if phi.lipschitz is None else phi.lipschitz * self.theta

    def value(self, x):
        return float(self.phi.value(self.D.distance(self.M.apply(x))))

    def gradient(self, x):
        if not self.smooth:
            raise NotSmoothError("phi is not differentiable")
        Mx = self.M.apply(x)
        p, d = self.D.project_and_distance(Mx)
        if d == 0.0:
            return np.zeros(self.shape)
        return (float(self.phi.derivative(d)) / d) * self.M.apply_adjoint(Mx - p)

    def prox(self, gamma, x):
        x = self._check(x)
        Mx = self.M.apply(x)
        p, d = self.D.project_and_distance(Mx)
        if d == 0.0:
            return x.copy()
        gt = gamma * self.theta
        if self.phi.zero_domain or d <= gt * self.phi.subgrad_max_at_zero:
            shrink = d
        else:
            shrink = d - float(self.phi.prox(gt, d))
        return x + (shrink / (self.theta * d)) * self.M.apply_adjoint(p - Mx)


def semiorthogonal_compose(phi, D, M, theta) -> SemiOrthogonalCompose:
    return SemiOrthogonalCompose(phi, D, M, theta)


class SeparableSum(ProxFun):
    """``sum_k phi_k(x_k)`` in the canonical basis.

    ``phis`` is either one vectorized :class:`ScalarFun` applied to every
    coordinate or a sequence with one function per coordinate.
    """

    def __init__(self, phis: ScalarFun | Sequence[ScalarFun], shape=None):
        if isinstance(phis, ScalarFun):
            self.phis = phis
            self.shape = None if shape is None else tuple(shape)
            lips = [phis.lipschitz]
        else:
            self.phis = list(phis)
            n = len(self.phis)
            self.shape = (n,) if shape is None else tuple(shape)
            if math.prod(self.shape) != n:
                raise ValueError("one scalar function per coordinate")
            lips = [p.lipschitz for p in self.phis]
        self.lipschitz = None if any(b is None for b in lips) else max(lips)

    def _map(self, method: str, x, *args):
        if isinstance(self.phis, ScalarFun):
            return getattr(self.phis, method)(*args, x)
        flat = x.ravel()
        out = np.array([float(getattr(p, method)(*args, v))
                        for p, v in zip(self.phis, flat)])
        return out.reshape(x.shape)

    def value(self, x):
        return float(np.sum(self._map("value", self._check(x))))

    def in_domain(self, x, tol=1e-8):
        return bool(np.all(np.isfinite(self._map("value", self._check(x)))))

    def prox(self, gamma, x):
        return np.asarray(self._map("prox", self._check(x), gamma), dtype=np.float64)

    def gradient(self, x):
        if not self.smooth:
            raise NotSmoothError("some coordinate function is not differentiable")
        return np.asarray(self._map("derivative", self._check(x)), dtype=np.float64)


def separable_basis(phis, shape=None) -> SeparableSum:
    return SeparableSum(phis, shape)


class GroupFun(ProxFun):
    """``sum_k phi(||(x_1[k], ..., x_M[k])||_2)`` over the leading axis.

    With ``phi = |.|`` this is the mixed ``l_{1,2}`` norm (isotropic total
    variation after composing with the discrete gradient); with a Huber
    ``phi`` it is the smooth Gauss-TV penalty.
    """

    def __init__(self, phi: ScalarFun, n_blocks: int, shape=None):
        if n_blocks < 1:
            raise ValueError("n_blocks must be positive")
        if not check_even(phi):
            raise ValueError("phi must be even")
        self.phi = phi
        self.n_blocks = int(n_blocks)
        self.shape = None if shape is None else tuple(shape)
        self.lipschitz = phi.lipschitz

    def _norms(self, x):
        x = self._check(x)
        if x.shape[0] != self.n_blocks:
            raise ValueError(f"expected {self.n_blocks} blocks, got {x.shape[0]}")
        return x, np.sqrt(np.sum(x * x, axis=0))

    def value(self, x):
        _, r = self._norms(x)
        return float(np.sum(self.phi.value(r)))

    def gradient(self, x):
        if not self.smooth:
            raise NotSmoothError("phi is not differentiable")
        x, r = self._norms(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            alpha = np.where(r > 0, self.phi.derivative(r) / r, 0.0)
        return alpha * x

    def prox(self, gamma, x):
        x, r = self._norms(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            delta = np.where(r > 0, self.phi.prox(gamma, r) / r, 1.0)
        return delta * x


def group_basis(phi: ScalarFun, n_blocks: int, shape=None) -> GroupFun:
    return GroupFun(phi, n_blocks, shape)


class MoreauEnvelope(ProxFun):
    """``g inf-convolved with (beta/2)||.||^2``; smooth with constant beta."""

    def __init__(self, g: ProxFun, beta: float):
        if beta <= 0:
            raise ValueError("beta must be positive")
        self.g = g
        self.beta = float(beta)
        self.shape = g.shape
        self.lipschitz = self.beta

    def value(self, x):
        x = self._check(x)
        p = self.g.prox(1.0 / self.beta, x)
        return self.g.value(p) + 0.5 * self.beta * norm(x - p) ** 2

    def gradient(self, x):
        x = self._check(x)
        return self.beta * (x - self.g.prox(1.0 / self.beta, x))

    def prox(self, gamma, x):
        x = self._check(x)
        gb = gamma * self.beta
        q = self.g.prox((gb + 1.0) / self.beta, x)
        return x + (gb / (gb + 1.0)) * (q - x)


def moreau_infconv(g: ProxFun, beta: float) -> MoreauEnvelope:
    return MoreauEnvelope(g, beta)


class AntiEnvelope(ProxFun):
    """``(beta/2)||.||^2`` minus its inf-convolution with ``phi``.

    Gradient ``beta prox_{phi/beta}``.  For ``phi`` the indicator of
    ``[-rho, rho]`` and ``beta = 1`` this is the Huber function.
    """

    def __init__(self, phi: ProxFun, beta: float):
        if beta <= 0:
            raise ValueError("beta must be positive")
        self.phi = phi
        self.beta = float(beta)
        self.shape = phi.shape
        self.lipschitz = self.beta

    def value(self, x):
        x = self._check(x)
        b = self.beta
        p = self.phi.prox(1.0 / b, x)
        env = self.phi.value(p) + 0.5 * b * norm(x - p) ** 2
        return 0.5 * b * norm(x) ** 2 - env

    def gradient(self, x):
        return self.beta * self.phi.prox(1.0 / self.beta, self._check(x))

    def prox(self, gamma, x):
        x = self._check(x)
        b = self.beta
        s = 1.0 + b * gamma
        return x - b * gamma * self.phi.prox(1.0 / (b * s), x / s)


def antienvelope(phi: ProxFun, beta: float) -> AntiEnvelope:
    return AntiEnvelope(phi, beta)


class IntegralDist(ProxFun):
    """Weighted sum ``sum_w weights[w] phi(d_C(x[w]))`` over sample points.

    ``x`` has shape ``(n_points,) + point_shape``; ``C`` lives in the point
    space.  The prox acts point by point with index ``gamma * weights[w]``.
    """

    def __init__(self, phi: ScalarFun, C: ConvexSet, weights):
        if not check_even(phi):
            raise ValueError("phi must be even")
        w = np.asarray(weights, dtype=np.float64).ravel()
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        self.phi, self.C, self.weights = phi, C, w
        self.point_shape = C.shape if C.shape is not None else ()
        self.shape = (w.size,) + tuple(self.point_shape)
        self.lipschitz = None if phi.lipschitz is None else phi.lipschitz * float(w.max())
        self._point = DistCompose(phi, C)

    def value(self, x):
        x = self._check(x)
        return float(sum(wk * self._point.value(xk) for wk, xk in zip(self.weights, x)))

    def gradient(self, x):
        x = self._check(x)
        return np.stack([wk * self._point.gradient(xk)
                         for wk, xk in zip(self.weights, x)])

    def prox(self, gamma, x):
        x = self._check(x)
        return np.stack([self._point.prox(gamma * wk, xk)
                         for wk, xk in zip(self.weights, x)])


def integral_discretized(phi: ScalarFun, C: ConvexSet, weights) -> IntegralDist:
    return IntegralDist(phi, C, weights)


class RowDistance(ProxFun):
    """``w sum_{i in rows} ||x[i] - y[i]||_2`` over selected image rows."""

    def __init__(self, y, rows, weight: float = 1.0):
        self.y = as_vector(y)
        self.shape = self.y.shape
        m = np.zeros(self.shape[0], dtype=bool)
        m[np.asarray(rows, dtype=int)] = True
        self.rows = m
        self.weight = float(weight)

    def value(self, x):
        r = self._check(x)[self.rows] - self.y[self.rows]
        return self.weight * float(np.sum(np.sqrt(np.sum(r * r, axis=1))))

    def prox(self, gamma, x):
        x = self._check(x)
        out = x.copy()
        r = x[self.rows] - self.y[self.rows]
        nr = np.sqrt(np.sum(r * r, axis=1, keepdims=True))
        t = gamma * self.weight
        out[self.rows] = self.y[self.rows] + (1.0 - t / np.maximum(nr, t)) * r
        return out


class QuadraticForm(ProxFun):
    """``x^T A x / 2 - <b, x>`` for a symmetric positive semidefinite ``A``."""

    def __init__(self, A, b=None):
        A = np.asarray(A, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or not np.allclose(A, A.T):
            raise ValueError("A must be a symmetric square matrix")
        w = np.linalg.eigvalsh(A)
        if w.min() < -1e-12 * max(1.0, abs(w).max()):
            raise ValueError("A must be positive semidefinite")
        self.A = A
        self.b = np.zeros(A.shape[0]) if b is None else as_vector(b, (A.shape[0],))
        self.shape = (A.shape[0],)
        self.lipschitz = float(max(w.max(), 0.0))

    def value(self, x):
        x = self._check(x)
        return 0.5 * float(x @ self.A @ x) - float(self.b @ x)

    def gradient(self, x):
        return self.A @ self._check(x) - self.b

    def prox(self, gamma, x):
        x = self._check(x)
        M = np.eye(self.shape[0]) + gamma * self.A
        return np.linalg.solve(M, x + gamma * self.b)

"""Proximal splitting algorithms.

Every solver returns a :class:`Trace`.  Record ``0`` holds the starting
point; record ``n`` holds the iterate produced by the ``n``-th pass.  The
logged primal iterate is always the output of a prox of ``f``, so it lies in
the domain of ``f``:

* forward-backward and its inertial variant: ``x_{n+1}``;
* Douglas-Rachford: ``x_n = prox_{gamma f}(2 z_n - y_n)``;
* primal-dual forward-backward-forward: ``p_{1,n}``;
* renormed primal-dual: ``x_{n+1}``;
* projective splitting: ``a_n``.

Step parameters may be constants or callables ``n -> value``.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import prox_lib as pl
from .hilbert import Identity, as_vector, inner, norm
from .model import CompositeProblem

ALGORITHMS = ("fb", "ifb", "dr", "fbf", "pd", "ps")

# smallest tau_n treated as nonzero in projective splitting
PS_TERMINATION = 1e-28
_SAMPLE = 10000


class ParameterError(ValueError):
    """Step parameters outside the window required for convergence."""


def _schedule(v) -> Callable[[int], float]:
    if callable(v):
        return v
    c = float(v)
    return lambda n: c


def _samples(s: Callable, max_iter: int) -> np.ndarray:
    m = max(1, min(max_iter, _SAMPLE))
    return np.array([float(s(n)) for n in range(m)])


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------

@dataclass
class Record:
    iter: int
    time_s: float
    objective: float | None
    dist_ref: float | None


@dataclass
class Trace:
    """Per-iteration log of a solver run."""

    records: list[Record] = field(default_factory=list)
    x: np.ndarray | None = None
    x0: np.ndarray | None = None
    reference: np.ndarray | None = None
    reason: str = ""
    duals: list | None = None

    @property
    def n_iter(self) -> int:
        return self.records[-1].iter if self.records else 0

    def objectives(self) -> np.ndarray:
        return np.array([np.nan if r.objective is None else r.objective
                         for r in self.records])

    def dist_ref_db(self) -> np.ndarray:
        """``20 log10(||x_n - x|| / ||x_0 - x||)`` against the reference."""
        d = np.array([np.nan if r.dist_ref is None else r.dist_ref
                      for r in self.records])
        if self.reference is None or not self.records:
            return d
        d0 = d[0]
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(d / d0) if d0 > 0 else np.full_like(d, np.nan)

    def objective_db(self, ref_value: float) -> np.ndarray:
        """``10 log10((phi(x_n) - phi(x)) / (phi(x_0) - phi(x)))``."""
        v = self.objectives() - ref_value
        with np.errstate(divide="ignore", invalid="ignore"):
            return 10.0 * np.log10(v / v[0])

    def to_csv(self, path=None, timing: bool = True) -> str:
        """Write columns ``iter, time_s, objective, dist_ref_db``.

        With ``timing=False`` the ``time_s`` column is left empty so that
        reruns produce identical bytes.  Returns the CSV text.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iter", "time_s", "objective", "dist_ref_db"])
        db = self.dist_ref_db()
        for r, d in zip(self.records, db):
            w.writerow([r.iter,
                        f"{r.time_s:.6f}" if timing else "",
                        "" if r.objective is None else repr(float(r.objective)),
                        "" if self.reference is None else repr(float(d))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


class _Logger:
    """Collects records while keeping logging time off the clock."""

    def __init__(self, objective: Callable | None, reference, max_iter: int,
                 tol: float, callback: Callable | None):
        self.objective = objective
        self.reference = None if reference is None else np.asarray(reference)
        self.max_iter = int(max_iter)
        self.tol = float(tol)
        self.callback = callback
        self.trace = Trace(reference=self.reference)
        self.elapsed = 0.0
        self._t = time.perf_counter()

    def _record(self, n: int, x: np.ndarray):
        self.elapsed += time.perf_counter() - self._t
        obj = None if self.objective is None else float(self.objective(x))
        dist = None if self.reference is None else norm(x - self.reference)
        self.trace.records.append(Record(n, self.elapsed, obj, dist))
        stop = False
        if self.callback is not None and n > 0:
            stop = bool(self.callback(n, x))
        self._t = time.perf_counter()
        return stop

    def start(self, x0: np.ndarray):
        self.trace.x0 = x0.copy()
        self.prev = x0.copy()
        self._record(0, x0)

    def step(self, n: int, x: np.ndarray) -> bool:
        """Log iterate ``n``; return True when the run should stop."""
        stop = self._record(n, x)
        change = norm(x - self.prev)
        if self.tol > 0 and change <= self.tol * (1.0 + norm(self.prev)):
            self.trace.reason = "tolerance"
            return True
        self.prev = x.copy()
        if stop:
            self.trace.reason = "callback"
            return True
        return False

    def finish(self, x: np.ndarray, reason: str = "max_iter") -> Trace:
        self.trace.x = x.copy()
        if not self.trace.reason:
            self.trace.reason = reason
        return self.trace


def _two_term_objective(f: pl.ProxFun, h: pl.ProxFun) -> Callable:
    def obj(x):
        if not (f.in_domain(x) and h.in_domain(x)):
            return math.inf
        return f.value(x) + h.value(x)
    return obj


# ---------------------------------------------------------------------------
# Two-term algorithms
# ---------------------------------------------------------------------------

def forward_backward(f: pl.ProxFun, h: pl.ProxFun, gamma, x0, max_iter: int = 100,
                     tol: float = 0.0, callback=None, reference=None,
                     record_objective: bool = True) -> Trace:
    """Minimize ``f + h`` with ``h`` smooth.

    ``y_n = x_n - gamma_n grad h(x_n)``, ``x_{n+1} = prox_{gamma_n f} y_n``,
    with ``0 < inf gamma_n <= sup gamma_n < 2/beta``.
    """
    if not h.smooth:
        raise ParameterError("h must have a Lipschitz gradient")
    g = _schedule(gamma)
    gs = _samples(g, max_iter)
    beta = h.lipschitz
    if gs.min() <= 0 or (beta > 0 and gs.max() >= 2.0 / beta):
        raise ParameterError(f"step sizes must lie in ]0, 2/beta[ = ]0, {2.0 / beta:.6g}["
                             if beta > 0 else "step sizes must be positive")
    x = as_vector(x0).copy()
    log = _Logger(_two_term_objective(f, h) if record_objective else None,
                  reference, max_iter, tol, callback)
    log.start(x)
    for n in range(max_iter):
        gn = g(n)
        x = f.prox(gn, x - gn * h.gradient(x))
        if log.step(n + 1, x):
            break
    return log.finish(x)


def inertial_forward_backward(f: pl.ProxFun, h: pl.ProxFun, gamma: float,
                              alpha: float, x0, max_iter: int = 100,
                              tol: float = 0.0, callback=None, reference=None,
                              record_objective: bool = True) -> Trace:
    """Inertial forward-backward with extrapolation ``(n-1)/(n+alpha)``.

    Requires ``0 < gamma <= 1/beta`` and ``alpha > 2``; ``x_{-1} = x_0``.
    """
    if not h.smooth:
        raise ParameterError("h must have a Lipschitz gradient")
    if alpha <= 2:
        raise ParameterError("alpha must exceed 2")
    beta = h.lipschitz
    if gamma <= 0 or (beta > 0 and gamma > 1.0 / beta):
        raise ParameterError("gamma must lie in ]0, 1/beta]")
    x = as_vector(x0).copy()
    x_prev = x.copy()
    log = _Logger(_two_term_objective(f, h) if record_objective else None,
                  reference, max_iter, tol, callback)
    log.start(x)
    for n in range(max_iter):
        z = x + ((n - 1.0) / (n + alpha)) * (x - x_prev)
        x_prev = x
        x = f.prox(gamma, z - gamma * h.gradient(z))
        if log.step(n + 1, x):
            break
    return log.finish(x)


def douglas_rachford(f: pl.ProxFun, g: pl.ProxFun, gamma: float, lam, y0,
                     max_iter: int = 100, tol: float = 0.0, callback=None,
                     reference=None, record_objective: bool = True) -> Trace:
    """Douglas-Rachford splitting for ``f + g``.

    ``z_n = prox_{gamma g} y_n``, ``x_n = prox_{gamma f}(2 z_n - y_n)``,
    ``y_{n+1} = y_n + lambda_n (x_n - z_n)``.  The logged iterate is
    ``x_n``; the final ``z_n`` and ``y_n`` are kept in ``trace.duals``.
    """
    if gamma <= 0:
        raise ParameterError("gamma must be positive")
    lm = _schedule(lam)
    ls = _samples(lm, max_iter)
    if ls.min() < 0 or ls.max() > 2 or np.min(ls * (2.0 - ls)) <= 0:
        raise ParameterError("relaxation must satisfy inf lambda (2 - lambda) > 0")
    y = as_vector(y0).copy()
    log = _Logger(_two_term_objective(f, g) if record_objective else None,
                  reference, max_iter, tol, callback)
    log.start(y)
    x = y.copy()
    z = y.copy()
    for n in range(max_iter):
        z = g.prox(gamma, y)
        x = f.prox(gamma, 2.0 * z - y)
        y = y + lm(n) * (x - z)
        if log.step(n + 1, x):
            break
    tr = log.finish(x)
    tr.duals = [z, y]
    return tr


def steepest_descent(phi: pl.ProxFun, gamma: float, x0, max_iter: int = 100,
                     tol: float = 0.0, callback=None, reference=None) -> Trace:
    """Explicit gradient iteration ``x_{n+1} = x_n - gamma grad phi(x_n)``.

    The step is deliberately not validated: with ``gamma >= 2/beta`` the
    iteration may diverge, which is the point of comparing it with the
    proximal point algorithm.
    """
    x = as_vector(x0).copy()
    log = _Logger(phi.value, reference, max_iter, tol, callback)
    log.start(x)
    for n in range(max_iter):
        x = x - gamma * phi.gradient(x)
        if log.step(n + 1, x):
            break
    return log.finish(x)


def proximal_point(phi: pl.ProxFun, gamma, x0, max_iter: int = 100,
                   tol: float = 0.0, callback=None, reference=None) -> Trace:
    """Implicit iteration ``x_{n+1} = prox_{gamma phi} x_n``."""
    g = _schedule(gamma)
    if _samples(g, max_iter).min() <= 0:
        raise ParameterError("gamma must be positive")
    x = as_vector(x0).copy()
    log = _Logger(phi.value, reference, max_iter, tol, callback)
    log.start(x)
    for n in range(max_iter):
        x = phi.prox(g(n), x)
        if log.step(n + 1, x):
            break
    return log.finish(x)


# ---------------------------------------------------------------------------
# Primal-dual algorithms
# ---------------------------------------------------------------------------

def fbf_beta(P: CompositeProblem) -> float:
    """``sqrt(sum_I ||L_i||^2) + sum_J mu_j ||L_j||^2``."""
    return (math.sqrt(sum(t.op.norm_bound ** 2 for t in P.nonsmooth))
            + sum(t.mu * t.op.norm_bound ** 2 for t in P.smooth))


def _dual_prox(g: pl.ProxFun, s: float, y: np.ndarray) -> np.ndarray:
    """``y - s prox_{g/s}(y/s)``, the prox of ``s g*`` by Moreau's identity."""
    return y - s * g.prox(1.0 / s, y / s)


def _smooth_grad(P: CompositeProblem, x: np.ndarray) -> np.ndarray:
    g = np.zeros(P.shape)
    for t in P.smooth:
        g += t.op.apply_adjoint(t.fun.gradient(t.op.apply(x)))
    return g


def _zeros_duals(terms, v0):
    if v0 is not None:
        return [as_vector(v, t.op.out_shape).copy() for v, t in zip(v0, terms)]
    return [np.zeros(t.op.out_shape) for t in terms]


def fbf_primal_dual(P: CompositeProblem, gamma, x0, v0=None, max_iter: int = 100,
                    tol: float = 0.0, callback=None, reference=None,
                    record_objective: bool = True) -> Trace:
    """Primal-dual forward-backward-forward splitting.

    Requires ``gamma_n`` in ``[eps, (1 - eps)/beta]`` for some
    ``eps in ]0, 1/(beta + 1)[``, i.e. ``inf gamma_n > 0`` and
    ``beta sup gamma_n < 1``.
    """
    beta = fbf_beta(P)
    g = _schedule(gamma)
    gs = _samples(g, max_iter)
    if gs.min() <= 0 or gs.max() * beta >= 1.0:
        raise ParameterError(f"step sizes must lie in ]0, 1/beta[ with beta={beta:.6g}")
    I = P.nonsmooth
    x = as_vector(x0, P.shape).copy()
    v = _zeros_duals(I, v0)
    log = _Logger(P.objective if record_objective else None, reference,
                  max_iter, tol, callback)
    log.start(x)
    p1 = x
    for n in range(max_iter):
        gn = g(n)
        Lsv = np.zeros(P.shape)
        for t, vi in zip(I, v):
            Lsv += t.op.apply_adjoint(vi)
        y1 = x - gn * (Lsv + _smooth_grad(P, x))
        p1 = P.f.prox(gn, y1)
        Lsp = np.zeros(P.shape)
        for k, t in enumerate(I):
            y2 = v[k] + gn * t.op.apply(x)
            p2 = _dual_prox(t.fun, gn, y2)
            q2 = p2 + gn * t.op.apply(p1)
            v[k] = v[k] - y2 + q2
            Lsp += t.op.apply_adjoint(p2)
        q1 = p1 - gn * (Lsp + _smooth_grad(P, p1))
        x = x - y1 + q1
        if log.step(n + 1, p1):
            break
    tr = log.finish(p1)
    tr.duals = v
    return tr


def step_bound(P: CompositeProblem, tau: float, sigmas: Sequence[float]) -> float:
    """``sqrt(tau sum sigma_i ||L_i||^2) + max{tau, max sigma_i}/2 sum mu_j ||L_j||^2``."""
    sigmas = list(sigmas)
    if len(sigmas) != len(P.nonsmooth):
        raise ParameterError("one sigma per nonsmooth term required")
    a = math.sqrt(tau * sum(s * t.op.norm_bound ** 2
                            for s, t in zip(sigmas, P.nonsmooth)))
    m = max([tau] + sigmas)
    return a + 0.5 * m * sum(t.mu * t.op.norm_bound ** 2 for t in P.smooth)


def _sigma_schedules(sigma, n_terms: int) -> list[Callable]:
    if sigma is None:
        sigma = []
    if callable(sigma) or np.isscalar(sigma):
        return [_schedule(sigma)] * n_terms
    sig = list(sigma)
    if len(sig) != n_terms:
        raise ParameterError("one sigma per nonsmooth term required")
    return [_schedule(s) for s in sig]


def validate_renormed(P: CompositeProblem, tau, sigma, max_iter: int) -> float:
    """Check monotonicity and the step bound; return the bound's supremum."""
    ts = _samples(_schedule(tau), max_iter)
    ss = [_samples(s, max_iter) for s in _sigma_schedules(sigma, len(P.nonsmooth))]
    for arr, nm in [(ts, "tau")] + [(s, "sigma") for s in ss]:
        if arr.min() <= 0:
            raise ParameterError(f"{nm} must be positive")
        if np.any(np.diff(arr) < 0):
            raise ParameterError(f"{nm} must be nondecreasing")
    bound = max(step_bound(P, ts[n], [s[n] for s in ss]) for n in range(len(ts)))
    if not bound < 1.0:
        raise ParameterError(f"step bound {bound:.6g} must be < 1")
    return bound


def renormed_primal_dual(P: CompositeProblem, tau, sigma, x0, v0=None,
                         max_iter: int = 100, tol: float = 0.0, callback=None,
                         reference=None, record_objective: bool = True) -> Trace:
    """Forward-backward iteration in a renormed primal-dual space.

    ``sigma`` is one value (or schedule) shared by all nonsmooth terms or a
    sequence with one entry per term.
    """
    validate_renormed(P, tau, sigma, max_iter)
    t_s = _schedule(tau)
    s_s = _sigma_schedules(sigma, len(P.nonsmooth))
    I = P.nonsmooth
    x = as_vector(x0, P.shape).copy()
    v = _zeros_duals(I, v0)
    log = _Logger(P.objective if record_objective else None, reference,
                  max_iter, tol, callback)
    log.start(x)
    for n in range(max_iter):
        tn = t_s(n)
        Lsv = np.zeros(P.shape)
        for t, vi in zip(I, v):
            Lsv += t.op.apply_adjoint(vi)
        y1 = x - tn * (Lsv + _smooth_grad(P, x))
        x_new = P.f.prox(tn, y1)
        z = 2.0 * x_new - x
        for k, t in enumerate(I):
            sn = s_s[k](n)
            v[k] = _dual_prox(t.fun, sn, v[k] + sn * t.op.apply(z))
        x = x_new
        if log.step(n + 1, x):
            break
    tr = log.finish(x)
    tr.duals = v
    return tr


def projective_splitting(P: CompositeProblem, gamma, mu, lam, x0, v0=None,
                         max_iter: int = 100, tol: float = 0.0, callback=None,
                         reference=None, record_objective: bool = True) -> Trace:
    """Projective splitting with gradient steps on the smooth terms.

    ``mu`` holds one value (or schedule) per term, nonsmooth terms first,
    then smooth terms, in the order stored in ``P``.  Terminates exactly
    when ``tau_n`` vanishes (below ``PS_TERMINATION``).
    """
    K = P.nonsmooth + P.smooth
    nI = len(P.nonsmooth)
    g = _schedule(gamma)
    lm = _schedule(lam)
    if callable(mu) or np.isscalar(mu):
        mus = [_schedule(mu)] * len(K)
    else:
        if len(mu) != len(K):
            raise ParameterError("one mu per term required")
        mus = [_schedule(m) for m in mu]
    gs = _samples(g, max_iter)
    ls = _samples(lm, max_iter)
    if gs.min() <= 0:
        raise ParameterError("gamma must be positive")
    if ls.min() <= 0 or ls.max() >= 2:
        raise ParameterError("lambda must lie in ]0, 2[")
    for m in mus:
        if _samples(m, max_iter).min() <= 0:
            raise ParameterError("mu must be positive")
    x = as_vector(x0, P.shape).copy()
    v = _zeros_duals(K, v0)
    log = _Logger(P.objective if record_objective else None, reference,
                  max_iter, tol, callback)
    log.start(x)
    a = x
    for n in range(max_iter):
        gn = g(n)
        lstar = np.zeros(P.shape)
        for t, vk in zip(K, v):
            lstar += t.op.apply_adjoint(vk)
        a = P.f.prox(gn, x - gn * lstar)
        astar = (x - a) / gn - lstar
        bs, bstars, ts = [], [], []
        for k, t in enumerate(K):
            mk = mus[k](n)
            lk = t.op.apply(x)
            if k < nI:
                b = t.fun.prox(mk, lk + mk * v[k])
                bstar = v[k] + (lk - b) / mk
            else:
                b = lk - mk * (t.fun.gradient(lk) - v[k])
                bstar = t.fun.gradient(b)
            bs.append(b)
            bstars.append(bstar)
            ts.append(b - t.op.apply(a))
        tstar = astar.copy()
        for t, bstar in zip(K, bstars):
            tstar += t.op.apply_adjoint(bstar)
        tau = norm(tstar) ** 2 + sum(norm(tk) ** 2 for tk in ts)
        if tau < PS_TERMINATION:
            log.step(n + 1, a)
            log.trace.reason = "exact"
            break
        gap = inner(x, tstar) - inner(a, astar)
        for tk, vk, b, bstar in zip(ts, v, bs, bstars):
            gap += inner(tk, vk) - inner(b, bstar)
        theta = lm(n) / tau * max(0.0, gap)
        x = x - theta * tstar
        for k in range(len(K)):
            v[k] = v[k] - theta * ts[k]
        if log.step(n + 1, a):
            break
    tr = log.finish(a)
    tr.duals = v
    return tr


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

class SmoothSum(pl.ProxFun):
    """``sum_j h_j(L_j x)`` as a single smooth function (no prox)."""

    def __init__(self, P: CompositeProblem):
        self.P = P
        self.shape = P.shape
        self.lipschitz = sum(t.mu * t.op.norm_bound ** 2 for t in P.smooth)

    def value(self, x):
        return float(sum(t.fun.value(t.op.apply(x)) for t in self.P.smooth))

    def gradient(self, x):
        return _smooth_grad(self.P, as_vector(x, self.shape))

    def prox(self, gamma, x):
        raise NotImplementedError("no prox for a generic sum of smooth terms")


def two_term(P: CompositeProblem, algorithm: str) -> tuple[pl.ProxFun, pl.ProxFun]:
    """Extract ``(f, h)`` for forward-backward or ``(f, g)`` for
    Douglas-Rachford from a composite problem."""
    if algorithm in ("fb", "ifb"):
        if P.nonsmooth:
            raise ParameterError("forward-backward needs a problem without "
                                 "nonsmooth composite terms")
        if not P.smooth:
            return P.f, pl.ZeroFun(P.shape)
        if len(P.smooth) == 1 and isinstance(P.smooth[0].op, Identity):
            return P.f, P.smooth[0].fun
        return P.f, SmoothSum(P)
    terms = P.nonsmooth + P.smooth
    if len(terms) != 1 or not isinstance(terms[0].op, Identity):
        raise ParameterError("Douglas-Rachford needs f plus one term with L = Id")
    return P.f, terms[0].fun


@dataclass
class SolverConfig:
    """Algorithm choice and step parameters.

    Parameters
    ----------
    algorithm : one of ``fb, ifb, dr, fbf, pd, ps``.
    gamma, lam, alpha, tau, sigma, mu :
        Step parameters, constants or schedules, as used by each algorithm.
    max_iter : iteration budget.
    tol : stop when ``||x_{n+1} - x_n|| <= tol (1 + ||x_n||)``; 0 disables.
    seed : reserved; the algorithms are deterministic.
    """

    algorithm: str
    gamma: object = None
    lam: object = None
    alpha: float | None = None
    tau: object = None
    sigma: object = None
    mu: object = None
    max_iter: int = 100
    tol: float = 0.0
    seed: int = 0
    record_objective: bool = True

    def __post_init__(self):
        a = self.algorithm
        if a not in ALGORITHMS:
            raise ParameterError(f"unknown algorithm {a!r}")
        if self.max_iter < 0:
            raise ParameterError("max_iter must be nonnegative")
        if self.tol < 0:
            raise ParameterError("tol must be nonnegative")
        need = {"fb": ["gamma"], "ifb": ["gamma", "alpha"], "dr": ["gamma", "lam"],
                "fbf": ["gamma"], "pd": ["tau"], "ps": ["gamma", "mu", "lam"]}[a]
        missing = [k for k in need if getattr(self, k) is None]
        if missing:
            raise ParameterError(f"{a} requires {', '.join(missing)}")
        if a == "ifb" and self.alpha <= 2:
            raise ParameterError("alpha must exceed 2")


def run(problem, config: SolverConfig, x0=None, callback=None,
        reference=None) -> Trace:
    """Run ``config.algorithm`` on ``problem``.

    ``problem`` is a :class:`CompositeProblem` or a pair ``(f, h)`` /
    ``(f, g)`` for the two-term algorithms.  ``callback(n, x)`` is called
    after every iteration; a true return value stops the run.
    """
    a = config.algorithm
    shape = problem.shape if isinstance(problem, CompositeProblem) else \
        (problem[0].shape or problem[1].shape)
    x0 = np.zeros(shape) if x0 is None else as_vector(x0, shape)
    common = dict(max_iter=config.max_iter, tol=config.tol, callback=callback,
                  reference=reference, record_objective=config.record_objective)
    if a in ("fb", "ifb", "dr"):
        f, h = problem if not isinstance(problem, CompositeProblem) else \
            two_term(problem, a)
        if a == "fb":
            return forward_backward(f, h, config.gamma, x0, **common)
        if a == "ifb":
            return inertial_forward_backward(f, h, config.gamma, config.alpha,
                                             x0, **common)
        return douglas_rachford(f, h, config.gamma, config.lam, x0, **common)
    if not isinstance(problem, CompositeProblem):
        raise ParameterError(f"{a} needs a CompositeProblem")
    if a == "fbf":
        return fbf_primal_dual(problem, config.gamma, x0, **common)
    if a == "pd":
        return renormed_primal_dual(problem, config.tau, config.sigma, x0, **common)
    return projective_splitting(problem, config.gamma, config.mu, config.lam,
                                x0, **common)

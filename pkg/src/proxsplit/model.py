"""Composite problems and the relaxation of convex feasibility problems.

A :class:`CompositeProblem` represents

    minimize  f(x) + sum_{i in I} g_i(L_i x) + sum_{j in J} h_j(L_j x)

where the ``h_j`` have Lipschitz gradients and every other term is
activated through its proximity operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import prox_lib as pl
from .convex_sets import (Ball, Box, ConvexSet, ProductSet, Singleton,
                          WholeSpace)
from .hilbert import (BlockLayout, BlockOp, Identity, LinOp, ShapeError,
                      as_vector, select)


@dataclass(frozen=True)
class Term:
    """A function composed with a linear operator."""

    fun: pl.ProxFun
    op: LinOp

    @property
    def mu(self) -> float | None:
        return self.fun.lipschitz


class CompositeProblem:
    """``f + sum g_i(L_i .) + sum h_j(L_j .)`` on a space of shape ``shape``.

    Parameters
    ----------
    f : ProxFun, optional
        Term activated by its prox in the primal space (zero by default).
    nonsmooth : sequence of (ProxFun, LinOp)
        The ``(g_i, L_i)``.
    smooth : sequence of (ProxFun, LinOp)
        The ``(h_j, L_j)``; each ``h_j`` must declare ``lipschitz``.
    shape : tuple, optional
        Shape of the primal space, inferred from the operators otherwise.
    """

    def __init__(self, f: pl.ProxFun | None = None,
                 nonsmooth: Sequence = (), smooth: Sequence = (),
                 shape=None, name: str = ""):
        self.nonsmooth = [t if isinstance(t, Term) else Term(*t) for t in nonsmooth]
        self.smooth = [t if isinstance(t, Term) else Term(*t) for t in smooth]
        if shape is None:
            ops = [t.op for t in self.nonsmooth + self.smooth]
            if ops:
                shape = ops[0].in_shape
            elif f is not None and f.shape is not None:
                shape = f.shape
            else:
                raise ShapeError("cannot infer the primal shape")
        self.shape = tuple(shape)
        self.f = pl.ZeroFun(self.shape) if f is None else f
        self.name = name
        for t in self.nonsmooth + self.smooth:
            if t.op.in_shape != self.shape:
                raise ShapeError(f"operator {t.op!r} does not act on {self.shape}")
            if t.fun.shape is not None and t.fun.shape != t.op.out_shape:
                raise ShapeError(f"{type(t.fun).__name__} expects {t.fun.shape}, "
                                 f"operator yields {t.op.out_shape}")
            if not t.op.norm_bound > 0:
                raise ValueError("linear operators must be nonzero")
        for t in self.smooth:
            if t.mu is None:
                raise ValueError(f"smooth term {type(t.fun).__name__} "
                                 "has no Lipschitz constant")

    @property
    def mus(self) -> list[float]:
        return [t.mu for t in self.smooth]

    def objective(self, x) -> float:
        return objective(self, x)

    def __repr__(self) -> str:
        return (f"CompositeProblem({self.name or 'unnamed'}, shape={self.shape}, "
                f"|I|={len(self.nonsmooth)}, |J|={len(self.smooth)})")


def objective(P: CompositeProblem, x) -> float:
    """Objective value, or ``math.inf`` when some term is outside its domain.

    Domain membership is decided by ``in_domain`` before any value is
    added, so no arithmetic is performed on infinite values.
    """
    x = as_vector(x, P.shape)
    if not P.f.in_domain(x):
        return math.inf
    parts = []
    for t in P.nonsmooth + P.smooth:
        y = t.op.apply(x)
        if not t.fun.in_domain(y):
            return math.inf
        parts.append(t.fun.value(y))
    return float(P.f.value(x) + math.fsum(parts))


# ---------------------------------------------------------------------------
# Existence advisory
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QualificationReport:
    holds: bool
    message: str


def _bounded_set(C: ConvexSet) -> bool:
    if isinstance(C, Box):
        return bool(np.all(np.isfinite(C.lo)) and np.all(np.isfinite(C.hi))
                    and C.shape is not None)
    if isinstance(C, (Ball, Singleton)):
        return True
    if isinstance(C, ProductSet):
        return all(_bounded_set(S) for S in C.sets)
    return False


def _bounded_domain(F: pl.ProxFun) -> bool:
    if isinstance(F, pl.Scale):
        return _bounded_domain(F.F)
    if isinstance(F, pl.Indicator):
        return _bounded_set(F.C)
    if isinstance(F, pl.L1BoxFun):
        return _bounded_set(F.box)
    if isinstance(F, pl.DistCompose) and F.phi.zero_domain:
        return _bounded_set(F.C)
    return False


def _full_domain(F: pl.ProxFun) -> bool:
    if isinstance(F, pl.Scale):
        return _full_domain(F.F)
    if isinstance(F, (pl.Indicator, pl.L1BoxFun)):
        return False
    if isinstance(F, pl.DistCompose):
        return not F.phi.zero_domain
    if isinstance(F, pl.SeparableSum):
        phis = [F.phis] if isinstance(F.phis, pl.ScalarFun) else F.phis
        return not any(p.zero_domain for p in phis)
    return True


def check_qualification(P: CompositeProblem) -> QualificationReport:
    """Check the sufficient condition "f has bounded domain and every other
    term is real-valued", which guarantees that a solution exists.

    The general range condition for the primal-dual algorithms is not
    tested.
    """
    others = [t.fun for t in P.nonsmooth + P.smooth]
    if _bounded_domain(P.f) and all(_full_domain(F) for F in others):
        return QualificationReport(True, "sufficient condition holds: f has "
                                   "bounded domain and the other terms are "
                                   "real-valued")
    return QualificationReport(False, "inconclusive: the bounded-domain "
                               "sufficient condition does not apply")


# ---------------------------------------------------------------------------
# Feasibility relaxation
# ---------------------------------------------------------------------------

PENALTY_KINDS = ("indicator", "abs", "square", "huber", "vapnik", "log", "custom")


@dataclass(frozen=True)
class Penalty:
    """Scalar penalty applied to a distance.

    ``weight`` scales every kind except ``indicator``.  ``vapnik`` uses the
    smooth ``psi`` (default ``|.|^2/2``) and tube width ``eps``; since
    ``max(d_C - eps, 0)`` is the distance to the ``eps``-enlargement of
    ``C``, the penalty still vanishes only at zero of that distance.
    """

    kind: str
    weight: float = 1.0
    rho: float | None = None
    eps: float | None = None
    omega: float | None = None
    psi: pl.ScalarFun | None = None
    phi: pl.ScalarFun | None = None

    def __post_init__(self):
        if self.kind not in PENALTY_KINDS:
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if self.weight <= 0:
            raise ValueError("penalty weight must be positive")


def _vanishes_only_at_zero(phi: pl.ScalarFun) -> bool:
    xi = np.geomspace(1e-4, 1e4, 20)
    at0 = float(np.asarray(phi.value(np.array([0.0])))[0])
    v = np.asarray(phi.value(np.concatenate([xi, -xi])))
    return at0 == 0.0 and bool(np.all(v > 0))


def penalty_function(pen: Penalty, C: ConvexSet) -> pl.ProxFun:
    """``phi(d_C(.))`` for a :class:`Penalty`."""
    w = pen.weight
    k = pen.kind
    if k == "indicator":
        return pl.Indicator(C)
    if k == "abs":
        return pl.DistCompose(pl.Abs(w), C)
    if k == "square":
        return pl.DistCompose(pl.Square(w), C)
    if k == "huber":
        if pen.rho is None:
            raise ValueError("huber penalty needs rho")
        F = pl.HuberDist(pen.rho, C)
    elif k == "vapnik":
        if pen.eps is None:
            raise ValueError("vapnik penalty needs eps")
        psi = pl.Square() if pen.psi is None else pen.psi
        if not _vanishes_only_at_zero(psi):
            raise ValueError("psi must vanish only at 0")
        F = pl.VapnikDist(psi, pen.eps, C)
    elif k == "log":
        if pen.omega is None:
            raise ValueError("log penalty needs omega")
        F = pl.LogDist(pen.omega, C)
    else:
        if pen.phi is None:
            raise ValueError("custom penalty needs phi")
        if not pl.check_even(pen.phi):
            raise ValueError("penalty must be even")
        if not pen.phi.zero_domain and not _vanishes_only_at_zero(pen.phi):
            raise ValueError("penalty must vanish only at 0")
        return pl.DistCompose(pl.Scaled(w, pen.phi) if w != 1.0 else pen.phi, C)
    return F if w == 1.0 else pl.Scale(w, F)


@dataclass
class Constraint:
    """Soft constraint ``L x in C`` penalized by ``penalty``."""

    C: ConvexSet
    penalty: Penalty
    L: LinOp | None = None


@dataclass
class FeasibilityRelaxation:
    """Hard constraint ``E`` plus penalized constraints ``L_k x in C_k``."""

    E: ConvexSet
    constraints: list[Constraint] = field(default_factory=list)
    shape: tuple | None = None

    def primal_shape(self) -> tuple:
        if self.shape is not None:
            return tuple(self.shape)
        for c in self.constraints:
            if c.L is not None:
                return c.L.in_shape
            if c.C.shape is not None:
                return c.C.shape
        if self.E.shape is not None:
            return self.E.shape
        raise ShapeError("cannot infer the primal shape")


def relax(spec: FeasibilityRelaxation, fully_proximal: bool = False,
          name: str = "") -> CompositeProblem:
    """Compile a relaxation into a :class:`CompositeProblem`.

    ``f = iota_E``; nonsmooth penalties become ``g_i`` and smooth ones
    ``h_j``.  With ``fully_proximal=True`` every penalty is placed among the
    proximal terms, which is valid since each ``phi o d_C`` has an explicit
    prox.
    """
    shape = spec.primal_shape()
    f = pl.ZeroFun(shape) if isinstance(spec.E, WholeSpace) else pl.Indicator(spec.E)
    I, J = [], []
    for c in spec.constraints:
        L = Identity(shape) if c.L is None else c.L
        F = penalty_function(c.penalty, c.C)
        if F.smooth and not fully_proximal:
            J.append(Term(F, L))
        else:
            I.append(Term(F, L))
    return CompositeProblem(f, I, J, shape=shape, name=name)


def least_squares_relaxation(sets: Sequence[ConvexSet], weights: Sequence[float],
                             E: ConvexSet | None = None,
                             fully_proximal: bool = False) -> CompositeProblem:
    """``minimize_{x in E} 1/2 sum_j w_j d^2_{C_j}(x)``; ``E`` defaults to the
    whole space."""
    shape = next(C.shape for C in sets if C.shape is not None)
    E = WholeSpace(shape) if E is None else E
    cons = [Constraint(C, Penalty("square", w)) for C, w in zip(sets, weights)]
    return relax(FeasibilityRelaxation(E, cons, shape), fully_proximal)


def mixed_least_squares_relaxation(direct: Sequence[tuple[ConvexSet, float]],
                                   mapped: Sequence[tuple[ConvexSet, LinOp, float]],
                                   E: ConvexSet, shape=None,
                                   fully_proximal: bool = False) -> CompositeProblem:
    """Weighted squared distances to sets ``C_j`` and to ``C_j`` through
    operators ``L_j``, over the hard constraint ``E``."""
    cons = [Constraint(C, Penalty("square", w)) for C, w in direct]
    cons += [Constraint(C, Penalty("square", w), L) for C, L, w in mapped]
    return relax(FeasibilityRelaxation(E, cons, shape), fully_proximal)


@dataclass
class MultivariateRelaxation:
    """Ingredients of the multivariate relaxation on ``H_1 x ... x H_m``.

    Attributes
    ----------
    block_shapes : list of shapes of the ``H_l``.
    sets : one set ``C_l`` per block.
    penalties : one :class:`Penalty` per block.
    couplings : ``p x m`` nested list of LinOps ``M_{kl}`` (``None``: zero).
    targets : the ``p`` sets ``E_k``.
    """

    block_shapes: list
    sets: list
    penalties: list
    couplings: list
    targets: list


def multivariate_relaxation(spec: MultivariateRelaxation,
                            fully_proximal: bool = False) -> CompositeProblem:
    """Stack blocks into one product space.

    The coupling term ``(1/2p) sum_k d^2_{E_k}(sum_l M_kl x_l)`` becomes one
    smooth term with ``L_0 = [M_kl]``, ``C_0 = E_1 x ... x E_p`` and
    ``psi_0 = |.|^2/(2p)``; block ``l`` enters through the coordinate map.
    """
    layout = BlockLayout(spec.block_shapes)
    p = len(spec.targets)
    L0 = BlockOp(spec.couplings, in_layout=layout)
    C0 = ProductSet(spec.targets, L0.out_layout)
    cons = [Constraint(C0, Penalty("square", 1.0 / p), L0)]
    for k, (C, pen) in enumerate(zip(spec.sets, spec.penalties)):
        cons.append(Constraint(C, pen, select(layout, k)))
    return relax(FeasibilityRelaxation(WholeSpace(layout.shape), cons,
                                       layout.shape), fully_proximal)

"""Nonempty closed convex sets with exact projectors."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .hilbert import (BlockLayout, MaskOp, ShapeError, as_vector, dft,
                      idft, inner, norm)

DEFAULT_TOL = 1e-8


class ConvexSet:
    """Base class.  Subclasses implement :meth:`project` and :meth:`contains`.

    ``shape`` may be ``None`` for sets that accept any shape (boxes with
    scalar bounds, for instance).
    """

    shape: tuple[int, ...] | None = None

    def _check(self, x) -> np.ndarray:
        return as_vector(x, self.shape)

    def project(self, x) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x, tol: float = DEFAULT_TOL) -> bool:
        raise NotImplementedError

    def distance(self, x) -> float:
        x = self._check(x)
        return norm(x - self.project(x))

    def project_and_distance(self, x) -> tuple[np.ndarray, float]:
        x = self._check(x)
        p = self.project(x)
        return p, norm(x - p)


class WholeSpace(ConvexSet):
    def __init__(self, shape=None):
        self.shape = None if shape is None else tuple(np.atleast_1d(shape))

    def project(self, x):
        return self._check(x).copy()

    def contains(self, x, tol=DEFAULT_TOL):
        self._check(x)
        return True


class Box(ConvexSet):
    """Entrywise bounds ``lo <= x <= hi``; bounds may be arrays or +-inf."""

    def __init__(self, lo, hi, shape=None):
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        if np.any(lo > hi):
            raise ValueError("box requires lo <= hi")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("box bounds must not be NaN")
        self.lo, self.hi = lo, hi
        if shape is None and (lo.ndim or hi.ndim):
            shape = np.broadcast_shapes(lo.shape, hi.shape)
        self.shape = None if shape is None else tuple(shape)

    def project(self, x):
        return np.clip(self._check(x), self.lo, self.hi)

    def contains(self, x, tol=DEFAULT_TOL):
        x = self._check(x)
        return bool((x >= self.lo - tol).all() and (x <= self.hi + tol).all())


def Interval(lo: float, hi: float) -> Box:
    """Closed interval of the real line as a 1-element box."""
    return Box(lo, hi, shape=(1,))


class Singleton(ConvexSet):
    def __init__(self, point):
        self.point = as_vector(point)
        self.shape = self.point.shape

    def project(self, x):
        self._check(x)
        return self.point.copy()

    def contains(self, x, tol=DEFAULT_TOL):
        return norm(self._check(x) - self.point) <= tol


class Hyperplane(ConvexSet):
    """``{x : <a, x> = b}``."""

    def __init__(self, a, b: float):
        self.a = as_vector(a)
        self.b = float(b)
        self._aa = inner(self.a, self.a)
        if self._aa == 0.0:
            raise ValueError("hyperplane normal must be nonzero")
        self.shape = self.a.shape

    def project(self, x):
        x = self._check(x)
        return x + ((self.b - inner(self.a, x)) / self._aa) * self.a

    def contains(self, x, tol=DEFAULT_TOL):
        return abs(inner(self.a, self._check(x)) - self.b) <= tol


class HalfSpace(ConvexSet):
    """``{x : <a, x> <= b}``."""

    def __init__(self, a, b: float):
        self.a = as_vector(a)
        self.b = float(b)
        self._aa = inner(self.a, self.a)
        if self._aa == 0.0:
            raise ValueError("half-space normal must be nonzero")
        self.shape = self.a.shape

    def project(self, x):
        x = self._check(x)
        excess = inner(self.a, x) - self.b
        if excess <= 0.0:
            return x.copy()
        return x - (excess / self._aa) * self.a

    def contains(self, x, tol=DEFAULT_TOL):
        return inner(self.a, self._check(x)) - self.b <= tol


class Ball(ConvexSet):
    """Closed Euclidean ball ``{x : ||x - center|| <= radius}``."""

    def __init__(self, center, radius: float):
        if radius <= 0:
            raise ValueError("ball radius must be positive")
        self.center = as_vector(center)
        self.radius = float(radius)
        self.shape = self.center.shape

    def project(self, x):
        x = self._check(x)
        d = x - self.center
        nd = norm(d)
        if nd <= self.radius:
            return x.copy()
        return self.center + (self.radius / nd) * d

    def contains(self, x, tol=DEFAULT_TOL):
        return norm(self._check(x) - self.center) <= self.radius + tol


class SubspaceMask(ConvexSet):
    """Coordinate subspace ``{x : x_k = 0 wherever mask_k is false}``."""

    def __init__(self, mask):
        self.mask = np.asarray(mask, dtype=bool)
        self.shape = self.mask.shape

    def project(self, x):
        return np.where(self.mask, self._check(x), 0.0)

    def contains(self, x, tol=DEFAULT_TOL):
        x = self._check(x)
        return bool(np.all(np.abs(x[~self.mask]) <= tol))

    def complement(self) -> "SubspaceMask":
        return SubspaceMask(~self.mask)

    def projector(self) -> MaskOp:
        return MaskOp(self.mask)


def _index_mask(indices, shape) -> np.ndarray:
    """Boolean mask from a boolean array or an ``(n, ndim)`` index list."""
    arr = np.asarray(indices)
    if arr.dtype == bool:
        if arr.shape != tuple(shape):
            raise ShapeError("frequency mask shape mismatch")
        return arr.copy()
    mask = np.zeros(shape, dtype=bool)
    if arr.size:
        arr = arr.reshape(-1, len(shape)) % np.asarray(shape)
        mask[tuple(arr.T)] = True
    return mask


def _partner_array(a: np.ndarray) -> np.ndarray:
    """``a[-k mod shape]`` for every multi-index ``k``."""
    out = a
    for ax in range(a.ndim):
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return out


class DFTDataSet(ConvexSet):
    """Real signals whose unitary DFT matches ``target`` on a frequency set.

    Parameters
    ----------
    shape : tuple
        Signal shape.
    indices : bool array or (n, ndim) int array
        Frequencies with prescribed values.  The set is closed under
        ``k -> -k`` automatically.
    values : complex array, optional
        Prescribed coefficients, either aligned with an index list or a full
        array of ``shape``.  Partners are filled in by conjugation; given
        values must already be Hermitian-consistent.
    """

    def __init__(self, shape, indices, values, tol: float = 1e-9):
        self.shape = tuple(shape)
        given = _index_mask(indices, self.shape)
        full = np.zeros(self.shape, dtype=complex)
        vals = np.asarray(values, dtype=complex)
        if vals.shape == self.shape:
            full[given] = vals[given]
        else:
            idx = np.asarray(indices).reshape(-1, len(self.shape)) % np.asarray(self.shape)
            if len(idx) != vals.size:
                raise ShapeError("values must align with indices")
            full[tuple(idx.T)] = vals.ravel()
        partner_given = _partner_array(given)
        partner_vals = np.conj(_partner_array(full))
        both = given & partner_given
        scale = max(1.0, float(np.abs(full).max(initial=0.0)))
        if np.any(np.abs(full[both] - partner_vals[both]) > tol * scale):
            raise ValueError("target values are not Hermitian-consistent")
        mask = given | partner_given
        full = np.where(given, full, partner_vals)
        self.mask = mask
        self.target = np.where(mask, full, 0.0)

    @classmethod
    def from_signal(cls, signal, indices) -> "DFTDataSet":
        s = as_vector(signal)
        return cls(s.shape, indices, dft(s))

    def project(self, x):
        xh = dft(self._check(x))
        xh[self.mask] = self.target[self.mask]
        return idft(xh).real

    def contains(self, x, tol=DEFAULT_TOL):
        xh = dft(self._check(x))
        if not self.mask.any():
            return True
        return float(np.abs(xh[self.mask] - self.target[self.mask]).max()) <= tol


def low_frequency_indices(shape, count: int) -> np.ndarray:
    """Index list of the frequency block ``{0, ..., count-1}^2``."""
    H, W = shape
    ii, jj = np.meshgrid(np.arange(min(count, H)), np.arange(min(count, W)),
                         indexing="ij")
    return np.stack([ii.ravel(), jj.ravel()], axis=1)


class PhaseSet(ConvexSet):
    """Real signals whose DFT has prescribed phase ``theta`` (or vanishes).

    Each coefficient is projected onto the ray ``{rho e^{i theta} : rho >= 0}``;
    anti-aligned coefficients go to the vertex ``0``.
    """

    def __init__(self, theta, tol: float = 1e-8):
        theta = as_vector(theta)
        self.shape = theta.shape
        u = np.exp(1j * theta)
        if np.any(np.abs(_partner_array(u) - np.conj(u)) > tol):
            raise ValueError("phase must satisfy theta(-k) = -theta(k) mod 2pi")
        self.theta = theta
        self._u = u

    @classmethod
    def from_signal(cls, signal) -> "PhaseSet":
        sh = dft(as_vector(signal))
        # snap self-conjugate coefficients to an exact real phase
        theta = np.angle(sh)
        real_pts = np.abs(sh.imag) <= 1e-12 * max(1.0, float(np.abs(sh).max()))
        theta = np.where(real_pts, np.where(sh.real < 0, np.pi, 0.0), theta)
        return cls(theta)

    def project(self, x):
        xh = dft(self._check(x))
        amp = np.maximum((xh * np.conj(self._u)).real, 0.0)
        return idft(amp * self._u).real

    def contains(self, x, tol=DEFAULT_TOL):
        xh = dft(self._check(x)) * np.conj(self._u)
        return bool(np.all(np.abs(xh.imag) <= tol) and np.all(xh.real >= -tol))


class ProductSet(ConvexSet):
    """Cartesian product of sets over a flat :class:`BlockLayout`."""

    def __init__(self, sets: Sequence[ConvexSet], layout: BlockLayout):
        if len(sets) != len(layout):
            raise ValueError("one set per block required")
        self.sets = list(sets)
        self.layout = layout
        self.shape = layout.shape

    def project(self, x):
        blocks = self.layout.split(self._check(x))
        return self.layout.join([C.project(b) for C, b in zip(self.sets, blocks)])

    def contains(self, x, tol=DEFAULT_TOL):
        blocks = self.layout.split(self._check(x))
        return all(C.contains(b, tol) for C, b in zip(self.sets, blocks))

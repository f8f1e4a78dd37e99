"""Finite-dimensional Hilbert-space vectors and matrix-free linear operators.

Vectors are plain ``float64`` numpy arrays; the array shape is the shape
tag.  Product spaces (for example the range of the discrete gradient) are
stored as contiguous blocks, either along a leading axis (``(2, H, W)``) or
as a flat concatenation described by a :class:`BlockLayout`.

All stationary operators use periodic boundaries so that they are
diagonalized by the unitary 2-D DFT.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

Shape = tuple[int, ...]


class ShapeError(ValueError):
    """Raised when a vector does not match the shape an operator expects."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative linear solve misses its residual target."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (relative residual {residual:.3e})")
        self.residual = residual


def _as_shape(shape) -> Shape:
    if isinstance(shape, (int, np.integer)):
        return (int(shape),)
    return tuple(int(s) for s in shape)


def as_vector(x, shape: Shape | None = None) -> np.ndarray:
    """Return ``x`` as a finite float64 array, optionally checking its shape."""
    arr = np.asarray(x, dtype=np.float64)
    if shape is not None and arr.shape != tuple(shape):
        raise ShapeError(f"expected shape {tuple(shape)}, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("vector has non-finite entries")
    return arr


def inner(x, y) -> float:
    """Euclidean scalar product of two vectors of identical shape."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeError(f"inner product of shapes {x.shape} and {y.shape}")
    return float(np.vdot(x.ravel(), y.ravel()))


def norm(x) -> float:
    a = np.ravel(x)
    return math.sqrt(np.vdot(a, a).real)


# ---------------------------------------------------------------------------
# Unitary DFT helpers
# ---------------------------------------------------------------------------

def dft(x: np.ndarray) -> np.ndarray:
    """Unitary N-D DFT over all axes."""
    return np.fft.fftn(x, norm="ortho")


def idft(xh: np.ndarray) -> np.ndarray:
    """Inverse unitary N-D DFT over all axes (complex output)."""
    return np.fft.ifftn(xh, norm="ortho")


def hermitian_partner(index: Sequence[int], shape: Shape) -> tuple[int, ...]:
    """Index of the conjugate-symmetric frequency ``-k mod shape``."""
    return tuple((-int(k)) % n for k, n in zip(index, shape))


# ---------------------------------------------------------------------------
# Block layouts for product spaces
# ---------------------------------------------------------------------------

class BlockLayout:
    """Flat concatenation of several blocks, each with its own shape."""

    def __init__(self, block_shapes: Sequence):
        self.block_shapes = [_as_shape(s) for s in block_shapes]
        self.sizes = [math.prod(s) for s in self.block_shapes]
        self.offsets = np.concatenate([[0], np.cumsum(self.sizes)]).astype(int)
        self.shape: Shape = (int(self.offsets[-1]),)

    def __len__(self) -> int:
        return len(self.block_shapes)

    def split(self, x: np.ndarray) -> list[np.ndarray]:
        x = np.asarray(x)
        if x.shape != self.shape:
            raise ShapeError(f"expected shape {self.shape}, got {x.shape}")
        return [x[a:b].reshape(s) for a, b, s in
                zip(self.offsets[:-1], self.offsets[1:], self.block_shapes)]

    def join(self, blocks: Sequence[np.ndarray]) -> np.ndarray:
        if len(blocks) != len(self.block_shapes):
            raise ShapeError("wrong number of blocks")
        parts = []
        for blk, s in zip(blocks, self.block_shapes):
            blk = np.asarray(blk, dtype=np.float64)
            if blk.shape != s:
                raise ShapeError(f"block of shape {blk.shape}, expected {s}")
            parts.append(blk.ravel())
        return np.concatenate(parts) if parts else np.zeros(0)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)


# ---------------------------------------------------------------------------
# Linear operators
# ---------------------------------------------------------------------------

class LinOp:
    """Matrix-free bounded linear operator with an adjoint and a norm bound.

    Parameters
    ----------
    in_shape, out_shape : tuple of int
        Shapes of the domain and range vectors.
    forward, adjoint : callable
        ``forward(x)`` maps ``in_shape`` arrays to ``out_shape`` arrays and
        ``adjoint(y)`` maps back.  Both are assumed linear and pure.
    norm_bound : float
        Upper bound on the operator norm.
    """

    def __init__(self, in_shape, out_shape, forward: Callable,
                 adjoint: Callable, norm_bound: float, name: str = "LinOp"):
        if norm_bound < 0:
            raise ValueError("norm_bound must be nonnegative")
        self.in_shape = _as_shape(in_shape)
        self.out_shape = _as_shape(out_shape)
        self._forward = forward
        self._adjoint = adjoint
        self.norm_bound = float(norm_bound)
        self.name = name

    # frequency response when the operator is DFT-diagonal, else None
    frequency_response: np.ndarray | None = None

    def apply(self, x) -> np.ndarray:
        x = as_vector(x, self.in_shape)
        return np.asarray(self._forward(x), dtype=np.float64).reshape(
            self.out_shape)

    def apply_adjoint(self, y) -> np.ndarray:
        y = as_vector(y, self.out_shape)
        return np.asarray(self._adjoint(y), dtype=np.float64).reshape(
            self.in_shape)

    __call__ = apply

    @property
    def T(self) -> "LinOp":
        return LinOp(self.out_shape, self.in_shape, self._adjoint,
                     self._forward, self.norm_bound, name=f"{self.name}*")

    def __repr__(self) -> str:
        return (f"{self.name}({self.in_shape} -> {self.out_shape}, "
                f"norm<={self.norm_bound:.4g})")


class Identity(LinOp):
    def __init__(self, shape):
        shape = _as_shape(shape)
        super().__init__(shape, shape, lambda x: x.copy(), lambda y: y.copy(),
                         1.0, name="Identity")
        self.frequency_response = np.ones(shape)


class MatrixOp(LinOp):
    """Dense matrix acting on flattened vectors."""

    def __init__(self, matrix, in_shape=None, out_shape=None):
        A = np.asarray(matrix, dtype=np.float64)
        if A.ndim != 2:
            raise ValueError("matrix must be 2-D")
        in_shape = _as_shape(in_shape if in_shape is not None else A.shape[1])
        out_shape = _as_shape(out_shape if out_shape is not None else A.shape[0])
        if math.prod(in_shape) != A.shape[1] or math.prod(out_shape) != A.shape[0]:
            raise ShapeError("matrix dimensions do not match shapes")
        self.matrix = A
        super().__init__(in_shape, out_shape,
                         lambda x: A @ x.ravel(), lambda y: A.T @ y.ravel(),
                         float(np.linalg.norm(A, 2)) if A.size else 0.0,
                         name="MatrixOp")


class SparseOp(LinOp):
    """Operator backed by a scipy sparse matrix acting on flattened vectors.

    ``norm_bound`` defaults to the Schur bound ``sqrt(||A||_1 ||A||_inf)``.
    """

    def __init__(self, matrix, in_shape, out_shape, norm_bound: float | None = None):
        A = sp.csr_matrix(matrix, dtype=np.float64)
        AT = A.T.tocsr()
        if norm_bound is None:
            row = np.abs(A).sum(axis=1).max() if A.nnz else 0.0
            col = np.abs(A).sum(axis=0).max() if A.nnz else 0.0
            norm_bound = math.sqrt(float(row) * float(col))
        self.matrix = A
        super().__init__(in_shape, out_shape, lambda x: A @ x.ravel(),
                         lambda y: AT @ y.ravel(), norm_bound, name="SparseOp")


class MaskOp(LinOp):
    """Coordinate projector: keeps entries where ``mask`` is true."""

    def __init__(self, mask):
        m = np.asarray(mask, dtype=bool)
        self.mask = m
        w = m.astype(np.float64)
        nb = 1.0 if m.any() else 0.0
        super().__init__(m.shape, m.shape, lambda x: w * x, lambda y: w * y,
                         nb, name="MaskOp")

    def complement(self) -> "MaskOp":
        return MaskOp(~self.mask)


def uniform_kernel(height: int, width: int) -> np.ndarray:
    """Uniform rectangular blur kernel with unit mass."""
    if height < 1 or width < 1:
        raise ValueError("kernel dimensions must be positive")
    return np.full((height, width), 1.0 / (height * width))


def pad_kernel(kernel: np.ndarray, image_shape: Shape) -> np.ndarray:
    """Zero-pad ``kernel`` to ``image_shape`` with its center at index 0.

    The anchor is ``(kh // 2, kw // 2)``.
    """
    k = np.asarray(kernel, dtype=np.float64)
    kh, kw = k.shape
    H, W = image_shape
    if kh > H or kw > W:
        raise ShapeError("kernel larger than image")
    padded = np.zeros((H, W))
    padded[:kh, :kw] = k
    return np.roll(padded, (-(kh // 2), -(kw // 2)), axis=(0, 1))


class ConvolutionOp(LinOp):
    """Circular 2-D convolution with a small kernel, applied via the FFT."""

    def __init__(self, kernel, image_shape):
        image_shape = _as_shape(image_shape)
        if len(image_shape) != 2:
            raise ShapeError("ConvolutionOp acts on 2-D images")
        self.kernel = np.array(kernel, dtype=np.float64)
        self.image_shape = image_shape
        resp = np.fft.fft2(pad_kernel(self.kernel, image_shape))
        resp.flags.writeable = False
        conj = np.conj(resp)

        def fwd(x):
            return np.fft.ifft2(resp * np.fft.fft2(x)).real

        def adj(y):
            return np.fft.ifft2(conj * np.fft.fft2(y)).real

        super().__init__(image_shape, image_shape, fwd, adj,
                         float(np.abs(resp).max()), name="ConvolutionOp")
        self.frequency_response = resp


class GradientOp(LinOp):
    """Periodic discrete gradient ``x -> (G1 x, G2 x)``, output ``(2, H, W)``.

    ``G1`` is the horizontal forward difference and ``G2`` the vertical one.
    The stored norm bound is ``sqrt(8)``.
    """

    def __init__(self, image_shape):
        image_shape = _as_shape(image_shape)
        if len(image_shape) != 2:
            raise ShapeError("GradientOp acts on 2-D images")
        self.image_shape = image_shape

        def fwd(x):
            out = np.empty((2,) + x.shape)
            out[0] = np.roll(x, -1, axis=1) - x
            out[1] = np.roll(x, -1, axis=0) - x
            return out

        def adj(u):
            return (np.roll(u[0], 1, axis=1) - u[0]
                    + np.roll(u[1], 1, axis=0) - u[1])

        super().__init__(image_shape, (2,) + image_shape, fwd, adj,
                         math.sqrt(8.0), name="GradientOp")


# ---------------------------------------------------------------------------
# Combinators
# ---------------------------------------------------------------------------

def compose(A: LinOp, B: LinOp) -> LinOp:
    """Return ``A o B`` (apply ``B`` first)."""
    if B.out_shape != A.in_shape:
        raise ShapeError(f"cannot compose {A!r} after {B!r}")
    return LinOp(B.in_shape, A.out_shape,
                 lambda x: A.apply(B.apply(x)),
                 lambda y: B.apply_adjoint(A.apply_adjoint(y)),
                 A.norm_bound * B.norm_bound, name=f"({A.name}.{B.name})")


def scale(alpha: float, L: LinOp) -> LinOp:
    alpha = float(alpha)
    op = LinOp(L.in_shape, L.out_shape, lambda x: alpha * L.apply(x),
               lambda y: alpha * L.apply_adjoint(y), abs(alpha) * L.norm_bound,
               name=f"{alpha:g}*{L.name}")
    if L.frequency_response is not None:
        op.frequency_response = alpha * L.frequency_response
    return op


class BlockOp(LinOp):
    """Block operator between product spaces.

    ``blocks[r][c]`` maps input block ``c`` to output block ``r``; ``None``
    stands for zero.  Input and output are flat vectors described by
    :class:`BlockLayout` objects.  The norm bound is the Frobenius norm of
    the matrix of block norm bounds.
    """

    def __init__(self, blocks: Sequence[Sequence[LinOp | None]],
                 in_layout: BlockLayout | None = None,
                 out_layout: BlockLayout | None = None):
        rows = [list(r) for r in blocks]
        n_out, n_in = len(rows), len(rows[0])
        if any(len(r) != n_in for r in rows):
            raise ShapeError("ragged block structure")
        in_shapes: list = [None] * n_in
        out_shapes: list = [None] * n_out
        for r, row in enumerate(rows):
            for c, op in enumerate(row):
                if op is None:
                    continue
                for lst, idx, s in ((in_shapes, c, op.in_shape),
                                    (out_shapes, r, op.out_shape)):
                    if lst[idx] is not None and lst[idx] != s:
                        raise ShapeError("inconsistent block shapes")
                    lst[idx] = s
        if in_layout is None:
            if any(s is None for s in in_shapes):
                raise ShapeError("cannot infer input layout")
            in_layout = BlockLayout(in_shapes)
        if out_layout is None:
            if any(s is None for s in out_shapes):
                raise ShapeError("cannot infer output layout")
            out_layout = BlockLayout(out_shapes)
        self.blocks = rows
        self.in_layout = in_layout
        self.out_layout = out_layout

        def fwd(x):
            xs = in_layout.split(x)
            outs = []
            for r, row in enumerate(rows):
                acc = np.zeros(out_layout.block_shapes[r])
                for c, op in enumerate(row):
                    if op is not None:
                        acc += op.apply(xs[c])
                outs.append(acc)
            return out_layout.join(outs)

        def adj(y):
            ys = out_layout.split(y)
            outs = []
            for c in range(n_in):
                acc = np.zeros(in_layout.block_shapes[c])
                for r in range(n_out):
                    op = rows[r][c]
                    if op is not None:
                        acc += op.apply_adjoint(ys[r])
                outs.append(acc)
            return in_layout.join(outs)

        nb = math.sqrt(sum(op.norm_bound ** 2 for row in rows for op in row
                           if op is not None))
        super().__init__(in_layout.shape, out_layout.shape, fwd, adj, nb,
                         name="BlockOp")


class Stack(LinOp):
    """Vertical stack ``x -> (L_1 x, ..., L_m x)`` into a flat product space.

    The output layout is available as ``out_layout``; the norm bound is the
    root of the sum of squared bounds.
    """

    def __init__(self, ops: Sequence[LinOp]):
        ops = list(ops)
        if not ops:
            raise ValueError("stack needs at least one operator")
        shape = ops[0].in_shape
        if any(op.in_shape != shape for op in ops):
            raise ShapeError("stacked operators must share their domain")
        layout = BlockLayout([op.out_shape for op in ops])
        self.ops = ops
        self.out_layout = layout

        def fwd(x):
            return layout.join([op.apply(x) for op in ops])

        def adj(y):
            ys = layout.split(y)
            acc = np.zeros(shape)
            for op, yk in zip(ops, ys):
                acc += op.apply_adjoint(yk)
            return acc

        nb = math.sqrt(sum(op.norm_bound ** 2 for op in ops))
        super().__init__(shape, layout.shape, fwd, adj, nb, name="Stack")


def stack(ops: Sequence[LinOp]) -> Stack:
    return Stack(ops)


def select(layout: BlockLayout, k: int) -> LinOp:
    """Coordinate map of a product space onto its ``k``-th block."""
    a, b = int(layout.offsets[k]), int(layout.offsets[k + 1])
    s = layout.block_shapes[k]

    def fwd(x):
        return x[a:b].reshape(s)

    def adj(y):
        out = np.zeros(layout.shape)
        out[a:b] = y.ravel()
        return out

    return LinOp(layout.shape, s, fwd, adj, 1.0, name=f"Select[{k}]")


def estimate_norm(L: LinOp, n_iter: int = 200, seed: int = 0,
                  tol: float = 1e-12) -> float:
    """Power-iteration estimate of ``||L||`` (a lower bound in exact arithmetic)."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(L.in_shape)
    x /= norm(x)
    est = 0.0
    for _ in range(n_iter):
        y = L.apply_adjoint(L.apply(x))
        ny = norm(y)
        if ny == 0.0:
            return 0.0
        new = math.sqrt(ny)
        x = y / ny
        if abs(new - est) <= tol * new:
            est = new
            break
        est = new
    return est


# ---------------------------------------------------------------------------
# Normal equations
# ---------------------------------------------------------------------------

def solve_normal(alphas: Sequence[float], ops: Sequence[LinOp],
                 projectors: Sequence[LinOp | None] | None, gamma: float, b,
                 tol: float = 1e-8, max_iter: int = 2000) -> np.ndarray:
    """Solve ``(Id + gamma * sum_i alpha_i L_i^* P_i L_i) x = b``.

    ``P_i`` must be self-adjoint idempotent; ``None`` means the identity.
    When every ``L_i`` is DFT-diagonal and every ``P_i`` is the identity the
    system is inverted exactly in the frequency domain; otherwise conjugate
    gradients is run until the residual is below ``tol * ||b||``.

    Raises
    ------
    ConvergenceError
        If conjugate gradients does not reach the residual target.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    alphas = [float(a) for a in alphas]
    ops = list(ops)
    if projectors is None:
        projectors = [None] * len(ops)
    projectors = list(projectors)
    if not (len(alphas) == len(ops) == len(projectors)):
        raise ValueError("alphas, ops and projectors must have equal length")
    if any(a <= 0 for a in alphas):
        raise ValueError("weights must be positive")
    b = as_vector(b)
    for op in ops:
        if op.in_shape != b.shape:
            raise ShapeError(f"operator domain {op.in_shape} vs rhs {b.shape}")
    if not ops:
        return b.copy()

    if all(op.frequency_response is not None for op in ops) and \
            all(P is None for P in projectors):
        denom = np.ones(b.shape)
        for a, op in zip(alphas, ops):
            denom = denom + gamma * a * np.abs(op.frequency_response) ** 2
        return np.fft.ifftn(np.fft.fftn(b) / denom).real

    shape = b.shape

    def matvec(v):
        v = v.reshape(shape)
        out = v.copy()
        for a, op, P in zip(alphas, ops, projectors):
            w = op.apply(v)
            if P is not None:
                w = P.apply(w)
            out += gamma * a * op.apply_adjoint(w)
        return out.ravel()

    n = b.size
    A = spla.LinearOperator((n, n), matvec=matvec, dtype=np.float64)
    bn = norm(b)
    if bn == 0.0:
        return np.zeros(shape)
    x, _ = spla.cg(A, b.ravel(), rtol=0.1 * tol, atol=0.0, maxiter=max_iter)
    res = norm(matvec(x) - b.ravel()) / bn
    if res > tol:
        raise ConvergenceError("normal-equation solve did not converge", res)
    return x.reshape(shape)

"""Image-recovery experiments and the command-line interface.

Four experiments are available at any side length (``--scale``); kernel
sizes, frequency sets and line masks shrink proportionally from their
native image sizes.

``deconv``     sparse deconvolution over ``[0, 255]^N`` (native 128)
``multiview``  two blurred views plus low-frequency Fourier data (native 128)
``interp``     missing lines plus a nonstationary blur (native 96)
``phase``      relaxed feasibility problem built on the Fourier phase (native 512)

Each experiment is built in two forms: a smooth form in which
differentiable terms are used through their gradients, and a fully
proximal form in which every term is used through its prox.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import convex_sets as cs
from . import model as md
from . import oracles as orc
from . import prox_lib as pl
from . import solvers as sv
from .hilbert import (ConvolutionOp, GradientOp, Identity, MatrixOp, ShapeError,
                      SparseOp, uniform_kernel)

EXPERIMENTS = ("deconv", "multiview", "interp", "phase")
NATIVE = {"deconv": 128, "multiview": 128, "interp": 96, "phase": 512}
ALGOS = ("fb", "ifb", "dr", "fbf-s", "fbf-p", "pd-s", "pd-p", "ps-s", "ps-p")
DEFAULT_ALGO = {"deconv": "dr", "multiview": "pd-p", "interp": "pd-p", "phase": "pd-p"}
REFERENCE_ALGO = {"deconv": "dr", "multiview": "pd-p", "interp": "pd-p", "phase": "pd-p"}

EXIT_OK, EXIT_CHECK_FAILED, EXIT_VALIDATION, EXIT_IO = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# Image I/O
# ---------------------------------------------------------------------------

def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) PGM image with ``maxval <= 255``."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM file")
    w, h, maxval = (int(t) for t in tokens[1:])
    if maxval > 255:
        raise ValueError(f"{path}: 16-bit PGM not supported")
    pix = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=pos + 1)
    return pix.reshape(h, w).astype(np.float64) * (255.0 / maxval)


def write_pgm(path, image) -> None:
    """Write an image as 8-bit binary PGM after rounding and clipping."""
    img = np.clip(np.rint(np.asarray(image, dtype=np.float64)), 0, 255).astype(np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def write_raw_csv(path, array) -> None:
    np.savetxt(path, np.asarray(array, dtype=np.float64), delimiter=",", fmt="%.17g")


def read_raw_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def phantom(n: int) -> np.ndarray:
    """Piecewise-constant ellipse phantom on an ``n x n`` grid, range [0, 255]."""
    # (value, a, b, x0, y0, angle in degrees)
    ellipses = [(1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
                (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
                (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
                (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
                (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
                (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
                (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
                (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
                (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
                (0.1, 0.023, 0.046, 0.06, -0.605, 0.0)]
    t = (np.arange(n) + 0.5) / n * 2.0 - 1.0
    X, Y = np.meshgrid(t, -t)
    img = np.zeros((n, n))
    for v, a, b, x0, y0, ang in ellipses:
        c, s = math.cos(math.radians(ang)), math.sin(math.radians(ang))
        xr = (X - x0) * c + (Y - y0) * s
        yr = -(X - x0) * s + (Y - y0) * c
        img[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += v
    img = np.clip(img, 0.0, None)
    return 255.0 * img / img.max()


def resize_nearest(img: np.ndarray, n: int) -> np.ndarray:
    h, w = img.shape
    rows = np.minimum((np.arange(n) * h) // n, h - 1)
    cols = np.minimum((np.arange(n) * w) // n, w - 1)
    return img[np.ix_(rows, cols)]


# ---------------------------------------------------------------------------
# Random degradations
# ---------------------------------------------------------------------------

def _generator(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream])))


def gaussian_noise(shape, seed: int, stream: int = 0) -> np.ndarray:
    """Standard normal samples from counter-based uniforms via Box-Muller."""
    m = math.prod(shape)
    k = (m + 1) // 2
    u = _generator(seed, stream).random(2 * k)
    r = np.sqrt(-2.0 * np.log1p(-u[:k]))
    ang = 2.0 * np.pi * u[k:]
    z = np.concatenate([r * np.cos(ang), r * np.sin(ang)])[:m]
    return z.reshape(shape)


def bsnr_db(signal, noise) -> float:
    """``20 log10(||s - mean(s)|| / ||w||)``."""
    s = np.asarray(signal, dtype=np.float64)
    return 20.0 * math.log10(np.linalg.norm(s - s.mean()) / np.linalg.norm(noise))


def noise_at_bsnr(signal, target_db: float | None, seed: int, stream: int = 0,
                  mask=None) -> np.ndarray:
    """White Gaussian noise scaled so that ``bsnr_db`` equals ``target_db``.

    With ``mask`` the noise and the ratio are restricted to masked entries.
    ``None`` or ``inf`` requests zero noise.
    """
    s = np.asarray(signal, dtype=np.float64)
    if target_db is None or math.isinf(target_db):
        return np.zeros_like(s)
    w = gaussian_noise(s.shape, seed, stream)
    if mask is not None:
        w = np.where(mask, w, 0.0)
        s = s[mask]
    spread = np.linalg.norm(s - s.mean())
    return w * (spread / np.linalg.norm(w) / 10.0 ** (target_db / 20.0))


def scaled_dim(k: int, scale: int, native: int) -> int:
    return max(1, (k * scale) // native)


def degrade_deconv(xbar, seed: int, bsnr: float | None = 15.5,
                   kernel=(15, 5), native: int = 128):
    """``y = H xbar + w`` with a uniform kernel shrunk to the image size."""
    n = xbar.shape[0]
    kh, kw = (scaled_dim(k, n, native) for k in kernel)
    H = ConvolutionOp(uniform_kernel(kh, kw), xbar.shape)
    Hx = H.apply(xbar)
    return Hx + noise_at_bsnr(Hx, bsnr, seed, 0), H


def nonstationary_blur(shape, seed: int, radius: int = 3, stream: int = 5) -> SparseOp:
    """Per-pixel isotropic Gaussian averaging with ``sigma_ij ~ U[0, 1]``.

    Weights are truncated to a ``(2 radius + 1)^2`` periodic window and
    renormalized to sum to one.  The norm bound is the Schur bound
    ``sqrt(max row sum * max column sum)``.
    """
    H, W = shape
    sig = _generator(seed, stream).random(shape)
    sig = np.maximum(sig, 1e-3)
    ii, jj = np.meshgrid(np.arange(H), np.arange(W), indexing="ij")
    rows, cols, vals = [], [], []
    total = np.zeros(shape)
    offs = [(di, dj) for di in range(-radius, radius + 1)
            for dj in range(-radius, radius + 1)]
    ws = []
    for di, dj in offs:
        w = np.exp(-(di * di + dj * dj) / (2.0 * sig * sig))
        ws.append(w)
        total += w
    for (di, dj), w in zip(offs, ws):
        w = w / total
        keep = w > 1e-14
        rows.append((ii * W + jj)[keep])
        cols.append((((ii + di) % H) * W + (jj + dj) % W)[keep])
        vals.append(w[keep])
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(H * W, H * W))
    return SparseOp(A, shape, shape)


# ---------------------------------------------------------------------------
# Experiment construction
# ---------------------------------------------------------------------------

@dataclass
class ExperimentSpec:
    """Everything needed to reproduce a run.

    ``kernel`` overrides the native deconvolution kernel size.
    ``patch`` is the rectangle ``(row0, row1, col0, col1)``, in fractions of
    the side, receiving high-intensity noise in the phase experiment's
    reference image.
    """

    experiment: str
    scale: int = 64
    seed: int = 0
    algo: str | None = None
    iters: int = 100
    image: str | None = None
    out_trace: str | None = None
    out_image: str | None = None
    timing: bool = False
    kernel: tuple | None = None
    patch: tuple = (0.30, 0.45, 0.55, 0.75)
    reference_factor: int = 10

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if not 8 <= int(self.scale) <= 1024:
            raise ValueError("scale must lie in [8, 1024]")
        if self.iters < 0:
            raise ValueError("iters must be nonnegative")
        if self.algo is None:
            self.algo = DEFAULT_ALGO[self.experiment]
        if self.algo not in ALGOS:
            raise ValueError(f"unknown algorithm {self.algo!r}")
        if self.experiment == "deconv" and self.algo not in ("fb", "ifb", "dr"):
            raise ValueError("deconv supports fb, ifb and dr")
        if self.experiment != "deconv" and self.algo in ("fb", "ifb", "dr"):
            raise ValueError(f"{self.experiment} supports the primal-dual presets only")


@dataclass
class Experiment:
    tag: str
    xbar: np.ndarray
    smooth_form: md.CompositeProblem
    proximal_form: md.CompositeProblem
    data: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.xbar.shape


def load_image(spec: ExperimentSpec) -> np.ndarray:
    if spec.image is None:
        return phantom(spec.scale)
    img = read_pgm(spec.image)
    if img.shape != (spec.scale, spec.scale):
        img = resize_nearest(img, spec.scale)
    return img


def _box(shape):
    return cs.Box(0.0, 255.0, shape)


def _build_deconv(spec, xbar):
    kernel = spec.kernel if spec.kernel is not None else (15, 5)
    native = NATIVE["deconv"] if spec.kernel is None else spec.scale
    y, H = degrade_deconv(xbar, spec.seed, 15.5, kernel, native)
    f = pl.L1BoxFun(_box(xbar.shape), 1.0)
    h = pl.least_squares(H, y)
    Id = Identity(xbar.shape)
    smooth = md.CompositeProblem(f, [], [(h, Id)], name="deconv-smooth")
    prox = md.CompositeProblem(f, [(h, Id)], [], name="deconv-prox")
    return smooth, prox, {"y": y, "H": H}


def _build_multiview(spec, xbar):
    n, shape = spec.scale, xbar.shape
    native = NATIVE["multiview"]
    c = scaled_dim(16, n, native)
    E = cs.DFTDataSet.from_signal(xbar, cs.low_frequency_indices(shape, c))
    H1 = ConvolutionOp(uniform_kernel(scaled_dim(3, n, native), scaled_dim(11, n, native)), shape)
    H2 = ConvolutionOp(uniform_kernel(scaled_dim(7, n, native), scaled_dim(5, n, native)), shape)
    H1x, H2x = H1.apply(xbar), H2.apply(xbar)
    y1 = H1x + noise_at_bsnr(H1x, 27.3, spec.seed, 1)
    y2 = H2x + noise_at_bsnr(H2x, 35.4, spec.seed, 2)
    D = GradientOp(shape)
    Id = Identity(shape)
    f = pl.Indicator(_box(shape))
    g1 = pl.DistCompose(pl.Abs(0.5), E)
    tv = pl.GroupFun(pl.Scaled(0.4, pl.Huber(2.0)), 2, D.out_shape)
    # 0.75 ||. - y||^2 is (1.5/2) ||. - y||^2
    h3 = pl.least_squares(Identity(shape), y1, 1.5)
    h4 = pl.least_squares(Identity(shape), y2, 1.5)
    smooth = md.CompositeProblem(f, [(g1, Id)], [(tv, D), (h3, H1), (h4, H2)],
                                 name="multiview-smooth")
    g3 = pl.least_squares(H1, y1, 1.5)
    g4 = pl.least_squares(H2, y2, 1.5)
    prox = md.CompositeProblem(f, [(g1, Id), (tv, D), (g3, Id), (g4, Id)], [],
                               name="multiview-prox")
    return smooth, prox, {"y1": y1, "y2": y2, "E": E, "H1": H1, "H2": H2}


def _build_interp(spec, xbar):
    n, shape = spec.scale, xbar.shape
    native = NATIVE["interp"]
    n_missing = min(n - 1, round(57 * n / native))
    missing = np.sort(_generator(spec.seed, 3).choice(n, n_missing, replace=False))
    observed = np.setdiff1d(np.arange(n), missing)
    row_mask = np.zeros(shape, dtype=bool)
    row_mask[observed] = True
    Mx = np.where(row_mask, xbar, 0.0)
    y1 = Mx + noise_at_bsnr(xbar, 25.9, spec.seed, 4, mask=row_mask)
    H = nonstationary_blur(shape, spec.seed)
    Hx = H.apply(xbar)
    y2 = Hx + noise_at_bsnr(Hx, 31.0, spec.seed, 6)
    D = GradientOp(shape)
    Id = Identity(shape)
    f = pl.Indicator(_box(shape))
    g1 = pl.GroupFun(pl.Abs(1.0), 2, D.out_shape)
    g2 = pl.RowDistance(y1, observed, 10.0)
    # 5 ||. - y2||^2 is (10/2) ||. - y2||^2
    h3 = pl.least_squares(Identity(shape), y2, 10.0)
    smooth = md.CompositeProblem(f, [(g1, D), (g2, Id)], [(h3, H)], name="interp-smooth")
    g3 = pl.least_squares(H, y2, 10.0)
    prox = md.CompositeProblem(f, [(g1, D), (g2, Id), (g3, Id)], [], name="interp-prox")
    return smooth, prox, {"y1": y1, "y2": y2, "observed": observed, "H": H}


def _antisymmetric(shape, seed, stream, amplitude):
    d = gaussian_noise(shape, seed, stream)
    return amplitude * 0.5 * (d - cs._partner_array(d))


def _build_phase(spec, xbar):
    n, shape = spec.scale, xbar.shape
    native = NATIVE["phase"]
    D = GradientOp(shape)
    # reference image: blur, noise, saturation at 130, bright noise patch
    k = scaled_dim(9, n, native)
    B = ConvolutionOp(uniform_kernel(k, k), shape)
    Bx = B.apply(xbar)
    r = Bx + noise_at_bsnr(Bx, 20.0, spec.seed, 7)
    r = np.minimum(r, 130.0)
    r0, r1, c0, c1 = (int(round(t * n)) for t in spec.patch)
    r1, c1 = max(r1, r0 + 1), max(c1, c0 + 1)
    patch = np.zeros(shape, dtype=bool)
    patch[r0:r1, c0:c1] = True
    r = np.where(patch, r + 80.0 * np.abs(gaussian_noise(shape, spec.seed, 8)), r)
    r = np.clip(r, 0.0, 255.0)
    # bounds derived from the true image, perturbed to break consistency
    mu = 1.05 * float(xbar.sum())
    eta = 0.95 * float(np.linalg.norm(D.apply(xbar)))
    xi = 0.95 * float(np.linalg.norm(r - xbar))
    theta = cs.PhaseSet.from_signal(xbar).theta + _antisymmetric(shape, spec.seed, 9, 0.05)
    C1 = cs.Hyperplane(np.ones(shape), mu)
    C2 = cs.Ball(np.zeros(D.out_shape), eta)
    C3 = cs.PhaseSet(theta)
    C4 = cs.Ball(r, xi)
    rho = (1000.0, 1000.0, 1000.0, 5000.0)
    cons = [md.Constraint(C1, md.Penalty("huber", rho=rho[0])),
            md.Constraint(C2, md.Penalty("huber", rho=rho[1]), D),
            md.Constraint(C3, md.Penalty("huber", rho=rho[2])),
            md.Constraint(C4, md.Penalty("huber", rho=rho[3]))]
    relax = md.FeasibilityRelaxation(_box(shape), cons, shape)
    smooth = md.relax(relax, name="phase-smooth")
    prox = md.relax(relax, fully_proximal=True, name="phase-prox")
    return smooth, prox, {"r": r, "mu": mu, "eta": eta, "xi": xi, "theta": theta}


_BUILDERS = {"deconv": _build_deconv, "multiview": _build_multiview,
             "interp": _build_interp, "phase": _build_phase}


def build_experiment(spec: ExperimentSpec) -> Experiment:
    """Synthesize the data of ``spec`` and both problem formulations."""
    xbar = load_image(spec)
    smooth, prox, data = _BUILDERS[spec.experiment](spec, xbar)
    return Experiment(spec.experiment, xbar, smooth, prox, data)


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

def preset(exp: Experiment, algo: str, iters: int) -> tuple:
    """``(problem, SolverConfig)`` for a named preset of an experiment."""
    tag = exp.tag
    if tag == "deconv":
        P = exp.smooth_form
        beta = P.smooth[0].mu
        if algo == "fb":
            return P, sv.SolverConfig("fb", gamma=1.99 / beta, max_iter=iters)
        if algo == "ifb":
            return P, sv.SolverConfig("ifb", gamma=1.0 / beta, alpha=3.0, max_iter=iters)
        if algo == "dr":
            return P, sv.SolverConfig("dr", gamma=30.0, lam=1.9, max_iter=iters)
        raise ValueError(f"no preset {algo!r} for deconv")
    kind, form = algo.split("-")
    P = exp.smooth_form if form == "s" else exp.proximal_form
    beta = sv.fbf_beta(P)
    nI = len(P.nonsmooth)
    if kind == "fbf":
        return P, sv.SolverConfig("fbf", gamma=0.99 / beta, max_iter=iters)
    table = _PD_PRESETS[tag][algo]
    if kind == "pd":
        tau, sigmas = table(beta)
        sigmas = list(sigmas)[:nI]
        return P, sv.SolverConfig("pd", tau=tau, sigma=sigmas, max_iter=iters)
    gamma, mu, lam = table
    return P, sv.SolverConfig("ps", gamma=gamma, mu=list(mu), lam=lam, max_iter=iters)


# tau and sigmas as functions of beta; projective splitting (gamma, mu, lambda)
_PD_PRESETS = {
    "multiview": {
        "pd-s": lambda b: (8.0 / (5.0 * b), [8.0 / (5.0 * b)]),
        "pd-p": lambda b: (1.0 / b, [1.0 / (2 * b), 1.0 / (2 * b), 3.0 / b, 3.0 / b]),
        "ps-s": (0.4, (1.0, 2.49, 0.65, 0.65), 1.99),
        "ps-p": (0.25, (1.0, 1.5, 1.0, 1.0), 1.99),
    },
    "interp": {
        # only sigma_1 is listed for the smooth form; sigma_2 reuses it
        "pd-s": lambda b: (0.1 / b, [2.0 / (5.0 * b)] * 2),
        # 1/beta for every step gives a bound of exactly 1; shrink slightly
        "pd-p": lambda b: (0.999 / b, [0.999 / b] * 3),
        "ps-s": (1.0, (0.1, 0.1, 0.01), 1.9),
        "ps-p": (0.5, (1.0, 0.1, 0.01), 1.9),
    },
    "phase": {
        "pd-s": lambda b: (1.99 / b, []),
        "pd-p": lambda b: (1.0 / b, [1.0 / (1.1 * b)] * 4),
        "ps-s": (0.5, (0.99,) * 4, 1.9),
        "ps-p": (0.25, (2.0, 2.0, 0.5, 2.0), 1.9),
    },
}


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    experiment: Experiment
    trace: sv.Trace
    reference: np.ndarray
    reference_objective: float
    dist_ref_db: np.ndarray
    objective_db: np.ndarray
    csv_text: str

    @property
    def restored(self) -> np.ndarray:
        return self.trace.x


def compute_reference(exp: Experiment, iters: int) -> np.ndarray:
    """Long run of the reference preset; used as the limit point."""
    P, cfg = preset(exp, REFERENCE_ALGO[exp.tag], iters)
    cfg.record_objective = False
    return sv.run(P, cfg).x


def run_experiment(spec: ExperimentSpec, experiment: Experiment | None = None,
                   reference: np.ndarray | None = None) -> ExperimentResult:
    """Run a preset, compute dB metrics and write the requested files."""
    exp = build_experiment(spec) if experiment is None else experiment
    if reference is None:
        reference = compute_reference(exp, spec.reference_factor * max(spec.iters, 1))
    P, cfg = preset(exp, spec.algo, spec.iters)
    trace = sv.run(P, cfg, reference=reference)
    ref_obj = P.objective(reference)
    db = trace.dist_ref_db()
    obj_db = trace.objective_db(ref_obj)
    text = trace.to_csv(spec.out_trace, timing=spec.timing)
    if spec.out_image is not None:
        write_pgm(spec.out_image, trace.x)
    return ExperimentResult(spec, exp, trace, reference, ref_obj, db, obj_db, text)


# ---------------------------------------------------------------------------
# Prox checks
# ---------------------------------------------------------------------------

def _make_set(params: dict, dim: int) -> cs.ConvexSet:
    kind = params.get("set", "point")
    if kind == "point":
        return cs.Singleton(np.full(dim, float(params.get("center", 0.0))))
    if kind == "ball":
        return cs.Ball(np.full(dim, float(params.get("center", 0.0))),
                       float(params.get("radius", 1.0)))
    if kind == "box":
        return cs.Box(float(params.get("lo", -1.0)), float(params.get("hi", 1.0)), (dim,))
    raise ValueError(f"unknown set {kind!r}")


def _catalog_entry(name: str, params: dict, dim: int) -> pl.ProxFun:
    C = _make_set(params, dim)
    get = lambda k, d: float(params.get(k, d))  # noqa: E731
    if name == "log_dist":
        return pl.LogDist(get("omega", 1.0), C)
    if name == "huber":
        return pl.HuberDist(get("rho", 1.0), C)
    if name == "vapnik":
        return pl.VapnikDist(pl.Square(), get("eps", 1.0), C)
    if name == "dist_abs":
        return pl.DistCompose(pl.Abs(get("weight", 1.0)), C)
    if name == "dist_square":
        return pl.DistCompose(pl.Square(get("weight", 1.0)), C)
    if name == "box-proj":
        return pl.Indicator(cs.Box(get("lo", -1.0), get("hi", 1.0), (dim,)))
    if name == "l1":
        return pl.SeparableSum(pl.Abs(get("weight", 1.0)), (dim,))
    if name == "moreau_abs":
        return pl.MoreauEnvelope(pl.SeparableSum(pl.Abs(), (dim,)), get("beta", 1.0))
    if name == "antienvelope_box":
        rho = get("rho", 1.0)
        return pl.AntiEnvelope(pl.Indicator(cs.Box(-rho, rho, (dim,))), get("beta", 1.0))
    if name == "group":
        return pl.GroupFun(pl.Abs(get("weight", 1.0)), dim, (dim, 1))
    raise KeyError(name)


PROX_CHECK_NAMES = ("log_dist", "huber", "vapnik", "dist_abs", "dist_square",
                    "box-proj", "l1", "moreau_abs", "antienvelope_box", "group")


def prox_check(name: str, params: dict, gamma: float, x, tol: float = 1e-5):
    """Compare a catalog prox (and gradient when smooth) with the oracles.

    Returns the list of :class:`OracleReport`; raises ``KeyError`` for
    unknown names.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if name not in PROX_CHECK_NAMES:
        raise KeyError(name)
    if x.ndim != 1 or not 1 <= x.size <= 3:
        raise ValueError("prox-check points must have 1 to 3 coordinates")
    F = _catalog_entry(name, params, x.size)
    if name == "group":
        x = x.reshape(x.size, 1)
    reports = [orc.prox_report(F, gamma, x, tol)]
    if F.smooth:
        reports.append(orc.gradient_report(F, x, tol))
    return reports


# ---------------------------------------------------------------------------
# Problem files for ``solve``
# ---------------------------------------------------------------------------

def _set_from_json(d: dict, dim: int) -> cs.ConvexSet:
    t = d["type"]
    if t == "box":
        return cs.Box(d.get("lo", -np.inf), d.get("hi", np.inf), (dim,))
    if t == "interval":
        return cs.Box(d["lo"], d["hi"], (dim,))
    if t == "ball":
        return cs.Ball(d["center"], d["radius"])
    if t == "hyperplane":
        return cs.Hyperplane(d["a"], d["b"])
    if t == "halfspace":
        return cs.HalfSpace(d["a"], d["b"])
    if t == "point":
        return cs.Singleton(d["point"])
    if t == "whole":
        return cs.WholeSpace((dim,))
    raise ValueError(f"unknown set type {t!r}")


def _penalty_from_json(d: dict) -> md.Penalty:
    d = dict(d)
    kind = d.pop("kind")
    return md.Penalty(kind, **{k: float(v) for k, v in d.items()})


def problem_from_json(spec: dict) -> tuple[md.CompositeProblem, sv.SolverConfig]:
    """Build a feasibility relaxation and solver settings from a dict.

    Keys: ``dim``, ``hard`` (set, optional), ``constraints`` (list of
    ``{"set", "penalty", "matrix"?}``), ``fully_proximal``, ``algorithm``,
    ``params``, ``iters``, ``tol``.
    """
    dim = int(spec["dim"])
    E = _set_from_json(spec["hard"], dim) if spec.get("hard") else cs.WholeSpace((dim,))
    cons = []
    for c in spec["constraints"]:
        L = None
        if "matrix" in c:
            L = MatrixOp(np.asarray(c["matrix"], dtype=np.float64))
        out_dim = dim if L is None else L.out_shape[0]
        cons.append(md.Constraint(_set_from_json(c["set"], out_dim),
                                  _penalty_from_json(c["penalty"]), L))
    algo = spec.get("algorithm", "pd")
    P = md.relax(md.FeasibilityRelaxation(E, cons, (dim,)),
                 fully_proximal=bool(spec.get("fully_proximal", algo != "fb")))
    params = dict(spec.get("params", {}))
    if not params:
        params = _default_params(P, algo)
    cfg = sv.SolverConfig(algo, max_iter=int(spec.get("iters", 1000)),
                          tol=float(spec.get("tol", 0.0)), **params)
    return P, cfg


def _default_params(P: md.CompositeProblem, algo: str) -> dict:
    if algo == "fb":
        return {"gamma": 1.0 / max(sv.SmoothSum(P).lipschitz, 1e-12)}
    if algo == "fbf":
        return {"gamma": 0.9 / sv.fbf_beta(P)}
    if algo == "pd":
        beta = sv.fbf_beta(P)
        return {"tau": 0.9 / beta, "sigma": [0.9 / beta] * len(P.nonsmooth)}
    if algo == "ps":
        return {"gamma": 1.0, "mu": [1.0] * len(P.nonsmooth) +
                [1.0 / max(t.mu, 1e-12) for t in P.smooth], "lam": 1.0}
    raise ValueError(f"no default parameters for {algo!r}")


# ---------------------------------------------------------------------------
# Command line
# ---------------------------------------------------------------------------

def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def _coerce(defaults: dict) -> dict:
    types = {"scale": int, "seed": int, "iters": int, "gamma": float,
             "timing": lambda s: s.lower() in ("1", "true", "yes", "on")}
    return {k: types.get(k, str)(v) for k, v in defaults.items()}


def _parse_kv(items: Sequence[str]) -> dict:
    out = {}
    for it in items:
        if "=" not in it:
            raise ValueError(f"expected key=value, got {it!r}")
        k, v = it.split("=", 1)
        out[k] = v
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="proxsplit-recover",
                                description="Proximal splitting image recovery")
    p.add_argument("--config", help="flat key = value file with default flags")
    sub = p.add_subparsers(dest="command", required=True)

    def common(q):
        q.add_argument("--scale", type=int, default=64)
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--algo", choices=ALGOS)
        q.add_argument("--iters", type=int, default=100)
        q.add_argument("--out-trace")
        q.add_argument("--out-image")
        q.add_argument("--timing", action="store_true",
                       help="fill the time_s column (breaks byte-identical reruns)")

    q = sub.add_parser("experiment", help="run one of the recovery experiments")
    q.add_argument("name", choices=EXPERIMENTS)
    q.add_argument("--image", help="8-bit PGM input image (default: phantom)")
    common(q)

    q = sub.add_parser("solve", help="solve a feasibility relaxation from a JSON file")
    q.add_argument("problem")
    common(q)

    q = sub.add_parser("prox-check", help="compare a catalog prox with the oracles")
    q.add_argument("name", choices=PROX_CHECK_NAMES)
    q.add_argument("params", nargs="*", help="key=value parameters")
    q.add_argument("--gamma", type=float, default=1.0)
    q.add_argument("--x", required=True, help="comma-separated point")
    q.add_argument("--tol", type=float, default=1e-5)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    # the config file only supplies defaults; explicit flags win
    cfg_path = None
    if "--config" in argv:
        i = argv.index("--config")
        if i + 1 < len(argv):
            cfg_path = argv[i + 1]
    if cfg_path is not None:
        try:
            defaults = _coerce(read_config(cfg_path))
        except OSError as e:
            print(f"error: cannot read config {cfg_path}: {e}", file=sys.stderr)
            return EXIT_IO
        except ValueError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_VALIDATION
        for action in parser._subparsers._group_actions:  # subparser map
            for q in action.choices.values():
                q.set_defaults(**defaults)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_VALIDATION
    try:
        if args.command == "experiment":
            return _cmd_experiment(args)
        if args.command == "solve":
            return _cmd_solve(args)
        return _cmd_prox_check(args)
    except OSError as e:
        print(f"error: I/O failure on {getattr(e, 'filename', None) or e}: {e}",
              file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, ShapeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


def _cmd_experiment(args) -> int:
    spec = ExperimentSpec(args.name, scale=args.scale, seed=args.seed, algo=args.algo,
                          iters=args.iters, image=args.image, out_trace=args.out_trace,
                          out_image=args.out_image, timing=args.timing)
    res = run_experiment(spec)
    last = res.trace.records[-1]
    print(f"{spec.experiment} algo={spec.algo} scale={spec.scale} seed={spec.seed} "
          f"iters={res.trace.n_iter}")
    print(f"objective={last.objective!r} dist_ref_db={res.dist_ref_db[-1]:.3f} "
          f"objective_db={res.objective_db[-1]:.3f}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    with open(args.problem) as fh:
        spec = json.load(fh)
    if args.algo is not None:
        raise ValueError("solve takes its algorithm from the problem file")
    spec.setdefault("iters", args.iters)
    P, cfg = problem_from_json(spec)
    cfg = replace(cfg, max_iter=int(spec["iters"]))
    trace = sv.run(P, cfg)
    trace.to_csv(args.out_trace, timing=args.timing)
    x = trace.x
    dists = [t.fun.C.distance(t.op.apply(x)) if hasattr(t.fun, "C") else float("nan")
             for t in P.nonsmooth + P.smooth]
    print("x = " + ", ".join(f"{v:.10g}" for v in x))
    print(f"objective = {P.objective(x)!r}")
    print("distances = " + ", ".join(f"{d:.3e}" for d in dists))
    return EXIT_OK


def _cmd_prox_check(args) -> int:
    params = _parse_kv(args.params)
    x = [float(v) for v in args.x.split(",")]
    reports = prox_check(args.name, params, args.gamma, x, args.tol)
    for r in reports:
        print(r.line())
        ref = np.asarray(r.reference, dtype=np.float64).ravel()
        cand = np.asarray(r.candidate, dtype=np.float64).ravel()
        print("  reference = " + ", ".join(f"{v:.10g}" for v in ref))
        print("  candidate = " + ", ".join(f"{v:.10g}" for v in cand))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())

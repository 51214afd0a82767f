"""Sparse-recovery experiment machinery.

Seeded generation of sparse signals, Gaussian and partial-DCT encoders,
noisy observations, the relative-error metric, and the recovery and
h-sweep experiment drivers.

Randomness is split into four named PCG64 streams derived from one seed
(children 0..3 of its SeedSequence): ``support``, ``amplitude``,
``matrix``, ``noise``.  Varying one component (say the encoder) therefore
leaves the others untouched.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np
from scipy import fft as _fft

from .model import CompositeProblem, IterationRecord, RegKind, RegularizerSpec, SolverConfig
from .objectives import LinearOperator, MatrixOperator, least_squares
from .solver import RunResult, run

_STREAMS = {"support": 0, "amplitude": 1, "matrix": 2, "noise": 3}


def component_rng(seed: int, component: str) -> np.random.Generator:
    """Independent generator for one named component of an instance."""
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(_STREAMS[component],))
    )


class AmplitudeMode(enum.Enum):
    """Spike amplitudes: all +1, or folded standard normal."""

    POSITIVE_UNIT = "unit"
    GAUSSIAN_AMP = "gaussian"


def gen_sparse_signal(
    n: int,
    p: int,
    amplitude_mode: AmplitudeMode = AmplitudeMode.POSITIVE_UNIT,
    seed: int = 0,
) -> np.ndarray:
    """Length-n signal with exactly p nonzero entries, deterministic per seed."""
    if not 0 < p <= n:
        raise ValueError(f"need 0 < p <= n, got p={p}, n={n}")
    support = component_rng(seed, "support").choice(n, size=p, replace=False)
    x = np.zeros(n)
    if amplitude_mode is AmplitudeMode.POSITIVE_UNIT:
        x[support] = 1.0
    else:
        x[support] = np.abs(component_rng(seed, "amplitude").standard_normal(p))
    return x


def gen_gaussian_operator(m: int, n: int, seed: int = 0) -> MatrixOperator:
    """Dense m x n encoder with i.i.d. N(0,1) entries scaled by 1/sqrt(m).

    The scaling normalizes column norms to ~1 so the trade-off weight mu
    keeps the same meaning across sizes.
    """
    if m <= 0 or n <= 0:
        raise ValueError("dimensions must be positive")
    entries = component_rng(seed, "matrix").standard_normal((m, n)) / np.sqrt(m)
    return MatrixOperator(entries)


class PartialDctOperator(LinearOperator):
    """Random row subset of the orthonormal DCT-II, applied matrix-free.

    Stores only the m selected row indices; forward transforms and
    selects, adjoint embeds and inverse-transforms.
    """

    def __init__(self, n: int, rows: np.ndarray):
        super().__init__(len(rows), n)
        self.rows = np.asarray(rows, dtype=int)

    def forward(self, x):
        return _fft.dct(x, type=2, norm="ortho")[self.rows]

    def adjoint(self, y):
        z = np.zeros(self.n)
        z[self.rows] = y
        return _fft.idct(z, type=2, norm="ortho")


def gen_partial_dct_operator(m: int, n: int, seed: int = 0) -> PartialDctOperator:
    """Partial DCT encoder with m rows drawn uniformly without replacement."""
    if m > n:
        raise ValueError(f"need m <= n, got m={m}, n={n}")
    rows = np.sort(component_rng(seed, "matrix").choice(n, size=m, replace=False))
    return PartialDctOperator(n, rows)


def rel_err(x_star: np.ndarray, x_bar: np.ndarray) -> float:
    """||x_star - x_bar|| / ||x_bar||, the recovery quality metric."""
    nb = float(np.linalg.norm(x_bar))
    if nb == 0.0:
        raise ValueError("relative error undefined for a zero ground truth")
    return float(np.linalg.norm(np.asarray(x_star) - np.asarray(x_bar))) / nb


ENCODERS = ("gaussian", "dct")


@dataclass(frozen=True)
class CsInstance:
    """One recovery instance: encoder A, observation b = A x_bar + noise."""

    n: int
    m: int
    p: int
    A: LinearOperator
    b: np.ndarray
    x_bar: np.ndarray
    sigma: float
    seed: int


def build_cs_instance(
    n: int,
    m: int,
    p: int,
    sigma: float,
    encoder: str = "gaussian",
    seed: int = 0,
    amplitude_mode: AmplitudeMode = AmplitudeMode.POSITIVE_UNIT,
) -> CsInstance:
    """Generate signal, encoder and noisy observation from one seed."""
    x_bar = gen_sparse_signal(n, p, amplitude_mode, seed)
    if encoder == "gaussian":
        op: LinearOperator = gen_gaussian_operator(m, n, seed)
    elif encoder == "dct":
        op = gen_partial_dct_operator(m, n, seed)
    else:
        raise ValueError(f"unknown encoder {encoder!r}; choose from {ENCODERS}")
    noise = sigma * component_rng(seed, "noise").standard_normal(m)
    b = op.forward(x_bar) + noise
    return CsInstance(n=n, m=m, p=p, A=op, b=b, x_bar=x_bar, sigma=sigma, seed=seed)


@dataclass(frozen=True)
class RecoveryReport:
    """Outcome of one recovery run, with its per-iteration trace."""

    rel_err: float
    iterations: int
    nf: int
    elapsed: float
    trace: list[IterationRecord]
    x_star: np.ndarray
    instance: CsInstance
    result: RunResult


X0_MODES = ("zero", "atb")


def run_recovery(
    n: int,
    m: int,
    p: int,
    sigma: float,
    mu: float,
    cfg: SolverConfig,
    encoder: str = "gaussian",
    seed: int = 0,
    x0_mode: str = "zero",
    amplitude_mode: AmplitudeMode = AmplitudeMode.POSITIVE_UNIT,
) -> RecoveryReport:
    """Build an instance and solve the l1-regularized least squares for it.

    ``x0_mode`` selects the start: the zero vector or A'b.
    """
    if x0_mode not in X0_MODES:
        raise ValueError(f"unknown x0 mode {x0_mode!r}; choose from {X0_MODES}")
    inst = build_cs_instance(n, m, p, sigma, encoder, seed, amplitude_mode)
    problem = CompositeProblem(
        smooth=least_squares(inst.A, inst.b),
        reg=RegularizerSpec(RegKind.L1, mu),
    )
    x0 = np.zeros(n) if x0_mode == "zero" else inst.A.adjoint(inst.b)
    result = run(problem, x0, cfg, rel_err_fn=lambda x: rel_err(x, inst.x_bar))
    records = result.records
    return RecoveryReport(
        rel_err=rel_err(result.x, inst.x_bar),
        iterations=len(records),
        nf=records[-1].nf if records else 1,
        elapsed=records[-1].elapsed if records else 0.0,
        trace=records,
        x_star=result.x,
        instance=inst,
        result=result,
    )


@dataclass(frozen=True)
class SweepRow:
    h: float
    iterations: int
    nf: int
    elapsed: float
    rel_err: float


def run_h_sweep(
    h_values,
    n: int = 1024,
    m: int = 512,
    p: int = 64,
    sigma: float = 1e-3,
    mu: float = 2.0 ** -8,
    cfg: SolverConfig = None,
    encoder: str = "gaussian",
    seed: int = 0,
    x0_mode: str = "zero",
) -> list[SweepRow]:
    """One recovery run per h on a shared instance (same seed throughout).

    The trial step starts at h for every point, so each run probes one
    scale of the linearized regularizer.
    """
    if cfg is None:
        cfg = SolverConfig.preset("cs")
    rows = []
    for h in h_values:
        if not 0.0 < h <= 1.0:
            raise ValueError(f"h values must lie in (0, 1], got {h}")
        report = run_recovery(
            n, m, p, sigma, mu, replace(cfg, h=float(h)),
            encoder=encoder, seed=seed, x0_mode=x0_mode,
        )
        rows.append(SweepRow(
            h=float(h), iterations=report.iterations, nf=report.nf,
            elapsed=report.elapsed, rel_err=report.rel_err,
        ))
    return rows

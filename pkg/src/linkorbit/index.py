"""Maslov-type index pairs (i, nu) of periodic symmetric matrix loops.

Two independent routes are implemented.  The Galerkin route assembles the
quadratic form of P_m (A - B) P_m in the orthonormal Fourier basis of the
truncated loop space and counts eigenvalues below -d, inside [-d, d] and
above d; with half the space dimension subtracted, the negative count is
the index i and the near-zero count is the nullity nu.  The monodromy
route reads nu off the kernel of gamma(tau) - I via singular values of the
integrated fundamental solution.  Both must agree at a stabilized
truncation; the iteration inequalities relating (i, nu) at period tau to
the pair at period k tau are exposed as checkable reports.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .loopspace import default_grid_size
from .symplectic import MatrixPath, SymplecticPath, fundamental_solution, standard_j

log = logging.getLogger(__name__)

M_SCHEDULE = (16, 32, 64, 128, 256)


class IndexStabilizationError(ValueError):
    """The index pair did not settle along the truncation schedule."""

    def __init__(self, message, candidates):
        super().__init__(message)
        self.candidates = candidates   # [(m, IndexPair), ...]


@dataclass(frozen=True)
class IndexPair:
    """The integer pair (i, nu) of a loop at the given period."""

    i: int
    nu: int
    period: float
    n: int

    def __post_init__(self):
        if not (0 <= self.nu <= 2 * self.n):
            raise ValueError(f"nullity {self.nu} outside [0, 2n] = [0, {2 * self.n}]")

    def astuple(self):
        return (self.i, self.nu)


@dataclass(frozen=True)
class GalerkinSpectrum:
    """Eigenvalue bookkeeping of P_m (A - B) P_m at one truncation."""

    m: int
    dims: tuple        # (dim M+, dim M-, dim M0)
    d: float
    eigenvalues: np.ndarray

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        object.__setattr__(self, "eigenvalues", ev)
        ev.flags.writeable = False
        if sum(self.dims) != ev.size:
            raise ValueError("eigenspace dimensions must sum to dim E_m")


def galerkin_matrix(b_samples: np.ndarray, n: int, period: float, m: int) -> np.ndarray:
    """Matrix of the form <(A - B) z, w> in the orthonormal basis of E_m.

    `b_samples` holds B on the uniform grid t_s = s * period / N, shape
    (N, 2n, 2n) with N >= 4m + 2.  The B-part couples modes k, l through
    the cos/sin Fourier coefficients of B at frequencies k - l and k + l,
    which the FFT delivers in one pass; the A-part is diagonal with
    entries (2 pi / period) sign(k).
    """
    b_samples = np.asarray(b_samples, dtype=float)
    N = b_samples.shape[0]
    if N < 4 * m + 2:
        raise ValueError(f"need at least 4m + 2 = {4 * m + 2} samples, got {N}")
    J = standard_j(n)
    bhat = np.fft.fft(b_samples, axis=0)
    Bc = (period / N) * bhat[:2 * m + 1].real       # int B cos(r w t) dt, r = 0..2m
    Bs = -(period / N) * bhat[:2 * m + 1].imag      # int B sin(r w t) dt

    JBcJ = J @ Bc @ J
    JBs = J @ Bs
    BsJ = Bs @ J
    # Block(k, l) = D[k - l] + S[k + l]; Bc is even and Bs odd in r.
    Dp = 0.5 * (Bc - JBcJ - (BsJ + JBs))
    Dm = 0.5 * (Bc - JBcJ + (BsJ + JBs))
    Sp = 0.5 * (Bc + JBcJ + (BsJ - JBs))
    Sm = 0.5 * (Bc + JBcJ - (BsJ - JBs))

    ks = np.arange(-m, m + 1)
    dmat = ks[:, None] - ks[None, :]
    smat = ks[:, None] + ks[None, :]
    block = (np.where((dmat >= 0)[:, :, None, None], Dp[np.abs(dmat)], Dm[np.abs(dmat)])
             + np.where((smat >= 0)[:, :, None, None], Sp[np.abs(smat)], Sm[np.abs(smat)]))
    w = period * np.maximum(np.abs(ks), 1)
    block = block / np.sqrt(np.outer(w, w))[:, :, None, None]
    dim = (2 * m + 1) * 2 * n
    G = block.transpose(0, 2, 1, 3).reshape(dim, dim)
    M = -G
    diag = np.repeat((2 * np.pi / period) * np.sign(ks).astype(float), 2 * n)
    M[np.diag_indices(dim)] += diag
    return 0.5 * (M + M.T)


def path_samples(B: MatrixPath, m: int) -> np.ndarray:
    """B evaluated on the assembly grid for truncation m."""
    N = default_grid_size(m)
    ts = np.arange(N) * B.period / N
    return B.at(ts)


def _adaptive_gap(eigenvalues: np.ndarray, period: float) -> float:
    """Half the smallest nonzero |eigenvalue|, clamped to [1e-10, 0.1 * 2pi/T].

    Entries below 1e-5 * (2pi/T) are treated as numerically zero when
    locating the smallest nonzero one; stabilization over m catches the
    borderline cases this floor may misjudge.
    """
    scale = 2 * np.pi / period
    av = np.sort(np.abs(eigenvalues))
    nonzero = av[av > 1e-5 * scale]
    if nonzero.size == 0:
        return 1e-10
    return float(min(max(0.5 * nonzero[0], 1e-10), 0.1 * scale))


def classify_spectrum(eigenvalues: np.ndarray, n: int, m: int, period: float,
              d: float | None) -> tuple[IndexPair, GalerkinSpectrum]:
    if d is None:
        d = _adaptive_gap(eigenvalues, period)
    elif d <= 0:
        raise ValueError("gap parameter d must be positive")
    n_zero = int(np.sum(np.abs(eigenvalues) <= d))
    n_neg = int(np.sum(eigenvalues < -d))
    n_pos = eigenvalues.size - n_zero - n_neg
    i = n_neg - n * (2 * m + 1)
    pair = IndexPair(i=i, nu=n_zero, period=period, n=n)
    spec = GalerkinSpectrum(m=m, dims=(n_pos, n_neg, n_zero), d=d,
                            eigenvalues=np.sort(eigenvalues))
    return pair, spec


def index_pair_galerkin(B: MatrixPath, m: int,
                        d: float | None = None) -> tuple[IndexPair, GalerkinSpectrum]:
    """Index pair of the loop B at truncation m (single Galerkin level)."""
    M = galerkin_matrix(path_samples(B, m), B.n, B.period, m)
    return classify_spectrum(np.linalg.eigvalsh(M), B.n, m, B.period, d)


@dataclass(frozen=True)
class StabilizedIndex:
    """Index pair confirmed at two consecutive truncation levels."""

    pair: IndexPair
    spectrum: GalerkinSpectrum
    m_stable: int
    history: tuple    # ((m, IndexPair), ...) for every level computed


def maslov_index(B: MatrixPath, schedule=M_SCHEDULE, d: float | None = None,
                 nullity_hint: int | None = None) -> StabilizedIndex:
    """Escalate the truncation until two consecutive levels agree.

    With `nullity_hint` (e.g. the monodromy nullity), a disagreement in nu
    at the stabilized level is re-classified by moving the gap between the
    hint-th and (hint+1)-th smallest |eigenvalue| when that is consistent,
    with a logged warning; the hint never silently overrides a genuinely
    different count.
    """
    history = []
    prev = None
    for m in schedule:
        pair, spec = index_pair_galerkin(B, m, d)
        history.append((m, pair))
        if prev is not None and prev[1].astuple() == pair.astuple():
            if nullity_hint is not None and pair.nu != nullity_hint:
                if _separation_decisive(spec, pair.nu, B.period):
                    log.warning("galerkin nullity %d disagrees with monodromy %d but the "
                                "spectral gap is decisive; keeping the spectral count",
                                pair.nu, nullity_hint)
                else:
                    adjusted = _reclassify_with_hint(spec, B.n, m, B.period, nullity_hint)
                    if adjusted is not None:
                        log.warning("galerkin nullity %d is borderline; re-drawing the gap "
                                    "at d=%.3e to match monodromy %d",
                                    pair.nu, adjusted[1].d, nullity_hint)
                        pair, spec = adjusted
                    else:
                        log.warning("galerkin nullity %d disagrees with monodromy %d and "
                                    "no consistent gap exists; keeping the spectral count",
                                    pair.nu, nullity_hint)
            return StabilizedIndex(pair=pair, spectrum=spec, m_stable=m,
                                   history=tuple(history))
        prev = (m, pair)
    raise IndexStabilizationError(
        f"index pair did not stabilize up to m = {schedule[-1]}: "
        + ", ".join(f"m={m}: {p.astuple()}" for m, p in history),
        candidates=history)


def _separation_decisive(spec: GalerkinSpectrum, nu: int, period: float,
                         ratio: float = 1e3) -> bool:
    """True when the spectral zero/nonzero split cannot plausibly be redrawn."""
    av = np.sort(np.abs(spec.eigenvalues))
    scale = 2 * np.pi / period
    if nu == 0:
        return bool(av[0] >= 1e-3 * scale)   # smallest eigenvalue clearly nonzero
    if nu >= av.size:
        return False
    largest_zero = max(av[nu - 1], 1e-300)
    return bool(av[nu] / largest_zero >= ratio and av[nu - 1] <= 1e-3 * scale)


def _reclassify_with_hint(spec: GalerkinSpectrum, n: int, m: int, period: float,
                          hint: int) -> tuple[IndexPair, GalerkinSpectrum] | None:
    av = np.sort(np.abs(spec.eigenvalues))
    if hint < 0 or hint > 2 * n or hint >= av.size:
        return None
    lo = av[hint - 1] if hint > 0 else 0.0
    hi = av[hint]
    if hi <= lo * (1 + 1e-12):
        return None   # no gap separates the requested count
    d = np.sqrt(max(lo, 1e-300) * hi) if lo > 0 else 0.5 * hi
    if d > 0.5 * (2 * np.pi / period):
        return None
    return classify_spectrum(spec.eigenvalues, n, m, period, d)


def nullity_from_monodromy(gamma: SymplecticPath, rank_tol: float = 1e-6) -> int:
    """dim ker(gamma(tau) - I) via singular values below rank_tol."""
    if rank_tol < 0:
        raise ValueError("rank tolerance must be nonnegative")
    M = gamma.mats[-1]
    sv = np.linalg.svd(M - np.eye(M.shape[0]), compute_uv=False)
    return int(np.sum(sv < rank_tol))


def index_pair_iterated(B: MatrixPath, k: int, schedule=M_SCHEDULE,
                        d: float | None = None,
                        nullity_hint: int | None = None) -> StabilizedIndex:
    """Index pair of B viewed as a k tau-periodic loop on [0, k tau]."""
    return maslov_index(B.extended(k), schedule=schedule, d=d, nullity_hint=nullity_hint)


@dataclass(frozen=True)
class BoundCheck:
    lower: int
    upper: int
    value: int

    @property
    def holds(self) -> bool:
        return self.lower <= self.value <= self.upper


@dataclass(frozen=True)
class IterationBoundsReport:
    """Both two-sided iteration inequalities for (base, k-fold) index pairs.

    coarse:   k (i + nu - n) - n <= i_k <= k (i + n) + n - nu_k
    refined:  k (i + nu - n) + n - nu <= i_k <= k (i + n) - n - (nu_k - nu)
    """

    k: int
    base: IndexPair
    iterate: IndexPair
    coarse: BoundCheck
    refined: BoundCheck

    @property
    def ok(self) -> bool:
        return self.coarse.holds and self.refined.holds


def check_iteration_bounds(base: IndexPair, iterate: IndexPair, k: int) -> IterationBoundsReport:
    if k < 1:
        raise ValueError("iteration count k must be >= 1")
    if base.n != iterate.n:
        raise ValueError(f"half-dimensions differ: {base.n} vs {iterate.n}")
    if abs(iterate.period - k * base.period) > 1e-9 * base.period:
        raise ValueError(f"iterate period {iterate.period} is not k = {k} times "
                         f"the base period {base.period}")
    n = base.n
    i, nu = base.i, base.nu
    ik, nuk = iterate.i, iterate.nu
    coarse = BoundCheck(lower=k * (i + nu - n) - n,
                        upper=k * (i + n) + n - nuk,
                        value=ik)
    refined = BoundCheck(lower=k * (i + nu - n) + n - nu,
                         upper=k * (i + n) - n - (nuk - nu),
                         value=ik)
    return IterationBoundsReport(k=k, base=base, iterate=iterate,
                                 coarse=coarse, refined=refined)


@dataclass(frozen=True)
class PositivityReport:
    """Check of the lower bound i >= n for pointwise-positive loops."""

    applicable: bool
    holds: bool | None
    min_eigenvalue: float
    max_min_eigenvalue: float
    detail: str = ""


def check_positivity_lower_bound(B: MatrixPath, pair: IndexPair,
                                 psd_tol: float = 1e-10,
                                 strict_tol: float = 1e-8) -> PositivityReport:
    """i >= n whenever B(t) >= 0 everywhere and B(t0) > 0 somewhere.

    The hypothesis is verified on the stored samples through the smallest
    eigenvalue; a violated hypothesis yields an inapplicable report, not a
    counterexample.
    """
    mins = np.linalg.eigvalsh(B.values)[:, 0]
    lo = float(np.min(mins))
    hi = float(np.max(mins))
    if lo < -psd_tol:
        return PositivityReport(False, None, lo, hi,
                                detail=f"a sample has smallest eigenvalue {lo:.3e} < 0")
    if hi <= strict_tol:
        return PositivityReport(False, None, lo, hi,
                                detail="no sample is strictly positive definite")
    return PositivityReport(True, bool(pair.i >= pair.n), lo, hi)


@dataclass(frozen=True)
class MinimalPeriodCertificate:
    """Largest k whose hypotheses (i_k <= n+1, i_1 >= n, nu_1 >= 1) all hold.

    Index theory forces that k to be 1; any k > 1 satisfying the hypotheses
    is a numerical contradiction and is surfaced for investigation.
    """

    certified_k: int
    contradictions: tuple
    base_hypotheses_hold: bool


def minimal_period_certificate(pairs: dict, n: int) -> MinimalPeriodCertificate:
    """`pairs[k]` is the index pair of the candidate's linearization at k times
    the trial minimal period; `pairs[1]` is the base."""
    if not pairs:
        raise ValueError("need at least the base index pair (k = 1)")
    if 1 not in pairs:
        raise ValueError("the base pair pairs[1] is required")
    base = pairs[1]
    base_ok = base.i >= n and base.nu >= 1
    holding = [k for k in sorted(pairs) if base_ok and pairs[k].i <= n + 1]
    certified = max(holding) if holding else 0
    contradictions = tuple(k for k in holding if k > 1)
    return MinimalPeriodCertificate(certified_k=certified,
                                    contradictions=contradictions,
                                    base_hypotheses_hold=base_ok)

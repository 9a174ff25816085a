"""Symplectic linear algebra and fundamental solutions of -J z' = B(t) z.

The basic objects are time-discretized symmetric matrix loops B(t) on
[0, tau] and the symplectic paths gamma(t) they generate through
gamma' = J B(t) gamma, gamma(0) = I.  Everything here is a plain numpy
value type; paths are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TOL_SP = 1e-8     # Frobenius tolerance for M^T J M - J
TOL_SYM = 1e-10   # symmetry tolerance for matrix loops


class IntegrationDivergedError(RuntimeError):
    """Fundamental-solution integration produced non-finite entries."""


def standard_j(n: int) -> np.ndarray:
    """The 2n x 2n matrix [[0, -I], [I, 0]] defining the symplectic form."""
    if n < 1:
        raise ValueError("half-dimension n must be >= 1")
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = -np.eye(n)
    J[n:, :n] = np.eye(n)
    return J


def symplectic_defect(M: np.ndarray) -> float:
    """Frobenius norm of M^T J M - J."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] % 2:
        raise ValueError(f"dimension {M.shape[0]} is odd; need 2n x 2n")
    J = standard_j(M.shape[0] // 2)
    return float(np.linalg.norm(M.T @ J @ M - J))


def is_symplectic(M: np.ndarray, tol: float = TOL_SP) -> bool:
    """True iff |M^T J M - J|_F <= tol."""
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    return symplectic_defect(M) <= tol


@dataclass(frozen=True)
class SymplecticMatrix:
    """A validated element of Sp(2n)."""

    entries: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        M = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", M)
        defect = symplectic_defect(M)   # also validates the shape
        object.__setattr__(self, "n", M.shape[0] // 2)
        if defect > TOL_SP:
            raise ValueError(f"matrix is not symplectic: defect {defect:.3e} > {TOL_SP:.1e}")
        if np.linalg.det(M) <= 0:
            raise ValueError("symplectic matrix must have positive determinant")
        M.flags.writeable = False

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        return SymplecticMatrix(self.entries @ other.entries)

    def power(self, k: int) -> "SymplecticMatrix":
        return SymplecticMatrix(np.linalg.matrix_power(self.entries, k))


@dataclass(frozen=True)
class DiagonalScaling:
    """Diagonal operator (p, q) -> (a_1 p_1, ..., a_n p_n, b_1 q_1, ..., b_n q_n)."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("weight vectors a and b must be 1-d of equal length")
        if np.any(a <= 0) or np.any(b <= 0):
            raise ValueError("diagonal weights must be strictly positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        a.flags.writeable = False
        b.flags.writeable = False

    @classmethod
    def convex(cls, alpha, beta) -> "DiagonalScaling":
        """Weights with alpha_i + beta_i = 1, as required for the V_1 operator."""
        alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
        beta = np.atleast_1d(np.asarray(beta, dtype=float))
        if not np.allclose(alpha + beta, 1.0, atol=1e-12):
            raise ValueError("convex scaling requires alpha_i + beta_i = 1 for every i")
        return cls(alpha, beta)

    @property
    def n(self) -> int:
        return self.a.size

    def factors(self) -> np.ndarray:
        """The 2n diagonal entries in (p, q) order."""
        return np.concatenate([self.a, self.b])

    def matrix(self) -> np.ndarray:
        return np.diag(self.factors())


def apply_diagonal_scaling(V: DiagonalScaling, z: np.ndarray) -> np.ndarray:
    """Componentwise product in the (p, q) split; broadcasts over leading axes."""
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != 2 * V.n:
        raise ValueError(f"vector dimension {z.shape[-1]} does not match 2n = {2 * V.n}")
    return z * V.factors()


@dataclass(frozen=True)
class MatrixPath:
    """Sampled tau-periodic symmetric matrix loop B(t), linearly interpolated.

    Samples are (times[s], values[s]) with times[0] = 0, times[-1] = period
    and values[0] = values[-1]; every sample must be symmetric.
    """

    times: np.ndarray
    values: np.ndarray
    period: float
    n: int = field(init=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or values.ndim != 3 or values.shape[0] != times.size:
            raise ValueError("need times (S,) and values (S, 2n, 2n)")
        if values.shape[1] != values.shape[2] or values.shape[1] % 2:
            raise ValueError("matrix samples must be square of even dimension")
        if times.size < 2 or np.any(np.diff(times) <= 0):
            raise ValueError("sample times must be strictly increasing with at least 2 samples")
        if not (self.period > 0):
            raise ValueError("period must be positive")
        if abs(times[0]) > 1e-14 * self.period or abs(times[-1] - self.period) > 1e-14 * self.period:
            raise ValueError("samples must cover [0, period] with endpoints included")
        sym = np.max(np.abs(values - values.transpose(0, 2, 1)))
        if sym > TOL_SYM:
            raise ValueError(f"samples not symmetric: max |B - B^T| = {sym:.3e}")
        wrap = np.max(np.abs(values[0] - values[-1]))
        if wrap > TOL_SYM:
            raise ValueError(f"period mismatch: |B(0) - B(tau)| = {wrap:.3e}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "n", values.shape[1] // 2)
        times.flags.writeable = False
        values.flags.writeable = False

    @classmethod
    def constant(cls, B: np.ndarray, period: float) -> "MatrixPath":
        B = np.asarray(B, dtype=float)
        return cls(np.array([0.0, period]), np.stack([B, B]), period)

    @classmethod
    def from_callable(cls, f, period: float, samples: int = 512) -> "MatrixPath":
        """Sample t -> B(t) on a uniform grid; the final sample reuses B(0)."""
        ts = np.linspace(0.0, period, samples + 1)
        vals = np.stack([f(t) for t in ts[:-1]] + [f(ts[0])])
        return cls(ts, vals, period)

    def at(self, t) -> np.ndarray:
        """Piecewise-linear periodic evaluation; t scalar or array."""
        t = np.asarray(t, dtype=float)
        tf = np.mod(t, self.period)
        idx = np.clip(np.searchsorted(self.times, tf, side="right") - 1, 0, self.times.size - 2)
        t0 = self.times[idx]
        t1 = self.times[idx + 1]
        w = ((tf - t0) / (t1 - t0))[..., None, None]
        return (1.0 - w) * self.values[idx] + w * self.values[idx + 1]

    def extended(self, k: int) -> "MatrixPath":
        """The same loop viewed k tau-periodically on [0, k tau]."""
        if k < 1:
            raise ValueError("iteration count k must be >= 1")
        if k == 1:
            return self
        ts = np.concatenate([j * self.period + self.times[:-1] for j in range(k)]
                            + [np.array([k * self.period])])
        vals = np.concatenate([self.values[:-1]] * k + [self.values[-1:]])
        return MatrixPath(ts, vals, k * self.period)

    def to_file(self, path) -> None:
        """Plain-text series: header `n tau samples`, then rows t, B row-major."""
        with open(path, "w") as fh:
            fh.write(f"{self.n} {self.period!r} {self.times.size}\n")
            for t, B in zip(self.times, self.values):
                row = " ".join(repr(float(x)) for x in B.ravel())
                fh.write(f"{float(t)!r} {row}\n")

    @classmethod
    def from_file(cls, path) -> "MatrixPath":
        with open(path) as fh:
            header = fh.readline().split()
            if len(header) != 3:
                raise ValueError("matrix-series header must be `n tau samples`")
            n, period, count = int(header[0]), float(header[1]), int(header[2])
            data = np.loadtxt(fh, ndmin=2)
        if data.shape != (count, 1 + 4 * n * n):
            raise ValueError(f"expected {count} rows of 1 + (2n)^2 = {1 + 4 * n * n} "
                             f"columns, got {data.shape}")
        times = data[:, 0]
        values = data[:, 1:].reshape(count, 2 * n, 2 * n)
        return cls(times, values, period)


@dataclass(frozen=True)
class SymplecticPath:
    """Sampled path gamma: [0, T] -> Sp(2n) with gamma(0) = I."""

    times: np.ndarray
    mats: np.ndarray
    period: float
    defect: float = 0.0   # symplectic residual of the final matrix
    n: int = field(init=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        mats = np.asarray(self.mats, dtype=float)
        if times.ndim != 1 or mats.ndim != 3 or mats.shape[0] != times.size:
            raise ValueError("need times (S,) and mats (S, 2n, 2n)")
        dim = mats.shape[1]
        if dim != mats.shape[2] or dim % 2:
            raise ValueError("path samples must be square of even dimension")
        if not np.array_equal(mats[0], np.eye(dim)):
            raise ValueError("path must start exactly at the identity")
        n = dim // 2
        J = standard_j(n)
        worst = np.max(np.linalg.norm(mats.transpose(0, 2, 1) @ J @ mats - J, axis=(1, 2)))
        if worst > 100 * TOL_SP:
            raise ValueError(f"path leaves Sp(2n): worst sample defect {worst:.3e}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "mats", mats)
        object.__setattr__(self, "n", n)
        times.flags.writeable = False
        mats.flags.writeable = False

    @property
    def monodromy(self) -> SymplecticMatrix:
        return SymplecticMatrix(self.mats[-1])

    def sample_defects(self) -> np.ndarray:
        J = standard_j(self.n)
        return np.linalg.norm(self.mats.transpose(0, 2, 1) @ J @ self.mats - J, axis=(1, 2))


def _symplectic_reproject(M: np.ndarray, J: np.ndarray) -> np.ndarray:
    # Exact correction M <- M (J^T M^T J M)^{-1/2}; the bracket is ~I for
    # near-symplectic M, so a Denman-Beavers iteration converges in a few steps.
    N = J.T @ M.T @ J @ M
    Y, Z = N, np.eye(N.shape[0])
    for _ in range(12):
        Yn = 0.5 * (Y + np.linalg.inv(Z))
        Zn = 0.5 * (Z + np.linalg.inv(Y))
        if np.max(np.abs(Yn - Y)) < 1e-15:
            Y, Z = Yn, Zn
            break
        Y, Z = Yn, Zn
    return M @ Z


def fundamental_solution(B: MatrixPath, steps: int = 2048,
                         reproject: bool = False) -> SymplecticPath:
    """Integrate gamma' = J B(t) gamma, gamma(0) = I with classical RK4.

    The matrix loop is evaluated by piecewise-linear interpolation between
    its samples.  With `reproject` each step is pulled back onto Sp(2n)
    exactly; plain RK4 drift is already ~1e-12 at the default resolution.
    """
    if steps < 2:
        raise ValueError("need at least 2 integration steps")
    n = B.n
    J = standard_j(n)
    h = B.period / steps
    grid = np.arange(steps + 1) * h
    B_nodes = B.at(grid)
    B_half = B.at(grid[:-1] + 0.5 * h)
    mats = np.empty((steps + 1, 2 * n, 2 * n))
    g = np.eye(2 * n)
    mats[0] = g
    for s in range(steps):
        JB0 = J @ B_nodes[s]
        JBh = J @ B_half[s]
        JB1 = J @ B_nodes[s + 1]
        k1 = JB0 @ g
        k2 = JBh @ (g + 0.5 * h * k1)
        k3 = JBh @ (g + 0.5 * h * k2)
        k4 = JB1 @ (g + h * k3)
        g = g + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(g)):
            raise IntegrationDivergedError(f"non-finite entries at step {s + 1} of {steps}")
        if reproject:
            g = _symplectic_reproject(g, J)
        mats[s + 1] = g
    defect = float(np.linalg.norm(g.T @ J @ g - J))
    return SymplecticPath(grid, mats, B.period, defect=defect)


def iterate_path(gamma: SymplecticPath, k: int) -> SymplecticPath:
    """The k-fold path gamma^k(t) = gamma(t - j tau) gamma(tau)^j on [0, k tau]."""
    if k < 1:
        raise ValueError("iteration count k must be >= 1")
    if k == 1:
        return gamma
    M = gamma.mats[-1]
    times = [gamma.times[:-1]]
    mats = [gamma.mats[:-1]]
    Mj = np.eye(M.shape[0])
    for j in range(1, k):
        Mj = M @ Mj
        times.append(j * gamma.period + gamma.times[:-1])
        mats.append(gamma.mats[:-1] @ Mj)
    times.append(np.array([k * gamma.period]))
    mats.append((M @ Mj)[None])
    return SymplecticPath(np.concatenate(times), np.concatenate(mats),
                          k * gamma.period, defect=gamma.defect)

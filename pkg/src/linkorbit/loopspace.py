"""Truncated loop space of tau-periodic R^{2n}-valued Fourier loops.

A loop is z(t) = sum_{|k| <= m} R(2 k pi t / tau) a_k with a_k in R^{2n},
where R(theta) = cos(theta) I + sin(theta) J is the rotation generated by
the standard symplectic J.  The inner product is

    <z, w> = tau (a_0, b_0) + tau sum_{k != 0} |k| a_k . b_k,

under which the derivative form <Az, w> = 2 pi sum_k k a_k . b_k has
eigenvalues +-2pi/tau on the positive/negative mode subspaces and 0 on the
constants.  Synthesis/analysis between coefficients and uniform time grids
goes through the FFT and is exact for band-limited data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .symplectic import standard_j


def default_grid_size(m: int) -> int:
    """Quadrature grid size for truncation m: oversampled trapezoid rule."""
    return max(8 * m, 256)


@dataclass(frozen=True)
class FourierLoop:
    """Coefficients a_k, |k| <= m, stored as an array of shape (2m+1, 2n)."""

    m: int
    period: float
    coeffs: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 2 or c.shape[0] != 2 * self.m + 1 or c.shape[1] % 2:
            raise ValueError(f"coefficient array must be (2m+1, 2n), got {c.shape}")
        if not (self.period > 0):
            raise ValueError("period must be positive")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "n", c.shape[1] // 2)
        c.flags.writeable = False

    @classmethod
    def zero(cls, m: int, period: float, n: int) -> "FourierLoop":
        return cls(m, period, np.zeros((2 * m + 1, 2 * n)))

    @classmethod
    def from_modes(cls, m: int, period: float, n: int, modes: dict) -> "FourierLoop":
        """Loop with the given {k: a_k} coefficients, all others zero."""
        c = np.zeros((2 * m + 1, 2 * n))
        for k, a in modes.items():
            if abs(k) > m:
                raise ValueError(f"mode {k} outside truncation |k| <= {m}")
            c[k + m] = np.asarray(a, dtype=float)
        return cls(m, period, c)

    def modes(self) -> np.ndarray:
        return np.arange(-self.m, self.m + 1)

    def coeff(self, k: int) -> np.ndarray:
        if abs(k) > self.m:
            return np.zeros(2 * self.n)
        return self.coeffs[k + self.m]

    def with_coeffs(self, coeffs: np.ndarray) -> "FourierLoop":
        return FourierLoop(self.m, self.period, coeffs)

    def truncated(self, m_new: int) -> "FourierLoop":
        """Embed into (or cut down to) truncation order m_new."""
        c = np.zeros((2 * m_new + 1, 2 * self.n))
        lo = min(self.m, m_new)
        c[m_new - lo:m_new + lo + 1] = self.coeffs[self.m - lo:self.m + lo + 1]
        return FourierLoop(m_new, self.period, c)


def _check_same_space(z: FourierLoop, w: FourierLoop):
    if z.m != w.m or z.n != w.n or abs(z.period - w.period) > 1e-12 * z.period:
        raise ValueError("loops live in different truncated spaces")


def coeff_weights(m: int, period: float) -> np.ndarray:
    """Gram weights w_k = tau * max(|k|, 1) of the orthogonal mode decomposition."""
    ks = np.arange(-m, m + 1)
    return period * np.maximum(np.abs(ks), 1)


def inner(z: FourierLoop, w: FourierLoop) -> float:
    _check_same_space(z, w)
    ks = np.abs(z.modes()).astype(float)
    ks[z.m] = 1.0   # the k = 0 block carries plain weight tau
    return float(z.period * np.sum(ks[:, None] * z.coeffs * w.coeffs))


def norm(z: FourierLoop) -> float:
    return float(np.sqrt(max(inner(z, z), 0.0)))


def a_form(z: FourierLoop, w: FourierLoop) -> float:
    """The bilinear form <Az, w> = 2 pi sum_k k a_k . b_k."""
    _check_same_space(z, w)
    ks = z.modes().astype(float)
    return float(2 * np.pi * np.sum(ks[:, None] * z.coeffs * w.coeffs))


def project(z: FourierLoop, part: str) -> FourierLoop:
    """Keep only modes with k > 0 ('plus'), k < 0 ('minus'), or k = 0 ('zero')."""
    c = np.zeros_like(z.coeffs)
    if part == "plus":
        c[z.m + 1:] = z.coeffs[z.m + 1:]
    elif part == "minus":
        c[:z.m] = z.coeffs[:z.m]
    elif part == "zero":
        c[z.m] = z.coeffs[z.m]
    else:
        raise ValueError(f"part must be 'plus', 'minus' or 'zero', got {part!r}")
    return z.with_coeffs(c)


def evaluate(z: FourierLoop, t_grid) -> np.ndarray:
    """Pointwise z(t) at arbitrary times, shape (len(t_grid), 2n)."""
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    J = standard_j(z.n)
    theta = 2 * np.pi * np.outer(t, z.modes()) / z.period       # (T, 2m+1)
    Ja = z.coeffs @ J.T
    return np.cos(theta) @ z.coeffs + np.sin(theta) @ Ja


def samples(z: FourierLoop, n_t: int | None = None) -> np.ndarray:
    """z on the uniform grid t_s = s T / N via FFT synthesis, shape (N, 2n)."""
    N = default_grid_size(z.m) if n_t is None else n_t
    if N < 2 * z.m + 1:
        raise ValueError("grid too coarse for the truncation order")
    J = standard_j(z.n)
    c = z.coeffs - 1j * (z.coeffs @ J.T)    # R(k w t) a = Re[e^{i k w t} (a - i J a)]
    spec = np.zeros((N, 2 * z.n), dtype=complex)
    spec[z.modes() % N] = c
    return np.real(np.fft.ifft(spec, axis=0)) * N


def analyze(values: np.ndarray, m: int, period: float) -> FourierLoop:
    """Project uniform-grid samples onto modes |k| <= m (FFT analysis)."""
    values = np.asarray(values, dtype=float)
    N, dim = values.shape
    if N < 2 * m + 1:
        raise ValueError("grid too coarse for the requested truncation")
    J = standard_j(dim // 2)
    F = np.fft.fft(values - 1j * (values @ J.T), axis=0) / N
    ks = np.arange(-m, m + 1)
    return FourierLoop(m, period, np.real(F[ks % N]))


def grid_quadrature(values: np.ndarray, period: float) -> float | np.ndarray:
    """Trapezoid rule on the uniform periodic grid (= rectangle rule)."""
    return np.sum(values, axis=0) * period / values.shape[0]


def time_shift(z: FourierLoop, s: float) -> FourierLoop:
    """The loop t -> z(t + s)."""
    J = standard_j(z.n)
    theta = 2 * np.pi * z.modes() * s / z.period
    c = (np.cos(theta)[:, None] * z.coeffs
         + np.sin(theta)[:, None] * (z.coeffs @ J.T))
    return z.with_coeffs(c)


def iterate_loop(z: FourierLoop, p: int, m_new: int | None = None) -> FourierLoop:
    """View a T-periodic loop as p T-periodic: mode k moves to mode p k."""
    if p < 1:
        raise ValueError("iteration count must be >= 1")
    if p == 1:
        return z if m_new is None else z.truncated(m_new)
    m2 = p * z.m if m_new is None else m_new
    c = np.zeros((2 * m2 + 1, 2 * z.n))
    for k in range(-z.m, z.m + 1):
        if abs(p * k) <= m2:
            c[p * k + m2] = z.coeff(k)
    return FourierLoop(m2, p * z.period, c)


def loop_to_coords(z: FourierLoop) -> np.ndarray:
    """Isometric coordinates: the E-norm becomes the euclidean norm."""
    w = coeff_weights(z.m, z.period)
    return (z.coeffs * np.sqrt(w)[:, None]).ravel()


def coords_to_loop(x: np.ndarray, m: int, period: float, n: int) -> FourierLoop:
    w = coeff_weights(m, period)
    c = np.asarray(x, dtype=float).reshape(2 * m + 1, 2 * n) / np.sqrt(w)[:, None]
    return FourierLoop(m, period, c)


def random_loop(rng: np.random.Generator, m: int, period: float, n: int,
                decay: float = 1.5, scale: float = 1.0) -> FourierLoop:
    """Random loop with mode-k coefficients ~ N(0, 1) / (1 + |k|)^decay."""
    ks = np.arange(-m, m + 1)
    amp = scale / (1.0 + np.abs(ks)) ** decay
    c = rng.normal(size=(2 * m + 1, 2 * n)) * amp[:, None]
    return FourierLoop(m, period, c)


@dataclass(frozen=True)
class ScalingProfile:
    """Anisotropy exponents (sigma_i, tau_i) and the induced scaling data.

    eta is chosen (or validated) so that the normalized exponents
    tilde_sigma_i = eta sigma_i / (sigma_i + tau_i) and
    tilde_tau_i = eta tau_i / (sigma_i + tau_i) are both >= 1;
    tilde_sigma_i + tilde_tau_i = eta for every i.
    """

    sigma: np.ndarray
    tau_exp: np.ndarray
    eta: float
    tilde_sigma: np.ndarray = field(init=False)
    tilde_tau: np.ndarray = field(init=False)

    def __post_init__(self):
        s = np.atleast_1d(np.asarray(self.sigma, dtype=float))
        t = np.atleast_1d(np.asarray(self.tau_exp, dtype=float))
        if s.shape != t.shape or s.ndim != 1:
            raise ValueError("sigma and tau_exp must be 1-d of equal length")
        if np.any(s <= 0) or np.any(t <= 0):
            raise ValueError("anisotropy exponents must be strictly positive")
        ts = self.eta * s / (s + t)
        tt = self.eta * t / (s + t)
        if np.any(ts < 1 - 1e-12) or np.any(tt < 1 - 1e-12):
            raise ValueError("eta too small: normalized exponents must be >= 1")
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "tau_exp", t)
        object.__setattr__(self, "tilde_sigma", ts)
        object.__setattr__(self, "tilde_tau", tt)
        for arr in (s, t, ts, tt):
            arr.flags.writeable = False

    @classmethod
    def from_exponents(cls, sigma, tau_exp, eta: float | None = None) -> "ScalingProfile":
        """Smallest admissible eta by default: max_i max(1 + s/t, 1 + t/s)."""
        s = np.atleast_1d(np.asarray(sigma, dtype=float))
        t = np.atleast_1d(np.asarray(tau_exp, dtype=float))
        if eta is None:
            eta = float(np.max(np.maximum(1 + s / t, 1 + t / s)))
        return cls(s, t, eta)

    @property
    def n(self) -> int:
        return self.sigma.size

    def factors(self, rho: float) -> np.ndarray:
        """Diagonal of B_rho in (p, q) order: rho^(tilde_tau - 1) on p, rho^(tilde_sigma - 1) on q."""
        if rho <= 0:
            raise ValueError("scaling parameter rho must be positive")
        return np.concatenate([rho ** (self.tilde_tau - 1.0),
                               rho ** (self.tilde_sigma - 1.0)])


def scaling_operator(z, rho: float, profile: ScalingProfile):
    """Apply B_rho; on loops this acts pointwise in time, then re-projects.

    The diagonal does not commute with the rotation basis, so coefficientwise
    scaling would be wrong; pointwise application keeps the band limit and
    the re-projection is exact.
    """
    f = profile.factors(rho)
    if isinstance(z, FourierLoop):
        if z.n != profile.n:
            raise ValueError("profile dimension does not match the loop")
        vals = samples(z) * f
        return analyze(vals, z.m, z.period)
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != f.size:
        raise ValueError("vector dimension does not match the profile")
    return z * f


def save_loop_csv(z: FourierLoop, path) -> None:
    """Rows (k, a_k[1], ..., a_k[2n]); the header records n, m, tau."""
    with open(path, "w") as fh:
        fh.write(f"# n={z.n} m={z.m} tau={z.period!r}\n")
        fh.write("k," + ",".join(f"a{i + 1}" for i in range(2 * z.n)) + "\n")
        for k, row in zip(z.modes(), z.coeffs):
            fh.write(f"{k}," + ",".join(repr(float(x)) for x in row) + "\n")


def load_loop_csv(path) -> FourierLoop:
    with open(path) as fh:
        head = fh.readline().strip()
        if not head.startswith("#"):
            raise ValueError("missing metadata header line")
        meta = dict(item.split("=") for item in head[1:].split())
        n, m, period = int(meta["n"]), int(meta["m"]), float(meta["tau"])
        fh.readline()   # column names
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape != (2 * m + 1, 1 + 2 * n):
        raise ValueError(f"expected {2 * m + 1} rows of 1 + 2n columns, got {data.shape}")
    ks = data[:, 0].astype(int)
    if not np.array_equal(ks, np.arange(-m, m + 1)):
        raise ValueError("mode column must run from -m to m")
    return FourierLoop(m, period, data[:, 1:])

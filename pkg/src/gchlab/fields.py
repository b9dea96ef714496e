"""Periodic grid, FFT transforms and the elliptic helpers built on them.

Everything lives on a uniform grid over [-L, L) with N a power of two.
Wavenumbers are k_j = pi j / L in FFT layout, so spectral coefficients are
index-aligned with `grid.k`.  Physical-space integrals are Riemann sums with
weight dx; by Parseval that matches the coefficient-space sums used for the
Sobolev norms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

# |f(+-L)| above this fraction of max|f| means the field does not decay
# inside the box and periodic results stop meaning anything.
POLLUTION_TOL = 1e-10

# Truncation threshold for the periodized kernel sum in green_convolve.
KERNEL_TERM_FLOOR = 1e-16


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on [-L, L) with power-of-two N."""

    L: float
    n: int
    x: np.ndarray = field(init=False, repr=False, compare=False)
    k: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.L <= 0:
            raise ConfigError(f"half-width must be positive, got L={self.L}")
        n = self.n
        if n < 16 or n & (n - 1) != 0:
            raise ConfigError(f"N must be a power of two >= 16, got N={n}")
        dx = 2.0 * self.L / n
        object.__setattr__(self, "x", -self.L + dx * np.arange(n))
        # fftfreq(n, d=dx) * 2*pi == pi*j/L in FFT order, Nyquist negative
        object.__setattr__(self, "k", 2.0 * np.pi * np.fft.fftfreq(n, d=dx))

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def nyquist(self) -> float:
        return np.pi * (self.n // 2) / self.L


@dataclass
class RealField:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ConfigError(
                f"field shape {self.values.shape} does not match grid N={self.grid.n}"
            )

    def copy(self) -> "RealField":
        return RealField(self.grid, self.values.copy())


@dataclass
class SpectralField:
    grid: Grid1D
    coeffs: np.ndarray


def to_spectral(f: RealField) -> SpectralField:
    return SpectralField(f.grid, np.fft.fft(f.values))


def to_physical(fh: SpectralField) -> RealField:
    return RealField(fh.grid, np.fft.ifft(fh.coeffs).real)


def derivative(f: RealField, order: int = 1) -> RealField:
    """Spectral d^order/dx^order. Odd orders zero the Nyquist mode.

    The Nyquist coefficient of a real field is real; multiplying by an odd
    power of ik would make it imaginary, i.e. leak a non-representable mode.
    """
    if order < 1:
        raise ConfigError(f"derivative order must be a positive integer, got {order}")
    g = f.grid
    ch = np.fft.fft(f.values) * (1j * g.k) ** order
    if order % 2 == 1:
        ch[g.n // 2] = 0.0
    return RealField(g, np.fft.ifft(ch).real)


def helmholtz_inverse(f: RealField) -> RealField:
    """(1 - dx^2)^{-1} f via division by 1 + k^2."""
    g = f.grid
    ch = np.fft.fft(f.values) / (1.0 + g.k**2)
    return RealField(g, np.fft.ifft(ch).real)


def periodized_kernel(grid: Grid1D) -> np.ndarray:
    """Samples of G_per(x) = sum_n (1/2) e^{-|x + 2Ln|} at grid offsets.

    Terms are added until they fall below KERNEL_TERM_FLOOR.
    """
    d = grid.x + grid.L  # offsets 0 .. 2L-dx
    total = np.zeros_like(d)
    n = 0
    while True:
        t_pos = 0.5 * np.exp(-np.abs(d + 2.0 * grid.L * n))
        t_neg = 0.5 * np.exp(-np.abs(d - 2.0 * grid.L * (n + 1)))
        total += t_pos + t_neg
        if t_pos.max() < KERNEL_TERM_FLOOR and t_neg.max() < KERNEL_TERM_FLOOR:
            break
        n += 1
        if n > 64:
            break
    return total


def green_convolve(f: RealField) -> RealField:
    """(1 - dx^2)^{-1} f by direct quadrature against the periodized kernel.

    Deliberately FFT-free so it can serve as an independent oracle for
    helmholtz_inverse.  The kernel has a kink at 0 sitting exactly on a
    node, so plain trapezoid stalls at O(dx^2); the two Euler-Maclaurin
    kink corrections below push the quadrature to O(dx^6).  (Sanity anchor:
    for f == 1 plain trapezoid returns (h/2)coth(h/2) = 1 + h^2/12 - h^4/720,
    which is exactly what the corrections remove.)
    """
    g = f.grid
    h = g.dx
    kern = periodized_kernel(g)
    # circular convolution via direct (non-FFT) linear convolution
    tiled = np.concatenate([f.values, f.values])
    conv = np.convolve(tiled, kern)[g.n : 2 * g.n] * h
    fv = f.values
    f2 = (np.roll(fv, -1) - 2.0 * fv + np.roll(fv, 1)) / h**2
    conv -= (h**2 / 12.0) * fv
    conv += (h**4 / 720.0) * (fv + 3.0 * f2)
    return RealField(g, conv)


def lp_norm(f: RealField, p: float) -> float:
    """Riemann-sum L^p norm; p = inf gives max|f|."""
    if p == np.inf:
        return float(np.max(np.abs(f.values)))
    if p < 1:
        raise ConfigError(f"L^p norm needs p >= 1, got p={p}")
    return float((np.sum(np.abs(f.values) ** p) * f.grid.dx) ** (1.0 / p))


def sobolev_norm(f: RealField, s: float) -> float:
    """H^s norm via (1+k^2)^s coefficient weighting, normalized to dx sums.

    s = 0 delegates to lp_norm(f, 2) so the two agree exactly, not just to
    FFT roundoff.
    """
    if s == 0:
        return lp_norm(f, 2.0)
    g = f.grid
    ch = np.fft.fft(f.values)
    total = np.sum((1.0 + g.k**2) ** s * np.abs(ch) ** 2) * g.dx / g.n
    return float(np.sqrt(total))


def pollution_ratio(f: RealField) -> float:
    """max of |f| at the two box ends over max|f| (0 for the zero field)."""
    m = np.max(np.abs(f.values))
    if m == 0.0:
        return 0.0
    return float(max(abs(f.values[0]), abs(f.values[-1])) / m)


def check_domain_decay(f: RealField, tol: float = POLLUTION_TOL) -> None:
    r = pollution_ratio(f)
    if r > tol:
        raise ConfigError(
            f"field does not decay inside the box: boundary/max ratio {r:.3e} > {tol:.1e}"
        )


def dealias_mask(grid: Grid1D) -> np.ndarray:
    """Boolean mask keeping |k| <= (2/3) k_Nyquist (the 2/3 rule)."""
    return np.abs(grid.k) <= (2.0 / 3.0) * grid.nyquist


def dealias(f: RealField) -> RealField:
    ch = np.fft.fft(f.values)
    ch[~dealias_mask(f.grid)] = 0.0
    return RealField(f.grid, np.fft.ifft(ch).real)


def refine_field(f: RealField, factor: int = 2) -> RealField:
    """Band-limited upsample onto a grid with factor*N points (same L)."""
    if factor < 1 or factor & (factor - 1) != 0:
        raise ConfigError(f"refinement factor must be a power of two, got {factor}")
    if factor == 1:
        return f.copy()
    g = f.grid
    fine = Grid1D(g.L, g.n * factor)
    ch = np.fft.fft(f.values)
    out = np.zeros(fine.n, dtype=complex)
    half = g.n // 2
    out[:half] = ch[:half]
    out[fine.n - half :] = ch[half:]
    # split the Nyquist coefficient across +-k_nyq to keep the field real
    out[half] = 0.5 * ch[half]
    out[fine.n - half] += 0.5 * ch[half]
    return RealField(fine, np.fft.ifft(out).real * factor)


def random_band_limited(
    grid: Grid1D,
    rng: np.random.Generator,
    frac: float = 1.0 / 3.0,
    decay: float = 2.0,
    amplitude: float = 1.0,
) -> RealField:
    """Random real field supported on |k| <= frac * k_Nyquist.

    Coefficients get i.i.d. complex Gaussians shaped by (1+k^2)^{-decay/2};
    used for test corpora where products must stay alias-free.
    """
    g = grid
    kcut = frac * g.nyquist
    ch = np.zeros(g.n, dtype=complex)
    mask = (np.abs(g.k) <= kcut) & (g.k != 0.0)
    nm = int(mask.sum())
    ch[mask] = rng.standard_normal(nm) + 1j * rng.standard_normal(nm)
    ch *= (1.0 + g.k**2) ** (-decay / 2.0)
    ch[g.n // 2] = 0.0
    vals = np.fft.ifft(ch).real
    m = np.max(np.abs(vals))
    if m > 0:
        vals *= amplitude / m
    return RealField(g, vals)

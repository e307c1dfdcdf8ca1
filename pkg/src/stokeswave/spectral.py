"""Real periodic fields on the 2*pi torus and the three nonlocal operators.

The operators are the zero-mean inverse fractional Laplacian (Fourier symbol
1/|k|, realized in physical space by the periodic log kernel), the periodic
Hilbert transform (symbol -i sign k, cotangent kernel) and the fractional
Laplacian (symbol |k|, singular difference kernel).  Each one is implemented
twice: as a Fourier multiplier and as a direct singular quadrature on the
grid, so the two routes can be cross-validated.

Quadrature routes:
  * log kernel: Kress-type rule, i.e. the circulant that integrates the
    trigonometric interpolant exactly against log(4 sin^2((a-b)/2)).
  * cotangent and difference kernels: alternate-point trapezoid (only the
    odd offsets from the target node are used).  The even-offset sums
    cancel the principal value by symmetry, and the rule is exact on
    band-limited fields up to the Nyquist mode.

The Nyquist mode is zeroed by every multiplier application (its sign is
ambiguous under ik) and the 2/3 rule is applied after every pointwise
product.
"""

from __future__ import annotations

import threading

import numpy as np

_TWO_PI = 2.0 * np.pi


class Grid1D:
    """Uniform grid on [-pi, pi) with n nodes, n even and >= 16."""

    def __init__(self, n: int):
        if n < 16 or n % 2 != 0:
            raise ValueError(f"grid size must be even and >= 16, got {n}")
        self.n = n
        self.nodes = -np.pi + _TWO_PI * np.arange(n) / n
        self.spacing = _TWO_PI / n
        # fft-ordered integer wavenumbers, covering {-n/2+1, ..., n/2}
        self.wavenumbers = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
        self.wavenumbers[n // 2] = n // 2
        # largest mode kept by the 2/3 rule
        self.dealias_cutoff = n // 3

    def __eq__(self, other):
        return isinstance(other, Grid1D) and other.n == self.n

    def __hash__(self):
        return hash(("Grid1D", self.n))

    def __repr__(self):
        return f"Grid1D(n={self.n})"


class PeriodicField:
    """Real scalar field sampled on a Grid1D, with cached spectrum.

    ``coefficients`` are the true Fourier coefficients c_k of
    u(a) = sum_k c_k e^{ika} in fft ordering; c_0 is the mean.  Values are
    treated as immutable; all operations return new fields.
    """

    def __init__(self, grid: Grid1D, values):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} samples, got shape {values.shape}")
        self.grid = grid
        self.values = values
        self._coefficients = None

    @classmethod
    def from_function(cls, grid: Grid1D, fn) -> "PeriodicField":
        return cls(grid, fn(grid.nodes))

    @classmethod
    def from_coefficients(cls, grid: Grid1D, coefficients) -> "PeriodicField":
        c = np.asarray(coefficients, dtype=np.complex128)
        if c.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} coefficients, got shape {c.shape}")
        # nodes start at -pi, so undo the phase used in coefficients()
        spectrum = c * np.exp(-1j * np.pi * grid.wavenumbers) * grid.n
        values = np.fft.ifft(spectrum)
        out = cls(grid, np.real(values))
        out._coefficients = c
        return out

    @classmethod
    def zero(cls, grid: Grid1D) -> "PeriodicField":
        return cls(grid, np.zeros(grid.n))

    @property
    def coefficients(self):
        if self._coefficients is None:
            raw = np.fft.fft(self.values) / self.grid.n
            # samples start at a = -pi: shift so coefficients refer to e^{ika}
            self._coefficients = raw * np.exp(1j * np.pi * self.grid.wavenumbers)
        return self._coefficients

    def mean(self) -> float:
        return float(np.mean(self.values))

    def l2_norm(self) -> float:
        """L2 norm on the torus (Parseval-exact at grid resolution)."""
        return float(np.sqrt(self.grid.spacing * np.sum(self.values**2)))

    def linf_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def sobolev_norm(self, s: float) -> float:
        """Homogeneous Sobolev norm: l2 of |k|^s * c_k (k=0 excluded)."""
        k = self.grid.wavenumbers
        c = self.coefficients
        nz = k != 0
        return float(np.sqrt(_TWO_PI * np.sum(np.abs(k[nz]) ** (2 * s) * np.abs(c[nz]) ** 2)))

    def _active_modes(self):
        """(k, c_k) for the strictly positive modes with nonzero amplitude."""
        n = self.grid.n
        c = self.coefficients
        kpos = np.arange(1, n // 2)
        keep = np.abs(c[kpos]) > 0.0
        return kpos[keep], c[kpos][keep]

    def evaluate(self, x):
        """Evaluate the trigonometric interpolant at arbitrary points."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        c = self.coefficients
        n = self.grid.n
        k, ck = self._active_modes()
        out = np.full(x.shape, np.real(c[0]))
        if k.size:
            out += 2.0 * np.real(ck @ np.exp(1j * np.outer(k, x)))
        # Nyquist as a pure cosine keeps the interpolant real
        nyq = np.real(c[n // 2])
        if nyq != 0.0:
            out += nyq * np.cos((n // 2) * x)
        return out

    def evaluate_derivative(self, x, order: int = 1):
        """Evaluate d^order/dx^order of the interpolant (Nyquist dropped)."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        k, ck = self._active_modes()
        out = np.zeros(x.shape)
        if k.size:
            ck = ck * (1j * k.astype(np.float64)) ** order
            out += 2.0 * np.real(ck @ np.exp(1j * np.outer(k, x)))
        return out

    def _with_spectrum(self, spectrum) -> "PeriodicField":
        grid = self.grid
        raw = spectrum * np.exp(-1j * np.pi * grid.wavenumbers)
        out = PeriodicField(grid, np.real(np.fft.ifft(raw * grid.n)))
        # keep the exact spectrum so truncated modes stay exactly zero
        out._coefficients = np.asarray(spectrum, dtype=np.complex128)
        return out

    # linear combinations are safe without dealiasing; use product() for
    # pointwise multiplication
    def __add__(self, other):
        self._check_grid(other)
        return PeriodicField(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check_grid(other)
        return PeriodicField(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        if isinstance(scalar, PeriodicField):
            raise TypeError("use product() for field*field (needs dealiasing)")
        return PeriodicField(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return PeriodicField(self.grid, -self.values)

    def _check_grid(self, other):
        if not isinstance(other, PeriodicField) or other.grid != self.grid:
            raise ValueError("fields must share a grid")


# ---------------------------------------------------------------------------
# multiplier route
# ---------------------------------------------------------------------------

def _apply_symbol(f: PeriodicField, symbol) -> PeriodicField:
    """Apply a Fourier multiplier; the Nyquist mode is always zeroed."""
    k = f.grid.wavenumbers
    spec = f.coefficients * symbol
    spec[f.grid.n // 2] = 0.0
    return f._with_spectrum(spec)


def lambda_inv(f: PeriodicField) -> PeriodicField:
    """Zero-mean smoothing operator with symbol 1/|k| (log kernel)."""
    k = f.grid.wavenumbers
    sym = np.zeros(f.grid.n)
    nz = k != 0
    sym[nz] = 1.0 / np.abs(k[nz])
    return _apply_symbol(f, sym)


def hilbert(f: PeriodicField) -> PeriodicField:
    """Periodic Hilbert transform, symbol -i sign(k)."""
    k = f.grid.wavenumbers
    return _apply_symbol(f, -1j * np.sign(k))


def lam(f: PeriodicField) -> PeriodicField:
    """Fractional Laplacian (-d^2/da^2)^(1/2), symbol |k|."""
    return _apply_symbol(f, np.abs(f.grid.wavenumbers))


def half_lam_norm(f: PeriodicField) -> float:
    """L2 norm of Lambda^{-1/2} f (used in the energy balance)."""
    k = f.grid.wavenumbers
    c = f.coefficients
    nz = k != 0
    return float(np.sqrt(_TWO_PI * np.sum(np.abs(c[nz]) ** 2 / np.abs(k[nz]))))


def derivative(f: PeriodicField, order: int = 1) -> PeriodicField:
    return _apply_symbol(f, (1j * f.grid.wavenumbers.astype(np.float64)) ** order)


def dealias(f: PeriodicField) -> PeriodicField:
    """Zero all modes above the 2/3 cutoff."""
    k = f.grid.wavenumbers
    keep = np.abs(k) <= f.grid.dealias_cutoff
    return f._with_spectrum(f.coefficients * keep)


def product(f: PeriodicField, g: PeriodicField) -> PeriodicField:
    """Pointwise product followed by 2/3-rule dealiasing."""
    f._check_grid(g)
    return dealias(PeriodicField(f.grid, f.values * g.values))


def apply_linear_semigroup(f: PeriodicField, t: float) -> PeriodicField:
    """Multiply mode k != 0 by exp(-t/|k|); the mean is left unchanged."""
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    k = f.grid.wavenumbers
    sym = np.ones(f.grid.n)
    nz = k != 0
    sym[nz] = np.exp(-t / np.abs(k[nz]))
    spec = f.coefficients * sym
    return f._with_spectrum(spec)


# ---------------------------------------------------------------------------
# quadrature routes
# ---------------------------------------------------------------------------

_weights_lock = threading.Lock()
_kress_cache: dict[int, np.ndarray] = {}


def kress_log_weights(n: int) -> np.ndarray:
    """Circulant weights w so that sum_j w[(i-j)%n] f_j approximates
    (1/2pi) * int log(4 sin^2((a_i - b)/2)) f(b) db, exactly on
    trigonometric polynomials up to the Nyquist mode.

    Built from the cosine series of the kernel in real space; the Nyquist
    term carries half weight in the classical rule.
    """
    with _weights_lock:
        w = _kress_cache.get(n)
    if w is not None:
        return w
    offsets = np.arange(n) * (_TWO_PI / n)
    j = np.arange(1, n // 2)
    w = -((2.0 / n) * (np.cos(np.outer(offsets, j)) / j).sum(axis=1)
          + (2.0 / n**2) * np.cos((n // 2) * offsets))
    with _weights_lock:
        _kress_cache[n] = w
    return w


def kress_log_matrix(n: int) -> np.ndarray:
    """Dense circulant for the Kress rule (row i applies at node i)."""
    w = kress_log_weights(n)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return w[idx]


def lambda_inv_quadrature(f: PeriodicField) -> PeriodicField:
    """Log-kernel route: -(1/2pi) int log(4 sin^2((a-b)/2)) f(b) db."""
    vals = -(kress_log_matrix(f.grid.n) @ f.values)
    return PeriodicField(f.grid, vals)


def _odd_offsets(n: int):
    return np.arange(1, n, 2)


def hilbert_quadrature(f: PeriodicField) -> PeriodicField:
    """Alternate-point principal-value trapezoid for the cotangent kernel."""
    n = f.grid.n
    m = _odd_offsets(n)
    cot = 1.0 / np.tan(np.pi * m / n)
    idx = (np.arange(n)[:, None] + m[None, :]) % n
    vals = -(2.0 / n) * (cot[None, :] * f.values[idx]).sum(axis=1)
    return PeriodicField(f.grid, vals)


def lam_quadrature(f: PeriodicField) -> PeriodicField:
    """Alternate-point rule for the singular difference kernel."""
    n = f.grid.n
    m = _odd_offsets(n)
    s2 = 2.0 * np.sin(np.pi * m / n) ** 2
    idx = (np.arange(n)[:, None] + m[None, :]) % n
    vals = (2.0 / n) * ((f.values[:, None] - f.values[idx]) / s2[None, :]).sum(axis=1)
    return PeriodicField(f.grid, vals)


# ---------------------------------------------------------------------------
# helpers shared with the time stepper and diagnostics
# ---------------------------------------------------------------------------

def band_limited(grid: Grid1D, max_mode: int, rng: np.random.Generator,
                 decay: float = 0.0) -> PeriodicField:
    """Seeded random zero-mean field with modes 1..max_mode.

    Coefficient magnitudes scale like k^-decay.
    """
    if max_mode >= grid.n // 2:
        raise ValueError("max_mode must stay below Nyquist")
    vals = np.zeros(grid.n)
    for k in range(1, max_mode + 1):
        amp = k ** (-decay) if decay else 1.0
        vals += amp * (rng.standard_normal() * np.cos(k * grid.nodes)
                       + rng.standard_normal() * np.sin(k * grid.nodes))
    return PeriodicField(grid, vals)


def top_band_amplitude(f: PeriodicField) -> float:
    """Largest coefficient magnitude in the top eighth of the active band."""
    kd = f.grid.dealias_cutoff
    k = np.abs(f.grid.wavenumbers)
    c = np.abs(f.coefficients)
    top = (k >= max(1, int(np.ceil(0.875 * kd)))) & (k <= kd)
    return float(np.max(c[top]))


def peak_amplitude(f: PeriodicField) -> float:
    return float(np.max(np.abs(f.coefficients)))


def tail_fraction(f: PeriodicField) -> float:
    """Relative magnitude of the top eighth of the active (dealiased) band.

    0 means spectrally clean; values near 1 mean the field is unresolved
    relative to its own instantaneous peak.  Run-level resolution guards
    should reference the run's amplitude scale instead (the damping here is
    weakest at high wavenumbers, so the spectral peak of any decaying
    solution migrates upward while everything shrinks).
    """
    peak = peak_amplitude(f)
    if peak == 0.0:
        return 0.0
    return top_band_amplitude(f) / peak

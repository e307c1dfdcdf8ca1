"""Blow-up and decay diagnostics: minimum-slope tracking with the Riccati
comparison, the Lagrangian and weighted blow-up functionals, decay-exponent
fits, analyticity-strip width, and symmetry monitors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi

from .spectral import PeriodicField, derivative, lambda_inv

LOG4 = math.log(4.0)


# ---------------------------------------------------------------------------
# minimum slope and the Riccati comparison
# ---------------------------------------------------------------------------

def track_min_slope(u: PeriodicField):
    """(m, x): minimum of u_a with sub-grid Newton refinement.

    Grid-only minima carry O(da^2) noise which would pollute the Riccati
    residual; three Newton steps on the trigonometric interpolant remove it.
    """
    ua = derivative(u)
    i0 = int(np.argmin(ua.values))
    x = float(u.grid.nodes[i0])
    for _ in range(3):
        g1 = float(u.evaluate_derivative(np.array([x]), order=2)[0])
        g2 = float(u.evaluate_derivative(np.array([x]), order=3)[0])
        if abs(g2) < 1e-14:
            break
        step = g1 / g2
        step = max(min(step, u.grid.spacing), -u.grid.spacing)
        x = x - step
    m_refined = float(u.evaluate_derivative(np.array([x]))[0])
    m_grid = float(ua.values[i0])
    if m_refined <= m_grid:
        return m_refined, x
    return m_grid, float(u.grid.nodes[i0])


def riccati_residual(u: PeriodicField) -> float:
    """Lambda^{-1} u_a at the argmin minus log(4) m; nonnegative pointwise.

    The kernel argument: log(sin^2(y/2)) <= 0 and u_a(x_t) - u_a(x_t - y)
    <= 0 at the minimizer, so their integral is >= 0.
    """
    m, x = track_min_slope(u)
    smoothed = lambda_inv(derivative(u))
    return float(smoothed.evaluate(np.array([x]))[0]) - LOG4 * m


def riccati_comparison(m0: float, t):
    """Closed-form solution of m' = -m^2 - log(4) m.

    Writing r = m/(m + log 4), the flow is r(t) = r0 exp(-log(4) t) and
    m = log(4) r/(1 - r).  For m0 < -log 4 the solution reaches -infinity at
    the finite time returned by riccati_blowup_time; past it the comparison
    bound is vacuous and -inf is returned.
    """
    t = np.asarray(t, dtype=np.float64)
    if m0 == 0.0:
        return np.zeros_like(t)
    if abs(m0 + LOG4) < 1e-14:
        return np.full_like(t, -LOG4)
    r0 = m0 / (m0 + LOG4)
    r = r0 * np.exp(-LOG4 * t)
    tstar = riccati_blowup_time(m0)
    with np.errstate(divide="ignore", invalid="ignore"):
        m = LOG4 * r / (1.0 - r)
    if tstar is not None:
        m = np.where(t >= tstar, -np.inf, m)
    return m


def riccati_blowup_time(m0: float):
    """Finite blow-up time of the comparison ODE, or None if global."""
    if m0 >= -LOG4:
        return None
    r0 = m0 / (m0 + LOG4)
    return math.log(r0) / LOG4


@dataclass
class SlopeTracker:
    """History of (t, m, x_t) along a run."""

    history: list = field(default_factory=list)

    def update(self, t: float, u: PeriodicField):
        m, x = track_min_slope(u)
        self.history.append((t, m, x))
        return m, x

    @property
    def minima(self):
        return np.array([h[1] for h in self.history])

    @property
    def times(self):
        return np.array([h[0] for h in self.history])


# ---------------------------------------------------------------------------
# Lagrangian functional L(t)
# ---------------------------------------------------------------------------

@dataclass
class LagrangianTracker:
    """Moving-frame trajectory y' = u^2(y), y(0) = 0, and the L history."""

    delta: float
    y: float = 0.0
    history: list = field(default_factory=list)

    def __post_init__(self):
        if not (0.0 < self.delta < 0.5):
            raise ValueError("delta must lie in (0, 1/2)")

    def advance(self, dt: float, u_start: PeriodicField, u_end: PeriodicField):
        """Heun step for the trajectory (second-order companion of the run)."""
        k1 = float(u_start.evaluate(np.array([self.y]))[0]) ** 2
        k2 = float(u_end.evaluate(np.array([self.y + dt * k1]))[0]) ** 2
        self.y += 0.5 * dt * (k1 + k2)

    def record(self, t: float, u: PeriodicField):
        value = functional_L(u, self)
        self.history.append((t, value))
        return value


def _jacobi_rule(n, beta):
    # weight (1+x)^beta on [-1, 1]
    return roots_jacobi(n, 0.0, beta)


def functional_L(u: PeriodicField, tracker: LagrangianTracker, order: int = 48) -> float:
    """int_{-1}^{1} (W(0)-W(x)) (|x|^{-delta}-1) sign(x) dx with
    W(x) = u^2(x + y); reduces to int_0^1 (W(-s)-W(s))(s^{-delta}-1) ds."""
    delta = tracker.delta
    y = tracker.y

    def g(s):
        wm = u.evaluate(y - s) ** 2
        wp = u.evaluate(y + s) ** 2
        return wm - wp

    # singular part: Gauss-Jacobi with weight s^{-delta}
    xj, wj = _jacobi_rule(order, -delta)
    s_j = 0.5 * (1.0 + xj)
    singular = 2.0 ** (delta - 1.0) * float(wj @ g(s_j))
    # regular part: plain Gauss-Legendre for the -1 in the weight
    xl, wl = np.polynomial.legendre.leggauss(order)
    s_l = 0.5 * (1.0 + xl)
    regular = 0.5 * float(wl @ g(s_l))
    return singular - regular


# ---------------------------------------------------------------------------
# weighted functional J(t) on the half period
# ---------------------------------------------------------------------------

def symmetry_defect(u: PeriodicField, kind: str) -> float:
    """Half the max-norm of u -/+ its reflection about a = 0."""
    n = u.grid.n
    reflected = u.values[(-np.arange(n)) % n]
    if kind == "odd":
        return 0.5 * float(np.max(np.abs(u.values + reflected)))
    if kind == "even":
        return 0.5 * float(np.max(np.abs(u.values - reflected)))
    raise ValueError(f"kind must be 'odd' or 'even', got {kind!r}")


def _weighted_half_period(u: PeriodicField, power: int, weight_exponent: float,
                          order: int) -> float:
    """int_0^pi (u/x)^power x^{weight_exponent} dx by Gauss-Jacobi."""
    xj, wj = _jacobi_rule(order, weight_exponent)
    x = 0.5 * np.pi * (1.0 + xj)
    vals = (u.evaluate(x) / x) ** power
    return (0.5 * np.pi) ** (1.0 + weight_exponent) * float(wj @ vals)


def functional_J(u: PeriodicField, delta: float, order: int = 64) -> float:
    """int_0^pi u^2 / x^{1+delta} dx for odd u and delta < 1/2.

    The half period stands in for the source's half line: only the origin
    weight drives the growth argument and the far field is bounded on the
    torus.  Odd u makes the integrand ~ x^{1-delta} at zero.
    """
    if not (0.0 < delta < 0.5):
        raise ValueError("delta must lie in (0, 1/2)")
    defect = symmetry_defect(u, "odd")
    if defect > 1e-8 * max(1.0, u.linf_norm()):
        raise ValueError(f"functional_J requires odd data (defect {defect:.3g})")
    return _weighted_half_period(u, 2, 1.0 - delta, order)


def functional_J_quartic(u: PeriodicField, delta: float, order: int = 64) -> float:
    """int_0^pi u^4 / x^{2+delta} dx (the positivity term in dJ/dt)."""
    return _weighted_half_period(u, 4, 2.0 - delta, order)


def holder_constant(delta: float) -> float:
    """C with int u^4/x^{2+d} >= C (int u^2/x^{1+d})^2 on (0, pi]."""
    return (1.0 - delta) / np.pi ** (1.0 - delta)


@dataclass
class WeightedTracker:
    delta: float
    history: list = field(default_factory=list)

    def __post_init__(self):
        if not (0.0 < self.delta < 0.5):
            raise ValueError("delta must lie in (0, 1/2)")

    def record(self, t: float, u: PeriodicField):
        value = functional_J(u, self.delta)
        self.history.append((t, value))
        return value


# ---------------------------------------------------------------------------
# decay fits and spectral instrumentation
# ---------------------------------------------------------------------------

def fit_decay(times, values, window) -> float:
    """LS slope of log(value) against log(1+t) on the window."""
    times = np.asarray(times, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    lo, hi = window
    mask = (times >= lo) & (times <= hi)
    if mask.sum() < 2:
        raise ValueError("window contains fewer than two samples")
    if np.any(values[mask] <= 0.0):
        raise ValueError("values must be positive on the fit window")
    x = np.log1p(times[mask])
    y = np.log(values[mask])
    design = np.vstack([np.ones_like(x), x]).T
    (_, slope), *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(slope)


def analyticity_strip(u: PeriodicField, noise_factor: float = 30.0) -> float:
    """Exponential decay rate delta of |c_k| fitted on k in [n/8, n/3].

    Model: log|c_k| = log C - p log k - delta k.  Refuses when the fitting
    band sits at the round-off noise floor.
    """
    n = u.grid.n
    c = np.abs(u.coefficients)
    k_lo, k_hi = n // 8, n // 3
    k = np.arange(k_lo, k_hi + 1)
    amps = c[k]
    floor = max(np.max(c), 1e-300) * 1e-16
    # the whole band must sit above the round-off floor or the fit is junk
    if np.min(amps) <= noise_factor * floor:
        raise ValueError("fitting band is at the noise floor")
    design = np.vstack([np.ones_like(k, dtype=float), -np.log(k), -k.astype(float)]).T
    coeffs, *_ = np.linalg.lstsq(design, np.log(amps), rcond=None)
    return float(coeffs[2])

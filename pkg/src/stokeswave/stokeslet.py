"""The x1-periodic Stokeslet, its gravity-reduced kernels, and patch velocities.

The Stokeslet is

    S(y) = (1/8pi) log(2(cosh y2 - cos y1)) I
         - y2 / (8pi (cosh y2 - cos y1)) [[-sinh y2, sin y1], [sin y1, sinh y2]]

Applied to the vertical gravity force and with the far-field density layers
dropped, the velocity reduces to the two scalar kernels

    s1(y) = y2 sin(y1) / (cosh y2 - cos y1)
    s2(y) = log(2(cosh y2 - cos y1)) - y2 sinh(y2) / (cosh y2 - cos y1)

via u1 = -(1/8pi) s1 * rho_c and u2 = +(1/8pi) s2 * rho_c.  The factor 2
inside the log is essential: without it s2 tends to the constant -log 2 at
infinity, its x1-average is -2pi log 2 instead of 0, and neither the L1
bound nor the flat-interface steady state survives.

Numerical identities used throughout:  2(cosh y2 - cos y1) =
4(sinh^2(y2/2) + sin^2(y1/2)) (cancellation-free near the origin), and an
exp(-|y2|) expansion branch for large |y2| where the direct formula would
subtract two nearly equal ~|y2| terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_EIGHT_PI = 8.0 * np.pi
_TWO_PI = 2.0 * np.pi
_LARGE_Y2 = 30.0


def _wrap_angle(y1):
    """Reduce to the fundamental interval (-pi, pi]."""
    out = np.mod(np.asarray(y1, dtype=np.float64) + np.pi, _TWO_PI) - np.pi
    return np.where(out == -np.pi, np.pi, out)


@dataclass(frozen=True)
class StripPoint:
    """Point in the periodic strip; y1 stored reduced into (-pi, pi]."""

    y1: float
    y2: float

    def __post_init__(self):
        object.__setattr__(self, "y1", float(_wrap_angle(self.y1)))
        object.__setattr__(self, "y2", float(self.y2))


@dataclass(frozen=True)
class DensityPatch:
    """Densities of the upper (+) and lower (-) fluids."""

    rho_plus: float
    rho_minus: float

    @property
    def jump(self) -> float:
        return self.rho_minus - self.rho_plus

    @property
    def rho_bar(self) -> float:
        return self.jump / 4.0

    @property
    def sup_density(self) -> float:
        return max(abs(self.rho_plus), abs(self.rho_minus))


def _check_not_origin(y1, y2):
    if abs(y1) < 1e-14 and abs(y2) < 1e-14:
        raise ValueError("kernel is singular at the origin")


def _q(y1, y2):
    """cosh(y2) - cos(y1), evaluated as 2(sinh^2(y2/2) + sin^2(y1/2))."""
    return 2.0 * (np.sinh(y2 / 2.0) ** 2 + np.sin(y1 / 2.0) ** 2)


def stokeslet_matrix(point: StripPoint) -> np.ndarray:
    """The 2x2 periodic Stokeslet at y != 0."""
    y1, y2 = point.y1, point.y2
    _check_not_origin(y1, y2)
    q = _q(y1, y2)
    log_part = np.log(2.0 * q) / _EIGHT_PI
    pref = y2 / (_EIGHT_PI * q)
    rational = pref * np.array([[-np.sinh(y2), np.sin(y1)],
                                [np.sin(y1), np.sinh(y2)]])
    return log_part * np.eye(2) - rational


def _reduced_eval(y1, y2):
    """Vectorized (s1, s2); inputs are arrays with y1 already wrapped."""
    shape = np.broadcast(y1, y2).shape
    y1 = np.broadcast_to(np.asarray(y1, dtype=np.float64), shape)
    y2 = np.broadcast_to(np.asarray(y2, dtype=np.float64), shape)
    t = np.abs(y2)
    small = t <= _LARGE_Y2
    s1 = np.empty(shape)
    s2 = np.empty_like(s1)

    y1s = y1[small]
    y2s = y2[small]
    qs = _q(y1s, y2s)
    with np.errstate(divide="ignore", invalid="ignore"):
        s1[small] = y2s * np.sin(y1s) / qs
        s2[small] = np.log(2.0 * qs) - y2s * np.sinh(y2s) / qs

    if not np.all(small):
        big = ~small
        y1b = y1[big]
        tb = t[big]
        sgn = np.sign(y2[big])
        e = np.exp(-tb)
        # q = cosh - cos = (e^t / 2) * D with D = 1 + e^{-2t} - 2 cos(y1) e^{-t}
        d = 1.0 + e * e - 2.0 * np.cos(y1b) * e
        s1[big] = 2.0 * sgn * tb * np.sin(y1b) * e / d
        # log(2q) - y2 sinh y2 / q, both terms ~ t: cancellation-free form
        s2[big] = np.log1p(e * e - 2.0 * np.cos(y1b) * e) \
            - 2.0 * tb * e * (np.cos(y1b) - e) / d
    return s1, s2


def reduced_kernels(point: StripPoint):
    """(s1, s2) at a single strip point away from the origin."""
    _check_not_origin(point.y1, point.y2)
    s1, s2 = _reduced_eval(np.array([point.y1]), np.array([point.y2]))
    return float(s1[0]), float(s2[0])


# ---------------------------------------------------------------------------
# L1 / decay verification
# ---------------------------------------------------------------------------

@dataclass
class KernelCheck:
    cutoff: float
    tol: float
    l1_s1: float                 # integral of |s1| over T x [-cutoff, cutoff]
    l1_s2: float
    tail_s1: float               # fitted exponential tail beyond the cutoff
    tail_s2: float
    decay_exponent_s1: float     # LS slope of log sup_y1 |s_i| on [5, cutoff]
    decay_exponent_s2: float
    refinement_defect: float
    status: str                  # "converged" | "inconclusive"

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def l1_total_s1(self) -> float:
        return self.l1_s1 + self.tail_s1

    @property
    def l1_total_s2(self) -> float:
        return self.l1_s2 + self.tail_s2


_leggauss_cache: dict[int, tuple] = {}


def _leggauss(order):
    got = _leggauss_cache.get(order)
    if got is None:
        got = np.polynomial.legendre.leggauss(order)
        _leggauss_cache[order] = got
    return got


def _gauss_panels(edges, order):
    x0, w0 = _leggauss(order)
    edges = np.asarray(edges, dtype=np.float64)
    a = edges[:-1]
    h = 0.5 * np.diff(edges)
    nodes = a[:, None] + h[:, None] * (x0 + 1.0)[None, :]
    weights = h[:, None] * w0[None, :]
    return nodes.ravel(), weights.ravel()


def _strip_l1(cutoff, n_split):
    """Integrals of |s1|, |s2| over T x [-cutoff, cutoff].

    Graded Gauss panels toward y1 = 0 and y2 = 0 resolve the log
    singularity; both integrands are even in y1 and in y2.
    """
    # the outer layout must not depend on the cutoff (prefix property makes
    # the truncated totals exactly monotone in the cutoff)
    y1_edges = np.concatenate([[0.0], np.geomspace(1e-8, np.pi, 14 * n_split)])
    step = 0.5 / n_split
    y2_edges = np.concatenate([[0.0], np.geomspace(1e-8, 1.0, 12 * n_split),
                               np.arange(1.0 + step, cutoff + step / 2, step)])
    y2_edges[-1] = cutoff
    x1, w1 = _gauss_panels(y1_edges, 10)
    x2, w2 = _gauss_panels(y2_edges, 10)
    s1, s2 = _reduced_eval(x1[None, :], x2[:, None])
    g1 = 2.0 * (np.abs(s1) * w1[None, :]).sum(axis=1)
    g2 = 2.0 * (np.abs(s2) * w1[None, :]).sum(axis=1)
    return 2.0 * float(g1 @ w2), 2.0 * float(g2 @ w2)


def kernel_l1_check(cutoff: float, tol: float = 1e-4) -> KernelCheck:
    """Quadrature of the reduced-kernel L1 norms plus tail and decay fits."""
    if cutoff < 5:
        raise ValueError("cutoff must be at least 5")
    a1, a2 = _strip_l1(cutoff, 1)
    b1, b2 = _strip_l1(cutoff, 2)
    defect = max(abs(a1 - b1), abs(a2 - b2))

    # vertical decay of sup_{y1} |s_i| on [5, cutoff]
    y2f = np.linspace(5.0, cutoff, 141)
    y1f = np.linspace(0.0, np.pi, 1025)
    s1, s2 = _reduced_eval(y1f[None, :], y2f[:, None])
    sup1 = np.max(np.abs(s1), axis=1)
    sup2 = np.max(np.abs(s2), axis=1)
    design = np.vstack([np.ones_like(y2f), y2f]).T
    (b01, lam1), *_ = np.linalg.lstsq(design, np.log(sup1), rcond=None)
    (b02, lam2), *_ = np.linalg.lstsq(design, np.log(sup2), rcond=None)

    def tail(b0, lam_):
        if lam_ >= 0:
            return np.inf
        return 2.0 * _TWO_PI * np.exp(b0 + lam_ * cutoff) / (-lam_)

    t1, t2 = tail(b01, lam1), tail(b02, lam2)
    # the reported totals are the finer level; defect/3 is the usual
    # two-level (first-order conservative) error estimate for them
    ok = defect / 3.0 <= tol * max(1.0, b1, b2) and np.isfinite(t1) and np.isfinite(t2)
    return KernelCheck(cutoff=cutoff, tol=tol, l1_s1=b1, l1_s2=b2,
                       tail_s1=t1, tail_s2=t2,
                       decay_exponent_s1=float(lam1), decay_exponent_s2=float(lam2),
                       refinement_defect=defect,
                       status="converged" if ok else "inconclusive")


# ---------------------------------------------------------------------------
# patch velocity by area quadrature
# ---------------------------------------------------------------------------

def velocity_bound(check: KernelCheck, patch: DensityPatch) -> float:
    """Upper bound on |u| implied by the kernel L1 norms."""
    return patch.sup_density / _EIGHT_PI * float(
        np.hypot(check.l1_total_s1, check.l1_total_s2))


def _density_at(x2, crossings, patch):
    """Lower fluid below the first crossing; alternate upward."""
    below = int(np.searchsorted(crossings, x2))
    return patch.rho_minus if below % 2 == 0 else patch.rho_plus


def _split_edges(lo, hi, x2_sing, r, coarse):
    """Panel edges on [lo, hi], graded toward the near-singular row x2_sing."""
    if hi <= lo:
        return None
    edges = set(np.linspace(lo, hi, max(2, int(np.ceil((hi - lo) / coarse)) + 1)))
    if x2_sing is not None:
        for s in (x2_sing - 4 * r, x2_sing - 2 * r, x2_sing - r, x2_sing,
                  x2_sing + r, x2_sing + 2 * r, x2_sing + 4 * r):
            if lo < s < hi:
                edges.add(s)
    return np.array(sorted(edges))


def velocity_at(x, contour, patch: DensityPatch, *, gauss_order: int = 12,
                disk_radius: float = 0.1) -> np.ndarray:
    """Velocity at x = (x1, x2) induced by the contour's density patch.

    Direct 2D quadrature of the reduced kernels against rho_c, the density
    restricted to the band |x2| <= 2 max|z2|; the far layers contribute
    nothing and are dropped.  Refuses points within one grid cell of the
    contour (the quadrature would be near-singular there).
    """
    x1 = float(_wrap_angle(x[0]))
    x2 = float(x[1])
    band = 2.0 * contour.max_abs_z2()
    if band == 0.0:
        return np.zeros(2)

    cell = contour.grid.spacing * max(1.0, contour.max_speed())
    d_c = contour.distance_to(x1, x2)
    if d_c < cell:
        raise ValueError(
            f"sample point within one grid cell of the contour (d={d_c:.3g}, cell={cell:.3g})")

    inside = -band < x2 < band
    r = 0.0
    if inside:
        r = min(disk_radius, 0.5 * d_c, 0.45 * (band - abs(x2)), 0.45 * (x2 + band))
        if r < 1e-3:
            r = 0.0

    # column layout in the periodic variable; inside the excluded disk the
    # offset is parametrized as d1 = r sin(phi) so the chord boundary
    # sqrt(r^2 - d1^2) becomes analytic in the quadrature variable
    if r > 0:
        phi_nodes, phi_weights = _gauss_panels(np.linspace(-np.pi / 2, np.pi / 2, 9),
                                               gauss_order)
        disk_nodes = r * np.sin(phi_nodes)
        disk_weights = r * np.cos(phi_nodes) * phi_weights
        left_edges = np.concatenate([
            np.linspace(-np.pi, -2 * r, 17)[:-1], [-2 * r, -1.5 * r, -1.2 * r, -r]])
        right_edges = np.concatenate([
            [r, 1.2 * r, 1.5 * r, 2 * r], np.linspace(2 * r, np.pi, 17)[1:]])
        ln, lw = _gauss_panels(left_edges, gauss_order)
        rn, rw = _gauss_panels(right_edges, gauss_order)
        d1_nodes = np.concatenate([disk_nodes, ln, rn])
        d1_weights = np.concatenate([disk_weights, lw, rw])
    else:
        edges = np.unique(np.concatenate([np.linspace(-np.pi, np.pi, 33), [0.0]]))
        d1_nodes, d1_weights = _gauss_panels(edges, gauss_order)

    u1 = 0.0
    u2 = 0.0
    coarse = max(band / 8.0, 0.05)
    for d1, w_col in zip(d1_nodes, d1_weights):
        xi = x1 - d1   # source column at periodic offset d1
        crossings = contour.column_crossings(xi)
        breaks = [-band] + [z for z in crossings if -band < z < band] + [band]
        chord = None
        if r > 0 and abs(d1) < r:
            c = np.sqrt(r * r - d1 * d1)
            chord = (x2 - c, x2 + c)
        col1 = 0.0
        col2 = 0.0
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            if hi <= lo:
                continue
            rho = _density_at(0.5 * (lo + hi), np.asarray(crossings), patch)
            pieces = [(lo, hi)]
            if chord is not None and chord[0] < hi and chord[1] > lo:
                pieces = [(lo, max(lo, chord[0])), (min(hi, chord[1]), hi)]
            for plo, phi in pieces:
                sub = _split_edges(plo, phi, x2 if inside else None,
                                   max(r, 0.02), coarse)
                if sub is None:
                    continue
                nodes, weights = _gauss_panels(sub, gauss_order)
                s1, s2 = _reduced_eval(np.full_like(nodes, d1), x2 - nodes)
                col1 += rho * float(s1 @ weights)
                col2 += rho * float(s2 @ weights)
        u1 -= w_col * col1
        u2 += w_col * col2

    if r > 0:
        # polar rule on the excluded disk: exact moment for the 2 log r part
        # of s2, Gauss x trapezoid for the smooth remainders
        rho0 = _density_at(x2, np.asarray(contour.column_crossings(x1)), patch)
        theta = np.linspace(0.0, _TWO_PI, 65)[:-1]
        dth = _TWO_PI / 64
        rx, rw = np.polynomial.legendre.leggauss(24)
        rn = 0.5 * r * (rx + 1.0)
        rw = 0.5 * r * rw
        yy1 = rn[:, None] * np.cos(theta)[None, :]
        yy2 = rn[:, None] * np.sin(theta)[None, :]
        s1, s2 = _reduced_eval(yy1, yy2)
        s2_smooth = s2 - 2.0 * np.log(rn)[:, None]
        disk1 = float(((s1 * rn[:, None]).sum(axis=1) * dth) @ rw)
        disk2 = float(((s2_smooth * rn[:, None]).sum(axis=1) * dth) @ rw)
        disk2 += _TWO_PI * (r * r * np.log(r) - 0.5 * r * r)
        u1 -= rho0 * disk1
        u2 += rho0 * disk2

    return np.array([u1, u2]) / _EIGHT_PI

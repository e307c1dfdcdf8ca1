"""Figure builders.  Every number shown comes from the record files; the one
computed overlay is the closed-form comparison ODE, reconstructed from the
summary scalar m0."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

# deterministic output: fixed style, no timestamps or software metadata
plt.rcParams.update({
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
})

_SAVE_KWARGS = {"metadata": {"Software": None}}

LOG4 = math.log(4.0)


def _save(fig, path):
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
    return path


def _comparison_ode(m0, t):
    """m' = -m^2 - log(4) m from m(0) = m0, closed form; -inf past blow-up."""
    t = np.asarray(t)
    if m0 == 0.0:
        return np.zeros_like(t)
    if abs(m0 + LOG4) < 1e-14:
        return np.full_like(t, -LOG4)
    r0 = m0 / (m0 + LOG4)
    r = r0 * np.exp(-LOG4 * t)
    with np.errstate(divide="ignore", invalid="ignore"):
        m = LOG4 * r / (1.0 - r)
    if m0 < -LOG4:
        tstar = math.log(r0) / LOG4
        m = np.where(t >= tstar, -np.inf, m)
    return m


def decay_loglog(record, out_path):
    """log-log L2 decay with the fitted slope from the summary annotated."""
    t = record.column("t")
    l2 = record.column("l2")
    fig, ax = plt.subplots()
    pos = l2 > 0
    ax.loglog(1.0 + t[pos], l2[pos], "-", color="tab:blue", lw=1.2)
    slope = record.summary.get("l2_decay_exponent")
    if slope is not None and math.isfinite(slope):
        lo = record.summary.get("fit_lo", t[0])
        hi = record.summary.get("fit_hi", t[-1])
        win = pos & (t >= lo) & (t <= hi)
        if win.any():
            anchor_t = 1.0 + t[win][0]
            anchor_v = l2[win][0]
            tt = np.geomspace(anchor_t, 1.0 + min(hi, t[-1]), 50)
            ax.loglog(tt, anchor_v * (tt / anchor_t) ** slope, "--",
                      color="tab:red", lw=1.0)
        ax.set_title(f"{record.name}: fitted exponent = {record.summary_raw['l2_decay_exponent']}")
    else:
        ax.set_title(f"{record.name}: L2 history")
    ax.set_xlabel("1 + t")
    ax.set_ylabel("L2 norm")
    return _save(fig, out_path)


def slope_vs_ode(record, out_path):
    """Minimum slope history under the closed-form comparison curve."""
    t = record.column("t")
    m = record.column("m")
    m0 = record.summary["m0"]
    fig, ax = plt.subplots()
    ax.plot(t, m, "-", color="tab:blue", lw=1.2, label="m(t)")
    ode = _comparison_ode(m0, t)
    finite = np.isfinite(ode)
    ax.plot(t[finite], ode[finite], "--", color="tab:red", lw=1.0,
            label="comparison ODE")
    floor = np.min(m)
    ax.set_ylim(1.5 * floor, max(1.0, -0.1 * floor))
    tstar = record.summary.get("ode_blowup_time")
    title = f"{record.name}: m(t) vs ODE from m0 = {record.summary_raw['m0']}"
    if tstar is not None and math.isfinite(tstar):
        ax.axvline(tstar, color="tab:red", ls=":", lw=0.8)
        title += f", ODE blow-up {record.summary_raw['ode_blowup_time']}"
    ax.set_title(title)
    ax.set_xlabel("t")
    ax.set_ylabel("min slope")
    ax.legend()
    return _save(fig, out_path)


def functional_growth(record, out_path):
    """Semilog growth of the recorded blow-up functionals (J and/or L)."""
    t = record.column("t")
    fig, ax = plt.subplots()
    plotted = False
    for col, label in (("weighted_j", "J(t)"), ("lagrangian_l", "L(t)")):
        if col in record.columns:
            v = record.series[col]
            good = np.isfinite(v) & (v > 0)
            if good.any():
                ax.semilogy(t[good], v[good], lw=1.2, label=label)
                plotted = True
    if not plotted:
        plt.close(fig)
        return None
    ax.set_title(f"{record.name}: functional growth")
    ax.set_xlabel("t")
    ax.legend()
    return _save(fig, out_path)


def spectrum_waterfall(record, out_path):
    """Coefficient magnitudes at the stored snapshot times."""
    if record.spectra is None:
        return None
    times, amps = record.spectra
    if len(times) == 0:
        return None
    fig, ax = plt.subplots()
    k = np.arange(amps.shape[1])
    for i, t in enumerate(times):
        row = amps[i]
        good = row > 0
        if good.any():
            shade = 0.15 + 0.75 * (i / max(1, len(times) - 1))
            ax.semilogy(k[good], row[good], lw=0.9,
                        color=(0.1, 0.2, shade), alpha=0.85,
                        label=f"t={t:.3g}" if i in (0, len(times) - 1) else None)
    ax.set_title(f"{record.name}: spectrum snapshots")
    ax.set_xlabel("mode")
    ax.set_ylabel("|c_k|")
    ax.legend()
    return _save(fig, out_path)


def interface_snapshot(record, out_path):
    """Initial and final interface profiles for graph runs."""
    if record.interface is None:
        return None
    a = record.interface["alpha"]
    fig, ax = plt.subplots()
    ax.plot(a, record.interface["h_initial"], lw=1.2, label="initial")
    ax.plot(a, record.interface["h_final"], lw=1.2, label="final")
    ax.set_title(f"{record.name}: interface")
    ax.set_xlabel("alpha")
    ax.set_ylabel("h")
    ax.legend()
    return _save(fig, out_path)


FIGURE_BUILDERS = (
    ("decay", decay_loglog, lambda r: True),
    ("slope_ode", slope_vs_ode,
     lambda r: "m" in r.columns and "m0" in r.summary),
    ("growth", functional_growth,
     lambda r: "weighted_j" in r.columns or "lagrangian_l" in r.columns),
    ("spectrum", spectrum_waterfall, lambda r: r.spectra is not None),
    ("interface", interface_snapshot, lambda r: r.interface is not None),
)

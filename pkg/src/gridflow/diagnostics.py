"""Convergence metrics: density error norms, Lyapunov functional, decay rates.

The headline quantity is the L2 norm of the density error over the whole
chart, sqrt( sum_eta deta * sum_xi rho_err^2 * dxi ), evaluated at common
observation times across lines.

The Lyapunov functional of one line is

    V(t) = 1/2 * sum_i w(xi_i) * rho_err_i^2 * dxi,

with an exponentially increasing weight w. The stability certificate only
needs w positive and increasing, so the default weight is
exp((xi - xi_min) / (xi_max - xi_min)): shifting removes the arbitrary
chart offset and dividing by the line length keeps the exponent in [0, 1].
With xi in meters the literal exp(xi) overflows for any km-scale line;
pass xi_scale=1.0 for the bare shifted weight on small domains, or
shift=False for raw exp(xi). An exponent above 700 raises instead of
silently overflowing.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .godunov import LineState


@dataclass
class ConvergenceReport:
    times: np.ndarray  # (T,)
    etas: np.ndarray  # (L,)
    l2_global: np.ndarray  # (T,)
    l2_per_eta: np.ndarray  # (T, L)
    lyapunov_per_eta: np.ndarray  # (T, L)
    nu_per_eta: np.ndarray  # (L,)
    decay_rate_per_eta: np.ndarray  # (L,) fitted d ln V / dt over the tail

    def __post_init__(self):
        t, ell = len(self.times), len(self.etas)
        if self.l2_per_eta.shape != (t, ell) or self.lyapunov_per_eta.shape != (t, ell):
            raise ValidationError("report arrays are not time-aligned")
        if np.any(self.l2_global < 0):
            raise ValidationError("l2_global must be nonnegative")


def density_error(state: LineState, plan) -> np.ndarray:
    """Signed per-cell deviation from the desired profile."""
    if state.rho.shape != plan.rho_d.shape:
        raise ValidationError(
            f"state has {state.rho.shape} cells but plan {plan.rho_d.shape}"
        )
    return state.rho - plan.rho_d


def l2_norm(errors, dxi, deta) -> float:
    """Chart-wide L2 norm by midpoint quadrature.

    ``errors``: per-line error arrays; ``dxi``: per-line cell widths
    (scalar or sequence); ``deta``: transverse spacing (scalar or
    per-line sequence).
    """
    errors = list(errors)
    n = len(errors)
    dxi = np.broadcast_to(np.asarray(dxi, dtype=float), (n,))
    deta = np.broadcast_to(np.asarray(deta, dtype=float), (n,))
    if np.any(dxi <= 0) or np.any(deta <= 0):
        raise ValidationError("quadrature weights must be positive")
    total = 0.0
    for err, dx, de in zip(errors, dxi, deta):
        total += de * dx * float(np.sum(np.asarray(err) ** 2))
    return float(np.sqrt(total))


def line_l2(err, dxi) -> float:
    """Single-line L2 norm sqrt(sum err^2 * dxi)."""
    return float(np.sqrt(float(np.sum(np.asarray(err) ** 2)) * dxi))


def lyapunov(state: LineState, plan, xi_scale: float | None = None,
             shift: bool = True) -> float:
    """Weighted squared error 1/2 sum exp(xi') rho_err^2 dxi.

    xi' = (xi - xi_min) / xi_scale with xi_scale defaulting to the line
    length (see module docstring). shift=False uses raw xi (small domains
    only).
    """
    err = density_error(state, plan)
    xi = state.xi
    if shift:
        x = xi - xi[0]
        scale = (xi[-1] - xi[0]) if xi_scale is None else xi_scale
        scale = scale if scale > 0 else 1.0
        x = x / scale
    else:
        x = xi if xi_scale is None else xi / xi_scale
    m = float(np.max(x)) if len(x) else 0.0
    if m > 700.0:
        raise NumericalError(
            f"Lyapunov weight exponent {m:.3g} would overflow; rescale xi "
            "(pass xi_scale or shift=True)"
        )
    return float(0.5 * np.sum(np.exp(x) * err**2) * state.dxi)


def fit_decay_rate(times, values, tail_fraction: float = 0.5) -> float:
    """Least-squares slope of ln(values) over the trailing window.

    Nonpositive values are excluded from the fit; returns nan when fewer
    than two usable samples remain.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(times) < 3:
        raise ValidationError("need at least 3 samples to fit a decay rate")
    k0 = int(np.floor(len(times) * (1.0 - tail_fraction)))
    t = times[k0:]
    v = values[k0:]
    ok = v > 0
    if ok.sum() < 2:
        return float("nan")
    slope, _ = np.polyfit(t[ok], np.log(v[ok]), 1)
    return float(slope)


def decay_report(times, lyapunov_per_eta, nu_per_eta, l2_per_eta, etas,
                 deta, tail_fraction: float = 0.5) -> ConvergenceReport:
    """Assemble the convergence report from per-line series.

    ``lyapunov_per_eta`` and ``l2_per_eta`` are (T, L) arrays sampled at
    the common ``times``. The fitted decay slope of each line's ln V is
    reported next to -nu; the certificate is linearized, so no pass/fail
    judgement is attached here.
    """
    times = np.asarray(times, dtype=float)
    v = np.asarray(lyapunov_per_eta, dtype=float)
    l2 = np.asarray(l2_per_eta, dtype=float)
    etas = np.asarray(etas, dtype=float)
    nu = np.asarray(nu_per_eta, dtype=float)
    if len(times) < 3:
        raise ValidationError("need at least 3 samples for a decay report")
    deta_arr = np.broadcast_to(np.asarray(deta, dtype=float), etas.shape)
    l2_global = np.sqrt((l2**2 * deta_arr[None, :]).sum(axis=1))
    rates = np.array([fit_decay_rate(times, v[:, j], tail_fraction)
                      for j in range(v.shape[1])])
    return ConvergenceReport(times=times, etas=etas, l2_global=l2_global,
                             l2_per_eta=l2, lyapunov_per_eta=v, nu_per_eta=nu,
                             decay_rate_per_eta=rates)


def save_report_csv(report: ConvergenceReport, path, per_eta: bool = False) -> None:
    """CSV with columns t, l2_global and optional per-eta l2 columns."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["t", "l2_global"]
        if per_eta:
            header += [f"l2_eta_{e:.6g}" for e in report.etas]
        w.writerow(header)
        for k, t in enumerate(report.times):
            row = [repr(float(t)), repr(float(report.l2_global[k]))]
            if per_eta:
                row += [repr(float(v)) for v in report.l2_per_eta[k]]
            w.writerow(row)

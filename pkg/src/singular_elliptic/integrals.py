"""Convergence classification of improper integrals from point evaluations.

A divergent improper integral cannot be detected from finitely many samples,
so the decision is made on dyadic panels: each panel is integrated
adaptively, the ratio of successive panel masses gives a local power-law
exponent, and the exponent is compared against the critical value 1 with a
safety margin.  The remaining tail is summed as a geometric series.  When
the exponent lands inside the margin, the panel masses are fitted against
``|ln s|`` to separate ``1/s`` (divergent) from ``1/(s ln^2 s)`` (convergent).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import EvaluationError

MARGIN = 0.05


@dataclass
class PanelResult:
    """Outcome of a dyadic panel integration."""

    verdict: str  # "Holds" (convergent), "Fails" or "Inconclusive"
    value: float  # partial sum plus extrapolated remainder (inf when divergent)
    exponent: float  # fitted local decay exponent of the integrand
    partials: list = field(default_factory=list)
    tail_fraction: float = 0.0


def _panel(f, lo, hi, rel):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, lo, hi, epsrel=rel, epsabs=0.0, limit=200)
        except integrate.IntegrationWarning as exc:
            raise EvaluationError(f"quadrature did not converge on [{lo:g}, {hi:g}]: {exc}",
                                  t=0.5 * (lo + hi)) from exc
    if not math.isfinite(val):
        raise EvaluationError(f"non-finite panel integral on [{lo:g}, {hi:g}]", t=lo)
    return val, err


def _checked(f):
    def g(t):
        v = float(f(t))
        if math.isnan(v):
            raise EvaluationError(f"integrand is NaN at t={t!r}", t=t)
        return v
    return g


def _local_exponent(panels, fit_last=4):
    """Exponent -log2(ratio) of successive panels, median over the last few."""
    vals = np.asarray(panels[-(fit_last + 1):], dtype=float)
    if np.any(vals <= 0.0):
        # panels underflowed to zero: integrand decays faster than any power
        return math.inf
    ratios = vals[1:] / vals[:-1]
    return float(np.median(-np.log2(ratios)))


def _log_exponent(partials, logs):
    """Exponent beta in I_k ~ L_k^-beta with L_k = |ln s_k| at panel midpoints.

    Used at the critical power, where ``s^-1 (ln s)^-beta`` converges iff
    ``beta > 1``.  Fitted on the second half of the panels.
    """
    vals = np.asarray(partials, dtype=float)
    L = np.asarray(logs, dtype=float)
    m = len(vals) // 2
    vals, L = vals[m:], L[m:]
    if vals.size < 4 or np.any(vals <= 0.0):
        return math.nan
    slope, _ = np.polyfit(np.log(L), np.log(vals), 1)
    return float(-slope)


def _critical(partials, logs, p, margin):
    """Resolve an exponent inside the margin by the logarithmic correction."""
    beta = _log_exponent(partials, logs)
    if math.isfinite(beta) and beta < 1.0 - margin:
        return PanelResult("Fails", math.inf, p, partials)
    if math.isfinite(beta) and beta > 1.0 + margin:
        # remainder of sum_k (c k^-beta) from the last panel on
        n = len(partials)
        tail = partials[-1] * n / (beta - 1.0)
        value = float(np.sum(partials)) + tail
        return PanelResult("Holds", value, p, partials, tail / value)
    return PanelResult("Inconclusive", math.nan, p, partials)


def tail_integral(f, a, panels=48, rel=1e-10, margin=MARGIN, min_panels=12):
    """Classify and evaluate ``int_a^inf f(s) ds`` for a nonnegative integrand.

    Panel k covers ``[a 2^(k-1), a 2^k]``.  With ``f ~ s^-p`` the panel masses
    shrink by ``2^(1-p)`` so the integral converges iff ``p > 1``.
    """
    f = _checked(f)
    partials = []
    logs = []
    total = 0.0
    lo = a
    for k in range(panels):
        hi = 2.0 * lo
        val, _ = _panel(f, lo, hi, rel)
        partials.append(val)
        logs.append(abs(math.log(1.5 * lo)))
        total += val
        lo = hi
        if k + 1 >= min_panels and val == 0.0:
            break
        if k + 1 >= min_panels and total > 0 and val < 1e-17 * total:
            break
    # panel ratio 2^(1-p): exponent of integrand p = 1 + (-log2 ratio)
    slope = _local_exponent(partials)
    p = 1.0 + slope
    if p > 1.0 + margin:
        r = 2.0 ** (1.0 - p) if math.isfinite(p) else 0.0
        tail = partials[-1] * r / (1.0 - r)
        value = total + tail
        return PanelResult("Holds", value, p, partials, tail / value if value else 0.0)
    if p < 1.0 - margin:
        return PanelResult("Fails", math.inf, p, partials)
    return _critical(partials, logs, p, margin)


def origin_integral(f, b, panels=48, rel=1e-10, margin=MARGIN, min_panels=12):
    """Classify and evaluate ``int_0^b f(t) dt`` for an integrand singular at 0.

    Panel k covers ``[b 2^-k, b 2^(1-k)]``; with ``f ~ t^-p`` near zero the
    masses scale by ``2^(p-1)`` per step, convergent iff ``p < 1``.
    """
    f = _checked(f)
    partials = []
    logs = []
    total = 0.0
    hi = b
    for k in range(panels):
        lo = 0.5 * hi
        val, _ = _panel(f, lo, hi, rel)
        partials.append(val)
        logs.append(abs(math.log(1.5 * lo)))
        total += val
        hi = lo
        if k + 1 >= min_panels and total > 0 and val < 1e-17 * total:
            break
        if k + 1 >= min_panels and val == 0.0:
            break
    slope = _local_exponent(partials)  # = 1 - p
    p = 1.0 - slope
    if p < 1.0 - margin:
        r = 2.0 ** (p - 1.0) if math.isfinite(p) else 0.0
        tail = partials[-1] * r / (1.0 - r)
        value = total + tail
        return PanelResult("Holds", value, p, partials, tail / value if value else 0.0)
    if p > 1.0 + margin:
        return PanelResult("Fails", math.inf, p, partials)
    return _critical(partials, logs, p, margin)

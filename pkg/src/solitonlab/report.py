"""Check reports and residual normalisation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PASS, FAIL, DISCREPANT, SKIPPED = "PASS", "FAIL", "DISCREPANT", "SKIPPED"

DEFAULT_TOL = 1e-9
QUADRATURE_TOL = 1e-6


def _as_values(t):
    return t.value if hasattr(t, "value") and hasattr(t, "c") else np.asarray(t, dtype=float)


def _flat(a, nbatch):
    a = np.asarray(a, dtype=float)
    return a.reshape(a.shape[:nbatch] + (-1,))


def residual(diff, *inputs, nbatch=1):
    """Per-point ``max|diff| / max(1, max|inputs|)``.

    ``diff`` and ``inputs`` are jets or arrays whose first ``nbatch`` axes are
    batch axes.
    """
    d = np.abs(_flat(_as_values(diff), nbatch))
    num = d.max(axis=-1) if d.shape[-1] else np.zeros(d.shape[:-1])
    scale = np.ones_like(num)
    for x in inputs:
        a = np.abs(_flat(_as_values(x), nbatch))
        if a.shape[-1]:
            scale = np.maximum(scale, np.broadcast_to(a.max(axis=-1), scale.shape))
    return num / scale


def compare(left, right, nbatch=1):
    """Normalised per-point residual of ``left - right``."""
    lv, rv = _as_values(left), _as_values(right)
    return residual(lv - rv, lv, rv, nbatch=nbatch)


@dataclass
class CheckReport:
    check_id: str
    anchor: str
    residuals: np.ndarray
    tol: float = DEFAULT_TOL
    verdict: str = ""
    alt_residuals: np.ndarray | None = None
    diagnostics: list = field(default_factory=list)
    skipped: int = 0
    data: dict = field(default_factory=dict)

    def __post_init__(self):
        self.residuals = np.atleast_1d(np.asarray(self.residuals, dtype=float))
        if self.alt_residuals is not None:
            self.alt_residuals = np.atleast_1d(np.asarray(self.alt_residuals, dtype=float))
        if not self.verdict:
            self.verdict = self._default_verdict()

    def _default_verdict(self):
        if self.n_points == 0:
            return SKIPPED
        return PASS if self.max_residual < self.tol else FAIL

    @property
    def n_points(self):
        return int(np.sum(np.isfinite(self.residuals)))

    @property
    def max_residual(self):
        r = self.residuals[np.isfinite(self.residuals)]
        return float(r.max()) if r.size else float("nan")

    @property
    def max_alt_residual(self):
        if self.alt_residuals is None:
            return None
        r = self.alt_residuals[np.isfinite(self.alt_residuals)]
        return float(r.max()) if r.size else float("nan")

    @property
    def passed(self):
        return self.verdict == PASS

    def note(self, msg):
        self.diagnostics.append(msg)
        return self


def discrepant(check_id, anchor, primary, alternative, tol=DEFAULT_TOL, diagnostics=()):
    """Report for a stated equality with an alternative reading.

    PASS when the stated form holds, DISCREPANT when only the alternative
    holds, FAIL when neither does.
    """
    rep = CheckReport(check_id, anchor, primary, tol, alt_residuals=alternative, diagnostics=list(diagnostics))
    if rep.n_points == 0:
        rep.verdict = SKIPPED
    elif rep.max_residual < tol:
        rep.verdict = PASS
    elif rep.max_alt_residual < tol:
        rep.verdict = DISCREPANT
    else:
        rep.verdict = FAIL
    return rep


def skipped(check_id, anchor, reason, tol=DEFAULT_TOL):
    return CheckReport(check_id, anchor, np.array([np.nan]), tol, verdict=SKIPPED, diagnostics=[reason])

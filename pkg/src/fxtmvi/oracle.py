"""Discrete reference solvers and identity audits.

These use a different algorithm family from the continuous flows
(fixed-point iteration instead of ODE integration), so agreement between
the two is evidence rather than a tautology.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .problem import MviProblem, evaluate_operator
from .prox import psi_or_inf

DIVERGENCE_NORM = 1e12


@dataclass
class OracleResult:
    solution: np.ndarray
    iterations: int
    final_residual: float
    converged: bool


def forward_backward_solve(p: MviProblem, w0, step: Optional[float] = None, tol: float = 1e-10,
                           max_iter: int = 100_000) -> OracleResult:
    """Iterate w <- prox(w - step*U(w), step) until |w - H(w)| <= tol.

    ``step`` defaults to ``p.mu``.  The fixed points are the solutions for
    every positive step, so a smaller step may be used when the problem's
    own ``mu`` makes the iteration expansive.
    """
    s = p.mu if step is None else step
    if not s > 0 or not tol > 0:
        raise ValueError("step and tol must be positive")
    w = np.array(w0, dtype=float)
    it = 0
    while True:
        nxt = p.prox(w - s * evaluate_operator(p, w), s)
        r = float(np.linalg.norm(w - nxt))
        if r <= tol:
            return OracleResult(w, it, r, True)
        if it >= max_iter or not np.all(np.isfinite(nxt)) or np.linalg.norm(nxt) > DIVERGENCE_NORM:
            return OracleResult(w, it, r, False)
        w = nxt
        it += 1


def pythagoras_check(a, b, c) -> float:
    """|2<a-b, c-b> - (|a-b|^2 + |c-b|^2 - |a-c|^2)|."""
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    if not a.shape == b.shape == c.shape:
        raise ValueError("vectors must share a shape")
    lhs = 2.0 * np.dot(a - b, c - b)
    rhs = np.dot(a - b, a - b) + np.dot(c - b, c - b) - np.dot(a - c, a - c)
    return float(abs(lhs - rhs))


@dataclass
class ContractionReport:
    """Max violation of each contraction inequality (0 means it held everywhere)."""

    contraction: float      # |H(w) - w*| <= xi |w - w*|
    obtuse: float           # <w - H(w), w* - H(w)> <= |w - H(w)|^2
    descent: float          # <w - w*, w - H(w)> >= (1 - xi) |w - w*|^2
    residual_bound: float   # |w - H(w)| >= (1 - xi) |w - w*|
    samples: int

    @property
    def worst(self) -> float:
        return max(self.contraction, self.obtuse, self.descent, self.residual_bound)

    def as_tuple(self):
        return (self.contraction, self.obtuse, self.descent, self.residual_bound)


def contraction_audit(p: MviProblem, w_star, xi: float, samples: int = 1000, seed: int = 0,
                  radius: float = 10.0, include_star: bool = True) -> ContractionReport:
    w_star = np.asarray(w_star, dtype=float)
    rng = np.random.default_rng(seed)
    pts = w_star + radius * rng.uniform(-1.0, 1.0, size=(samples, p.dim))
    if include_star:
        pts = np.vstack([w_star, pts])
    viol = np.zeros(4)
    for w in pts:
        hw = p.prox(w - p.mu * evaluate_operator(p, w))
        e = w - w_star
        r = w - hw
        ne, nr = np.linalg.norm(e), np.linalg.norm(r)
        checks = (
            np.linalg.norm(hw - w_star) - xi * ne,
            np.dot(r, w_star - hw) - nr ** 2,
            (1.0 - xi) * ne ** 2 - np.dot(e, r),
            (1.0 - xi) * ne - nr,
        )
        viol = np.maximum(viol, checks)
    return ContractionReport(*(float(v) for v in viol), samples=len(pts))


def mvi_inequality_min(p: MviProblem, w_star, samples: int = 1000, seed: int = 0,
                       radius: float = 10.0) -> float:
    """min over sampled feasible y of <U(w*), y - w*> + psi(y) - psi(w*).

    Probes for indicator psi are projected onto the set first.
    """
    w_star = np.asarray(w_star, dtype=float)
    u = evaluate_operator(p, w_star)
    psi_star = psi_or_inf(p.psi, w_star)
    rng = np.random.default_rng(seed)
    best = np.inf
    for _ in range(samples):
        y = w_star + radius * rng.uniform(-1.0, 1.0, size=p.dim)
        if p.psi.is_indicator:
            y = p.psi.prox(y, 1.0)
        best = min(best, float(np.dot(u, y - w_star)) + psi_or_inf(p.psi, y) - psi_star)
    return best

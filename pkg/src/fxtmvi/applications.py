"""Reductions of composite and minimax optimization to mixed variational inequalities."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .problem import MviProblem
from .prox import ProxKind, Product, psi_or_inf


@dataclass(frozen=True)
class CompositeProblem:
    """min h(w) + psi(w) with smooth h (gradient ``grad_h``) and proximable psi."""

    dim: int
    grad_h: Callable[[np.ndarray], np.ndarray]
    psi: ProxKind
    mu: float
    known_minimizer: Optional[np.ndarray] = None
    zeta: Optional[float] = None
    lipschitz: Optional[float] = None
    h: Optional[Callable[[np.ndarray], float]] = None

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")


def cop_to_mvi(c: CompositeProblem) -> MviProblem:
    """U := grad h with the same psi.

    Running the time-varying model on the result is the time-varying
    proximal-gradient flow.  With g1 = g2 = 0 the flow is
    ``-g3 * phi/|phi|``, a normalized relative of the constant-gain
    proximal-gradient flow ``-rho * phi``, not the same system.
    """
    return MviProblem(c.dim, c.grad_h, c.psi, c.mu, c.zeta, c.lipschitz, c.known_minimizer,
                      name="cop")


def check_cop_optimality(c: CompositeProblem, w, tol: float) -> bool:
    """Fixed-point form of 0 in grad h(w) + subdiff psi(w)."""
    w = np.asarray(w, dtype=float)
    r = w - c.psi.prox(w - c.mu * np.asarray(c.grad_h(w), dtype=float), c.mu)
    return bool(np.linalg.norm(r) <= tol)


@dataclass(frozen=True)
class MinimaxProblem:
    """inf_w sup_y M(w, y) with block proximable terms psi1(w), psi2(y)."""

    dim_w: int
    dim_y: int
    grad_w: Optional[Callable] = None
    grad_y: Optional[Callable] = None
    psi1: Optional[ProxKind] = None
    psi2: Optional[ProxKind] = None
    mu: float = 1.0
    value: Optional[Callable[[np.ndarray, np.ndarray], float]] = None
    zeta1: Optional[float] = None
    zeta2: Optional[float] = None
    lipschitz: Optional[float] = None

    def __post_init__(self):
        if self.dim_w < 1 or self.dim_y < 1:
            raise ValueError("block dimensions must be positive")
        if not self.mu > 0:
            raise ValueError("mu must be positive")

    @property
    def dim(self) -> int:
        return self.dim_w + self.dim_y

    def split(self, z):
        z = np.asarray(z, dtype=float)
        if z.shape != (self.dim,):
            raise ValueError(f"stacked vector must have shape ({self.dim},)")
        return z[:self.dim_w], z[self.dim_w:]


def block_prox(psi1: ProxKind, dim_w: int, psi2: ProxKind, dim_y: int) -> Product:
    return Product(((psi1, dim_w), (psi2, dim_y)))


def minimax_to_mvi(m: MinimaxProblem) -> MviProblem:
    """Stacked operator z = (w, y) -> (grad_w M, -grad_y M) with the product prox."""
    if m.grad_w is None or m.grad_y is None or m.psi1 is None or m.psi2 is None:
        raise ValueError("minimax reduction needs both partial gradients and both psi blocks")

    def upsilon(z):
        w, y = m.split(z)
        return np.concatenate([np.asarray(m.grad_w(w, y), dtype=float),
                               -np.asarray(m.grad_y(w, y), dtype=float)])

    zeta = None
    if m.zeta1 is not None and m.zeta2 is not None:
        zeta = min(m.zeta1, m.zeta2)
    return MviProblem(m.dim, upsilon, block_prox(m.psi1, m.dim_w, m.psi2, m.dim_y), m.mu,
                      zeta, m.lipschitz, name="minimax")


def mvi_saddle(p: MviProblem) -> MinimaxProblem:
    """The gap function M(w, y) = <U(w), w - y> + psi(w) - psi(y) as a minimax problem.

    Only the value is provided; indicator psi is evaluated as 0 / +inf.
    """
    def value(w, y):
        w = np.asarray(w, dtype=float)
        y = np.asarray(y, dtype=float)
        return float(np.dot(p.upsilon(w), w - y)) + psi_or_inf(p.psi, w) - psi_or_inf(p.psi, y)

    return MinimaxProblem(p.dim, p.dim, psi1=p.psi, psi2=p.psi, mu=p.mu, value=value)


@dataclass
class SaddleReport:
    value_at_star: float
    max_y_gap: float  # max over probes of M(w*, y) - M(w*, y*)
    min_w_gap: float  # min over probes of M(w, y*) - M(w*, y*)
    probes: int

    def holds(self, tol: float = 1e-8) -> bool:
        return self.max_y_gap <= tol and self.min_w_gap >= -tol


def _project_probe(kind: Optional[ProxKind], v):
    if kind is not None and kind.is_indicator:
        return kind.prox(v, 1.0)
    return v


def check_saddle_value(m: MinimaxProblem, z_star, probes: int = 1000, seed: int = 0,
                       radius: float = 1.0) -> SaddleReport:
    """Sample the saddle inequalities M(w*, y) <= M(w*, y*) <= M(w, y*).

    Probes are drawn in a ball of ``radius`` around the candidate blocks and
    projected onto indicator sets.  For the gap function from
    :func:`mvi_saddle`, pass ``z_star = (w*, w*)``; then M(w*, w*) = 0.
    """
    if m.value is None:
        raise ValueError("saddle check needs the value function M")
    w_s, y_s = m.split(z_star)
    rng = np.random.default_rng(seed)
    base = m.value(w_s, y_s)
    max_y, min_w = -np.inf, np.inf
    for _ in range(probes):
        dy = rng.standard_normal(m.dim_y)
        y = _project_probe(m.psi2, y_s + radius * rng.random() * dy / np.linalg.norm(dy))
        max_y = max(max_y, m.value(w_s, y) - base)
        dw = rng.standard_normal(m.dim_w)
        w = _project_probe(m.psi1, w_s + radius * rng.random() * dw / np.linalg.norm(dw))
        min_w = min(min_w, m.value(w, y_s) - base)
    return SaddleReport(float(base), float(max_y), float(min_w), probes)

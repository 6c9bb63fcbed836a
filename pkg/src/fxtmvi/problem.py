"""Mixed variational inequality problems and sampling probes for their constants."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .prox import ProxKind, Zero

Operator = Callable[[np.ndarray], np.ndarray]


class IllPosedOperator(ValueError):
    """The operator returned non-finite values."""


@dataclass(frozen=True)
class MviProblem:
    """Find w* with <upsilon(w*), y - w*> + psi(y) - psi(w*) >= 0 for all y.

    ``psi`` enters only through its proximal map.  ``zeta`` (strong
    pseudomonotonicity modulus) and ``lipschitz`` are optional supplied
    constants; ``known_solution`` is optional ground truth.
    """

    dim: int
    upsilon: Operator
    psi: ProxKind = Zero()
    mu: float = 1.0
    zeta: Optional[float] = None
    lipschitz: Optional[float] = None
    known_solution: Optional[np.ndarray] = None
    name: str = "custom"

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError("dim must be a positive integer")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        for label in ("zeta", "lipschitz"):
            c = getattr(self, label)
            if c is not None and not c > 0:
                raise ValueError(f"{label} must be positive when given, got {c}")
        if self.known_solution is not None:
            ws = np.array(self.known_solution, dtype=float)
            if ws.shape != (self.dim,):
                raise ValueError("known_solution has the wrong dimension")
            ws.setflags(write=False)
            object.__setattr__(self, "known_solution", ws)

    def prox(self, v, mu: Optional[float] = None) -> np.ndarray:
        return self.psi.prox(v, self.mu if mu is None else mu)

    def with_constants(self, zeta=None, lipschitz=None) -> "MviProblem":
        return replace(self, zeta=zeta, lipschitz=lipschitz)


def evaluate_operator(p: MviProblem, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (p.dim,):
        raise ValueError(f"dimension mismatch: expected ({p.dim},), got {w.shape}")
    out = np.asarray(p.upsilon(w), dtype=float)
    if out.shape != (p.dim,):
        raise ValueError(f"operator returned shape {out.shape}, expected ({p.dim},)")
    if not np.all(np.isfinite(out)):
        raise IllPosedOperator(f"operator is non-finite at w={w}")
    return out


def _sample_ball(rng: np.random.Generator, n: int, dim: int, radius: float) -> np.ndarray:
    d = rng.standard_normal((n, dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1.0 / dim)
    return d * r[:, None]


def _pair_ratios(p: MviProblem, n_samples: int, radius: float, seed: int, stat) -> np.ndarray:
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    if not radius > 0:
        raise ValueError("radius must be positive")
    rng = np.random.default_rng(seed)
    ws = _sample_ball(rng, n_samples, p.dim, radius)
    ys = _sample_ball(rng, n_samples, p.dim, radius)
    vals = []
    for w, y in zip(ws, ys):
        for _ in range(10):
            d = w - y
            dd = float(d @ d)
            if dd > 1e-24:
                break
            y = _sample_ball(rng, 1, p.dim, radius)[0]  # degenerate pair
        else:
            continue
        vals.append(stat(evaluate_operator(p, w) - evaluate_operator(p, y), d, dd))
    if not vals:
        raise RuntimeError("every sampled pair was degenerate")
    return np.asarray(vals)


def probe_strong_monotonicity(p: MviProblem, n_samples: int = 10_000, radius: float = 10.0,
                              seed: int = 0) -> float:
    """Min over sampled pairs of <U(w) - U(y), w - y> / ||w - y||^2.

    A sample-based estimate that can only overshoot the true modulus.
    """
    r = _pair_ratios(p, n_samples, radius, seed, lambda du, d, dd: float(du @ d) / dd)
    return float(r.min())


def probe_lipschitz(p: MviProblem, n_samples: int = 10_000, radius: float = 10.0,
                    seed: int = 0) -> float:
    """Max over sampled pairs of ||U(w) - U(y)|| / ||w - y||."""
    r = _pair_ratios(p, n_samples, radius, seed,
                     lambda du, d, dd: float(np.linalg.norm(du)) / np.sqrt(dd))
    return float(r.max())


@dataclass
class AssumptionReport:
    zeta_estimate: float
    lipschitz_estimate: float
    samples_used: int
    step_condition_holds: bool = False
    xi_real: bool = False
    zeta_used: Optional[float] = None
    lipschitz_used: Optional[float] = None
    provenance: str = "estimate"  # or "supplied"
    contradiction: bool = False

    def lines(self) -> list[str]:
        return [
            f"zeta_estimate={self.zeta_estimate!r}",
            f"lipschitz_estimate={self.lipschitz_estimate!r}",
            f"samples_used={self.samples_used}",
            f"zeta_used={self.zeta_used!r}",
            f"lipschitz_used={self.lipschitz_used!r}",
            f"provenance={self.provenance}",
            f"contradiction={self.contradiction}",
            f"step_condition_holds={self.step_condition_holds}",
            f"xi_real={self.xi_real}",
        ]


def step_condition(mu: float, zeta: float, lipschitz: float) -> bool:
    return mu * lipschitz ** 2 < 2.0 * zeta


def xi_radicand(mu: float, zeta: float, lipschitz: float) -> float:
    return 1.0 + 2.0 * mu * zeta - mu ** 2 * lipschitz ** 2


def validate_assumptions(p: MviProblem, report: AssumptionReport,
                         rel_tol: float = 1e-6) -> AssumptionReport:
    """Fill in the step-condition and real-contraction-factor flags.

    Supplied constants on ``p`` win over the probe estimates.  The report
    flags a contradiction when the probes beat a supplied constant (probe
    modulus below the supplied zeta, or probe Lipschitz ratio above the
    supplied L) by more than ``rel_tol``.  Never raises on failed flags.
    """
    if not p.mu > 0:
        raise ValueError("mu must be positive")
    zeta = p.zeta if p.zeta is not None else report.zeta_estimate
    lip = p.lipschitz if p.lipschitz is not None else report.lipschitz_estimate
    supplied = p.zeta is not None and p.lipschitz is not None
    contradiction = False
    if p.zeta is not None and report.zeta_estimate < p.zeta * (1 - rel_tol):
        contradiction = True
    if p.lipschitz is not None and report.lipschitz_estimate > p.lipschitz * (1 + rel_tol):
        contradiction = True
    return replace(
        report,
        zeta_used=zeta,
        lipschitz_used=lip,
        provenance="supplied" if supplied else "estimate",
        contradiction=contradiction,
        step_condition_holds=bool(zeta > 0 and step_condition(p.mu, zeta, lip)),
        xi_real=bool(xi_radicand(p.mu, zeta, lip) > 0),
    )


def assess(p: MviProblem, n_samples: int = 10_000, radius: float = 10.0,
           seed: int = 0) -> AssumptionReport:
    """Run both probes and validate."""
    report = AssumptionReport(
        zeta_estimate=probe_strong_monotonicity(p, n_samples, radius, seed),
        lipschitz_estimate=probe_lipschitz(p, n_samples, radius, seed + 1),
        samples_used=n_samples,
    )
    return validate_assumptions(p, report)

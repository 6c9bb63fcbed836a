"""Right-hand sides of the proximal neurodynamic models.

All models share the natural residual ``phi(w) = w - prox(w - mu*U(w), mu)``
and the gain

    e(t, w) = g1(t)/|phi|^(1-rho1) + g2(t)/|phi|^(1-rho2) + g3(t)/|phi|

which is set to zero inside a small dead-zone ``|phi| <= eps`` where the
exact equilibrium test ``phi == 0`` is numerically meaningless.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .problem import MviProblem, evaluate_operator

DEFAULT_DEADZONE = 1e-9


# --------------------------------------------------------------------------- schedules

@dataclass(frozen=True)
class Constant:
    beta: float
    t0: float = 0.0
    tag = "constant"

    def __call__(self, t):
        return self.beta

    def integral(self, t):
        return self.beta * (t - self.t0)

    def total(self):
        return math.inf if self.beta > 0 else 0.0

    def to_dict(self):
        return {"kind": self.tag, "beta": self.beta}


@dataclass(frozen=True)
class Power:
    """c * (1 + t - t0)**a."""

    c: float
    a: float
    t0: float = 0.0
    tag = "power"

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("power schedule needs c > 0")

    def __call__(self, t):
        return self.c * (1.0 + t - self.t0) ** self.a

    def integral(self, t):
        s = 1.0 + t - self.t0
        if self.a == -1.0:
            return self.c * math.log(s)
        return self.c * (s ** (self.a + 1.0) - 1.0) / (self.a + 1.0)

    def total(self):
        return math.inf if self.a >= -1.0 else self.c / (-(self.a + 1.0))

    def to_dict(self):
        return {"kind": self.tag, "c": self.c, "a": self.a}


@dataclass(frozen=True)
class Exponential:
    """c * exp(a * (t - t0))."""

    c: float
    a: float
    t0: float = 0.0
    tag = "exponential"

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("exponential schedule needs c > 0")

    def __call__(self, t):
        try:
            return self.c * math.exp(self.a * (t - self.t0))
        except OverflowError:
            return math.inf

    def integral(self, t):
        if self.a == 0.0:
            return self.c * (t - self.t0)
        try:
            return self.c * math.expm1(self.a * (t - self.t0)) / self.a
        except OverflowError:
            return math.inf

    def total(self):
        return math.inf if self.a >= 0.0 else self.c / (-self.a)

    def to_dict(self):
        return {"kind": self.tag, "c": self.c, "a": self.a}


Schedule = Union[Constant, Power, Exponential, Callable[[float], float]]


def schedule_from_dict(d, t0: float = 0.0):
    if isinstance(d, (int, float)):
        return Constant(float(d), t0)
    if not isinstance(d, dict) or "kind" not in d:
        raise ValueError(f"schedule must be a number or a mapping with 'kind', got {d!r}")
    kind = d["kind"]
    keys = {"constant": {"beta"}, "power": {"c", "a"}, "exponential": {"c", "a"}}
    if kind not in keys:
        raise ValueError(f"unknown schedule kind {kind!r}; expected one of {sorted(keys)}")
    extra = set(d) - {"kind"} - keys[kind]
    missing = keys[kind] - set(d)
    if extra or missing:
        raise ValueError(f"schedule {kind!r}: unknown keys {sorted(extra)}, missing {sorted(missing)}")
    if kind == "constant":
        return Constant(float(d["beta"]), t0)
    if kind == "power":
        return Power(float(d["c"]), float(d["a"]), t0)
    return Exponential(float(d["c"]), float(d["a"]), t0)


def _as_schedule(s, t0):
    if isinstance(s, (int, float)):
        return Constant(float(s), t0)
    return s


@dataclass(frozen=True)
class GainSchedule:
    gamma1: Schedule
    gamma2: Schedule
    gamma3: Schedule
    rho1: float
    rho2: float
    deadzone: float = DEFAULT_DEADZONE
    t0: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.rho1 < 1.0:
            raise ValueError(f"rho1 must lie in (0, 1), got {self.rho1}")
        if not self.rho2 > 1.0:
            raise ValueError(f"rho2 must exceed 1, got {self.rho2}")
        if not self.deadzone > 0:
            raise ValueError("deadzone must be positive")
        for name in ("gamma1", "gamma2", "gamma3"):
            object.__setattr__(self, name, _as_schedule(getattr(self, name), self.t0))

    @classmethod
    def constant(cls, beta1, beta2, beta3, rho1, rho2, deadzone=DEFAULT_DEADZONE):
        return cls(Constant(beta1), Constant(beta2), Constant(beta3), rho1, rho2, deadzone)

    def coefficients(self, t):
        return self.gamma1(t), self.gamma2(t), self.gamma3(t)

    def reduced(self, variant: str) -> "GainSchedule":
        """Zero out coefficients: 'normalized' keeps g3 only, 'fxt_only' keeps g1 only."""
        zero = Constant(0.0, self.t0)
        if variant == "full":
            return self
        if variant == "normalized":
            return GainSchedule(zero, zero, self.gamma3, self.rho1, self.rho2, self.deadzone, self.t0)
        if variant == "fxt_only":
            return GainSchedule(self.gamma1, zero, zero, self.rho1, self.rho2, self.deadzone, self.t0)
        raise ValueError(f"unknown variant {variant!r}")


# --------------------------------------------------------------------------- core maps

def forward_backward_map(p: MviProblem, w) -> np.ndarray:
    """H(w) = prox(w - mu*U(w), mu)."""
    w = np.asarray(w, dtype=float)
    return p.prox(w - p.mu * evaluate_operator(p, w), p.mu)


def residual(p: MviProblem, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    return w - forward_backward_map(p, w)


def unit_direction(phi, deadzone: float = 0.0) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    n = np.linalg.norm(phi)
    if not n > deadzone or n == 0.0:
        raise ValueError(f"unit_direction called inside the dead-zone (|phi|={n})")
    return phi / n


def gain(g: GainSchedule, t: float, phi_norm: float) -> float:
    if phi_norm <= g.deadzone:
        return 0.0
    g1, g2, g3 = g.coefficients(t)
    return (g1 / phi_norm ** (1.0 - g.rho1)
            + g2 / phi_norm ** (1.0 - g.rho2)
            + g3 / phi_norm)


def stepsize(g: GainSchedule, t: float, phi_norm: float) -> float:
    """Step size in the factored form ``g1*[|phi|^rho1 (1 + g2/g1 |phi|^(rho2-rho1)) + g3/g1]``.

    Falls back to the expanded sum when g1 is zero.  Zero inside the dead-zone.
    """
    if phi_norm <= g.deadzone:
        return 0.0
    g1, g2, g3 = g.coefficients(t)
    if g1 == 0:
        return g2 * phi_norm ** g.rho2 + g3
    return g1 * (phi_norm ** g.rho1 * (1.0 + g2 / g1 * phi_norm ** (g.rho2 - g.rho1)) + g3 / g1)


def rhs_tvpnm(p: MviProblem, g: GainSchedule, t: float, w) -> np.ndarray:
    phi = residual(p, w)
    return -gain(g, t, float(np.linalg.norm(phi))) * phi


def rhs_stepsize_form(p: MviProblem, g: GainSchedule, t: float, w) -> np.ndarray:
    """Same field as :func:`rhs_tvpnm`, computed as step size times unit residual direction."""
    phi = residual(p, w)
    n = float(np.linalg.norm(phi))
    if n <= g.deadzone:
        return np.zeros_like(phi)
    return -stepsize(g, t, n) * unit_direction(phi, g.deadzone)


VARIANTS = ("full", "normalized", "fxt_only")


def rhs_variant(variant: str, p: MviProblem, g: GainSchedule, t: float, w) -> np.ndarray:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    return rhs_tvpnm(p, g.reduced(variant), t, w)


def rhs_fxt_pdm(p: MviProblem, beta1: float, beta2: float, beta3: float, rho1: float,
                rho2: float, w, deadzone: float = DEFAULT_DEADZONE) -> np.ndarray:
    """Constant-gain projection model; psi must be a set indicator."""
    if not p.psi.is_indicator:
        raise ValueError(f"projection model needs an indicator psi, got {p.psi.tag!r}")
    if min(beta1, beta2, beta3) <= 0:
        raise ValueError("betas must be positive")
    phi = residual(p, w)
    n = float(np.linalg.norm(phi))
    if n <= deadzone:
        return np.zeros_like(phi)
    return (-beta1 * phi / n ** (1.0 - rho1)
            - beta2 * phi / n ** (1.0 - rho2)
            - beta3 * phi / n)


# --------------------------------------------------------------------------- disturbances

def random_rotation(dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


@dataclass(frozen=True)
class DisturbanceSpec:
    """D(t, w) with |D| <= q |w - w*| by construction.

    kinds: ``none``; ``proportional`` (D = q R (w - w*), R a seeded rotation);
    ``sinusoidal_bounded`` (D_i = q a sin(f t + 2 pi i / l) (w - w*)_i with
    amplitude a in (0, 1]).
    """

    kind: str = "none"
    q: float = 0.0
    direction_seed: int = 0
    amplitude: float = 1.0
    frequency: float = 1.0

    def __post_init__(self):
        if self.kind not in ("none", "proportional", "sinusoidal_bounded"):
            raise ValueError(f"unknown disturbance kind {self.kind!r}")
        if self.kind != "none" and not self.q > 0:
            raise ValueError("disturbance growth constant q must be positive")
        if self.kind == "sinusoidal_bounded" and not 0 < self.amplitude <= 1:
            raise ValueError("sinusoidal amplitude must lie in (0, 1]")

    @classmethod
    def from_dict(cls, d: dict) -> "DisturbanceSpec":
        allowed = {"kind", "q", "direction_seed", "amplitude", "frequency"}
        extra = set(d) - allowed
        if extra:
            raise ValueError(f"unknown disturbance keys: {sorted(extra)}")
        return cls(**d)

    def to_dict(self):
        return {"kind": self.kind, "q": self.q, "direction_seed": self.direction_seed,
                "amplitude": self.amplitude, "frequency": self.frequency}

    def field(self, w_star: Optional[np.ndarray]) -> Callable[[float, np.ndarray], np.ndarray]:
        if self.kind == "none":
            return lambda t, w: np.zeros_like(w)
        if w_star is None:
            raise ValueError(f"{self.kind} disturbance is defined relative to w* and needs known_solution")
        w_star = np.asarray(w_star, dtype=float)
        if self.kind == "proportional":
            rot = random_rotation(w_star.size, self.direction_seed)
            return lambda t, w: self.q * (rot @ (w - w_star))
        phases = 2.0 * np.pi * np.arange(w_star.size) / w_star.size
        return lambda t, w: (self.q * self.amplitude
                             * np.sin(self.frequency * t + phases) * (w - w_star))


def rhs_disturbed(p: MviProblem, g: GainSchedule, d: DisturbanceSpec, t: float, w) -> np.ndarray:
    nominal = rhs_tvpnm(p, g, t, w)
    if d.kind == "none":
        return nominal
    return nominal + d.field(p.known_solution)(t, np.asarray(w, dtype=float))


# --------------------------------------------------------------------------- model factory

MODELS = ("tvpnm", "nl", "fxt", "pdm", "disturbed")


def make_field(model: str, p: MviProblem, g: GainSchedule,
               disturbance: Optional[DisturbanceSpec] = None):
    """Return ``(rhs(t, w), residual_norm(w))`` for a model tag.

    Tags: tvpnm (full gain), nl (normalized), fxt (g1 only), pdm (constant
    gains, indicator psi), disturbed (full gain plus ``disturbance``).
    """
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}, got {model!r}")

    def res_norm(w):
        return float(np.linalg.norm(residual(p, w)))

    if model == "tvpnm":
        return (lambda t, w: rhs_tvpnm(p, g, t, w)), res_norm
    if model == "nl":
        return (lambda t, w: rhs_variant("normalized", p, g, t, w)), res_norm
    if model == "fxt":
        return (lambda t, w: rhs_variant("fxt_only", p, g, t, w)), res_norm
    if model == "pdm":
        if not all(isinstance(s, Constant) for s in (g.gamma1, g.gamma2, g.gamma3)):
            raise ValueError("pdm model needs constant schedules")
        b1, b2, b3 = g.gamma1.beta, g.gamma2.beta, g.gamma3.beta
        return (lambda t, w: rhs_fxt_pdm(p, b1, b2, b3, g.rho1, g.rho2, w, g.deadzone)), res_norm
    d = disturbance or DisturbanceSpec()
    dfield = d.field(p.known_solution) if d.kind != "none" else None
    if dfield is None:
        return (lambda t, w: rhs_tvpnm(p, g, t, w)), res_norm
    return (lambda t, w: rhs_tvpnm(p, g, t, w) + dfield(t, w)), res_norm

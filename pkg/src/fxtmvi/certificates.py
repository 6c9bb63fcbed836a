"""Closed-form constants and fixed-time settling bounds.

Notation: ``xi = 1/sqrt(1 + 2 mu zeta - mu^2 L^2)`` is the contraction
factor of the forward-backward map, ``lambda_cap = 4 zeta/(4 zeta - mu L^2)``,
``p_i = (1 + rho_i)/2`` and ``F_i(t) = int_{t0}^t g_i(s) ds``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate as spi
from scipy import optimize as spo

from .dynamics import Constant, Exponential, GainSchedule, Power
from .integrator import Trajectory

DEGENERATE = 1e-12
BOUND_CAP = 1e12
QUAD_ABS_TOL = 1e-12
INVERSION_RTOL = 1e-10


class CertificateError(ValueError):
    """The inputs violate a precondition of the bound (e.g. mu L^2 >= 2 zeta)."""


@dataclass
class SettlingCertificate:
    xi: float
    lambda_cap: float
    p1: float
    p2: float
    theta1: float
    theta2: float
    feasible: bool
    bound_T: Optional[float]
    kind: str
    optimistic_T: Optional[float] = None
    horizon_limited: bool = False
    trajectory_conditional: bool = False
    notes: list = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"kind={self.kind}", f"xi={self.xi!r}", f"lambda_cap={self.lambda_cap!r}",
               f"p1={self.p1!r}", f"p2={self.p2!r}", f"theta1={self.theta1!r}",
               f"theta2={self.theta2!r}", f"feasible={self.feasible}",
               f"bound_T={self.bound_T!r}"]
        if self.optimistic_T is not None:
            out.append(f"optimistic_T={self.optimistic_T!r}")
        if self.horizon_limited:
            out.append("horizon_limited=True")
        if self.trajectory_conditional:
            out.append("trajectory_conditional=True")
        out += [f"note={n}" for n in self.notes]
        return out


def xi(mu: float, zeta: float, lipschitz: float) -> float:
    rad = 1.0 + 2.0 * mu * zeta - mu ** 2 * lipschitz ** 2
    if not rad > 0:
        raise CertificateError(f"contraction factor undefined: 1 + 2 mu zeta - mu^2 L^2 = {rad:.6g} <= 0")
    return 1.0 / math.sqrt(rad)


def lambda_cap(mu: float, zeta: float, lipschitz: float) -> float:
    den = 4.0 * zeta - mu * lipschitz ** 2
    if not den > 0:
        raise CertificateError(f"4 zeta - mu L^2 = {den:.6g} <= 0")
    return 4.0 * zeta / den


def theta_constants(rho1: float, rho2: float, xi_value: float):
    """Return ``(theta1, theta2, p1, p2)`` with theta1 = 2^p1 (1-xi), theta2 = 2^p2 (1-xi)^rho2."""
    if not 0.0 < rho1 < 1.0 < rho2:
        raise CertificateError(f"need 0 < rho1 < 1 < rho2, got rho1={rho1}, rho2={rho2}")
    if not 0.0 < xi_value < 1.0:
        raise CertificateError(f"xi must lie in (0, 1), got {xi_value}")
    p1 = 0.5 * (1.0 + rho1)
    p2 = 0.5 * (1.0 + rho2)
    return 2.0 ** p1 * (1.0 - xi_value), 2.0 ** p2 * (1.0 - xi_value) ** rho2, p1, p2


# --------------------------------------------------------------------------- integrals

class Antiderivative:
    """F(t) = int_{t0}^t g(s) ds, closed form for preset schedules, quadrature otherwise."""

    def __init__(self, g, t0: float = 0.0):
        self.g = g
        self.t0 = t0
        self.closed = isinstance(g, (Constant, Power, Exponential)) and g.t0 == t0

    def __call__(self, t: float) -> float:
        if t <= self.t0:
            return 0.0
        if self.closed:
            return float(self.g.integral(t))
        val, _ = spi.quad(self.g, self.t0, t, epsabs=QUAD_ABS_TOL, epsrel=1e-13, limit=500)
        return float(val)

    def total(self) -> Optional[float]:
        """Integral to infinity when known in closed form, else None."""
        return float(self.g.total()) if self.closed else None

    def inverse(self, y: float, horizon: float) -> float:
        """Bisection for F(t) = y on [t0, horizon]; F must be increasing."""
        if y <= 0:
            return self.t0
        lo, hi = self.t0, min(self.t0 + 1.0, horizon)
        while self(hi) < y:
            if hi >= horizon:
                raise CertificateError("level not reached within horizon")
            lo, hi = hi, min(self.t0 + 2.0 * (hi - self.t0), horizon)
        return float(spo.bisect(lambda t: self(t) - y, lo, hi, xtol=1e-300,
                                rtol=1e-14, maxiter=400))


def _check_schedule(F: Antiderivative, name: str, horizon: float):
    # spot-check positivity on a log grid; a rigorous test is impossible for callables
    for t in F.t0 + np.concatenate([[0.0], np.logspace(-6, math.log10(horizon - F.t0), 25)]):
        if not F.g(float(t)) > 0:
            raise CertificateError(f"{name} must be strictly positive, got {F.g(float(t))} at t={t}")


def _invert_bounds(F1: Antiderivative, F2: Antiderivative, c1: float, c2: float, horizon: float):
    """Return (feasible, bound, horizon_limited) for F1^-1(F1(F2^-1(c2)) + c1)."""
    need2 = c2
    have2 = F2(horizon)
    if not need2 < have2:
        tot = F2.total()
        return False, None, tot is None or tot > need2
    s = F2.inverse(need2, horizon)
    need1 = F1(s) + c1
    have1 = F1(horizon)
    if not need1 < have1:
        tot = F1.total()
        return False, None, tot is None or tot > need1
    return True, F1.inverse(need1, horizon), False


def settling_bound_tv(g: GainSchedule, mu: float, zeta: float, lipschitz: float,
                      t0: float = 0.0, horizon: float = 1e6) -> SettlingCertificate:
    """Fixed-time bound for the time-varying model.

    T <= F1^-1( F1(F2^-1(1/(theta2 (p2-1)))) + 1/(theta1 (1-p1)) ), emitted
    only if both levels are reached before ``horizon``.
    """
    x = xi(mu, zeta, lipschitz)
    lam = lambda_cap(mu, zeta, lipschitz)
    th1, th2, p1, p2 = theta_constants(g.rho1, g.rho2, x)
    cert = SettlingCertificate(x, lam, p1, p2, th1, th2, False, None, "time_varying")
    if 1.0 - p1 < DEGENERATE or p2 - 1.0 < DEGENERATE or th1 <= 0 or th2 <= 0:
        cert.notes.append("degenerate exponents or theta")
        return cert
    F1, F2 = Antiderivative(g.gamma1, t0), Antiderivative(g.gamma2, t0)
    _check_schedule(F1, "gamma1", horizon)
    _check_schedule(F2, "gamma2", horizon)
    c1 = 1.0 / (th1 * (1.0 - p1))
    c2 = 1.0 / (th2 * (p2 - 1.0))
    feasible, bound, limited = _invert_bounds(F1, F2, c1, c2, horizon)
    cert.feasible, cert.bound_T, cert.horizon_limited = feasible, bound, limited
    if feasible and bound - t0 > BOUND_CAP:
        cert.feasible, cert.bound_T = False, None
    return cert


def constant_gain_n1(beta1, rho1, xi_value, mu, zeta, lipschitz) -> float:
    ratio = (4.0 * zeta - mu * lipschitz ** 2) / (4.0 * zeta)
    return 2.0 ** (0.5 * (1.0 + rho1)) * beta1 * (1.0 - xi_value) * ratio ** (1.0 - rho1)


def settling_bound_const(beta1: float, beta2: float, beta3: float, rho1: float, rho2: float,
                         xi_value: Optional[float], mu: float, zeta: float, lipschitz: float,
                         phi0_norm: float = 0.0) -> SettlingCertificate:
    """Constant-gain bound 1/(N1 (1-p1)) + 1/(N2 (p2-1)).

    N2 is taken at the lower end of its admissible interval (valid for every
    initial state); ``optimistic_T`` uses the upper end, which depends on
    ``phi0_norm = |phi(w(0))|``.  ``xi_value=None`` computes xi from the constants.
    """
    if not mu * lipschitz ** 2 < 2.0 * zeta:
        raise CertificateError(f"step condition fails: mu L^2 = {mu * lipschitz ** 2:.6g} >= 2 zeta = {2 * zeta:.6g}")
    if phi0_norm < 0:
        raise ValueError("phi0_norm must be nonnegative")
    x = xi(mu, zeta, lipschitz) if xi_value is None else xi_value
    lam = lambda_cap(mu, zeta, lipschitz)
    th1, th2, p1, p2 = theta_constants(rho1, rho2, x)
    cert = SettlingCertificate(x, lam, p1, p2, th1, th2, False, None, "constant_gain")
    if 1.0 - p1 < DEGENERATE or p2 - 1.0 < DEGENERATE:
        cert.notes.append("degenerate exponents")
        return cert
    n1 = constant_gain_n1(beta1, rho1, x, mu, zeta, lipschitz)
    n2_lo = th2 * beta2
    n2_hi = th2 * (beta2 + beta3 * phi0_norm ** rho2)
    if n1 <= 0 or n2_lo <= 0:
        return cert
    bound = 1.0 / (n1 * (1.0 - p1)) + 1.0 / (n2_lo * (p2 - 1.0))
    if bound > BOUND_CAP:
        cert.notes.append("bound exceeds cap")
        return cert
    cert.feasible = True
    cert.bound_T = bound
    cert.optimistic_T = 1.0 / (n1 * (1.0 - p1)) + 1.0 / (n2_hi * (p2 - 1.0))
    return cert


# --------------------------------------------------------------------------- robustness

@dataclass
class RobustnessCheck:
    times: np.ndarray
    margins: np.ndarray  # min{g1/lambda^(1-rho1), g2 + g3 |phi|^rho2} - q per sample
    ok: np.ndarray

    @property
    def all_ok(self) -> bool:
        return bool(np.all(self.ok))


def robust_feasibility(g: GainSchedule, q: float, lambda_value: float,
                       traj: Trajectory) -> RobustnessCheck:
    """Evaluate min{g1(t)/lambda^(1-rho1), g2(t) + g3(t) |phi|^rho2} > q along ``traj``."""
    margins = np.empty(len(traj))
    for k, (t, r) in enumerate(zip(traj.times, traj.residual_norms)):
        g1, g2, g3 = g.coefficients(float(t))
        first = g1 / lambda_value ** (1.0 - g.rho1)
        second = g2 + g3 * float(r) ** g.rho2
        margins[k] = min(first, second) - q
    return RobustnessCheck(np.asarray(traj.times), margins, margins > 0)


class _TrajectoryIntegral:
    """Antiderivative of a piecewise-linear integrand sampled on a trajectory.

    Past the last sample the integrand is held at its final value.
    """

    def __init__(self, times, values, t0):
        self.t0 = t0
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(np.diff(self.times)
                                               * 0.5 * (self.values[1:] + self.values[:-1]))])
        self.cum = cum
        self.g = lambda t: float(np.interp(t, self.times, self.values))

    def __call__(self, t):
        if t <= self.times[0]:
            return 0.0
        if t >= self.times[-1]:
            return float(self.cum[-1] + self.values[-1] * (t - self.times[-1]))
        i = int(np.searchsorted(self.times, t)) - 1
        v = self.g(t)
        return float(self.cum[i] + 0.5 * (self.values[i] + v) * (t - self.times[i]))

    def total(self):
        return math.inf if self.values[-1] > 0 else None

    inverse = Antiderivative.inverse


def settling_bound_robust(g: GainSchedule, q: float, mu: float, zeta: float, lipschitz: float,
                          traj: Trajectory, horizon: float = 1e6) -> SettlingCertificate:
    """A-posteriori bound for the disturbed model along a realized trajectory.

    Integrands (1-xi) g1/lambda^(1-rho1) - q and g2 + g3 |phi(w(t))|^rho2 - q,
    with theta1 = 2^p1 and theta2 = 2^p2 (1-xi)^rho2.  Infeasible when either
    integrand is nonpositive at a recorded sample.
    """
    x = xi(mu, zeta, lipschitz)
    lam = lambda_cap(mu, zeta, lipschitz)
    _, th2, p1, p2 = theta_constants(g.rho1, g.rho2, x)
    th1 = 2.0 ** p1
    cert = SettlingCertificate(x, lam, p1, p2, th1, th2, False, None, "robust",
                               trajectory_conditional=True)
    t = np.asarray(traj.times, dtype=float)
    phi = np.asarray(traj.residual_norms, dtype=float)
    coeffs = np.array([g.coefficients(float(s)) for s in t])
    h1 = (1.0 - x) * coeffs[:, 0] / lam ** (1.0 - g.rho1) - q
    h2 = coeffs[:, 1] + coeffs[:, 2] * phi ** g.rho2 - q
    if np.any(h1 <= 0) or np.any(h2 <= 0):
        cert.notes.append("robust integrand nonpositive along trajectory")
        return cert
    F1 = _TrajectoryIntegral(t, h1, t[0])
    F2 = _TrajectoryIntegral(t, h2, t[0])
    c1 = 1.0 / (th1 * (1.0 - p1))
    c2 = 1.0 / (th2 * (p2 - 1.0))
    feasible, bound, limited = _invert_bounds(F1, F2, c1, c2, horizon)
    cert.feasible, cert.bound_T, cert.horizon_limited = feasible, bound, limited
    return cert

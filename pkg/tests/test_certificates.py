import math

import numpy as np
import pytest

from fxtmvi.certificates import (Antiderivative, CertificateError, lambda_cap,
                                 robust_feasibility, settling_bound_const,
                                 settling_bound_robust, settling_bound_tv, theta_constants, xi)
from fxtmvi.dynamics import Constant, Exponential, GainSchedule, Power, make_field
from fxtmvi.integrator import IntegratorConfig, Trajectory, integrate
from fxtmvi.presets import linear_sym


def test_xi_values():
    assert xi(0.1, 1.0, 1.0) == pytest.approx(1 / math.sqrt(1.19), rel=1e-15)
    assert xi(0.1, 1.0, 1.0) == pytest.approx(0.91670, abs=5e-6)
    assert xi(1e-12, 3.0, 7.0) == pytest.approx(1.0, abs=1e-11)
    with pytest.raises(CertificateError):
        xi(0.5, 1.2679, 5.7321)


def test_lambda_cap_values():
    assert lambda_cap(0.1, 1.0, 1.0) == pytest.approx(4 / 3.9, rel=1e-15)
    assert lambda_cap(1e-12, 1.0, 1.0) == pytest.approx(1.0)
    # boundary mu L^2 = 2 zeta
    assert lambda_cap(0.5, 1.0, 2.0) == pytest.approx(2.0)


def test_theta_constants():
    th1, th2, p1, p2 = theta_constants(0.5, 1.6, 0.5)
    assert (p1, p2) == (0.75, 1.3)
    assert th1 == pytest.approx(2 ** 0.75 * 0.5, rel=1e-15)
    assert th1 == pytest.approx(0.8409, abs=5e-5)
    assert th2 == pytest.approx(0.8123, abs=5e-5)
    small = theta_constants(0.5, 1.6, 1 - 1e-12)
    assert small[0] < 1e-11 and small[1] < 1e-18
    with pytest.raises(CertificateError):
        theta_constants(1.2, 1.2, 0.5)


def _const_closed_form(b1, b2, rho1, rho2, mu, zeta, lip):
    th1, th2, p1, p2 = theta_constants(rho1, rho2, xi(mu, zeta, lip))
    return (1 / b1) * ((b1 / b2) / (th2 * (p2 - 1)) + 1 / (th1 * (1 - p1)))


@pytest.mark.parametrize("b1,b2", [(1.0, 1.0), (3.0, 5.0), (50.0, 50.0), (0.2, 7.0)])
def test_tv_bound_constant_schedule(b1, b2):
    g = GainSchedule.constant(b1, b2, 0.0, 0.5, 1.6)
    cert = settling_bound_tv(g, 0.1, 1.0, 1.0)
    assert cert.feasible
    expected = _const_closed_form(b1, b2, 0.5, 1.6, 0.1, 1.0, 1.0)
    assert cert.bound_T == pytest.approx(expected, rel=1e-9)


def test_tv_bound_power_schedule():
    c1, a1, c2, a2 = 2.0, 0.5, 1.0, -0.5
    g = GainSchedule(Power(c1, a1), Power(c2, a2), 1.0, 0.5, 1.6)
    cert = settling_bound_tv(g, 0.1, 1.0, 1.0)
    th1, th2, p1, p2 = theta_constants(0.5, 1.6, xi(0.1, 1.0, 1.0))
    # invert the analytic antiderivatives c((1+t)^(a+1) - 1)/(a+1) by hand
    s = (1 + (a2 + 1) / (c2 * th2 * (p2 - 1))) ** (1 / (a2 + 1)) - 1
    level = c1 * ((1 + s) ** (a1 + 1) - 1) / (a1 + 1) + 1 / (th1 * (1 - p1))
    expected = (1 + level * (a1 + 1) / c1) ** (1 / (a1 + 1)) - 1
    assert cert.bound_T == pytest.approx(expected, rel=1e-9)


def test_tv_bound_quadrature_path_matches_closed_form():
    closed = GainSchedule(Exponential(1.5, 0.2), Power(2.0, 0.3), 0.0, 0.5, 1.6)
    wrapped = GainSchedule(lambda t: 1.5 * math.exp(0.2 * t),
                           lambda t: 2.0 * (1 + t) ** 0.3, 0.0, 0.5, 1.6)
    a = settling_bound_tv(closed, 0.1, 1.0, 1.0, horizon=200.0)
    b = settling_bound_tv(wrapped, 0.1, 1.0, 1.0, horizon=200.0)
    assert a.feasible and b.feasible
    assert b.bound_T == pytest.approx(a.bound_T, rel=1e-9)


def test_tv_bound_infeasible_when_integral_too_small():
    g = GainSchedule(Constant(1.0), Power(0.01, -2.0), 0.0, 0.5, 1.6)
    cert = settling_bound_tv(g, 0.1, 1.0, 1.0)
    assert not cert.feasible and cert.bound_T is None
    assert not cert.horizon_limited


def test_tv_bound_horizon_limited():
    g = GainSchedule.constant(1e-6, 1e-6, 0.0, 0.5, 1.6)
    cert = settling_bound_tv(g, 0.1, 1.0, 1.0, horizon=10.0)
    assert not cert.feasible and cert.horizon_limited


def test_tv_bound_rejects_nonpositive_schedule():
    g = GainSchedule(lambda t: 1.0 - t, Constant(1.0), 0.0, 0.5, 1.6)
    with pytest.raises(CertificateError):
        settling_bound_tv(g, 0.1, 1.0, 1.0)


def test_tv_bound_degenerate_exponents():
    g = GainSchedule.constant(1, 1, 0, 1 - 1e-13, 1.6)
    assert not settling_bound_tv(g, 0.1, 1.0, 1.0).feasible


@pytest.mark.parametrize("sched", [Constant(2.0), Power(1.5, 0.7), Exponential(0.5, 0.3),
                                   lambda t: 1.0 + math.sin(t) ** 2])
def test_inverse_roundtrip(sched):
    F = Antiderivative(sched)
    for y in (1e-6, 0.3, 1.0, 17.0, 250.0):
        t = F.inverse(y, 1e6)
        assert abs(F(t) - y) <= 1e-10 * max(1.0, abs(y))


def test_const_bound_example():
    # zeta = 1, mu L^2 = 0.4 gives (4 zeta - mu L^2)/(4 zeta) = 0.9 and xi = 0.5 at mu = 1.875
    mu = 1.875
    lip = math.sqrt(0.4 / mu)
    assert xi(mu, 1.0, lip) == pytest.approx(0.5, rel=1e-14)
    cert = settling_bound_const(1, 1, 0, 0.5, 1.6, 0.5, mu, 1.0, lip)
    n1 = 2 ** 0.75 * 0.5 * 0.9 ** 0.5
    n2 = 2 ** 1.3 * 0.5 ** 1.6
    assert n1 == pytest.approx(0.7977, abs=5e-5) and n2 == pytest.approx(0.8123, abs=5e-5)
    assert cert.bound_T == pytest.approx(1 / (n1 * 0.25) + 1 / (n2 * 0.3), rel=1e-13)
    assert cert.bound_T == pytest.approx(9.12, abs=5e-3)
    assert cert.optimistic_T == cert.bound_T  # beta3 = 0 collapses the interval


def test_const_bound_optimistic_not_larger():
    cert = settling_bound_const(2, 3, 4, 0.5, 1.6, None, 0.1, 1.0, 1.0, phi0_norm=5.0)
    assert cert.optimistic_T < cert.bound_T


def test_const_bound_rejects_a3_violation():
    with pytest.raises(CertificateError):
        settling_bound_const(50, 50, 20, 0.5, 1.6, None, 0.5, 1.2679, 5.7321)


def test_const_bound_caps_when_xi_near_one():
    cert = settling_bound_const(1, 1, 0, 0.5, 1.6, 1 - 1e-15, 0.1, 1.0, 1.0)
    assert not cert.feasible and cert.bound_T is None


def _flat_traj(times, residuals):
    t = np.asarray(times, dtype=float)
    return Trajectory(t, np.zeros((len(t), 1)), np.asarray(residuals, dtype=float))


def test_robust_feasibility_cases():
    tr = _flat_traj([0, 1, 2], [1.0, 0.5, 0.0])
    assert robust_feasibility(GainSchedule.constant(1, 1, 1, 0.5, 1.6), 0.0, 1.5, tr).all_ok
    lam = 1.5
    g = GainSchedule.constant(lam ** 0.5 * 0.3, 10, 1, 0.5, 1.6)
    chk = robust_feasibility(g, 0.3, lam, tr)
    assert not chk.all_ok and not np.any(chk.ok)


def test_robust_feasibility_example_settings():
    g = GainSchedule.constant(50, 50, 20, 0.5, 1.6)
    tr = _flat_traj([0, 1], [10.0, 0.0])
    for lam in (1.0 + 1e-9, 1.5, 2.0):
        assert robust_feasibility(g, 0.3, lam, tr).all_ok


def test_robust_bound_along_trajectory():
    p = linear_sym()
    g = GainSchedule.constant(50, 50, 20, 0.5, 1.6)
    rhs, res = make_field("tvpnm", p, g)
    tr = integrate(rhs, np.full(5, 4.0), IntegratorConfig(dt=1e-4, t_end=0.5,
                                                          stop_on_settle=False), res,
                   p.known_solution)
    cert = settling_bound_robust(g, 0.3, p.mu, p.zeta, p.lipschitz, tr)
    assert cert.feasible and cert.trajectory_conditional
    assert cert.bound_T > 0
    bad = settling_bound_robust(g, 1e3, p.mu, p.zeta, p.lipschitz, tr)
    assert not bad.feasible


def test_certificate_lines():
    cert = settling_bound_const(2, 3, 4, 0.5, 1.6, None, 0.1, 1.0, 1.0, phi0_norm=5.0)
    text = "\n".join(cert.lines())
    assert "bound_T=" in text and "optimistic_T=" in text


def test_measured_settling_within_certified_bound():
    from fxtmvi.integrator import detect_settling
    p = linear_sym()
    g = GainSchedule.constant(50, 50, 20, 0.5, 1.6)
    cert = settling_bound_const(50, 50, 20, 0.5, 1.6, None, p.mu, p.zeta, p.lipschitz)
    rhs, res = make_field("pdm", p, g)
    cfg = IntegratorConfig(dt=1e-4, t_end=cert.bound_T, stop_residual=1e-8, record_stride=1)
    rng = np.random.default_rng(42)
    for _ in range(100):
        d = rng.standard_normal(5)
        w0 = d / np.linalg.norm(d) * 10 ** rng.uniform(0, 6)
        tr = integrate(rhs, w0, cfg, res, p.known_solution)
        t_hit = detect_settling(tr, 1e-6)
        assert t_hit is not None and t_hit <= cert.bound_T

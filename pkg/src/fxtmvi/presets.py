"""Named problem instances addressable from the CLI config."""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .applications import CompositeProblem, MinimaxProblem, cop_to_mvi, minimax_to_mvi
from .prox import L1, NonNeg, Zero
from .problem import MviProblem

# Benchmark nonlinear complementarity problem on the nonnegative orthant.
EXAMPLE1_B = (3.0 * np.eye(5) - np.eye(5, k=1) - np.eye(5, k=-1))
EXAMPLE1_SOLUTION = np.array([1.0, 2.8, 0.5, 0.0, 1.5])
EXAMPLE1_P_PRINTED = np.array([-0.9854, -8.1278, 0.8364, 2.0000, -5.4828])
EXAMPLE1_INITIAL = (
    (5.0, 1.0, 2.0, 4.0, -2.5),
    (-4.0, 2.5, 2.0, 3.0, 1.0),
    (3.5, -3.0, 4.0, 2.0, 2.5),
    (2.0, 4.0, 3.0, -1.0, 3.5),
    (1.5, 5.0, -0.5, 0.2, 4.0),
)
EXAMPLE1_PARAMS = dict(beta1=50.0, beta2=50.0, beta3=20.0, rho1=0.5, rho2=1.6, mu=0.5, q=0.3)
# conservative global constants: lambda_min(B) (arctan is monotone) and 1 + ||B||_2
EXAMPLE1_ZETA = 3.0 - 2.0 * math.cos(math.pi / 6)
EXAMPLE1_LIPSCHITZ = 1.0 + 3.0 + 2.0 * math.cos(math.pi / 6)


def example1_offset() -> np.ndarray:
    """p = -arctan(w*) - B w*, so that U(w*) = 0."""
    return -np.arctan(EXAMPLE1_SOLUTION) - EXAMPLE1_B @ EXAMPLE1_SOLUTION


def example1_ncp() -> MviProblem:
    p = example1_offset()
    B = EXAMPLE1_B

    def upsilon(w):
        return np.arctan(w) + B @ w + p

    return MviProblem(5, upsilon, NonNeg(), EXAMPLE1_PARAMS["mu"], EXAMPLE1_ZETA,
                      EXAMPLE1_LIPSCHITZ, EXAMPLE1_SOLUTION, name="example1-ncp")


def _spd(rng, dim, lo, hi):
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    eig = np.linspace(lo, hi, dim)
    return (q * eig) @ q.T


def linear_sym_data(seed: int = 7):
    """(A, b, w*) with A symmetric, spectrum evenly spread over [1, 2]."""
    rng = np.random.default_rng(seed)
    A = _spd(rng, 5, 1.0, 2.0)
    A = 0.5 * (A + A.T)
    w_star = np.array([1.0, 0.5, 0.0, 2.0, 1.5])
    u_star = np.array([0.0, 0.0, 0.7, 0.0, 0.0])
    return A, u_star - A @ w_star, w_star


def linear_sym(seed: int = 7) -> MviProblem:
    """U(w) = A w + b on the nonnegative orthant.

    Exact constants zeta = 1, L = 2 and mu = zeta / L^2 = 0.25.  The solution
    has one active bound (w*_3 = 0 with U_3(w*) = 0.7).
    """
    A, b, w_star = linear_sym_data(seed)

    def upsilon(w):
        return A @ w + b

    return MviProblem(5, upsilon, NonNeg(), 0.25, 1.0, 2.0, w_star, name="linear-sym")


def lasso_composite(seed: int = 11, weight: float = 0.5) -> CompositeProblem:
    """h(w) = 0.5 |A w - b|^2 with singular values of A in [1, 1.5], psi = weight*|w|_1."""
    rng = np.random.default_rng(seed)
    u, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    v, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    A = (u * np.linspace(1.0, 1.5, 5)) @ v.T
    b = rng.standard_normal(5) * 2.0
    AtA, Atb = A.T @ A, A.T @ b
    zeta, lip = 1.0, 2.25
    mu = zeta / lip ** 2

    def grad_h(w):
        return AtA @ w - Atb

    return CompositeProblem(5, grad_h, L1(weight), mu, zeta=zeta, lipschitz=lip,
                            h=lambda w: 0.5 * float(np.sum((A @ w - b) ** 2)))


def lasso_cop(seed: int = 11) -> MviProblem:
    return replace(cop_to_mvi(lasso_composite(seed)), name="lasso-cop")


def quadratic_minimax_data(seed: int = 5):
    """(P, Q, R, c, d) with P, R symmetric, spectra in [1, 2]."""
    rng = np.random.default_rng(seed)
    P = _spd(rng, 3, 1.0, 2.0)
    R = _spd(rng, 3, 1.0, 2.0)
    P, R = 0.5 * (P + P.T), 0.5 * (R + R.T)
    Q = 0.5 * rng.standard_normal((3, 3))
    return P, Q, R, rng.standard_normal(3), rng.standard_normal(3)


def quadratic_minimax_problem(seed: int = 5) -> MinimaxProblem:
    """M(w, y) = 0.5 w'Pw + w'Qy - 0.5 y'Ry + c'w - d'y."""
    P, Q, R, c, d = quadratic_minimax_data(seed)
    J = np.block([[P, Q], [-Q.T, R]])
    lip = float(np.linalg.norm(J, 2))
    zeta = 1.0

    def value(w, y):
        return float(0.5 * w @ P @ w + w @ Q @ y - 0.5 * y @ R @ y + c @ w - d @ y)

    return MinimaxProblem(
        3, 3,
        grad_w=lambda w, y: P @ w + Q @ y + c,
        grad_y=lambda w, y: Q.T @ w - R @ y - d,
        psi1=Zero(), psi2=Zero(), mu=zeta / lip ** 2,
        value=value, zeta1=1.0, zeta2=1.0, lipschitz=lip,
    )


def quadratic_minimax(seed: int = 5) -> MviProblem:
    m = quadratic_minimax_problem(seed)
    P, Q, R, c, d = quadratic_minimax_data(seed)
    K = np.block([[P, Q], [-Q.T, R]])
    z_star = np.linalg.solve(K, -np.concatenate([c, d]))
    return replace(minimax_to_mvi(m), known_solution=z_star, name="quadratic-minimax")


PRESETS = {
    "example1-ncp": example1_ncp,
    "lasso-cop": lasso_cop,
    "quadratic-minimax": quadratic_minimax,
    "linear-sym": linear_sym,
}


def get_preset(name: str) -> MviProblem:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}") from None

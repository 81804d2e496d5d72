"""Shared draw helpers for the randomized suites."""

import numpy as np

from gausskey import AttackParams, check_constraints


def random_attack(
    rng: np.random.Generator,
    omega_lo: float = 1.0,
    omega_hi: float = 5.0,
    tau_lo: float = 0.05,
    tau_hi: float = 0.95,
    strict: bool = False,
) -> AttackParams:
    """Rejection-sample a physical attack point."""
    while True:
        omega = rng.uniform(omega_lo, omega_hi)
        params = AttackParams(
            tau=rng.uniform(tau_lo, tau_hi),
            omega=omega,
            g=rng.uniform(-omega, omega),
            g_prime=rng.uniform(-omega, omega),
        )
        if check_constraints(params, strict=strict):
            return params


def random_interior_attack(
    rng: np.random.Generator,
    nu_margin: float = 1.01,
    **kwargs,
) -> AttackParams:
    """Physical draw keeping both correlation eigenvalues above nu_margin."""
    while True:
        params = random_attack(rng, strict=True, **kwargs)
        om, g, gp = params.omega, params.g, params.g_prime
        nu_minus = np.sqrt((om - g) * (om - gp))
        nu_plus = np.sqrt((om + g) * (om + gp))
        if min(nu_minus, nu_plus) >= nu_margin:
            return params

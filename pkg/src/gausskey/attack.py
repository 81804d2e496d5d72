"""Two-mode correlated-ancilla attack model.

The eavesdropper injects, into two consecutive channel uses, a pair of
thermal ancillas with local variance omega = 2*nbar + 1 and quadrature
correlations (g, g').  The uncertainty principle restricts (g, g') to

    |g| < omega,  |g'| < omega,  omega*|g + g'| <= omega^2 + g*g' - 1,

a lens-shaped region that collapses to the origin as omega -> 1.  The
origin g = g' = 0 is the uncorrelated (single-mode collective) attack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian import CovMat, DomainError

# Absolute slack on the correlation constraint and on boundary membership.
CONSTRAINT_TOL = 1e-9


@dataclass(frozen=True)
class AttackParams:
    """Attack point: channel transmissivity plus the ancilla state.

    tau in (0, 1]; omega >= 1.  The correlation pair (g, g_prime) is not
    validated here -- use check_constraints / violated_constraint.
    """

    tau: float
    omega: float
    g: float
    g_prime: float

    def __post_init__(self) -> None:
        for name in ("tau", "omega", "g", "g_prime"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not 0.0 < self.tau <= 1.0:
            raise DomainError(f"transmissivity must lie in (0, 1], got {self.tau}")
        if self.omega < 1.0:
            raise DomainError(f"thermal variance must satisfy omega >= 1, got {self.omega}")


@dataclass(frozen=True)
class BoundaryCurve:
    """Sampled points saturating omega*|g + g'| = omega^2 + g*g' - 1."""

    omega: float
    samples: tuple[tuple[float, float], ...]


def attack_cm(omega: float, g: float, g_prime: float) -> CovMat:
    """Two-mode ancilla CM: diagonal blocks omega*I, cross block diag(g, g')."""
    eye2 = np.eye(2)
    G = np.diag([g, g_prime])
    return CovMat(np.block([[omega * eye2, G], [G, omega * eye2]]))


def _constraints_hold(omega: float, g: float, g_prime: float, strict: bool) -> bool:
    if abs(g) >= omega or abs(g_prime) >= omega:
        return False
    lhs = omega * abs(g + g_prime)
    rhs = omega * omega + g * g_prime - 1.0
    if strict:
        return lhs < rhs - CONSTRAINT_TOL
    return lhs <= rhs + CONSTRAINT_TOL


def check_constraints(params: AttackParams, strict: bool = False) -> bool:
    """True iff (g, g') is an allowed correlation pair for this omega.

    strict=False admits the boundary (within CONSTRAINT_TOL); strict=True
    keeps only the open interior.
    """
    return _constraints_hold(params.omega, params.g, params.g_prime, strict)


def violated_constraint(params: AttackParams) -> str | None:
    """Name of the first violated constraint, or None if physical."""
    omega, g, gp = params.omega, params.g, params.g_prime
    if abs(g) >= omega:
        return f"|g| < omega (|{g}| >= {omega})"
    if abs(gp) >= omega:
        return f"|g_prime| < omega (|{gp}| >= {omega})"
    lhs = omega * abs(g + gp)
    rhs = omega * omega + g * gp - 1.0
    if lhs > rhs + CONSTRAINT_TOL:
        return (
            "omega*|g + g_prime| <= omega^2 + g*g_prime - 1 "
            f"({lhs:g} > {rhs:g})"
        )
    return None


def boundary_curve(omega: float, n_samples: int) -> BoundaryCurve:
    """Sample the constraint boundary in the (g, g') plane.

    For each sign branch of |g + g'| the saturation condition is linear
    in g', so each g on a uniform open grid of (-omega, omega) yields a
    candidate g' = (omega^2 - 1 - s*omega*g) / (s*omega - g).  Candidates
    are kept only if they satisfy |g'| < omega and actually saturate the
    constraint (solving one branch can land in the other branch's sign
    region, where the candidate is spurious).  Both branches are covered
    and duplicates removed.
    """
    if omega <= 1.0:
        raise DomainError(
            f"boundary is empty: the physical region at omega = {omega} is a point"
        )
    if n_samples < 2:
        raise DomainError(f"need at least 2 samples, got {n_samples}")
    grid = np.linspace(-omega, omega, n_samples + 2)[1:-1]
    scale = max(1.0, omega * omega)
    points: dict[tuple[float, float], tuple[float, float]] = {}
    for s in (1.0, -1.0):
        for g in grid:
            den = s * omega - g
            if abs(den) < 1e-12:
                continue
            gp = (omega * omega - 1.0 - s * omega * g) / den
            if abs(gp) >= omega:
                continue
            residual = omega * abs(g + gp) - (omega * omega + g * gp - 1.0)
            if abs(residual) > CONSTRAINT_TOL * scale:
                continue
            key = (round(float(g), 12), round(float(gp), 12))
            points[key] = (float(g), float(gp))
    return BoundaryCurve(omega=float(omega), samples=tuple(sorted(points.values())))


def physical_grid(omega: float, resolution: int) -> list[tuple[float, float]]:
    """Uniform grid over (-omega, omega)^2 filtered to the physical region.

    The grid is open at +-omega (the marginal constraints are strict
    there) and always contains the origin.  Points are returned sorted
    by (g, g').
    """
    if resolution < 2:
        raise DomainError(f"grid resolution must be >= 2, got {resolution}")
    axis = np.linspace(-omega, omega, resolution + 2)[1:-1]
    axis[np.abs(axis) < 1e-15 * max(1.0, omega)] = 0.0
    points = [
        (float(g), float(gp))
        for g in axis
        for gp in axis
        if _constraints_hold(omega, float(g), float(gp), strict=False)
    ]
    if (0.0, 0.0) not in points:
        points.append((0.0, 0.0))
    points.sort()
    return points

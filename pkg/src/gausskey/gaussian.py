"""Gaussian-state covariance-matrix calculus in shot-noise units.

All covariance matrices (CMs) use the interleaved quadrature ordering
(q1, p1, ..., qn, pn) and shot-noise units, i.e. the vacuum quadrature
variance is 1.  A state is physical iff every symplectic eigenvalue is
>= 1 (up to the slack ``EPS_PHYS``).

Everything here is a pure function of its inputs; ``CovMat`` instances
are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Slack on the nu >= 1 physicality checks.
EPS_PHYS = 1e-9

# Maximum tolerated asymmetry |V - V^T| of a covariance matrix.
SYMMETRY_ATOL = 1e-12

# Relative tolerance for negative-eigenvalue residue and for the pairing
# of doubled singular values in the symplectic spectrum.
DEGENERACY_RTOL = 1e-9

_LOG2_E_HALF = math.log2(math.e / 2.0)


class DomainError(ValueError):
    """An input lies outside the physically meaningful domain."""


class NumericalDegeneracyError(RuntimeError):
    """A linear-algebra result is too degenerate to trust at working tolerance."""


@dataclass(frozen=True)
class CovMat:
    """Covariance matrix of an n-mode Gaussian state.

    The wrapped array is 2n x 2n, real and symmetric (checked to
    ``SYMMETRY_ATOL``), in (q1, p1, ..., qn, pn) ordering and shot-noise
    units.  The array is copied and frozen on construction.
    """

    mat: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.mat, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"covariance matrix must be square, got shape {m.shape}")
        if m.shape[0] == 0 or m.shape[0] % 2:
            raise DomainError(f"covariance matrix must be 2n x 2n, got shape {m.shape}")
        if not np.isfinite(m).all():
            raise DomainError("covariance matrix contains non-finite entries")
        if np.max(np.abs(m - m.T)) > SYMMETRY_ATOL:
            raise DomainError(
                f"covariance matrix is not symmetric to {SYMMETRY_ATOL:g}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    @property
    def n_modes(self) -> int:
        return self.mat.shape[0] // 2


def symplectic_form(n_modes: int) -> np.ndarray:
    """Direct sum of n copies of [[0, 1], [-1, 0]]."""
    if n_modes < 1:
        raise DomainError("need at least one mode")
    single = np.array([[0.0, 1.0], [-1.0, 0.0]])
    out = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        out[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = single
    return out


def direct_sum(*cms: CovMat) -> CovMat:
    """Covariance matrix of a product state."""
    dims = [cm.mat.shape[0] for cm in cms]
    out = np.zeros((sum(dims), sum(dims)))
    at = 0
    for cm, d in zip(cms, dims):
        out[at : at + d, at : at + d] = cm.mat
        at += d
    return CovMat(out)


def keep_modes(V: CovMat, modes: tuple[int, ...] | list[int]) -> CovMat:
    """Reduced covariance matrix of the listed modes, in the order given.

    Doubles as the canonical mode-permutation helper: passing a
    permutation of range(n) reorders the modes.
    """
    n = V.n_modes
    for m in modes:
        if not 0 <= m < n:
            raise DomainError(f"mode index {m} out of range for {n} modes")
    idx = [i for m in modes for i in (2 * m, 2 * m + 1)]
    return CovMat(V.mat[np.ix_(idx, idx)])


def tmsv_cm(mu: float) -> CovMat:
    """Two-mode squeezed vacuum CM with local variance mu >= 1.

    Diagonal blocks mu*I, off-diagonal blocks sqrt(mu^2-1)*Z with
    Z = diag(1, -1); mu = 1 is vacuum (x) vacuum.
    """
    if not (mu >= 1.0):
        raise DomainError(f"TMSV variance must satisfy mu >= 1, got {mu}")
    c = math.sqrt(mu * mu - 1.0)
    eye2 = np.eye(2)
    z = np.diag([1.0, -1.0])
    return CovMat(np.block([[mu * eye2, c * z], [c * z, mu * eye2]]))


def symplectic_spectrum(V: CovMat) -> np.ndarray:
    """Symplectic eigenvalues of V, sorted descending.

    Computed from the singular values of V^(1/2) Omega V^(1/2), a real
    antisymmetric matrix whose singular values are the symplectic
    eigenvalues, each doubled.  This stays accurate for the large,
    nearly degenerate spectra that the finite-modulation pipeline
    produces, where an eigendecomposition of -(Omega V)^2 loses four to
    five digits on the doubled eigenvalues.

    Raises
    ------
    NumericalDegeneracyError
        If V has a negative eigenvalue beyond tolerance, or the doubled
        singular values fail to pair up.
    """
    m = V.mat
    w, U = np.linalg.eigh(m)
    scale = max(1.0, float(w[-1]))
    if w[0] < -DEGENERACY_RTOL * scale:
        raise NumericalDegeneracyError(
            f"covariance matrix has negative eigenvalue {w[0]:g}"
        )
    root = (U * np.sqrt(np.clip(w, 0.0, None))) @ U.T
    L = root @ symplectic_form(V.n_modes) @ root
    sv = np.linalg.svd(L, compute_uv=False)  # descending, each nu twice
    mismatch = np.abs(sv[0::2] - sv[1::2])
    if np.max(mismatch) > DEGENERACY_RTOL * max(1.0, sv[0]):
        raise NumericalDegeneracyError(
            "symplectic spectrum did not split into doubled singular values "
            f"(worst pair mismatch {np.max(mismatch):g})"
        )
    return (sv[0::2] + sv[1::2]) / 2.0


def entropy_h(x: float) -> float:
    """Bosonic entropy of a symplectic eigenvalue, in bits.

    h(x) = (x+1)/2 log2 (x+1)/2 - (x-1)/2 log2 (x-1)/2, with h(1) = 0
    (the 0*log 0 convention).  Values in [1 - EPS_PHYS, 1] are clamped
    to 1; anything smaller is unphysical.
    """
    if x < 1.0 - EPS_PHYS:
        raise DomainError(f"unphysical symplectic eigenvalue {x} < 1")
    if x <= 1.0:
        return 0.0
    a = (x + 1.0) / 2.0
    b = (x - 1.0) / 2.0
    return a * math.log2(a) - b * math.log2(b)


def entropy_h_asymptotic(x: float) -> float:
    """Large-argument form of entropy_h: log2((e/2) x)."""
    if x <= 0.0:
        raise DomainError(f"entropy_h_asymptotic needs x > 0, got {x}")
    return _LOG2_E_HALF + math.log2(x)


def von_neumann_entropy(V: CovMat) -> float:
    """Entropy of a Gaussian state in bits: sum of entropy_h over the spectrum."""
    return float(sum(entropy_h(float(nu)) for nu in symplectic_spectrum(V)))


def beamsplitter_apply(V: CovMat, mode_a: int, mode_b: int, tau: float) -> CovMat:
    """Mix two modes on a beam splitter of transmissivity tau.

    The transmitted combination sqrt(tau)*A + sqrt(1-tau)*B replaces
    mode_a; mode_b carries the reflected arm -sqrt(1-tau)*A +
    sqrt(tau)*B.  Both outputs stay in the returned CM.
    """
    n = V.n_modes
    if mode_a == mode_b:
        raise DomainError("beam splitter needs two distinct modes")
    for m in (mode_a, mode_b):
        if not 0 <= m < n:
            raise DomainError(f"mode index {m} out of range for {n} modes")
    if not 0.0 <= tau <= 1.0:
        raise DomainError(f"transmissivity must lie in [0, 1], got {tau}")
    t = math.sqrt(tau)
    r = math.sqrt(1.0 - tau)
    S = np.eye(2 * n)
    a, b = 2 * mode_a, 2 * mode_b
    S[a : a + 2, a : a + 2] = t * np.eye(2)
    S[a : a + 2, b : b + 2] = r * np.eye(2)
    S[b : b + 2, a : a + 2] = -r * np.eye(2)
    S[b : b + 2, b : b + 2] = t * np.eye(2)
    out = S @ V.mat @ S.T
    # matmul round-off breaks exact symmetry at large variances
    return CovMat((out + out.T) / 2.0)


def _split_measured(V: CovMat, mode: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = V.n_modes
    if not 0 <= mode < n:
        raise DomainError(f"mode index {mode} out of range for {n} modes")
    if n < 2:
        raise DomainError("conditioning needs at least one retained mode")
    idx = [i for m in range(n) if m != mode for i in (2 * m, 2 * m + 1)]
    midx = [2 * mode, 2 * mode + 1]
    A = V.mat[np.ix_(idx, idx)]
    B = V.mat[np.ix_(idx, midx)]
    C = V.mat[np.ix_(midx, midx)]
    return A, B, C


def heterodyne_condition(V: CovMat, mode: int) -> CovMat:
    """Condition on a heterodyne measurement of one mode.

    Returns the Schur complement A - B (C + I)^-1 B^T on the retained
    modes.  The conditional CM of a Gaussian measurement is independent
    of the outcome, so no outcome argument exists.
    """
    A, B, C = _split_measured(V, mode)
    try:
        update = B @ np.linalg.solve(C + np.eye(2), B.T)
    except np.linalg.LinAlgError as exc:  # impossible for a physical state
        raise NumericalDegeneracyError(
            "singular heterodyne update; measured block + I is not invertible"
        ) from exc
    out = A - update
    return CovMat((out + out.T) / 2.0)


def homodyne_condition(V: CovMat, mode: int, quadrature: str) -> CovMat:
    """Condition on a homodyne measurement of one quadrature of one mode.

    The pseudo-inverse of the projected measured block is rank one, so
    the update reduces to subtracting the outer product of the cross
    covariances with the measured quadrature, divided by its variance.
    """
    if quadrature not in ("q", "p"):
        raise DomainError(f"quadrature must be 'q' or 'p', got {quadrature!r}")
    A, B, C = _split_measured(V, mode)
    j = 0 if quadrature == "q" else 1
    c = C[j, j]
    if c < 1e-12:
        raise DomainError(
            f"degenerate homodyne measurement: {quadrature} variance {c:g} below 1e-12"
        )
    b = B[:, j]
    out = A - np.outer(b, b) / c
    return CovMat((out + out.T) / 2.0)


def is_physical(V: CovMat) -> bool:
    """True iff every symplectic eigenvalue is >= 1 - EPS_PHYS."""
    try:
        spectrum = symplectic_spectrum(V)
    except NumericalDegeneracyError:
        return False
    return bool(spectrum[-1] >= 1.0 - EPS_PHYS)

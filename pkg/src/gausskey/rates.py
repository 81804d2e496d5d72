"""Secret-key rates of the one-way protocols under two-mode attacks.

Two protocol families are covered, both in reverse reconciliation:

* no-switching -- Bob heterodynes every mode;
* switching    -- Bob homodynes, either the same quadrature on both
  modes of a block ("switching") or one q and one p ("switching-mixed").

Each rate exists in two routes: a closed asymptotic form in which the
modulation variance cancels, and a finite-modulation numeric pipeline
built entirely from covariance-matrix operations (beam splitters,
entropies, measurement conditioning).  The pipeline is the oracle that
every closed form is validated against.

Conventions.  The source is a two-mode squeezed vacuum of local
variance mu + 1, so the classical modulation variance is mu - 1 and the
receiver variance is Lambda = tau*(mu+1) + (1-tau)*omega.  The mutual
information below uses these entanglement-based variances; the
prepare-and-measure bookkeeping (signal variance mu instead of mu + 1)
differs at finite mu by O(1/mu) and has the same asymptotics.  For the
homodyne protocols the block mutual information is
log2(V_B / V_B|A): two channel uses, each contributing half a log.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .attack import AttackParams, attack_cm, violated_constraint
from .gaussian import (
    CovMat,
    DomainError,
    beamsplitter_apply,
    direct_sum,
    entropy_h,
    heterodyne_condition,
    homodyne_condition,
    keep_modes,
    symplectic_spectrum,
    tmsv_cm,
)

NO_SWITCHING = "noswitching"
SWITCHING = "switching"
SWITCHING_MIXED = "switching-mixed"
VARIANTS = (NO_SWITCHING, SWITCHING, SWITCHING_MIXED)

# Reference modulation used when a report needs finite-mu quantities
# (mutual information, Holevo bound) in asymptotic mode.  Large enough
# for 1e-3 convergence, small enough to keep 64-bit conditioning.
DEFAULT_MU = 1.0e6

_LOG2_E_HALF = math.log2(math.e / 2.0)


@dataclass(frozen=True)
class ProtocolSpec:
    """Protocol variant plus the modulation bookkeeping.

    asymptotic=True selects the closed forms (mu, if given, only feeds
    the divergent report quantities); asymptotic=False runs the numeric
    pipeline and requires a finite mu > 1.
    """

    variant: str
    mu: float | None = None
    asymptotic: bool = True

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise DomainError(f"unknown protocol variant {self.variant!r}")
        if self.mu is not None and not (math.isfinite(self.mu) and self.mu > 1.0):
            raise DomainError(f"modulation variance must be finite and > 1, got {self.mu}")
        if not self.asymptotic and self.mu is None:
            raise DomainError("finite-modulation mode requires mu")

    @property
    def mu_value(self) -> float:
        return self.mu if self.mu is not None else DEFAULT_MU


@dataclass(frozen=True)
class RateReport:
    """Mutual information, Holevo bound and rate, plus their spectra.

    i_ab and holevo are bits per two-use block; rate is bits per channel
    use and equals (i_ab - holevo)/2 exactly as computed.
    """

    params: AttackParams
    spec: ProtocolSpec
    i_ab: float
    holevo: float
    rate: float
    total_spectrum: np.ndarray
    conditional_spectrum: np.ndarray


@dataclass(frozen=True)
class DerivedCoefficients:
    """Scalars shared by the covariance and rate formulas at fixed (params, mu)."""

    lam: float            # tau*(mu+1) + (1-tau)*omega
    phi: float            # sqrt(tau*((mu+1)^2 - 1))
    lam_tilde: float      # lam - tau
    lam_bar: float        # 1 + omega*(1-tau)
    lam_plus: float       # 1 + (1-tau)*(omega + g)
    lam_minus: float
    lam_prime_plus: float  # same with g'
    lam_prime_minus: float
    k: float               # conditional-CM numerators, heterodyne protocol
    k_tilde: float
    k_prime: float
    k_tilde_prime: float
    zeta: float            # nu_minus / (2*(omega - g'))
    zeta_prime: float      # nu_minus / (2*(omega - g))
    kappa_plus: float      # (omega + g') / (omega + g)
    kappa_minus: float     # (omega - g') / (omega - g)


def _require_physical(params: AttackParams) -> None:
    violated = violated_constraint(params)
    if violated is not None:
        raise DomainError(f"unphysical attack parameters: violated {violated}")


def _require_finite_mu(mu: float) -> None:
    if not (math.isfinite(mu) and mu > 1.0):
        raise DomainError(f"modulation variance must be finite and > 1, got {mu}")


def total_spectrum_asymptotic(params: AttackParams, mu: float) -> np.ndarray:
    """Large-mu symplectic spectrum of the joint sender/receiver state.

    Two attack-correlation values sqrt((omega+-g)(omega+-g')) and the
    doubly degenerate (1-tau)*mu, sorted descending.
    """
    _require_physical(params)
    om, g, gp = params.omega, params.g, params.g_prime
    nu_plus = math.sqrt((om + g) * (om + gp))
    nu_minus = math.sqrt((om - g) * (om - gp))
    big = (1.0 - params.tau) * mu
    return np.sort(np.array([nu_plus, nu_minus, big, big]))[::-1]


def _nu_pm(params: AttackParams) -> tuple[float, float]:
    om, g, gp = params.omega, params.g, params.g_prime
    return (
        math.sqrt((om + g) * (om + gp)),
        math.sqrt((om - g) * (om - gp)),
    )


def derived_coefficients(params: AttackParams, mu: float) -> DerivedCoefficients:
    _require_finite_mu(mu)
    tau, om, g, gp = params.tau, params.omega, params.g, params.g_prime
    lam = tau * (mu + 1.0) + (1.0 - tau) * om
    phi2 = tau * mu * (mu + 2.0)
    d_g = (lam + 1.0) ** 2 - (1.0 - tau) ** 2 * g * g
    d_gp = (lam + 1.0) ** 2 - (1.0 - tau) ** 2 * gp * gp
    nu_minus = _nu_pm(params)[1]
    return DerivedCoefficients(
        lam=lam,
        phi=math.sqrt(phi2),
        lam_tilde=lam - tau,
        lam_bar=1.0 + om * (1.0 - tau),
        lam_plus=1.0 + (1.0 - tau) * (om + g),
        lam_minus=1.0 + (1.0 - tau) * (om - g),
        lam_prime_plus=1.0 + (1.0 - tau) * (om + gp),
        lam_prime_minus=1.0 + (1.0 - tau) * (om - gp),
        k=(mu + 1.0) * d_g - phi2 * (lam + 1.0),
        k_tilde=(1.0 - tau) * g * phi2,
        k_prime=(mu + 1.0) * d_gp - phi2 * (lam + 1.0),
        k_tilde_prime=(1.0 - tau) * gp * phi2,
        zeta=nu_minus / (2.0 * (om - gp)),
        zeta_prime=nu_minus / (2.0 * (om - g)),
        kappa_plus=(om + gp) / (om + g),
        kappa_minus=(om - gp) / (om - g),
    )


def total_cm(params: AttackParams, mu: float) -> CovMat:
    """Joint CM of sender modes (a, a') and receiver modes (B, B').

    Closed form of the two-beam-splitter construction: sender blocks
    (mu+1)*I, receiver blocks Lambda*I, sender/receiver cross Phi*Z, and
    the attack correlations (1-tau)*diag(g, g') between B and B'.
    """
    _require_physical(params)
    _require_finite_mu(mu)
    tau, om, g, gp = params.tau, params.omega, params.g, params.g_prime
    lam = tau * (mu + 1.0) + (1.0 - tau) * om
    phi = math.sqrt(tau * ((mu + 1.0) ** 2 - 1.0))
    eye2 = np.eye(2)
    z = np.diag([1.0, -1.0])
    G = np.diag([g, gp])
    V = np.zeros((8, 8))
    V[0:2, 0:2] = (mu + 1.0) * eye2
    V[2:4, 2:4] = (mu + 1.0) * eye2
    V[4:6, 4:6] = lam * eye2
    V[6:8, 6:8] = lam * eye2
    V[0:2, 4:6] = V[4:6, 0:2] = phi * z
    V[2:4, 6:8] = V[6:8, 2:4] = phi * z
    V[4:6, 6:8] = V[6:8, 4:6] = (1.0 - tau) * G
    return CovMat(V)


def total_cm_via_beamsplitters(params: AttackParams, mu: float) -> CovMat:
    """Constructive route to total_cm: mix two TMSVs with the ancilla pair.

    Starts from TMSV(mu+1) (x) TMSV(mu+1) (x) attack CM in mode order
    (a, A, a', A', e, E), applies a beam splitter of transmissivity tau
    on (A, e) and on (A', E), keeps (a, a', B, B') where B, B' are the
    transmitted outputs, and discards the reflected arms.
    """
    _require_physical(params)
    _require_finite_mu(mu)
    src = direct_sum(
        tmsv_cm(mu + 1.0),
        tmsv_cm(mu + 1.0),
        attack_cm(params.omega, params.g, params.g_prime),
    )
    mixed = beamsplitter_apply(src, 1, 4, params.tau)
    mixed = beamsplitter_apply(mixed, 3, 5, params.tau)
    return keep_modes(mixed, (0, 2, 1, 3))


def mutual_information(params: AttackParams, spec: ProtocolSpec) -> float:
    """Sender/receiver mutual information, bits per two-use block.

    Independent of (g, g') in every variant.  Heterodyne reception:
    2 log2((V_B + 1)/(V_B|A + 1)); homodyne reception (both switching
    variants): log2(V_B / V_B|A).  Finite mode uses the entanglement-
    based V_B = Lambda; asymptotic mode replaces Lambda by tau*mu.
    """
    tau, om = params.tau, params.omega
    het_den = 1.0 + tau + (1.0 - tau) * om
    hom_den = tau + (1.0 - tau) * om
    if spec.asymptotic:
        mu = spec.mu_value
        if spec.variant == NO_SWITCHING:
            return 2.0 * math.log2(tau * mu / het_den)
        return math.log2(tau * mu / hom_den)
    mu = spec.mu
    _require_finite_mu(mu)
    lam = tau * (mu + 1.0) + (1.0 - tau) * om
    if spec.variant == NO_SWITCHING:
        return 2.0 * math.log2((lam + 1.0) / het_den)
    return math.log2(lam / hom_den)


def conditional_cm_noswitching(params: AttackParams, mu: float) -> CovMat:
    """Sender CM conditioned on heterodyne detection of both receiver modes.

    Closed form of the double Schur-complement update.  The q and p
    sectors decouple; each is a symmetric 2x2 with numerators k, k_tilde
    (q, denominator D_g) and k_prime, k_tilde_prime (p, denominator
    D_g').  The a/a' cross terms come out positive for positive
    correlations; that sign is fixed by the measurement update (its
    global flip is a spectrum-preserving reflection of one mode).
    """
    _require_physical(params)
    co = derived_coefficients(params, mu)
    tau, g, gp = params.tau, params.g, params.g_prime
    d_g = (co.lam + 1.0) ** 2 - (1.0 - tau) ** 2 * g * g
    d_gp = (co.lam + 1.0) ** 2 - (1.0 - tau) ** 2 * gp * gp
    V = np.zeros((4, 4))
    V[0, 0] = V[2, 2] = co.k / d_g
    V[1, 1] = V[3, 3] = co.k_prime / d_gp
    V[0, 2] = V[2, 0] = co.k_tilde / d_g
    V[1, 3] = V[3, 1] = co.k_tilde_prime / d_gp
    return CovMat(V)


def conditional_spectrum_noswitching(params: AttackParams) -> np.ndarray:
    """Large-mu conditional spectrum after double heterodyne detection.

    {sqrt(lam_plus*lam_prime_plus), sqrt(lam_minus*lam_prime_minus)}/tau
    with lam_pm = 1 + (1-tau)*(omega +- g) and primes carrying g'.
    Independent of the modulation.
    """
    _require_physical(params)
    tau, om, g, gp = params.tau, params.omega, params.g, params.g_prime
    lp = 1.0 + (1.0 - tau) * (om + g)
    lm = 1.0 + (1.0 - tau) * (om - g)
    lpp = 1.0 + (1.0 - tau) * (om + gp)
    lmp = 1.0 + (1.0 - tau) * (om - gp)
    vals = np.array([math.sqrt(lp * lpp) / tau, math.sqrt(lm * lmp) / tau])
    return np.sort(vals)[::-1]


def holevo_noswitching(params: AttackParams, mu: float) -> float:
    """Asymptotic Holevo bound for the heterodyne protocol, bits per block.

    2 log2((e/2)(1-tau) mu) plus the entropy difference between the
    attack-correlation eigenvalues and the conditional ones.  Diverges
    logarithmically in mu; the divergence cancels against the mutual
    information in the rate.
    """
    _require_physical(params)
    if params.tau >= 1.0:
        raise DomainError(
            "Holevo bound degenerates at tau = 1: the environment decouples"
        )
    nu_plus, nu_minus = _nu_pm(params)
    nbar_plus, nbar_minus = conditional_spectrum_noswitching(params)
    return (
        2.0 * (_LOG2_E_HALF + math.log2((1.0 - params.tau) * mu))
        + entropy_h(nu_plus)
        + entropy_h(nu_minus)
        - entropy_h(nbar_plus)
        - entropy_h(nbar_minus)
    )


def _require_open_tau(params: AttackParams) -> None:
    if not 0.0 < params.tau < 1.0:
        raise DomainError(
            f"rate formulas need 0 < tau < 1 (log singularities at the ends), got {params.tau}"
        )


def key_rate_noswitching(params: AttackParams) -> float:
    """Asymptotic key rate of the no-switching protocol, bits per use.

    log2((2/e) tau / ((1-tau)(1+tau+(1-tau) omega))) plus half the
    entropy gain of conditioning; the modulation has cancelled here.
    The block rate is twice this value.
    """
    _require_physical(params)
    _require_open_tau(params)
    tau, om = params.tau, params.omega
    nu_plus, nu_minus = _nu_pm(params)
    nbar_plus, nbar_minus = conditional_spectrum_noswitching(params)
    den = 1.0 + tau + (1.0 - tau) * om
    return (
        math.log2(2.0 / math.e * tau / ((1.0 - tau) * den))
        + 0.5
        * (
            entropy_h(nbar_plus)
            + entropy_h(nbar_minus)
            - entropy_h(nu_plus)
            - entropy_h(nu_minus)
        )
    )


def conditional_spectra_switching(
    params: AttackParams,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Conditional-spectrum coefficients for the homodyne protocols.

    The conditional eigenvalues grow as sqrt(mu), so each branch is
    returned as the pair of coefficients of sqrt(mu): q-branch
    sqrt((1-tau)(omega +- g)/tau), p-branch the same with g', and the
    mixed branch doubly degenerate sqrt((1-tau) omega / tau).
    """
    _require_physical(params)
    tau, om, g, gp = params.tau, params.omega, params.g, params.g_prime
    ratio = (1.0 - tau) / tau
    q = np.sort(np.array([math.sqrt(ratio * (om + g)), math.sqrt(ratio * (om - g))]))[::-1]
    p = np.sort(np.array([math.sqrt(ratio * (om + gp)), math.sqrt(ratio * (om - gp))]))[::-1]
    m = math.sqrt(ratio * om)
    return q, p, np.array([m, m])


def conditional_cm_switching(
    params: AttackParams, mu: float, quadratures: tuple[str, str] = ("q", "q")
) -> CovMat:
    """Sender CM conditioned on homodyne detection of both receiver modes.

    quadratures gives the measured quadrature of (B, B').  Matching
    quadratures leave the other sector untouched at variance mu + 1 and
    correlate the measured sector through the attack; mixed quadratures
    decouple the two senders entirely, removing every trace of (g, g').
    """
    _require_physical(params)
    _require_finite_mu(mu)
    for quad in quadratures:
        if quad not in ("q", "p"):
            raise DomainError(f"quadrature must be 'q' or 'p', got {quad!r}")
    tau, om, g, gp = params.tau, params.omega, params.g, params.g_prime
    lam = tau * (mu + 1.0) + (1.0 - tau) * om
    phi2 = tau * mu * (mu + 2.0)
    V = np.diag([mu + 1.0] * 4)
    if quadratures[0] == quadratures[1]:
        corr = g if quadratures[0] == "q" else gp
        d = lam * lam - (1.0 - tau) ** 2 * corr * corr
        diag = (mu + 1.0) - phi2 * lam / d
        cross = phi2 * (1.0 - tau) * corr / d
        j = 0 if quadratures[0] == "q" else 1
        V[j, j] = V[2 + j, 2 + j] = diag
        V[j, 2 + j] = V[2 + j, j] = cross
    else:
        diag = (mu + 1.0) - phi2 / lam
        j0 = 0 if quadratures[0] == "q" else 1
        j1 = 0 if quadratures[1] == "q" else 1
        V[j0, j0] = diag
        V[2 + j1, 2 + j1] = diag
    return CovMat(V)


def holevo_switching(params: AttackParams, mu: float, mixed: bool = False) -> float:
    """Asymptotic Holevo bound for the homodyne protocols, bits per block.

    The conditional entropy averages Bob's two quadrature choices, which
    replaces the geometric mean sqrt(nu_plus*nu_minus) by omega in the
    mixed variant.
    """
    _require_physical(params)
    if params.tau >= 1.0:
        raise DomainError(
            "Holevo bound degenerates at tau = 1: the environment decouples"
        )
    nu_plus, nu_minus = _nu_pm(params)
    gm = params.omega if mixed else math.sqrt(nu_plus * nu_minus)
    return (
        entropy_h(nu_plus)
        + entropy_h(nu_minus)
        + math.log2((1.0 - params.tau) * params.tau * mu / gm)
    )


def key_rate_switching(params: AttackParams) -> float:
    """Asymptotic key rate with both block modes homodyned in one quadrature.

    0.5 log2(sqrt(nu_plus*nu_minus) / ((1-tau)(tau+(1-tau) omega)))
    minus the average entropy of the attack-correlation eigenvalues.
    """
    _require_physical(params)
    _require_open_tau(params)
    tau, om = params.tau, params.omega
    nu_plus, nu_minus = _nu_pm(params)
    den = (1.0 - tau) * (tau + (1.0 - tau) * om)
    return 0.5 * math.log2(math.sqrt(nu_plus * nu_minus) / den) - 0.5 * (
        entropy_h(nu_plus) + entropy_h(nu_minus)
    )


def key_rate_switching_mixed(params: AttackParams) -> float:
    """Asymptotic key rate with the two block modes homodyned in q and p.

    Same shape as key_rate_switching with omega in place of the
    geometric mean sqrt(nu_plus*nu_minus); the correlations enter only
    through the entropy term.
    """
    _require_physical(params)
    _require_open_tau(params)
    tau, om = params.tau, params.omega
    nu_plus, nu_minus = _nu_pm(params)
    den = (1.0 - tau) * (tau + (1.0 - tau) * om)
    return 0.5 * math.log2(om / den) - 0.5 * (
        entropy_h(nu_plus) + entropy_h(nu_minus)
    )


def key_rate_asymptotic(params: AttackParams, variant: str) -> float:
    """Dispatch the mu-free closed-form rate for a protocol variant."""
    if variant == NO_SWITCHING:
        return key_rate_noswitching(params)
    if variant == SWITCHING:
        return key_rate_switching(params)
    if variant == SWITCHING_MIXED:
        return key_rate_switching_mixed(params)
    raise DomainError(f"unknown protocol variant {variant!r}")


def key_rate_numeric(params: AttackParams, spec: ProtocolSpec) -> RateReport:
    """Finite-modulation rate computed purely through CM operations.

    Builds the joint state constructively, reads the receiver variances
    off the CM, and obtains both entropies from measured-down Schur
    complements; no asymptotic closed form enters.  Converges to the
    closed-form rate as O(1/mu).
    """
    if spec.asymptotic:
        raise DomainError("key_rate_numeric needs a finite-modulation ProtocolSpec")
    mu = spec.mu
    V = total_cm_via_beamsplitters(params, mu)
    s_total = float(sum(entropy_h(float(nu)) for nu in symplectic_spectrum(V)))

    v_b = V.mat[4, 4]
    receivers = heterodyne_condition(heterodyne_condition(V, 0), 0)
    v_b_cond = receivers.mat[0, 0]

    if spec.variant == NO_SWITCHING:
        cond = heterodyne_condition(heterodyne_condition(V, 3), 2)
        cond_spectrum = symplectic_spectrum(cond)
        s_cond = float(sum(entropy_h(float(nu)) for nu in cond_spectrum))
        i_ab = 2.0 * math.log2((v_b + 1.0) / (v_b_cond + 1.0))
    elif spec.variant == SWITCHING:
        cond_q = homodyne_condition(homodyne_condition(V, 3, "q"), 2, "q")
        cond_p = homodyne_condition(homodyne_condition(V, 3, "p"), 2, "p")
        spec_q = symplectic_spectrum(cond_q)
        spec_p = symplectic_spectrum(cond_p)
        s_cond = 0.5 * float(
            sum(entropy_h(float(nu)) for nu in spec_q)
            + sum(entropy_h(float(nu)) for nu in spec_p)
        )
        cond_spectrum = np.sort(np.concatenate([spec_q, spec_p]))[::-1]
        i_ab = math.log2(v_b / v_b_cond)
    elif spec.variant == SWITCHING_MIXED:
        cond = homodyne_condition(homodyne_condition(V, 3, "p"), 2, "q")
        cond_spectrum = symplectic_spectrum(cond)
        s_cond = float(sum(entropy_h(float(nu)) for nu in cond_spectrum))
        i_ab = math.log2(v_b / v_b_cond)
    else:
        raise DomainError(f"unknown protocol variant {spec.variant!r}")

    holevo = s_total - s_cond
    return RateReport(
        params=params,
        spec=spec,
        i_ab=i_ab,
        holevo=holevo,
        rate=(i_ab - holevo) / 2.0,
        total_spectrum=symplectic_spectrum(V),
        conditional_spectrum=cond_spectrum,
    )


def rate_report(params: AttackParams, spec: ProtocolSpec) -> RateReport:
    """RateReport for either route.

    Asymptotic mode evaluates the divergent pieces (mutual information,
    Holevo bound) at spec.mu_value so that rate = (i_ab - holevo)/2
    holds exactly; the rate itself equals the mu-free closed form.
    """
    if not spec.asymptotic:
        return key_rate_numeric(params, spec)
    _require_physical(params)
    _require_open_tau(params)
    mu = spec.mu_value
    i_ab = mutual_information(params, spec)
    if spec.variant == NO_SWITCHING:
        holevo = holevo_noswitching(params, mu)
        cond_spectrum = conditional_spectrum_noswitching(params)
    else:
        mixed = spec.variant == SWITCHING_MIXED
        holevo = holevo_switching(params, mu, mixed=mixed)
        q, p, mix = conditional_spectra_switching(params)
        coeffs = mix if mixed else np.concatenate([q, p])
        cond_spectrum = np.sort(coeffs * math.sqrt(mu))[::-1]
    return RateReport(
        params=params,
        spec=spec,
        i_ab=i_ab,
        holevo=holevo,
        rate=(i_ab - holevo) / 2.0,
        total_spectrum=total_spectrum_asymptotic(params, mu),
        conditional_spectrum=cond_spectrum,
    )

"""Closed-form dynamics of a central spin dephased by a bath of spins.

Each bath spin j couples to the central spin through sigma_z with strength
g_j, so conditional on the central pointer branch s = +/- the spin evolves
under the branch unitary

    U_s(t) = exp(+i s (g_j t / 2) sigma_z).

This sign and angle convention is normative for the whole package; under it
the single-spin dephasing factor is exactly

    gamma_j(t) = cos(g_j t) + i (2 lambda_j - 1) cos(beta_j) sin(g_j t)

and the branch-pair fidelity is exactly

    b_j(t) = sqrt(1 - (2 lambda_j - 1)^2 sin^2(beta_j) sin^2(g_j t)).

The brute-force simulator in :mod:`sbskit.oracle` certifies both closed
forms against explicit matrix evolution.

Initial spin states are parametrized by z-y-z Euler angles and an
eigenvalue lambda: rho(0) = R D R^dagger with D = diag(lambda, 1-lambda).
The third Euler angle rotates within the eigenbasis of D and therefore
drops out of rho(0); it is kept in :class:`SpinParams` only so sampled
parameter records are complete.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# above this many spins, products switch to log-space accumulation
DIRECT_PRODUCT_LIMIT = 64

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SpinParams:
    """One bath spin: Euler angles, eigenvalue and coupling constant.

    alpha, gamma_euler in [0, 2*pi); beta in [0, pi]; lam in [0, 1];
    g is the sigma_z coupling in inverse-time units.
    """

    alpha: float
    beta: float
    gamma_euler: float
    lam: float
    g: float

    def __post_init__(self):
        if not (0.0 <= self.alpha < TWO_PI + 1e-12):
            raise ValueError(f"alpha {self.alpha} outside [0, 2pi)")
        if not (0.0 <= self.beta <= math.pi + 1e-12):
            raise ValueError(f"beta {self.beta} outside [0, pi]")
        if not (0.0 <= self.gamma_euler < TWO_PI + 1e-12):
            raise ValueError(f"gamma_euler {self.gamma_euler} outside [0, 2pi)")
        if not (0.0 <= self.lam <= 1.0):
            raise ValueError(f"lam {self.lam} outside [0, 1]")


@dataclass(frozen=True)
class MacrofractionSpec:
    """A nonempty group of bath spins read out jointly by one observer."""

    spins: tuple

    def __post_init__(self):
        if len(self.spins) < 1:
            raise ValueError("macrofraction must contain at least one spin")

    @property
    def size(self) -> int:
        return len(self.spins)


@dataclass(frozen=True)
class EnvironmentSpec:
    """Observed macrofractions plus the discarded (unobserved) spins."""

    observed: tuple  # tuple of MacrofractionSpec
    unobserved: tuple  # tuple of SpinParams

    @property
    def n_total(self) -> int:
        return sum(m.size for m in self.observed) + len(self.unobserved)

    @property
    def n_observed(self) -> int:
        return sum(m.size for m in self.observed)

    @property
    def fraction_observed(self) -> float:
        return self.n_observed / self.n_total


def euler_rotation(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """z-y-z Euler rotation R_z(alpha) R_y(beta) R_z(gamma) in SU(2)."""
    c, s = math.cos(beta / 2.0), math.sin(beta / 2.0)
    return np.array(
        [
            [np.exp(-0.5j * (alpha + gamma)) * c, -np.exp(-0.5j * (alpha - gamma)) * s],
            [np.exp(0.5j * (alpha - gamma)) * s, np.exp(0.5j * (alpha + gamma)) * c],
        ]
    )


def initial_spin_state(p: SpinParams) -> np.ndarray:
    """rho(0) = R diag(lam, 1-lam) R^dagger; eigenvalues {lam, 1-lam}."""
    r = euler_rotation(p.alpha, p.beta, p.gamma_euler)
    return (r * np.array([p.lam, 1.0 - p.lam])) @ r.conj().T


def pi_diag(p: SpinParams) -> float:
    """Population of the upper level, (1 + (2 lam - 1) cos beta) / 2.

    The sigma_z branch unitaries leave it constant in time.
    """
    return 0.5 * (1.0 + (2.0 * p.lam - 1.0) * math.cos(p.beta))


def delta(p: SpinParams) -> complex:
    """Initial off-diagonal element, (1/2) sin(beta) e^{-i alpha} (2 lam - 1)."""
    return 0.5 * math.sin(p.beta) * np.exp(-1j * p.alpha) * (2.0 * p.lam - 1.0)


def branch_unitary(p: SpinParams, t: float, sign: int) -> np.ndarray:
    """U_s(t) = exp(+i s (g t / 2) sigma_z) for s = +/- 1."""
    phase = 0.5j * sign * p.g * t
    return np.diag([np.exp(phase), np.exp(-phase)])


def evolved_branch_states(p: SpinParams, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Branch states (rho_plus, rho_minus) at time t >= 0.

    Both share the fixed diagonal (pi, 1-pi) and carry off-diagonals
    e^{+i s g t} delta; the spectrum {lam, 1-lam} is conserved.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    pi = pi_diag(p)
    d = delta(p)
    out = []
    for sign in (+1, -1):
        off = np.exp(1j * sign * p.g * t) * d
        out.append(np.array([[pi, off], [np.conj(off), 1.0 - pi]]))
    return out[0], out[1]


def _param_arrays(spins: Sequence[SpinParams]):
    lam = np.array([s.lam for s in spins])
    beta = np.array([s.beta for s in spins])
    g = np.array([s.g for s in spins])
    return lam, beta, g


def gamma_factors(lam: np.ndarray, beta: np.ndarray, g: np.ndarray, t: float) -> np.ndarray:
    """Per-spin dephasing factors cos(gt) + i (2 lam - 1) cos(beta) sin(gt)."""
    gt = g * t
    return np.cos(gt) + 1j * (2.0 * lam - 1.0) * np.cos(beta) * np.sin(gt)


def b2_factors(lam: np.ndarray, beta: np.ndarray, g: np.ndarray, t: float) -> np.ndarray:
    """Per-spin squared fidelities 1 - (2 lam - 1)^2 sin^2(beta) sin^2(gt)."""
    val = 1.0 - (2.0 * lam - 1.0) ** 2 * np.sin(beta) ** 2 * np.sin(g * t) ** 2
    # rounding can push an exact zero slightly negative
    return np.clip(val, 0.0, None)


def _product(factors: np.ndarray) -> complex:
    """Complex product, in log-magnitude + phase form for long inputs."""
    if factors.size <= DIRECT_PRODUCT_LIMIT:
        return complex(np.prod(factors)) if factors.size else 1.0 + 0.0j
    mags = np.abs(factors)
    if np.any(mags == 0.0):
        return 0.0 + 0.0j
    log_mag = float(np.sum(np.log(mags)))
    phase = float(np.sum(np.angle(factors)))
    return complex(np.exp(log_mag) * np.exp(1j * phase))


def decoherence_factor(unobserved: Sequence[SpinParams], t: float) -> complex:
    """Collective dephasing factor over the unobserved spins at time t.

    Product of the per-spin factors; |result| <= 1 and result(0) = 1.
    Switches to log-space accumulation above DIRECT_PRODUCT_LIMIT spins so
    the product of thousands of sub-unit moduli does not underflow.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if not unobserved:
        return 1.0 + 0.0j
    lam, beta, g = _param_arrays(unobserved)
    return _product(gamma_factors(lam, beta, g, t))


def macrofraction_fidelity(mac: MacrofractionSpec, t: float) -> float:
    """Fidelity between the two branch states of a whole macrofraction.

    Multiplicative over spins; evaluated as exp of a log sum for large
    macrofractions.  Returns exactly 0 when any spin reaches a fidelity
    zero (one-shot distinguishability).
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    lam, beta, g = _param_arrays(mac.spins)
    b2 = b2_factors(lam, beta, g, t)
    if b2.size <= DIRECT_PRODUCT_LIMIT:
        return float(np.sqrt(np.prod(b2)))
    if np.any(b2 == 0.0):
        return 0.0
    return float(np.exp(0.5 * np.sum(np.log(b2))))


def spin_fidelity_trace_det(p: SpinParams, t: float) -> float:
    """Single-spin branch fidelity via the 2x2 trace/determinant route.

    For a 2x2 PSD matrix M, tr sqrt(M) = sqrt(tr M + 2 sqrt(det M)); here
    tr M = lam^2 + (1-lam)^2 - (2 lam - 1)^2 sin^2(beta) sin^2(gt) and
    det M = lam^2 (1-lam)^2.
    """
    tr_m = (
        p.lam**2
        + (1.0 - p.lam) ** 2
        - (2.0 * p.lam - 1.0) ** 2 * math.sin(p.beta) ** 2 * math.sin(p.g * t) ** 2
    )
    det_m = p.lam**2 * (1.0 - p.lam) ** 2
    return math.sqrt(max(tr_m + 2.0 * math.sqrt(det_m), 0.0))


def lln_exponents(p: SpinParams, t: float) -> tuple[float, float]:
    """Per-spin exponents (kappa, chi) of the large-bath exponential forms.

    kappa = -log(1 - (2 lam - 1)^2 sin^2 beta sin^2(gt)) so that the
    macrofraction fidelity is exp(-sum kappa_j / 2); chi = -log|gamma_j|^2
    so that |gamma|^2 = exp(-sum chi_j).  An exact zero of the fidelity or
    of |gamma| is reported as +inf.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    x = (2.0 * p.lam - 1.0) ** 2 * math.sin(p.beta) ** 2 * math.sin(p.g * t) ** 2
    kappa = math.inf if x >= 1.0 else -math.log1p(-x)
    y = math.sin(p.g * t) ** 2 * (-1.0 + (2.0 * p.lam - 1.0) ** 2 * math.cos(p.beta) ** 2)
    chi = math.inf if 1.0 + y <= 0.0 else -math.log1p(y)
    return kappa, chi


def short_time_exponents(g2bar: float, t: float) -> tuple[float, float]:
    """Leading small-t means of the exponents: (2/5) g2bar t^2, (4/5) g2bar t^2.

    Valid for Haar-distributed angles, quadratically tilted eigenvalue
    measure and i.i.d. couplings with mean square g2bar.
    """
    if t < 0 or g2bar < 0:
        raise ValueError("t and g2bar must be >= 0")
    base = g2bar * t * t
    return 0.4 * base, 0.8 * base


def time_scales(
    n_total: int, n_mac: int, f: float, g2bar: float
) -> tuple[float, float, float]:
    """Broadcasting time t_B, decoherence time t_D and (t_B/t_D)^2.

    t_B = sqrt(5 ln(n_mac) / (g2bar n_mac)) is when the macrofraction
    fidelity reaches ~1/n_mac under the short-time exponent; t_D =
    sqrt(5 ln(n_mac) / (4 g2bar (1-f) n_total)) is the matching scale for
    |gamma|^2 over the (1-f) n_total unobserved spins.  The squared ratio
    4 (1-f) n_total / n_mac is returned in exact algebraic form.
    """
    if n_mac < 2:
        raise ValueError("n_mac must be >= 2 so that ln(n_mac) > 0")
    if not (0.0 <= f < 1.0):
        raise ValueError("f must lie in [0, 1)")
    if g2bar <= 0:
        raise ValueError("g2bar must be > 0")
    log_nm = math.log(n_mac)
    t_b = math.sqrt(5.0 * log_nm / (g2bar * n_mac))
    t_d = math.sqrt(5.0 * log_nm / (4.0 * g2bar * (1.0 - f) * n_total))
    ratio_sq = 4.0 * (1.0 - f) * n_total / n_mac
    return t_b, t_d, ratio_sq

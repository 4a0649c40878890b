"""Two-state discrimination: Helstrom measurements, majority votes over a
macrofraction, and the Chernoff / Kolmogorov bounds on their performance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import densmat
from .spin_model import SpinParams, delta

# eigenvalues of the weighted difference below this count as ties
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ProjectorPair:
    """Complete two-outcome projective measurement {P_plus, P_minus}.

    ``degenerate`` marks the fallback convention used when the two states
    to discriminate coincide (no information in the measurement).
    """

    p_plus: np.ndarray
    p_minus: np.ndarray
    degenerate: bool = False

    def family(self) -> list[np.ndarray]:
        return [self.p_plus, self.p_minus]


@dataclass(frozen=True)
class MajorityStats:
    """Majority-vote summary for a macrofraction of n_mac spins."""

    n_mac: int
    p_bar: float
    s_bar: float
    p_tilde_exact: float
    chernoff_lb: float


def helstrom_pair(
    rho_plus: np.ndarray,
    rho_minus: np.ndarray,
    weights: tuple[float, float] | None = None,
) -> ProjectorPair:
    """Minimum-error projective measurement for two states.

    P_plus projects on the strictly positive eigenspace of
    w_plus rho_plus - w_minus rho_minus (equal weights by default) and
    P_minus is its complement.  With equal weights the achieved error is
    (1/2)(1 - ||rho_plus - rho_minus||_1 / 2); identical states yield
    P_plus = 0 and error 1/2.
    """
    rho_plus = densmat.check_square(rho_plus)
    rho_minus = densmat.check_square(rho_minus)
    if rho_plus.shape != rho_minus.shape:
        raise ValueError(f"dimension mismatch: {rho_plus.shape} vs {rho_minus.shape}")
    w_p, w_m = (0.5, 0.5) if weights is None else weights
    diff = w_p * rho_plus - w_m * rho_minus
    w, v = np.linalg.eigh(diff)
    pos = v[:, w > TIE_TOLERANCE]
    p_plus = pos @ pos.conj().T
    dim = rho_plus.shape[0]
    return ProjectorPair(p_plus, np.eye(dim, dtype=complex) - p_plus, pos.shape[1] == 0)


def helstrom_spin_analytic(p: SpinParams, t: float) -> ProjectorPair:
    """Closed-form Helstrom pair for the evolved branch states of one spin.

    The branch difference at time t is purely off-diagonal with entry
    2 i sin(gt) delta, so for sin(gt) delta != 0 the optimal projectors are

        P_+/- = [[1/2, +/- sgn(sin gt) i delta / (2 |delta|)],
                 [-/+ sgn(sin gt) i delta* / (2 |delta|), 1/2]].

    Degenerate inputs (delta = 0 or sin(gt) = 0) fall back to the flagged
    canonical pair P_plus = diag(1, 0).
    """
    d = delta(p)
    s = math.sin(p.g * t)
    # the branch difference has eigenvalues +/- 2 |sin(gt)| |delta|; below the
    # tie tolerance the measurement carries no information
    if 2.0 * abs(d) * abs(s) <= TIE_TOLERANCE:
        return ProjectorPair(
            np.diag([1.0 + 0.0j, 0.0j]), np.diag([0.0j, 1.0 + 0.0j]), degenerate=True
        )
    u = 1j * math.copysign(1.0, s) * d / (2.0 * abs(d))
    p_plus = np.array([[0.5, u], [np.conj(u), 0.5]])
    return ProjectorPair(p_plus, np.eye(2, dtype=complex) - p_plus, False)


def local_success_probability(p: SpinParams, t: float) -> float:
    """Helstrom success probability for one spin, 1/2 + |delta| |sin(gt)|.

    Identical for either branch; equals Tr[P_s rho_s(t)] with the analytic
    projectors.
    """
    return 0.5 + abs(delta(p)) * abs(math.sin(p.g * t))


def majority_success(n_mac: int, p_bar: float) -> float:
    """P[X > n_mac / 2] for X ~ Binomial(n_mac, p_bar), ties count as failure.

    One anchor term at the mode of the tail is computed in log space via
    lgamma; the rest follows the multiplicative term recurrence, so the
    result stays accurate to ~1e-11 relative up to n_mac ~ 1e4 and never
    underflows prematurely.
    """
    if n_mac < 1:
        raise ValueError("n_mac must be >= 1")
    if not (0.0 <= p_bar <= 1.0):
        raise ValueError(f"p_bar {p_bar} outside [0, 1]")
    if p_bar == 0.0:
        return 0.0
    if p_bar == 1.0:
        return 1.0
    k_min = n_mac // 2 + 1
    if n_mac <= 64:
        # direct summation with exact binomials; for dyadic p this is exact
        # (majority_success(3, 0.5) == 0.5 to the last bit)
        q_bar = 1.0 - p_bar
        return min(
            math.fsum(
                math.comb(n_mac, k) * p_bar**k * q_bar ** (n_mac - k)
                for k in range(k_min, n_mac + 1)
            ),
            1.0,
        )
    log_p, log_q = math.log(p_bar), math.log1p(-p_bar)
    k_star = min(max(int((n_mac + 1) * p_bar), k_min), n_mac)
    log_anchor = (
        math.lgamma(n_mac + 1)
        - math.lgamma(k_star + 1)
        - math.lgamma(n_mac - k_star + 1)
        + k_star * log_p
        + (n_mac - k_star) * log_q
    )
    odds = p_bar / (1.0 - p_bar)
    rel_sum = 1.0  # the anchor itself, in units of the anchor term
    term = 1.0
    for k in range(k_star, n_mac):  # upward from the mode
        term *= odds * (n_mac - k) / (k + 1)
        rel_sum += term
        if term < 1e-30:
            break
    term = 1.0
    for k in range(k_star, k_min, -1):  # downward to the tail edge
        term *= k / (odds * (n_mac - k + 1))
        rel_sum += term
        if term < 1e-30:
            break
    total = math.exp(log_anchor + math.log(rel_sum))
    return min(total, 1.0)


def majority_success_heterogeneous(probs: Sequence[float]) -> float:
    """Exact strict-majority probability for independent unequal trials.

    Dynamic-programming convolution over the success count, O(n^2); reduces
    to ``majority_success`` when all probabilities are equal.
    """
    probs = np.asarray(probs, dtype=float)
    if probs.size < 1:
        raise ValueError("need at least one probability")
    if np.any((probs < 0.0) | (probs > 1.0)):
        raise ValueError("probabilities must lie in [0, 1]")
    n = probs.size
    dist = np.zeros(n + 1)
    dist[0] = 1.0
    for j, p in enumerate(probs):
        dist[1 : j + 2] = dist[1 : j + 2] * (1.0 - p) + dist[: j + 1] * p
        dist[0] *= 1.0 - p
    return float(np.sum(dist[n // 2 + 1 :]))


def mean_success(measure, t: float, samples: int, seed: int) -> tuple[float, float, float]:
    """Monte Carlo mean of the local Helstrom success probability.

    Draws i.i.d. spins from the measure using per-sample RNG streams, so
    the estimate is bit-identical for a given seed.  Returns
    (p_bar, s_bar, stderr) with s_bar = p_bar - 1/2 >= 0.
    """
    from .ensemble import sample_spin, sample_stream

    if samples < 1:
        raise ValueError("samples must be >= 1")
    vals = np.empty(samples)
    for i in range(samples):
        vals[i] = local_success_probability(sample_spin(measure, sample_stream(seed, i, label=4)), t)
    p_bar = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return p_bar, p_bar - 0.5, stderr


def chernoff_bound(n_mac: int, s_bar: float) -> float:
    """Lower bound 1 - exp(-n_mac s_bar^2 / 2) on the majority success."""
    if not (0.0 <= s_bar <= 0.5):
        raise ValueError(f"s_bar {s_bar} outside [0, 1/2]")
    return 1.0 - math.exp(-0.5 * n_mac * s_bar * s_bar)


def majority_stats(n_mac: int, p_bar: float) -> MajorityStats:
    """Exact majority tail plus its Chernoff lower bound for one mean p."""
    s_bar = p_bar - 0.5
    exact = majority_success(n_mac, p_bar)
    lower = chernoff_bound(n_mac, min(max(s_bar, 0.0), 0.5))
    if s_bar >= 0.0 and exact < lower - 1e-12:
        raise AssertionError(
            f"exact majority tail {exact} fell below its Chernoff bound {lower}"
        )
    return MajorityStats(n_mac, p_bar, s_bar, exact, lower)


def kolmogorov_fuchs(p_tilde: float, b_mac: float) -> tuple[float, float, bool]:
    """Kolmogorov distance of the majority outcome vs the fidelity limit.

    The two outcome distributions are (p, 1-p) and (1-p, p), so
    K = |2 p_tilde - 1|; no measurement can exceed 1 - b_mac^2 / 2.
    Returns (K, limit, K <= limit + 1e-9).
    """
    if not (0.0 <= p_tilde <= 1.0) or not (0.0 <= b_mac <= 1.0):
        raise ValueError("p_tilde and b_mac must lie in [0, 1]")
    k = abs(2.0 * p_tilde - 1.0)
    limit = 1.0 - 0.5 * b_mac * b_mac
    return k, limit, k <= limit + 1e-9

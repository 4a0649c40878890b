"""Random spin-parameter sampling, Monte Carlo and time averaging, and the
surface/curve pipelines driven by the CLI.

Reproducibility contract: every Monte Carlo sample draws from its own RNG
stream derived from (master seed, stream label, sample index) through
``numpy.random.SeedSequence``.  Results are therefore bit-identical for a
given config regardless of how samples are scheduled across workers, and
reductions run over arrays indexed by sample so the summation order is
fixed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .spin_model import SpinParams, lln_exponents, short_time_exponents

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class MeasureSpec:
    """Distribution of one bath spin's parameters.

    angles: "haar" or a fixed (alpha, beta, gamma) triple.  The invariant
    angle measure has alpha, gamma uniform on [0, 2pi) and density
    sin(beta)/2 for beta.

    lam: "hilbert_schmidt" or a fixed value in [0, 1].  The flat-metric
    eigenvalue measure for a qubit has density 3 (2 lam - 1)^2, sampled by
    the closed-form inverse CDF ((2 lam - 1)^3 + 1) / 2.

    coupling: a fixed float, or an (a, b) pair for uniform couplings.
    """

    angles: object = "haar"
    lam: object = "hilbert_schmidt"
    coupling: object = (0.0, 1.0)

    def __post_init__(self):
        if self.angles != "haar":
            a, b, c = self.angles
            if not (0.0 <= b <= math.pi):
                raise ValueError(f"fixed beta {b} outside [0, pi]")
        if self.lam != "hilbert_schmidt" and not (0.0 <= float(self.lam) <= 1.0):
            raise ValueError(f"fixed lam {self.lam} outside [0, 1]")
        if not isinstance(self.coupling, (int, float)):
            a, b = self.coupling
            if not a < b:
                raise ValueError(f"uniform coupling bounds must satisfy a < b, got {self.coupling}")

    def g2bar(self) -> float:
        """Mean squared coupling E[g^2] implied by the coupling law."""
        if isinstance(self.coupling, (int, float)):
            return float(self.coupling) ** 2
        a, b = self.coupling
        return (a * a + a * b + b * b) / 3.0


@dataclass(frozen=True)
class RunConfig:
    """Fully seeded description of one reproducible experiment."""

    seed: int
    observed_sizes: tuple = (100,)
    n_unobserved: int = 100
    t_min: float = 0.0
    t_max: float = 1.2
    t_points: int = 121
    tau: float = 200.0
    tau_points: int = 40001
    samples: int = 200
    threads: int = 1
    measure: MeasureSpec = field(default_factory=MeasureSpec)

    def __post_init__(self):
        if self.t_points < 2 or self.tau_points < 2:
            raise ValueError("time grids need at least 2 points")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if any(s < 1 for s in self.observed_sizes) or self.n_unobserved < 0:
            raise ValueError("environment layout sizes must be positive")

    @property
    def n_total(self) -> int:
        return sum(self.observed_sizes) + self.n_unobserved

    @property
    def fraction_observed(self) -> float:
        return sum(self.observed_sizes) / self.n_total

    def t_grid(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.t_points)


@dataclass(frozen=True)
class AverageCurve:
    """Monte Carlo curve: abscissa, mean, standard error, sample count."""

    abscissa: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    samples: int

    def __post_init__(self):
        if not (len(self.abscissa) == len(self.mean) == len(self.stderr)):
            raise ValueError("abscissa, mean and stderr lengths differ")


def sample_stream(seed: int, index: int, label: int = 0) -> np.random.Generator:
    """Independent counter-style RNG stream for one Monte Carlo sample."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(label, index))
    return np.random.default_rng(ss)


def sample_angle_arrays(measure: MeasureSpec, rng: np.random.Generator, n: int):
    if measure.angles == "haar":
        alpha = rng.uniform(0.0, TWO_PI, n)
        beta = np.arccos(1.0 - 2.0 * rng.uniform(0.0, 1.0, n))
        gamma = rng.uniform(0.0, TWO_PI, n)
    else:
        a, b, c = measure.angles
        alpha = np.full(n, float(a))
        beta = np.full(n, float(b))
        gamma = np.full(n, float(c))
    return alpha, beta, gamma


def sample_lambda_array(measure: MeasureSpec, rng: np.random.Generator, n: int):
    if measure.lam == "hilbert_schmidt":
        u = rng.uniform(0.0, 1.0, n)
        return 0.5 * (1.0 + np.cbrt(2.0 * u - 1.0))
    return np.full(n, float(measure.lam))


def sample_coupling_array(measure: MeasureSpec, rng: np.random.Generator, n: int):
    if isinstance(measure.coupling, (int, float)):
        return np.full(n, float(measure.coupling))
    a, b = measure.coupling
    return rng.uniform(float(a), float(b), n)


def sample_spin_arrays(measure: MeasureSpec, rng: np.random.Generator, n: int):
    """Draw n spins at once; returns (alpha, beta, gamma, lam, g) arrays.

    Draw order is fixed (angles, eigenvalues, couplings) so a stream yields
    the same spins no matter how the caller consumes them.
    """
    alpha, beta, gamma = sample_angle_arrays(measure, rng, n)
    lam = sample_lambda_array(measure, rng, n)
    g = sample_coupling_array(measure, rng, n)
    return alpha, beta, gamma, lam, g


def sample_spin(measure: MeasureSpec, rng: np.random.Generator) -> SpinParams:
    """Draw one spin parameter record from the measure."""
    alpha, beta, gamma, lam, g = sample_spin_arrays(measure, rng, 1)
    return SpinParams(float(alpha[0]), float(beta[0]), float(gamma[0]), float(lam[0]), float(g[0]))


def map_indexed(fn: Callable[[int], object], n: int, threads: int = 1) -> list:
    """Evaluate fn(0..n-1), optionally in a thread pool, ordered by index."""
    if threads <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))


def time_average(curve_fn: Callable[[np.ndarray], np.ndarray], tau: float, grid_points: int) -> float:
    """Trapezoidal time average (1/tau) int_0^tau f(t) dt on a uniform grid."""
    if tau <= 0:
        raise ValueError("tau must be > 0")
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    t = np.linspace(0.0, tau, grid_points)
    return float(np.trapezoid(curve_fn(t), t) / tau)


def _mean_stderr(values: np.ndarray, axis: int = 0):
    n = values.shape[axis]
    mean = np.mean(values, axis=axis)
    if n > 1:
        stderr = np.std(values, axis=axis, ddof=1) / math.sqrt(n)
    else:
        stderr = np.zeros_like(mean)
    return mean, stderr


def _b_curve(lam, beta, g, t_grid) -> np.ndarray:
    """Macrofraction fidelity over a time grid, log-space product."""
    sin2 = np.sin(np.outer(g, t_grid)) ** 2
    b2 = 1.0 - ((2.0 * lam - 1.0) ** 2 * np.sin(beta) ** 2)[:, None] * sin2
    b2 = np.clip(b2, 0.0, None)
    with np.errstate(divide="ignore"):
        return np.exp(0.5 * np.sum(np.log(b2), axis=0))


def _abs_gamma_curve(lam, beta, g, t_grid) -> np.ndarray:
    """|collective dephasing factor| over a time grid, log-space product."""
    sin2 = np.sin(np.outer(g, t_grid)) ** 2
    g2 = 1.0 + sin2 * (((2.0 * lam - 1.0) ** 2 * np.cos(beta) ** 2) - 1.0)[:, None]
    g2 = np.clip(g2, 0.0, None)
    with np.errstate(divide="ignore"):
        return np.exp(0.5 * np.sum(np.log(g2), axis=0))


def fig1_node(
    lam_plus: float,
    beta: float,
    n_spins: int,
    tau: float,
    tau_points: int,
    samples: int,
    seed: int,
    coupling=(0.0, 1.0),
    threads: int = 1,
):
    """Time-averaged <B> and <|gamma|> for one (lam_plus, beta) surface node.

    All spins share the node's initial state; couplings are freshly sampled
    per Monte Carlo sample.  Returns (mean_B, mean_abs_gamma, stderr_B,
    stderr_gamma, rel_change_B, rel_change_gamma) where the rel_change
    values compare against the half-resolution quadrature (convergence
    gate).
    """
    measure = MeasureSpec(coupling=coupling)  # only the coupling law is sampled
    t = np.linspace(0.0, tau, tau_points)
    coarse = slice(None, None, 2) if tau_points % 2 == 1 else None
    lam_arr = np.full(n_spins, lam_plus)
    beta_arr = np.full(n_spins, beta)

    def one(i: int):
        rng = sample_stream(seed, i, label=1)
        g = sample_coupling_array(measure, rng, n_spins)
        b_curve = _b_curve(lam_arr, beta_arr, g, t)
        g_curve = _abs_gamma_curve(lam_arr, beta_arr, g, t)
        vals = []
        for curve in (b_curve, g_curve):
            fine = float(np.trapezoid(curve, t) / tau)
            if coarse is not None:
                cs = float(np.trapezoid(curve[coarse], t[coarse]) / tau)
                rel = abs(fine - cs) / max(abs(fine), 1e-12)
            else:
                rel = math.nan
            vals.append((fine, rel))
        return vals

    results = map_indexed(one, samples, threads)
    b_vals = np.array([r[0][0] for r in results])
    g_vals = np.array([r[1][0] for r in results])
    mean_b, se_b = _mean_stderr(b_vals)
    mean_g, se_g = _mean_stderr(g_vals)
    rel_b = max(r[0][1] for r in results)
    rel_g = max(r[1][1] for r in results)
    return float(mean_b), float(mean_g), float(se_b), float(se_g), rel_b, rel_g


def fig1_surface(
    config: RunConfig,
    lambda_grid: Sequence[float],
    beta_grid: Sequence[float],
    n_spins: int = 100,
) -> list[dict]:
    """Surface of time-averaged <B> and <|gamma|> over initial-state nodes."""
    if not len(lambda_grid) or not len(beta_grid):
        raise ValueError("grids must be nonempty")
    rows = []
    node = 0
    for lam_plus in lambda_grid:
        for beta in beta_grid:
            mean_b, mean_g, se_b, se_g, rel_b, rel_g = fig1_node(
                float(lam_plus),
                float(beta),
                n_spins,
                config.tau,
                config.tau_points,
                config.samples,
                config.seed + node,
                coupling=config.measure.coupling,
                threads=config.threads,
            )
            rows.append(
                {
                    "lambda_plus": float(lam_plus),
                    "beta": float(beta),
                    "mean_B": mean_b,
                    "mean_abs_gamma": mean_g,
                    "stderr_B": se_b,
                    "stderr_gamma": se_g,
                    "rel_change_B": rel_b,
                    "rel_change_gamma": rel_g,
                }
            )
            node += 1
    return rows


def fig2_curves(n_values: Sequence[int], config: RunConfig) -> dict[int, AverageCurve]:
    """Mean distance bound |gamma(t)| + B(t) versus t, one curve per size n.

    Each curve uses n observed and n unobserved freshly sampled spins per
    Monte Carlo sample.  Samples are nested: size n uses the first n spins
    of the same per-sample stream, so larger-n curves lie below smaller-n
    ones pointwise for every draw, not just on average.
    """
    if not len(n_values):
        raise ValueError("n_values must be nonempty")
    n_values = [int(n) for n in n_values]
    n_max = max(n_values)
    t = config.t_grid()

    def one(i: int):
        rng = sample_stream(config.seed, i, label=2)
        _, beta_o, _, lam_o, g_o = sample_spin_arrays(config.measure, rng, n_max)
        _, beta_u, _, lam_u, g_u = sample_spin_arrays(config.measure, rng, n_max)
        per_n = {}
        for n in n_values:
            b = _b_curve(lam_o[:n], beta_o[:n], g_o[:n], t)
            ag = _abs_gamma_curve(lam_u[:n], beta_u[:n], g_u[:n], t)
            per_n[n] = ag + b
        return per_n

    draws = map_indexed(one, config.samples, config.threads)
    out = {}
    for n in n_values:
        stack = np.stack([d[n] for d in draws])
        mean, stderr = _mean_stderr(stack)
        out[n] = AverageCurve(t, mean, stderr, config.samples)
    return out


def exponent_check(
    measure: MeasureSpec, t_grid: Sequence[float], samples: int, seed: int, threads: int = 1
) -> list[dict]:
    """Monte Carlo means of the per-spin exponents vs their small-t forms.

    Returns one row per t with columns (t, kappa_mc, chi_mc, kappa_short,
    chi_short).  Infinite per-spin exponents (measure-zero degeneracies)
    would poison the mean and are rejected if they ever appear.
    """
    t_grid = [float(t) for t in t_grid]
    g2bar = measure.g2bar()

    def one(i: int):
        rng = sample_stream(seed, i, label=3)
        alpha, beta, gamma, lam, g = sample_spin_arrays(measure, rng, 1)
        spin = SpinParams(float(alpha[0]), float(beta[0]), float(gamma[0]), float(lam[0]), float(g[0]))
        pairs = [lln_exponents(spin, t) for t in t_grid]
        if any(math.isinf(k) or math.isinf(c) for k, c in pairs):
            raise ArithmeticError("degenerate draw produced an infinite exponent")
        return pairs

    draws = map_indexed(one, samples, threads)
    rows = []
    for j, t in enumerate(t_grid):
        kappa_mc = float(np.mean([d[j][0] for d in draws]))
        chi_mc = float(np.mean([d[j][1] for d in draws]))
        kappa_short, chi_short = short_time_exponents(g2bar, t)
        rows.append(
            {
                "t": t,
                "kappa_mc": kappa_mc,
                "chi_mc": chi_mc,
                "kappa_short": kappa_short,
                "chi_short": chi_short,
            }
        )
    return rows

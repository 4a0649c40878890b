"""Certification suites: every closed form, bound and sampler property is
checked here against the brute-force oracle or an independent route.

Each suite returns a :class:`SuiteResult` with a check count, failure count
and the worst margin (bound minus value; negative means violated).  The
CLI ``verify`` scenario and the acceptance tests both run these functions,
so the shipped gate and the test suite cannot drift apart.

Known red suite: ``prop1_as_stated``.  The additive bound
eps <= Gamma + sum p_E is numerically false for general projector
families: its derivation treats rho - P rho P as positive semidefinite
with trace Tr[rho (1 - P)], which only holds when the projector commutes
with the state.  A pure central state with one pure observed spin measured
by a projector tilted by angle theta gives eps = |sin theta| against a
claimed bound of sin^2 theta.  The sound form of the same telescoping
argument, with the full disturbance norm ||rho_i - P rho_i P||_1 per
branch, is checked as ``prop1_disturbance`` and holds on every instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import densmat, oracle, sbs_core
from .discrimination import (
    chernoff_bound,
    helstrom_pair,
    kolmogorov_fuchs,
    local_success_probability,
    majority_success,
    majority_success_heterogeneous,
)
from .ensemble import (
    MeasureSpec,
    RunConfig,
    fig1_node,
    fig2_curves,
    sample_spin_arrays,
    sample_stream,
)
from .spin_model import (
    MacrofractionSpec,
    SpinParams,
    decoherence_factor,
    lln_exponents,
    macrofraction_fidelity,
    short_time_exponents,
    time_scales,
)

DEFAULT_SEED = 20260808


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: int = 0
    worst_margin: float = math.inf
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def record(self, margin: float, tol: float = 0.0):
        self.checks += 1
        if margin < self.worst_margin:
            self.worst_margin = margin
        if margin < -tol:
            self.failures += 1

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "checks": self.checks,
            "failures": self.failures,
            "worst_margin": None if math.isinf(self.worst_margin) else self.worst_margin,
            "passed": self.passed,
            "detail": self.detail,
        }


def convention_certification(draws: int = 1000, seed: int = DEFAULT_SEED) -> SuiteResult:
    """Oracle matrix evolution vs the closed forms, per spin.

    Checks Tr[U_+ rho U_-^dagger] against the dephasing-factor formula and
    the oracle fidelity of the evolved branch pair against the fidelity
    formula, each within 1e-10.
    """
    res = SuiteResult("convention_certification")
    inter = oracle.InteractionSpec()
    measure = MeasureSpec()
    for i in range(draws):
        rng = sample_stream(seed, i, label=10)
        a, b, c, lam, g = sample_spin_arrays(measure, rng, 1)
        spin = SpinParams(float(a[0]), float(b[0]), float(c[0]), float(lam[0]), float(g[0]))
        t = float(rng.uniform(0.0, 2.0 * math.pi))
        gamma_oracle = complex(np.trace(oracle.branch_state(spin, inter, 0, 1, t)))
        gamma_closed = decoherence_factor([spin], t)
        res.record(1e-10 - abs(gamma_oracle - gamma_closed))
        rho_p = oracle.branch_state(spin, inter, 0, 0, t)
        rho_m = oracle.branch_state(spin, inter, 1, 1, t)
        b_oracle = densmat.fidelity(rho_p, rho_m)
        b_closed = macrofraction_fidelity(MacrofractionSpec((spin,)), t)
        res.record(1e-10 - abs(b_oracle - b_closed))
    return res


def _disturbance_bound(inst, family) -> float:
    """Sound telescoping bound: Gamma + sum_k sum_i sigma_i ||rho_i - P rho_i P||_1."""
    ens = oracle.branch_ensemble(inst)
    gamma = sbs_core.collective_gamma(inst.central, ens.gamma_mags)
    branches = oracle.observed_branches(inst)
    total = gamma
    for k, fam_k in enumerate(family.families):
        for i, p in enumerate(fam_k):
            cut = p @ branches[k][i] @ p
            total += inst.central.sigma[i] * densmat.trace_norm(branches[k][i] - cut)
    return total


def oracle_inequalities(
    instances: int = 200,
    seed: int = DEFAULT_SEED,
    n_observed: int = 3,
    n_unobserved: int = 3,
    t_max: float = 2.0 * math.pi,
) -> dict[str, SuiteResult]:
    """Exact-distance suites over a seeded corpus of random instances.

    prop1_as_stated: eps <= Gamma + sum p_E per family (Helstrom witnesses
    and deliberately bad families).  Expected to fail; see module docstring.
    prop1_disturbance: the sound disturbance form, expected to pass.
    cor1: witness eps <= eta.  cor2: |I - H_S| <= F(eps) when eps <= 1/4.
    """
    stated = SuiteResult("prop1_as_stated")
    stated.detail = "additive discrimination-error bound, known-unsound derivation"
    disturbance = SuiteResult("prop1_disturbance")
    cor1 = SuiteResult("cor1")
    cor2 = SuiteResult("cor2")
    cor2_applicable = 0
    for i in range(instances):
        inst = oracle.random_instance(
            seed, i, n_observed=n_observed, n_unobserved=n_unobserved, t_max=t_max
        )
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(11, i)))
        rep = oracle.evaluate_instance(inst, rng)
        families = oracle.qubit_families(
            inst, np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(11, i)))
        )
        for name, fam_result in rep.families.items():
            stated.record(fam_result.prop1_margin, tol=1e-9)
            disturbance.record(_disturbance_bound(inst, families[name]) - fam_result.epsilon, tol=1e-9)
        cor1.record(rep.cor1_margin, tol=1e-9)
        if rep.info.valid:
            cor2_applicable += 1
            cor2.record(rep.info.f_bound - rep.info.gap, tol=1e-9)
    cor2.detail = f"applicable on {cor2_applicable}/{instances} instances (eps <= 1/4)"
    return {
        "prop1_as_stated": stated,
        "prop1_disturbance": disturbance,
        "cor1": cor1,
        "cor2": cor2,
    }


def _random_qubit_state(rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def helstrom_suite(pairs: int = 1000, seed: int = DEFAULT_SEED) -> SuiteResult:
    """Helstrom optimality identity on random qubit pairs.

    Achieved equal-prior error must equal (1/2)(1 - T/2) with T the trace
    norm of the difference, within 1e-10.
    """
    res = SuiteResult("helstrom_identity")
    for i in range(pairs):
        rng = sample_stream(seed, i, label=12)
        rho_p = _random_qubit_state(rng)
        rho_m = _random_qubit_state(rng)
        pair = helstrom_pair(rho_p, rho_m)
        err = 0.5 * float(
            np.real(np.trace(rho_m @ pair.p_plus) + np.trace(rho_p @ pair.p_minus))
        )
        tnorm = densmat.trace_norm(rho_p - rho_m)
        res.record(1e-10 - abs(err - 0.5 * (1.0 - 0.5 * tnorm)))
    return res


def barnum_knill_suite(pairs: int = 1000, seed: int = DEFAULT_SEED) -> SuiteResult:
    """Optimal two-state error <= sum_{i != j} sqrt(w_i w_j) B(rho_i, rho_j)."""
    res = SuiteResult("barnum_knill")
    for i in range(pairs):
        rng = sample_stream(seed, i, label=13)
        rho_p = _random_qubit_state(rng)
        rho_m = _random_qubit_state(rng)
        w = float(rng.uniform(0.0, 1.0))
        optimal = 0.5 * (1.0 - densmat.trace_norm(w * rho_p - (1.0 - w) * rho_m))
        bound = sbs_core.barnum_knill_bound(
            [w, 1.0 - w], {(0, 1): densmat.fidelity(rho_p, rho_m)}
        )
        res.record(bound - optimal, tol=1e-9)
    return res


def local_probability_suite(draws: int = 1000, seed: int = DEFAULT_SEED) -> SuiteResult:
    """Closed-form success probability vs explicit Tr[P rho], within 1e-12."""
    res = SuiteResult("local_success_probability")
    inter = oracle.InteractionSpec()
    measure = MeasureSpec()
    for i in range(draws):
        rng = sample_stream(seed, i, label=14)
        a, b, c, lam, g = sample_spin_arrays(measure, rng, 1)
        spin = SpinParams(float(a[0]), float(b[0]), float(c[0]), float(lam[0]), float(g[0]))
        t = float(rng.uniform(0.0, 2.0 * math.pi))
        rho_p = oracle.branch_state(spin, inter, 0, 0, t)
        rho_m = oracle.branch_state(spin, inter, 1, 1, t)
        from .discrimination import helstrom_spin_analytic

        pair = helstrom_spin_analytic(spin, t)
        if pair.degenerate:
            continue
        p_plus = float(np.real(np.trace(pair.p_plus @ rho_p)))
        p_minus = float(np.real(np.trace(pair.p_minus @ rho_m)))
        formula = local_success_probability(spin, t)
        res.record(1e-12 - abs(p_plus - formula))
        res.record(1e-12 - abs(p_minus - formula))
    return res


def chernoff_suite() -> SuiteResult:
    """Exact strict-majority tail >= Chernoff lower bound on a fixed grid."""
    res = SuiteResult("chernoff_vs_exact")
    for n_mac in (11, 101, 1001):
        for s_bar in np.arange(0.05, 0.46, 0.05):
            s_bar = float(s_bar)
            exact = majority_success(n_mac, 0.5 + s_bar)
            res.record(exact - chernoff_bound(n_mac, s_bar), tol=1e-12)
    return res


def kolmogorov_fuchs_suite(
    instances: int = 500, n_mac: int = 51, seed: int = DEFAULT_SEED
) -> SuiteResult:
    """|2 p_tilde - 1| <= 1 - B^2/2 on sampled macrofraction instances.

    p_tilde is the exact majority probability for the realized per-spin
    success probabilities; B is the realized macrofraction fidelity.
    """
    res = SuiteResult("kolmogorov_fuchs")
    measure = MeasureSpec()
    for i in range(instances):
        rng = sample_stream(seed, i, label=15)
        a, b, c, lam, g = sample_spin_arrays(measure, rng, n_mac)
        spins = [
            SpinParams(float(a[j]), float(b[j]), float(c[j]), float(lam[j]), float(g[j]))
            for j in range(n_mac)
        ]
        t = float(rng.uniform(0.0, 2.0 * math.pi))
        probs = [local_success_probability(sp, t) for sp in spins]
        p_tilde = majority_success_heterogeneous(probs)
        b_mac = macrofraction_fidelity(MacrofractionSpec(tuple(spins)), t)
        k, limit, ok = kolmogorov_fuchs(p_tilde, b_mac)
        res.record(limit - k, tol=1e-9)
    return res


def moments_suite(samples: int = 100_000, seed: int = DEFAULT_SEED) -> SuiteResult:
    """Sampler moments: E[sin^2 beta] = 2/3, E[cos^2 beta] = 1/3,
    E[(2 lam - 1)^2] = 3/5, each within 0.01."""
    res = SuiteResult("measure_moments")
    rng = sample_stream(seed, 0, label=16)
    a, b, c, lam, g = sample_spin_arrays(MeasureSpec(), rng, samples)
    res.record(0.01 - abs(float(np.mean(np.sin(b) ** 2)) - 2.0 / 3.0))
    res.record(0.01 - abs(float(np.mean(np.cos(b) ** 2)) - 1.0 / 3.0))
    res.record(0.01 - abs(float(np.mean((2.0 * lam - 1.0) ** 2)) - 3.0 / 5.0))
    return res


def short_time_suite(
    samples: int = 100_000, t: float = 0.05, seed: int = DEFAULT_SEED
) -> SuiteResult:
    """Monte Carlo exponent means over the analytic small-t coefficients.

    Both ratios must land in [0.95, 1.05].
    """
    res = SuiteResult("short_time_exponents")
    measure = MeasureSpec()
    rng = sample_stream(seed, 0, label=17)
    a, b, c, lam, g = sample_spin_arrays(measure, rng, samples)
    kappas = np.empty(samples)
    chis = np.empty(samples)
    for j in range(samples):
        spin = SpinParams(float(a[j]), float(b[j]), float(c[j]), float(lam[j]), float(g[j]))
        kappas[j], chis[j] = lln_exponents(spin, t)
    kappa_short, chi_short = short_time_exponents(measure.g2bar(), t)
    r_kappa = float(np.mean(kappas)) / kappa_short
    r_chi = float(np.mean(chis)) / chi_short
    res.detail = f"kappa ratio {r_kappa:.4f}, chi ratio {r_chi:.4f}"
    res.record(0.05 - abs(r_kappa - 1.0))
    res.record(0.05 - abs(r_chi - 1.0))
    return res


def timescale_suite() -> SuiteResult:
    """Algebraic ratio identity plus the fidelity level at the broadcast time.

    (t_B/t_D)^2 must equal 4 (1-f) N / N_m to 1e-12 relative, and the
    short-time form must give exp(-N_m kappa(t_B)/2) within [0.5/N_m,
    2/N_m] for N_m in {100, 1000}.
    """
    res = SuiteResult("time_scales")
    g2bar = MeasureSpec().g2bar()
    for n_mac, n_total, f in ((100, 200, 0.5), (1000, 4000, 0.25), (100, 400, 0.0)):
        t_b, t_d, ratio_sq = time_scales(n_total, n_mac, f, g2bar)
        algebraic = 4.0 * (1.0 - f) * n_total / n_mac
        res.record(1e-12 - abs((t_b / t_d) ** 2 - algebraic) / algebraic)
        res.record(1e-12 - abs(ratio_sq - algebraic))
    for n_mac in (100, 1000):
        t_b, _, _ = time_scales(2 * n_mac, n_mac, 0.5, g2bar)
        kappa_bar, _ = short_time_exponents(g2bar, t_b)
        level = math.exp(-0.5 * n_mac * kappa_bar)
        res.record(level - 0.5 / n_mac)
        res.record(2.0 / n_mac - level)
    return res


def fig1_anchor_suite(seed: int = DEFAULT_SEED, samples: int = 8) -> SuiteResult:
    """Anchor nodes of the time-averaged surface.

    <B> = 1 along lam = 1/2 and beta in {0, pi} and <|gamma|> = 1 at
    (1, 0), all to quadrature tolerance; both averages < 0.05 at
    (1, pi/2) for 100-spin macrofractions.
    """
    res = SuiteResult("fig1_anchors")
    quad_tol = 1e-9

    def node(lam, beta):
        return fig1_node(lam, beta, 100, 200.0, 40001, samples, seed)

    for lam, beta in ((0.5, 1.0), (0.5, 2.5)):
        mean_b = node(lam, beta)[0]
        res.record(quad_tol - abs(mean_b - 1.0))
    for beta in (0.0, math.pi):
        mean_b = node(0.8, beta)[0]
        res.record(quad_tol - abs(mean_b - 1.0))
    mean_b, mean_g = node(1.0, 0.0)[:2]
    res.record(quad_tol - abs(mean_g - 1.0))
    mean_b, mean_g = node(1.0, math.pi / 2.0)[:2]
    res.detail = f"at (1, pi/2): <B> = {mean_b:.4g}, <|gamma|> = {mean_g:.4g}"
    res.record(0.05 - mean_b)
    res.record(0.05 - mean_g)
    return res


def fig2_anchor_suite(
    seed: int = DEFAULT_SEED,
    samples: int = 200,
    n_values: tuple = (30, 50, 200, 500),
    plateau: tuple = (0.1, 0.4),
) -> SuiteResult:
    """Anchors of the averaged distance-bound curves.

    Every curve starts at exactly 2; the time-averaged bound over the
    post-initial window exceeds 1 for n in {30, 50}; the curves are
    ordered decreasing in n pointwise within 3 standard errors; the n=500
    curve stays below 0.1 beyond twice its broadcast time.
    """
    res = SuiteResult("fig2_anchors")
    config = RunConfig(seed=seed, samples=samples, t_min=0.0, t_max=1.2, t_points=121)
    curves = fig2_curves(n_values, config)
    t = config.t_grid()
    for n in n_values:
        res.record(1e-12 - abs(float(curves[n].mean[0]) - 2.0))
    window = (t >= plateau[0]) & (t <= plateau[1])
    plateau_means = {}
    for n in (30, 50):
        avg = float(np.trapezoid(curves[n].mean[window], t[window]) / (plateau[1] - plateau[0]))
        plateau_means[n] = avg
        res.record(avg - 1.0)
    res.detail = f"plateau averages over {plateau}: " + ", ".join(
        f"n={n}: {v:.3f}" for n, v in plateau_means.items()
    )
    ordered = sorted(n_values)
    for lo, hi in zip(ordered, ordered[1:]):
        sl = (t > 0.05)
        gap = curves[lo].mean[sl] - curves[hi].mean[sl]
        slack = 3.0 * np.hypot(curves[lo].stderr[sl], curves[hi].stderr[sl])
        res.record(float(np.min(gap + slack)))
    g2bar = config.measure.g2bar()
    t_b500, _, _ = time_scales(1000, 500, 0.5, g2bar)
    tail = t >= 2.0 * t_b500
    res.record(0.1 - float(np.max(curves[500].mean[tail])))
    return res


def qutrit_prop1_suite(instances: int = 40, seed: int = DEFAULT_SEED) -> SuiteResult:
    """Disturbance-form additive bound for a three-level central system.

    Families pair the two leading pointer branches by Helstrom and assign
    the third a rank-zero projector; the bound must dominate the exact
    distance for these and for coarse families.
    """
    res = SuiteResult("qutrit_prop1_disturbance")
    for i in range(instances):
        inst = oracle.random_instance(seed, i, n_observed=2, n_unobserved=2, d_s=3)
        branches = oracle.observed_branches(inst)
        zero = np.zeros((2, 2), dtype=complex)
        eye = np.eye(2, dtype=complex)
        fams = []
        for row in branches:
            pair = helstrom_pair(row[0], row[1])
            fams.append((pair.p_plus, pair.p_minus, zero))
        families = {
            "pairwise": sbs_core.ProjectorFamily(tuple(fams)),
            "coarse": sbs_core.ProjectorFamily(tuple((eye, zero, zero) for _ in branches)),
        }
        joint = oracle.full_joint_state(inst)
        reduced = oracle.reduced_state_exact(joint, inst)
        ens = oracle.branch_ensemble(inst)
        for family in families.values():
            try:
                sbs = sbs_core.build_sbs(inst.central, ens, family)
            except sbs_core.DegenerateSBSError:
                continue
            eps = oracle.exact_epsilon(reduced, sbs)
            res.record(_disturbance_bound(inst, family) - eps, tol=1e-9)
    return res


def run_all(seed: int = DEFAULT_SEED, instances: int = 200) -> dict[str, SuiteResult]:
    """Every suite, keyed by name; the CLI verify scenario serializes this."""
    suites: dict[str, SuiteResult] = {}
    suites["convention_certification"] = convention_certification(seed=seed)
    suites.update(oracle_inequalities(instances=instances, seed=seed))
    suites["helstrom_identity"] = helstrom_suite(seed=seed)
    suites["barnum_knill"] = barnum_knill_suite(seed=seed)
    suites["local_success_probability"] = local_probability_suite(seed=seed)
    suites["chernoff_vs_exact"] = chernoff_suite()
    suites["kolmogorov_fuchs"] = kolmogorov_fuchs_suite(seed=seed)
    suites["measure_moments"] = moments_suite(seed=seed)
    suites["short_time_exponents"] = short_time_suite(seed=seed)
    suites["time_scales"] = timescale_suite()
    suites["qutrit_prop1_disturbance"] = qutrit_prop1_suite(seed=seed)
    suites["fig1_anchors"] = fig1_anchor_suite(seed=seed)
    suites["fig2_anchors"] = fig2_anchor_suite(seed=seed)
    return suites

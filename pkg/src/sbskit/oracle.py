"""Brute-force exact simulator on small instances.

Everything here works with explicit matrices: the joint state of the
central system and every bath spin is built, evolved by the exact branch
unitaries and partially traced numerically.  No closed form from
:mod:`sbskit.spin_model` enters the computation, so agreement between the
two routes certifies the closed forms and the unitary convention, and the
assembled states provide exact trace-distance and mutual-information
checks for every bound in :mod:`sbskit.sbs_core`.

Convention: the interaction couples the central pointer observable
A = sum_i a_i |i><i| to sum_k g_k sigma_z^(k) / 2, giving branch unitaries
U_i^(k)(t) = exp(-i a_i g_k t sigma_z / 2).  The default qubit pointer
eigenvalues are a = (-1, +1), under which branch index 0 evolves by
exp(+i g t sigma_z / 2) as required by the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import densmat, sbs_core
from .discrimination import helstrom_pair
from .ensemble import MeasureSpec, sample_spin_arrays, sample_stream
from .sbs_core import BoundReport, BranchEnsemble, CentralState, ProjectorFamily, SBSState
from .spin_model import EnvironmentSpec, MacrofractionSpec, SpinParams, initial_spin_state

DIMENSION_CAP = 4096


@dataclass(frozen=True)
class InteractionSpec:
    """Pointer eigenvalues of the central observable plus the convention tag.

    Per-environment coupling operators are fixed to g_k sigma_z / 2 with
    g_k taken from each spin record; branch unitaries are
    exp(-i a_i g_k t sigma_z / 2).
    """

    pointer_eigenvalues: tuple = (-1.0, 1.0)
    convention: str = "half-angle, index 0 advances by exp(+i g t sigma_z / 2)"

    @property
    def d_s(self) -> int:
        return len(self.pointer_eigenvalues)

    def env_unitary(self, i: int, g: float, t: float) -> np.ndarray:
        a = self.pointer_eigenvalues[i]
        phase = -0.5j * a * g * t
        return np.diag([np.exp(phase), np.exp(-phase)])

    def env_unitary_diag(self, i: int, g: float, t: float) -> np.ndarray:
        a = self.pointer_eigenvalues[i]
        phase = -0.5j * a * g * t
        return np.array([np.exp(phase), np.exp(-phase)])


@dataclass(frozen=True)
class OracleInstance:
    """One exactly solvable configuration: central state, spins, time."""

    central: CentralState
    observed: tuple  # tuple of SpinParams, one observed environment each
    unobserved: tuple  # tuple of SpinParams
    t: float
    interaction: InteractionSpec = field(default_factory=InteractionSpec)

    @property
    def n_spins(self) -> int:
        return len(self.observed) + len(self.unobserved)

    @property
    def spins(self) -> tuple:
        return self.observed + self.unobserved

    @property
    def factor_dims(self) -> list[int]:
        return [self.central.d_s] + [2] * self.n_spins

    @property
    def environment(self) -> EnvironmentSpec:
        """Layout view: each observed spin is its own single-spin macrofraction."""
        return EnvironmentSpec(
            tuple(MacrofractionSpec((s,)) for s in self.observed), self.unobserved
        )


def full_joint_state(inst: OracleInstance) -> np.ndarray:
    """U(t) rho(0) U(t)^dagger for the full system-plus-bath product state.

    The conditional unitaries are all diagonal, so U is a diagonal phase
    vector applied entrywise.
    """
    d_s = inst.central.d_s
    dim = d_s * 2 ** inst.n_spins
    if dim > DIMENSION_CAP:
        raise ValueError(f"joint dimension {dim} exceeds cap {DIMENSION_CAP}")
    rho0 = inst.central.to_matrix()
    for spin in inst.spins:
        rho0 = densmat.tensor(rho0, initial_spin_state(spin))
    phases = np.empty(dim, dtype=complex)
    block = 2 ** inst.n_spins
    for i in range(d_s):
        u = np.array([1.0 + 0.0j])
        for spin in inst.spins:
            u = np.kron(u, inst.interaction.env_unitary_diag(i, spin.g, inst.t))
        phases[i * block : (i + 1) * block] = u
    return (phases[:, None] * rho0) * phases.conj()[None, :]


def reduced_state_exact(joint: np.ndarray, inst: OracleInstance) -> np.ndarray:
    """Trace out the unobserved spins of the evolved joint state."""
    keep = list(range(1 + len(inst.observed)))
    return densmat.partial_trace(joint, inst.factor_dims, keep)


def branch_state(spin: SpinParams, inter: InteractionSpec, i: int, j: int, t: float) -> np.ndarray:
    """Cross-branch evolved spin matrix U_i rho(0) U_j^dagger (i = j: a state)."""
    u_i = inter.env_unitary(i, spin.g, t)
    u_j = inter.env_unitary(j, spin.g, t)
    return u_i @ initial_spin_state(spin) @ u_j.conj().T


def gamma_products(inst: OracleInstance) -> dict:
    """Per-pair products over the unobserved spins of Tr[U_i rho U_j^dagger]."""
    d_s = inst.central.d_s
    out = {}
    for i in range(d_s):
        for j in range(d_s):
            if i == j:
                continue
            val = 1.0 + 0.0j
            for spin in inst.unobserved:
                val *= np.trace(branch_state(spin, inst.interaction, i, j, inst.t))
            out[(i, j)] = complex(val)
    return out


def analytic_reduced_state(inst: OracleInstance) -> np.ndarray:
    """Assemble the partially traced state from branch matrices directly.

    Independent of the partial-trace route: diagonal blocks are products of
    branch states weighted by sigma_i, off-diagonal blocks carry the
    coherence sigma_ij times the unobserved dephasing product times the
    cross-branch matrices U_i rho U_j^dagger.
    """
    d_s = inst.central.d_s
    gammas = gamma_products(inst)
    dim_env = 2 ** len(inst.observed)
    out = np.zeros((d_s * dim_env, d_s * dim_env), dtype=complex)
    for i in range(d_s):
        for j in range(d_s):
            if i == j:
                coeff = complex(inst.central.sigma[i])
            else:
                coeff = inst.central.coherence(i, j) * gammas[(i, j)]
            if coeff == 0.0:
                continue
            env = np.array([[1.0 + 0.0j]])
            for spin in inst.observed:
                env = densmat.tensor(env, branch_state(spin, inst.interaction, i, j, inst.t))
            unit = np.zeros((d_s, d_s), dtype=complex)
            unit[i, j] = 1.0
            out += coeff * densmat.tensor(unit, env)
    return out


def observed_branches(inst: OracleInstance) -> list[list[np.ndarray]]:
    """Branch states of each observed environment, indexed [k][i]."""
    d_s = inst.central.d_s
    return [
        [branch_state(spin, inst.interaction, i, i, inst.t) for i in range(d_s)]
        for spin in inst.observed
    ]


def branch_ensemble(inst: OracleInstance) -> BranchEnsemble:
    gammas = gamma_products(inst)
    mags = {pair: abs(val) for pair, val in gammas.items()}
    branches = tuple(tuple(row) for row in observed_branches(inst))
    return BranchEnsemble(branches, mags)


def exact_epsilon(reduced: np.ndarray, sbs) -> float:
    """Half trace norm of (actual reduced state - ideal broadcast state)."""
    sbs_matrix = sbs.to_matrix() if isinstance(sbs, SBSState) else sbs
    if reduced.shape != sbs_matrix.shape:
        raise ValueError(f"dimension mismatch: {reduced.shape} vs {sbs_matrix.shape}")
    return 0.5 * densmat.trace_norm(reduced - sbs_matrix)


@dataclass(frozen=True)
class MutualInfoCheck:
    mutual_info: float
    h_s: float
    gap: float
    f_bound: float
    valid: bool
    ok: bool


def exact_mutual_info_check(
    reduced: np.ndarray,
    central: CentralState,
    factor_dims: Sequence[int],
    epsilon: float,
) -> MutualInfoCheck:
    """Gap |I - H_S| against the information bound F(epsilon).

    The ok flag asserts only when epsilon <= 1/4 (the bound's hypothesis);
    otherwise it reports True vacuously with valid = False.
    """
    info = sbs_core.mutual_information(reduced, factor_dims, [0])
    h_s = central.shannon_entropy()
    gap = abs(info - h_s)
    f_bound, valid = sbs_core.cor2_bound(epsilon, central.d_s)
    ok = (not valid) or gap <= f_bound + 1e-9
    return MutualInfoCheck(info, h_s, gap, f_bound, valid, ok)


# ---------------------------------------------------------------------------
# projector families for the bound checks


def qubit_families(inst: OracleInstance, rng: np.random.Generator | None = None) -> dict:
    """Named two-outcome projector families for a qubit central system.

    "helstrom" and "helstrom_weighted" are the witnesses; "swapped",
    "coarse" and "random" are deliberately bad measurements the additive
    bound must still dominate.
    """
    if inst.central.d_s != 2:
        raise ValueError("qubit_families requires a two-level central system")
    branches = observed_branches(inst)
    sigma = inst.central.sigma
    fams: dict[str, ProjectorFamily] = {}

    plain = [helstrom_pair(b[0], b[1]).family() for b in branches]
    weighted = [
        helstrom_pair(b[0], b[1], weights=(float(sigma[0]), float(sigma[1]))).family()
        for b in branches
    ]
    fams["helstrom"] = ProjectorFamily(tuple(tuple(f) for f in plain))
    fams["helstrom_weighted"] = ProjectorFamily(tuple(tuple(f) for f in weighted))
    fams["swapped"] = ProjectorFamily(tuple((f[1], f[0]) for f in plain))
    eye = np.eye(2, dtype=complex)
    zero = np.zeros((2, 2), dtype=complex)
    fams["coarse"] = ProjectorFamily(tuple((eye, zero) for _ in branches))
    if rng is not None:
        rand = []
        for _ in branches:
            v = rng.normal(size=2) + 1j * rng.normal(size=2)
            v = v / np.linalg.norm(v)
            p = np.outer(v, v.conj())
            rand.append((p, eye - p))
        fams["random"] = ProjectorFamily(tuple(rand))
    return fams


@dataclass(frozen=True)
class FamilyResult:
    pe_list: tuple
    prop1: float
    epsilon: float
    fifty_fifty: float

    @property
    def prop1_margin(self) -> float:
        """prop1 - epsilon; the additive bound holds iff this is >= 0."""
        return self.prop1 - self.epsilon


@dataclass(frozen=True)
class InstanceReport:
    t: float
    gamma: float
    eta_cor1: float
    families: dict
    epsilon_witness: float
    info: MutualInfoCheck

    @property
    def cor1_margin(self) -> float:
        """eta - witness epsilon; the measurement-free bound holds iff >= 0."""
        return self.eta_cor1 - self.epsilon_witness

    def bound_report(self, family: str = "helstrom_weighted") -> BoundReport:
        """All momentary diagnostics for one measurement family."""
        fam = self.families[family]
        return BoundReport(
            t=self.t,
            gamma=self.gamma,
            pe_list=fam.pe_list,
            prop1_bound=fam.prop1,
            eta_cor1=self.eta_cor1,
            f_bound=self.info.f_bound,
            f_valid=self.info.valid,
            epsilon_exact=fam.epsilon,
            fifty_fifty=fam.fifty_fifty,
        )


def evaluate_instance(
    inst: OracleInstance, rng: np.random.Generator | None = None
) -> InstanceReport:
    """Run every bound check on one instance with exact matrices.

    The witness epsilon for the measurement-free bound is the smaller of
    the plain and prior-weighted Helstrom family distances.
    """
    joint = full_joint_state(inst)
    reduced = reduced_state_exact(joint, inst)
    ensemble = branch_ensemble(inst)
    gamma = sbs_core.collective_gamma(inst.central, ensemble.gamma_mags)

    branches = observed_branches(inst)
    d_s = inst.central.d_s
    per_env_fids = []
    for row in branches:
        fids = {}
        for i in range(d_s):
            for j in range(i + 1, d_s):
                fids[(i, j)] = densmat.fidelity(row[i], row[j])
        per_env_fids.append(fids)
    eta = sbs_core.cor1_eta(inst.central, gamma, per_env_fids)

    results = {}
    for name, family in qubit_families(inst, rng).items():
        pe = tuple(
            sbs_core.discrimination_error(inst.central.sigma, branches[k], family.families[k])
            for k in range(len(branches))
        )
        sbs = sbs_core.build_sbs(inst.central, ensemble, family)
        eps = exact_epsilon(reduced, sbs)
        results[name] = FamilyResult(
            pe,
            sbs_core.prop1_bound(gamma, pe),
            eps,
            sbs_core.fifty_fifty_error(2.0 * eps),
        )

    eps_witness = min(results["helstrom"].epsilon, results["helstrom_weighted"].epsilon)
    info = exact_mutual_info_check(reduced, inst.central, inst.factor_dims[: 1 + len(inst.observed)], eps_witness)
    return InstanceReport(inst.t, gamma, eta, results, eps_witness, info)


# ---------------------------------------------------------------------------
# random instance generation


def random_central(rng: np.random.Generator, d_s: int = 2) -> CentralState:
    """Random central state with coherences c sqrt(sigma_i sigma_j).

    Mixing diag(sigma) with the matching pure superposition keeps the
    result PSD for any c in [0, 1] and any dimension.
    """
    if d_s == 2:
        s0 = float(rng.uniform(0.0, 1.0))
        sigma = np.array([s0, 1.0 - s0])
    else:
        draws = rng.uniform(0.0, 1.0, d_s)
        sigma = -np.log(np.clip(draws, 1e-300, None))
        sigma = sigma / np.sum(sigma)
    c = float(rng.uniform(0.0, 1.0))
    offdiag = {}
    for i in range(d_s):
        for j in range(i + 1, d_s):
            offdiag[(i, j)] = c * math.sqrt(sigma[i] * sigma[j])
    return CentralState(tuple(float(s) for s in sigma), offdiag)


def random_instance(
    seed: int,
    index: int,
    n_observed: int = 3,
    n_unobserved: int = 3,
    t_max: float = 2.0 * math.pi,
    d_s: int = 2,
    measure: MeasureSpec | None = None,
) -> OracleInstance:
    """Instance index of a seeded corpus: random central state, spins, time."""
    rng = sample_stream(seed, index, label=5)
    measure = measure or MeasureSpec()
    central = random_central(rng, d_s)
    n = n_observed + n_unobserved
    alpha, beta, gamma, lam, g = sample_spin_arrays(measure, rng, n)
    spins = [
        SpinParams(float(alpha[i]), float(beta[i]), float(gamma[i]), float(lam[i]), float(g[i]))
        for i in range(n)
    ]
    t = float(rng.uniform(0.0, t_max))
    eigs = (-1.0, 1.0) if d_s == 2 else tuple(float(a) for a in np.linspace(-1.0, 1.0, d_s))
    return OracleInstance(
        central,
        tuple(spins[:n_observed]),
        tuple(spins[n_observed:]),
        t,
        InteractionSpec(eigs),
    )

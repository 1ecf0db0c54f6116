"""Zero-photon heralding protocol: null-emission probabilities and their sum.

For an initial product arrangement the probability of never seeing a click
is the diagonal entry of the dark projector at that arrangement.  Summing
over all arrangements of s excitations traces the projector, so the total is
the dark-state count itself, whatever the couplings.  A Bernoulli sampler
emulates the finite-statistics experiment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .counting import ndark_formula
from .couplings import CouplingProfile
from .darkspace import DEFAULT_TOLERANCE, Projector, TolerancePolicy, dark_subspace, projector
from .operators import PureState
from .sector import enumerate_sector, state_index

SECTOR_SIZE_CAP = 5000  # the projector is dense: size^2 complex entries


@dataclass(frozen=True, eq=False)
class ProtocolResult:
    """Per-arrangement null-emission probabilities and their sum D(s)."""

    n_qubits: int
    n_excited: int
    per_arrangement: list[tuple[int, float]]
    d_of_s: float
    n_dark_expected: int
    profile_label: str


@dataclass(frozen=True)
class MonteCarloResult:
    """Finite-trials estimate of D(s) from simulated detector runs."""

    n_qubits: int
    n_excited: int
    trials_per_arrangement: int
    estimated_d: float
    standard_error: float
    seed: int
    profile_label: str


def null_emission_probability(init: int | PureState, proj: Projector) -> float:
    """Probability that the detector never clicks for a given initial state.

    For a basis arrangement (occupation pattern) this is the corresponding
    diagonal entry of the dark projector; a normalized superposition state
    gives the full expectation value <psi|P|psi>.
    """
    if isinstance(init, PureState):
        if init.basis.states != proj.sector.states:
            raise ValueError("state and projector belong to different sectors")
        amps = init.normalized().amplitudes
        return float(np.real(np.vdot(amps, proj.matrix @ amps)))
    k = state_index(proj.sector, init)  # validates popcount and bit range
    return float(np.real(proj.matrix[k, k]))


def measure_d(
    n_qubits: int,
    n_excited: int,
    profile: CouplingProfile,
    tol_policy: TolerancePolicy = DEFAULT_TOLERANCE,
) -> ProtocolResult:
    """Run the ideal protocol: sum null-emission probabilities over all arrangements.

    The sum equals the trace of the dark projector over the s-sector, i.e.
    the number of independent dark states there.
    """
    basis = enumerate_sector(n_qubits, n_excited)
    if basis.size > SECTOR_SIZE_CAP:
        raise ValueError(
            f"sector size {basis.size} exceeds the protocol cap {SECTOR_SIZE_CAP}"
        )
    if profile.n_qubits != n_qubits:
        raise ValueError(f"profile has {profile.n_qubits} couplings for {n_qubits} qubits")
    proj = projector(dark_subspace(n_qubits, n_excited, profile, tol_policy))
    diag = proj.diagonal()
    per = [(pattern, float(diag[k])) for k, pattern in enumerate(basis.states)]
    return ProtocolResult(
        n_qubits=n_qubits,
        n_excited=n_excited,
        per_arrangement=per,
        d_of_s=float(diag.sum()),
        n_dark_expected=ndark_formula(n_qubits, n_excited),
        profile_label=profile.label,
    )


def monte_carlo_protocol(
    n_qubits: int,
    n_excited: int,
    profile: CouplingProfile,
    trials: int,
    seed: int,
    tol_policy: TolerancePolicy = DEFAULT_TOLERANCE,
) -> MonteCarloResult:
    """Emulate the repeated experiment with ``trials`` runs per arrangement.

    Each arrangement k yields a Bernoulli(p_k) sample count with p_k its
    null-emission probability; arrangements draw from independently derived
    Philox streams, so results do not depend on evaluation order.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    exact = measure_d(n_qubits, n_excited, profile, tol_policy)
    root = np.random.SeedSequence(seed)
    children = root.spawn(len(exact.per_arrangement))
    estimate = 0.0
    var_sum = 0.0
    for (pattern, p), child in zip(exact.per_arrangement, children):
        p = min(max(p, 0.0), 1.0)
        rng = np.random.Generator(np.random.Philox(child))
        hits = int(rng.binomial(trials, p))
        p_hat = hits / trials
        estimate += p_hat
        var_sum += p_hat * (1.0 - p_hat) / trials
    return MonteCarloResult(
        n_qubits=n_qubits,
        n_excited=n_excited,
        trials_per_arrangement=trials,
        estimated_d=estimate,
        standard_error=float(np.sqrt(var_sum)),
        seed=seed,
        profile_label=profile.label,
    )

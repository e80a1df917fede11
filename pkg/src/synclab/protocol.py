"""The classical one-way synchronization protocol and its entropy cost.

Alice holds an unpolarized classical memory with ``2n-1`` symbols. Conditioned
on symbol ``j`` she rotates her clock by ``exp(-i H 2 pi j/(2n-1))``; Bob,
after receiving the memory, does the same to his clock. Forgetting the time
then dephases the joint state under the total clock Hamiltonian. The
classical clock that cancels the transit delay is not modeled: its effect
on the final state is nil, so the transit time is taken as zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import qmat
from .clock import default_povm_points, nlevel_clock
from .qmat import dephase, entropy_of_spectrum, propagator, tensor, von_neumann_entropy
from .sync import (
    canonical_time_deviation,
    energy_bandwidth,
    two_clock_sync_state,
)


@dataclass(frozen=True, eq=False)
class MemoryClassicalState:
    """``sum_j p_j |j><j| (x) blocks[j]`` on memory (x) clock A (x) clock B.

    Every stage of the protocol is block diagonal in the memory basis, so
    only the conditional clock-pair states are stored.
    """

    weights: np.ndarray
    blocks: np.ndarray

    @property
    def memory_dim(self):
        return len(self.weights)

    @property
    def clock_dim(self):
        return self.blocks.shape[1]

    def dense(self):
        m, d = self.memory_dim, self.clock_dim
        out = np.zeros((m * d, m * d), dtype=complex)
        for j, (p, b) in enumerate(zip(self.weights, self.blocks)):
            out[j * d:(j + 1) * d, j * d:(j + 1) * d] = p * b
        return out

    def memory_marginal(self):
        traces = np.einsum("jii->j", self.blocks).real
        return np.diag(self.weights * traces).astype(complex)

    def clocks_marginal(self):
        return np.einsum("j,jab->ab", self.weights, self.blocks)

    def spectrum(self):
        evals = [p * np.linalg.eigvalsh(qmat.hermitize(b)) for p, b in zip(self.weights, self.blocks)]
        return np.sort(np.concatenate(evals))[::-1]

    def entropy(self):
        return entropy_of_spectrum(self.spectrum())

    def map_blocks(self, fn):
        return MemoryClassicalState(self.weights, np.array([fn(j, b) for j, b in enumerate(self.blocks)]))


@dataclass(frozen=True, eq=False)
class ProtocolTranscript:
    n: int
    stages: list
    entropy_ledger: dict = field(default_factory=dict)

    def stage(self, label):
        for name, state in self.stages:
            if name == label:
                return state
        raise KeyError(label)

    @property
    def nu(self):
        return self.stage("bob_conditional")

    @property
    def nu_bar(self):
        return self.stage("time_forgotten")

    @property
    def sigma(self):
        return self.nu_bar.clocks_marginal()


def clock_pair_hamiltonian(n):
    h = nlevel_clock(n).H
    return qmat.local_hamiltonian(h, h)


def run_protocol(n):
    """Simulate the protocol for two ``n``-level clocks and record every stage."""
    if n < 2:
        raise ValueError("n must be >= 2")
    clock = nlevel_clock(n)
    m = 2 * n - 1
    eye = qmat.identity(n)
    rotations = [propagator(clock.H, clock.period * j / m) for j in range(m)]
    weights = np.full(m, 1 / m)

    initial = MemoryClassicalState(weights, np.array([tensor(clock.rho0, clock.rho0)] * m))
    alice = initial.map_blocks(lambda j, b: _conj(tensor(rotations[j], eye), b))
    bob = alice.map_blocks(lambda j, b: _conj(tensor(eye, rotations[j]), b))
    h_pair = clock_pair_hamiltonian(n)
    forgotten = bob.map_blocks(lambda j, b: dephase(b, h_pair))

    stages = [
        ("initial", initial),
        ("alice_conditional", alice),
        ("bob_conditional", bob),
        ("time_forgotten", forgotten),
    ]
    ledger = {name: state.entropy() for name, state in stages}
    return ProtocolTranscript(n, stages, ledger)


def _conj(u, b):
    return u @ b @ u.conj().T


def entropy_generated(t):
    """Entropy increase caused by forgetting the time, ``S(nu_bar) - S(nu)``."""
    return t.entropy_ledger["time_forgotten"] - t.entropy_ledger["bob_conditional"]


def memory_clock_mutual_information(state):
    """``I(memory : clocks)`` of a memory-classical state."""
    s_mem = entropy_of_spectrum(np.diag(state.memory_marginal()).real)
    return s_mem + von_neumann_entropy(state.clocks_marginal()) - state.entropy()


def audit_transcript(t, tol=1e-8):
    """Check the transcript invariants; returns ``{check name: passed}``."""
    m = 2 * t.n - 1
    gamma = qmat.identity(m) / m
    memory_ok = all(
        np.max(np.abs(state.memory_marginal() - gamma)) <= 1e-9 for _, state in t.stages
    )
    sigma = two_clock_sync_state(t.n).sigma
    sigma_ok = np.max(np.abs(t.sigma - sigma)) <= tol
    ref = t.stages[0][1].spectrum()
    unitary_ok = all(
        np.max(np.abs(state.spectrum() - ref)) <= 1e-9
        for name, state in t.stages
        if name != "time_forgotten"
    )
    factor_ok = np.max(np.abs(t.nu_bar.blocks - sigma[None])) <= tol
    return {
        "memory_marginal": bool(memory_ok),
        "sigma_marginal": bool(sigma_ok),
        "unitary_stages": bool(unitary_ok),
        "forgotten_product": bool(factor_ok),
    }


def sigma_spectrum_analytic(n):
    """Closed-form spectrum of the two-clock state as ``[(eigenvalue, multiplicity)]``.

    Eigenvalues ``j/n^2`` for ``1 <= j <= n-1`` occur twice, ``1/n`` once and
    zero ``(n-1)^2`` times. Values are exact fractions, largest first.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    out = [(Fraction(1, n), 1)]
    out += [(Fraction(j, n * n), 2) for j in range(n - 1, 0, -1)]
    out.append((Fraction(0), (n - 1) ** 2))
    return out


def analytic_eigenvalues(n):
    vals = [float(v) for v, mult in sigma_spectrum_analytic(n) for _ in range(mult)]
    return np.array(vals)


def analytic_entropy(n):
    return entropy_of_spectrum(analytic_eigenvalues(n))


def energy_block_dims(n):
    """Dimensions of the total-energy eigenspaces of the clock pair, counted numerically."""
    evals = np.linalg.eigvalsh(clock_pair_hamiltonian(n))
    levels = np.rint(evals).astype(int)
    return np.bincount(levels, minlength=2 * n - 1).tolist()


@dataclass(frozen=True)
class SpectrumReport:
    n: int
    analytic: np.ndarray
    numeric: np.ndarray
    max_abs_dev: float
    block_dims: list


def verify_spectrum(n):
    """Compare the closed-form spectrum with an eigendecomposition of the discrete construction."""
    numeric = np.sort(np.linalg.eigvalsh(two_clock_sync_state(n).sigma))[::-1]
    analytic = analytic_eigenvalues(n)
    return SpectrumReport(
        n,
        analytic,
        numeric,
        float(np.max(np.abs(numeric - analytic))),
        energy_block_dims(n),
    )


@dataclass(frozen=True)
class Theorem1Report:
    n: int
    povm_points: int
    dS: float
    dE: float
    dt: float
    rhs: float
    margin: float
    holds: bool


def check_theorem1(n, n_points=None, transcript=None):
    """Entropy generated by the protocol against ``1/(16 (dE dt)^2)``."""
    n_points = default_povm_points(n) if n_points is None else n_points
    t = run_protocol(n) if transcript is None else transcript
    s = two_clock_sync_state(n)
    ds = entropy_generated(t)
    dt = canonical_time_deviation(s, n_points)
    de = energy_bandwidth(s)[2]
    rhs = 1 / (16 * (de * dt) ** 2)
    margin = ds - rhs
    return Theorem1Report(n, n_points, ds, de, dt, rhs, margin, bool(ds >= rhs - 1e-9))

"""Quantum clocks and discretized time-covariant measurements."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qmat import Hamiltonian, check_density, evolve, identity, projector

COVARIANCE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class QuantumClock:
    """A state at time zero together with its Hamiltonian."""

    rho0: np.ndarray
    H: Hamiltonian

    def __post_init__(self):
        check_density(self.rho0)
        if self.rho0.shape[0] != self.H.dim:
            raise ValueError("state and Hamiltonian dimensions differ")
        if np.max(np.abs(evolve(self.rho0, self.H, self.period) - self.rho0)) > 1e-8:
            raise ValueError("state does not recur after one period")

    @property
    def period(self):
        return self.H.period

    @property
    def dim(self):
        return self.H.dim


def uniform_superposition(n):
    return np.full(n, 1 / np.sqrt(n), dtype=complex)


def nlevel_clock(n):
    """Clock on ``C^n`` with ``H = diag(0, 1, ..., n-1)`` started in the uniform superposition."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return QuantumClock(projector(uniform_superposition(n)), Hamiltonian.diagonal(np.arange(n)))


def clock_state_at(c, t):
    return evolve(c.rho0, c.H, t)


@dataclass(frozen=True, eq=False)
class CovariantPovm:
    """POVM with ``N`` outcomes on the uniform grid ``t_k = k period / N``.

    Completeness and the discrete covariance
    ``evolve(M_k, H, period/N) == M_{k+1 mod N}`` are checked on construction.
    """

    effects: np.ndarray
    times: np.ndarray
    H: Hamiltonian

    def __post_init__(self):
        effects = np.asarray(self.effects, dtype=complex)
        n_out = effects.shape[0]
        if n_out < 1 or effects.shape[1:] != (self.H.dim, self.H.dim):
            raise ValueError("effects must have shape (N, dim, dim)")
        expected = np.arange(n_out) * self.period / n_out
        if not np.allclose(self.times, expected, atol=1e-12):
            raise ValueError("times must form the uniform grid k*period/N")
        for m in effects:
            if np.max(np.abs(m - m.conj().T)) > COVARIANCE_TOL:
                raise ValueError("effects must be Hermitian")
            if np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() < -COVARIANCE_TOL:
                raise ValueError("effects must be positive semidefinite")
        if np.max(np.abs(effects.sum(axis=0) - identity(self.H.dim))) > COVARIANCE_TOL:
            raise ValueError("effects do not sum to the identity")
        shifted = np.array([evolve(m, self.H, self.period / n_out) for m in effects])
        if np.max(np.abs(shifted - np.roll(effects, -1, axis=0))) > COVARIANCE_TOL:
            raise ValueError("effects are not covariant under one grid step")
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))

    @property
    def period(self):
        return self.H.period

    @property
    def n_outcomes(self):
        return self.effects.shape[0]

    @property
    def step(self):
        return self.period / self.n_outcomes


def default_povm_points(n):
    return 8 * (2 * n - 1)


def canonical_covariant_povm(c, n_points=None):
    """Effects ``(n/N) |psi_{t_k}><psi_{t_k}|`` built from the uniform superposition.

    The superposition is taken in the eigenbasis of ``c.H``; for
    ``N >= 2n - 1`` the effects sum to the identity.
    """
    n = c.dim
    if n_points is None:
        n_points = default_povm_points(n)
    if n_points < 2 * n - 1:
        raise ValueError(f"need at least {2 * n - 1} POVM points for a {n}-level clock, got {n_points}")
    _, vecs = np.linalg.eigh(c.H.mat)
    psi = vecs @ uniform_superposition(n)
    times = np.arange(n_points) * c.period / n_points
    base = projector(psi) * (n / n_points)
    effects = np.array([evolve(base, c.H, t) for t in times])
    return CovariantPovm(effects, times, c.H)


def time_likelihood(c, m, true_t, k):
    """Probability ``tr(rho_t M_k)`` of reading grid time ``k`` when the true time is ``true_t``."""
    if not 0 <= k < m.n_outcomes:
        raise IndexError(f"outcome index {k} out of range for {m.n_outcomes} outcomes")
    p = float(np.real(np.trace(clock_state_at(c, true_t) @ m.effects[k])))
    return min(max(p, 0.0), 1.0)


def likelihoods(c, m, true_t):
    """All outcome probabilities at once."""
    rho = clock_state_at(c, true_t)
    return np.clip(np.einsum("ij,kji->k", rho, m.effects).real, 0.0, 1.0)

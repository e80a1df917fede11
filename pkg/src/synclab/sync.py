"""Synchronisms of two clocks and their quality measures."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmat
from .clock import (
    QuantumClock,
    canonical_covariant_povm,
    clock_state_at,
    nlevel_clock,
    uniform_superposition,
)
from .qmat import Hamiltonian, commutator, identity, tensor, trace_norm

STATIONARITY_TOL = 1e-8
OCCUPATION_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Synchronism:
    """Joint state ``sigma`` of two clocks, stationary under the joint evolution."""

    sigma: np.ndarray
    HA: Hamiltonian
    HB: Hamiltonian

    def __post_init__(self):
        if not np.isclose(self.HA.period, self.HB.period):
            raise ValueError("clocks must share a period")
        if self.sigma.shape != (self.dim_a * self.dim_b,) * 2:
            raise ValueError("state dimension does not match the Hamiltonians")
        qmat.check_density(self.sigma)
        drift = trace_norm(commutator(self.total_hamiltonian(), self.sigma))
        if drift > STATIONARITY_TOL:
            raise ValueError(f"state is not stationary (||[H, sigma]||_1 = {drift:.3g})")

    @property
    def dim_a(self):
        return self.HA.dim

    @property
    def dim_b(self):
        return self.HB.dim

    @property
    def dims(self):
        return self.dim_a, self.dim_b

    @property
    def period(self):
        return self.HA.period

    def total_hamiltonian(self):
        return qmat.local_hamiltonian(self.HA, self.HB)

    def relative_hamiltonian(self):
        """Generator of the relative translation ``alpha_t (x) beta_{-t}``."""
        return tensor(self.HA.mat, identity(self.dim_b)) - tensor(identity(self.dim_a), self.HB.mat)

    def reduced(self, keep):
        return qmat.partial_trace(self.sigma, self.dim_a, self.dim_b, keep)


def discrete_sync_sigma(clock):
    """Average of ``rho_t (x) rho_t`` over the ``2n-1`` points ``t_j = 2 pi j/(2n-1)``."""
    n = clock.dim
    m = 2 * n - 1
    sigma = np.zeros((n * n, n * n), dtype=complex)
    for j in range(m):
        rho = clock_state_at(clock, clock.period * j / m)
        sigma += tensor(rho, rho)
    return qmat.hermitize(sigma / m)


def two_clock_sync_state(n):
    """Optimally synchronized pair of ``n``-level clocks, as a :class:`Synchronism`."""
    if n < 2:
        raise ValueError("n must be >= 2")
    clock = nlevel_clock(n)
    return Synchronism(discrete_sync_sigma(clock), clock.H, clock.H)


def product_control(n):
    """Unsynchronized control: maximally mixed ``I/n^2`` with ``n``-level Hamiltonians."""
    if n < 2:
        raise ValueError("n must be >= 2")
    h = nlevel_clock(n).H
    return Synchronism(identity(n * n) / n**2, h, h)


def relative_drift(s):
    return trace_norm(commutator(s.relative_hamiltonian(), s.sigma))


def is_unsynchronized(s, tol=1e-8):
    """True iff ``sigma`` is invariant under relative time translation."""
    return relative_drift(s) <= tol


def sync_derivative_norm(s):
    """Trace norm of the derivative of ``sigma`` under relative translation at half speed."""
    stat = trace_norm(commutator(s.total_hamiltonian(), s.sigma))
    if stat > STATIONARITY_TOL:
        raise ValueError("state is not stationary")
    return 0.5 * relative_drift(s)


def derivative_norm_chain(s):
    """The three equal expressions ``(1/2)||[HA-HB, s]||, ||[HA, s]||, ||[HB, s]||``."""
    ha = tensor(s.HA.mat, identity(s.dim_b))
    hb = tensor(identity(s.dim_a), s.HB.mat)
    return (
        0.5 * relative_drift(s),
        trace_norm(commutator(ha, s.sigma)),
        trace_norm(commutator(hb, s.sigma)),
    )


def circular_sq_dist(s, t, period):
    """``min_l (s - t + l*period)^2``."""
    if not period > 0:
        raise ValueError("period must be positive")
    d = np.mod(np.asarray(s, dtype=float) - np.asarray(t, dtype=float), period)
    d = np.minimum(d, period - d)
    return d * d


def joint_time_distribution(s, m_a, m_b):
    """``q[kA, kB] = tr(sigma (M_kA (x) N_kB))``."""
    if not (np.isclose(m_a.period, s.period) and np.isclose(m_b.period, s.period)):
        raise ValueError("measurement grids must share the synchronism's period")
    if m_a.H.dim != s.dim_a or m_b.H.dim != s.dim_b:
        raise ValueError("measurement dimension mismatch")
    da, db = s.dims
    sig = s.sigma.reshape(da, db, da, db)
    # x[a, k, l] = sum_ij MA[a, j, i] sig[i, k, j, l]
    x = np.tensordot(m_a.effects, sig, axes=([1, 2], [2, 0]))
    q = np.tensordot(x, m_b.effects, axes=([1, 2], [2, 1])).real
    return q


def deviation_from_distribution(q, times_a, times_b, period):
    """Root mean circular-squared difference of grid readings distributed as ``q``."""
    d2 = circular_sq_dist(np.asarray(times_a)[:, None], np.asarray(times_b)[None, :], period)
    return float(np.sqrt(max((np.asarray(q) * d2).sum(), 0.0)))


def standard_time_deviation(s, m_a, m_b):
    q = joint_time_distribution(s, m_a, m_b)
    return deviation_from_distribution(q, m_a.times, m_b.times, s.period)


def canonical_time_deviation(s, n_points=None):
    """Standard time deviation using the canonical covariant POVM on both sides.

    Only defined when both clocks are the ``n``-level clocks of
    :func:`nlevel_clock` (or anything with the same Hamiltonian).
    """
    povms = []
    for h in (s.HA, s.HB):
        c = QuantumClock(qmat.projector(uniform_superposition(h.dim)), h)
        povms.append(canonical_covariant_povm(c, n_points))
    return standard_time_deviation(s, *povms)


def _occupied_width(h, reduced):
    evals, vecs = np.linalg.eigh(h.mat)
    weights = np.einsum("ij,ik,kj->j", vecs.conj(), reduced, vecs).real
    occupied = evals[weights > OCCUPATION_TOL]
    if occupied.size == 0:
        return 0.0
    return float(occupied.max() - occupied.min())


def bandwidth(sigma, h_a, h_b):
    """``(dEA, dEB, dEA + dEB)`` for any joint state, stationary or not."""
    da, db = h_a.dim, h_b.dim
    dea = _occupied_width(h_a, qmat.partial_trace(sigma, da, db, "A"))
    deb = _occupied_width(h_b, qmat.partial_trace(sigma, da, db, "B"))
    return dea, deb, dea + deb


def energy_bandwidth(s):
    """Widths of the occupied parts of both local spectra and their sum."""
    return bandwidth(s.sigma, s.HA, s.HB)


@dataclass(frozen=True)
class Lemma1Report:
    dt: float
    lhs: float
    rhs: float
    applicable: bool
    holds: bool


def check_lemma1(s, m_a=None, m_b=None, dt=None):
    """Compare ``1/(4 dt)`` with :func:`sync_derivative_norm`.

    The inequality is only claimed for ``dt <= period/12``; outside that
    regime ``applicable`` is false and ``holds`` is vacuously true.
    """
    if dt is None:
        dt = standard_time_deviation(s, m_a, m_b) if m_a is not None else canonical_time_deviation(s)
    rhs = sync_derivative_norm(s)
    lhs = 1 / (4 * dt) if dt > 0 else float("inf")
    applicable = dt <= s.period / 12
    holds = (not applicable) or lhs <= rhs + 1e-9
    return Lemma1Report(dt, lhs, rhs, applicable, holds)

"""Seeded invariant suites for every module, run at small dimensions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import clock, discord, protocol, qmat, sync


@dataclass(frozen=True)
class SuiteResult:
    module: str
    name: str
    cases: int
    failures: int

    @property
    def passed(self):
        return self.failures == 0


def _random_case(rng, max_dim=6):
    dim = int(rng.integers(1, max_dim + 1))
    return qmat.random_density(dim, rng), qmat.random_hamiltonian(dim, rng), float(rng.uniform(-10, 10))


def _count(checks):
    checks = list(checks)
    return len(checks), sum(not ok for ok in checks)


def qmat_suites(seed=0, cases=100):
    rng = np.random.default_rng([seed, 0])

    def entropy_invariance():
        for _ in range(cases):
            rho, h, t = _random_case(rng)
            yield abs(qmat.von_neumann_entropy(qmat.evolve(rho, h, t)) - qmat.von_neumann_entropy(rho)) <= 1e-9

    def kull_identity():
        for _ in range(cases):
            rho, h, _ = _random_case(rng)
            bar = qmat.dephase(rho, h)
            gap = qmat.von_neumann_entropy(bar) - qmat.von_neumann_entropy(rho)
            yield abs(gap - qmat.relative_entropy(rho, bar)) <= 1e-8

    def pinsker():
        for _ in range(cases):
            dim = int(rng.integers(1, 7))
            rho, sig = qmat.random_density(dim, rng), qmat.random_density(dim, rng)
            yield qmat.relative_entropy(rho, sig) >= qmat.trace_norm(rho - sig) ** 2 / 2 - 1e-12

    def trace_norm_is_norm():
        for _ in range(cases):
            dim = int(rng.integers(1, 7))
            a, b = (rng.standard_normal((2, dim, dim)) + 1j * rng.standard_normal((2, dim, dim)))
            z = complex(rng.standard_normal(), rng.standard_normal())
            tri = qmat.trace_norm(a + b) <= qmat.trace_norm(a) + qmat.trace_norm(b) + 1e-9
            hom = abs(qmat.trace_norm(z * a) - abs(z) * qmat.trace_norm(a)) <= 1e-9 * max(1.0, abs(z) * qmat.trace_norm(a))
            yield tri and hom

    def partial_trace_product():
        for _ in range(cases):
            da, db = (int(x) for x in rng.integers(1, 5, size=2))
            rho, mu = qmat.random_density(da, rng), qmat.random_density(db, rng)
            joint = qmat.tensor(rho, mu)
            yield (
                np.max(np.abs(qmat.partial_trace(joint, da, db, "A") - rho)) <= 1e-12
                and np.max(np.abs(qmat.partial_trace(joint, da, db, "B") - mu)) <= 1e-12
            )

    return [
        ("entropy_unitary_invariance", entropy_invariance),
        ("kull_identity", kull_identity),
        ("pinsker", pinsker),
        ("trace_norm_is_norm", trace_norm_is_norm),
        ("partial_trace_product", partial_trace_product),
    ]


def clock_suites(seed=0):
    def completeness():
        for n in range(2, 6):
            for n_points in (2 * n - 1, 8 * (2 * n - 1)):
                m = clock.canonical_covariant_povm(clock.nlevel_clock(n), n_points)
                yield np.max(np.abs(m.effects.sum(0) - qmat.identity(n))) <= 1e-9

    def covariance():
        for n in range(2, 6):
            c = clock.nlevel_clock(n)
            m = clock.canonical_covariant_povm(c, 4 * n)
            shifted = np.array([qmat.evolve(e, c.H, m.step) for e in m.effects])
            yield np.max(np.abs(shifted - np.roll(m.effects, -1, axis=0))) <= 1e-9

    def likelihood_covariance():
        rng = np.random.default_rng([seed, 1])
        for n in range(2, 6):
            c = clock.nlevel_clock(n)
            m = clock.canonical_covariant_povm(c)
            t = float(rng.uniform(0, c.period))
            shift = int(rng.integers(1, m.n_outcomes))
            base = clock.likelihoods(c, m, t)
            moved = clock.likelihoods(c, m, t + shift * m.step)
            yield np.max(np.abs(np.roll(base, shift) - moved)) <= 1e-9

    def dephased_start_is_mixed():
        for n in range(2, 8):
            c = clock.nlevel_clock(n)
            yield np.max(np.abs(qmat.dephase(c.rho0, c.H) - qmat.identity(n) / n)) <= 1e-10

    return [
        ("povm_completeness", completeness),
        ("povm_covariance", covariance),
        ("likelihood_covariance", likelihood_covariance),
        ("dephased_start_is_mixed", dephased_start_is_mixed),
    ]


def sync_suites(seed=0):
    def derivative_chain():
        for n in range(2, 7):
            a, b, c = sync.derivative_norm_chain(sync.two_clock_sync_state(n))
            yield abs(a - b) <= 1e-8 and abs(a - c) <= 1e-8

    def grid_rotation_invariance():
        for n in range(2, 5):
            s = sync.two_clock_sync_state(n)
            m = clock.canonical_covariant_povm(clock.nlevel_clock(n))
            base = sync.standard_time_deviation(s, m, m)
            for shift in (1, 3):
                rolled = clock.CovariantPovm(np.roll(m.effects, shift, axis=0), m.times, m.H)
                yield abs(sync.standard_time_deviation(s, rolled, rolled) - base) <= 1e-9

    def bandwidth_evolution_invariance():
        rng = np.random.default_rng([seed, 2])
        for _ in range(20):
            d = int(rng.integers(2, 5))
            ha, hb = (qmat.Hamiltonian.diagonal(rng.integers(0, 4, size=d)) for _ in range(2))
            # restrict the support to a random subset of levels on each side
            keep = rng.random(d * d) < 0.5
            keep[int(rng.integers(d * d))] = True
            g = qmat.random_density(d * d, rng) * np.outer(keep, keep)
            rho = g / np.trace(g).real
            t = float(rng.uniform(0, 7))
            moved = qmat.evolve(rho, qmat.local_hamiltonian(ha, hb), t)
            yield sync.bandwidth(rho, ha, hb) == sync.bandwidth(moved, ha, hb)

    def unsynchronized_controls():
        for n in range(2, 6):
            s = sync.product_control(n)
            m = clock.canonical_covariant_povm(clock.nlevel_clock(n))
            dt = sync.standard_time_deviation(s, m, m)
            yield (
                sync.is_unsynchronized(s)
                and sync.sync_derivative_norm(s) <= 1e-12
                and abs(dt - s.period / np.sqrt(12)) <= 0.02 * s.period / np.sqrt(12)
            )

    return [
        ("derivative_norm_chain", derivative_chain),
        ("grid_rotation_invariance", grid_rotation_invariance),
        ("bandwidth_evolution_invariance", bandwidth_evolution_invariance),
        ("unsynchronized_controls", unsynchronized_controls),
    ]


def protocol_suites(seed=0):
    def audits():
        for n in range(2, 6):
            yield all(protocol.audit_transcript(protocol.run_protocol(n)).values())

    def kull_on_transcript():
        for n in (2, 3):
            t = protocol.run_protocol(n)
            k = qmat.relative_entropy(t.nu.dense(), t.nu_bar.dense())
            yield abs(protocol.entropy_generated(t) - k) <= 1e-8

    def entropy_equals_sigma_entropy():
        for n in range(2, 8):
            t = protocol.run_protocol(n)
            yield abs(protocol.entropy_generated(t) - protocol.analytic_entropy(n)) <= 1e-8

    def spectrum():
        for n in range(2, 9):
            yield protocol.verify_spectrum(n).max_abs_dev < 1e-9

    return [
        ("transcript_audits", audits),
        ("kull_on_transcript", kull_on_transcript),
        ("entropy_generated", entropy_equals_sigma_entropy),
        ("closed_form_spectrum", spectrum),
    ]


def discord_suites(seed=0, cases=100):
    rng = np.random.default_rng([seed, 3])

    def _instances():
        for k in range(cases):
            dims = (2, 2) if k % 2 == 0 else (2, 3)
            sigma = qmat.random_density(dims[0] * dims[1], rng)
            side = "A" if k % 4 < 2 else "B"
            d = dims[0] if side == "A" else dims[1]
            yield sigma, dims, discord.MeasurementFamily.from_basis(qmat.random_unitary(d, rng), side)

    def distdis():
        for sigma, dims, m in _instances():
            yield abs(discord.distdis_decomposition(sigma, m, dims)[2] - discord.discord_z_given(sigma, m, dims)) <= 1e-8

    def nonnegative():
        for sigma, dims, m in _instances():
            yield discord.discord_z_given(sigma, m, dims) >= -1e-9

    def variant_gap():
        for sigma, dims, m in _instances():
            out = discord.measure(sigma, m, dims)
            meas = out.reduced_A if m.side == "A" else out.reduced_B
            dephased = sum(p * r for p, r in zip(out.probs, meas))
            s_meas = qmat.von_neumann_entropy(qmat.partial_trace(sigma, *dims, m.side))
            gap = discord.discord_z_given(sigma, m, dims) - discord.discord_oz_given(sigma, m, dims)
            yield abs(gap - (qmat.von_neumann_entropy(dephased) - s_meas)) <= 1e-8

    return [
        ("distdis_decomposition", distdis),
        ("z_discord_nonnegative", nonnegative),
        ("variant_gap", variant_gap),
    ]


def run_all(seed=0):
    """Run every suite; returns a list of :class:`SuiteResult` grouped by module."""
    groups = {
        "qmat": qmat_suites(seed),
        "clock": clock_suites(seed),
        "sync": sync_suites(seed),
        "protocol": protocol_suites(seed),
        "discord": discord_suites(seed),
    }
    results = []
    for module, suites in groups.items():
        for name, fn in suites:
            n_cases, failures = _count(fn())
            results.append(SuiteResult(module, name, n_cases, failures))
    return results

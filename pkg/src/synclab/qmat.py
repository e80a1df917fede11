"""Dense density-matrix algebra: composition, time evolution, dephasing,
spectral functions and distances.

States are plain complex ``numpy`` arrays. Entropies are in nats.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EIGCUT = 1e-12
HERM_TOL = 1e-10
DEGENERACY_TOL = 1e-9


def hermitize(m):
    """Return ``(m + m^dagger)/2``."""
    m = np.asarray(m, dtype=complex)
    return 0.5 * (m + m.conj().T)


def identity(dim):
    return np.eye(dim, dtype=complex)


def ket(dim, index):
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(vec):
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def check_density(rho, tol=HERM_TOL):
    """Raise ``ValueError`` unless ``rho`` is Hermitian, unit-trace and PSD to ``tol``."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 1:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"density matrix trace is {np.trace(rho).real:.3g}, expected 1")
    if np.linalg.eigvalsh(hermitize(rho)).min() < -tol:
        raise ValueError("density matrix is not positive semidefinite")
    return rho


def is_density(rho, tol=HERM_TOL):
    try:
        check_density(rho, tol)
    except ValueError:
        return False
    return True


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """Hermitian generator together with an exact recurrence time ``period``.

    The recurrence condition ``exp(-i H period) ~ phase * 1`` is checked on
    construction, i.e. all eigenvalue gaps are integer multiples of
    ``2 pi / period``.
    """

    mat: np.ndarray
    period: float = 2 * np.pi

    def __post_init__(self):
        mat = np.asarray(self.mat, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("Hamiltonian must be a square matrix")
        if np.max(np.abs(mat - mat.conj().T)) > HERM_TOL:
            raise ValueError("Hamiltonian is not Hermitian")
        if not self.period > 0:
            raise ValueError("period must be positive")
        evals = np.linalg.eigvalsh(hermitize(mat))
        gaps = (evals - evals[0]) * self.period / (2 * np.pi)
        if np.max(np.abs(gaps - np.round(gaps)), initial=0.0) > 1e-8:
            raise ValueError("period is not a recurrence time of the Hamiltonian")
        object.__setattr__(self, "mat", hermitize(mat))

    @property
    def dim(self):
        return self.mat.shape[0]

    @classmethod
    def diagonal(cls, levels, period=2 * np.pi):
        return cls(np.diag(np.asarray(levels, dtype=complex)), period)


def _hmat(h):
    return h.mat if isinstance(h, Hamiltonian) else hermitize(h)


def _eigh(h):
    return np.linalg.eigh(_hmat(h))


def tensor(a, *rest):
    """Kronecker product of one or more square matrices."""
    out = np.asarray(a, dtype=complex)
    for b in rest:
        out = np.kron(out, np.asarray(b, dtype=complex))
    return out


def local_hamiltonian(h_a, h_b):
    """``H_A (x) 1 + 1 (x) H_B`` for the two local generators."""
    ha, hb = _hmat(h_a), _hmat(h_b)
    return tensor(ha, identity(hb.shape[0])) + tensor(identity(ha.shape[0]), hb)


def commutator(a, b):
    return a @ b - b @ a


def partial_trace(rho, dim_a, dim_b, keep="A"):
    """Reduce a state on ``A (x) B`` to the subsystem named by ``keep``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dim_a * dim_b, dim_a * dim_b):
        raise ValueError(
            f"state of shape {rho.shape} does not match dims {dim_a}x{dim_b}"
        )
    r = rho.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == "A":
        return np.einsum("ibjb->ij", r)
    if keep == "B":
        return np.einsum("aiaj->ij", r)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def swap_subsystems(rho, dim_a, dim_b):
    """Reorder a state on ``A (x) B`` into ``B (x) A``."""
    r = np.asarray(rho, dtype=complex).reshape(dim_a, dim_b, dim_a, dim_b)
    return r.transpose(1, 0, 3, 2).reshape(dim_a * dim_b, dim_a * dim_b)


def propagator(h, t):
    """``exp(-i H t)``."""
    evals, vecs = _eigh(h)
    return (vecs * np.exp(-1j * evals * t)) @ vecs.conj().T


def evolve(rho, h, t):
    """Conjugate ``rho`` by ``exp(-i H t)``."""
    u = propagator(h, t)
    return u @ np.asarray(rho, dtype=complex) @ u.conj().T


def dephase(rho, h, tol=DEGENERACY_TOL):
    """Pinch ``rho`` onto the eigenspaces of ``h``: ``sum_j Q_j rho Q_j``.

    Equals the infinite time average of :func:`evolve`. Eigenvalues closer
    than ``tol`` are treated as one eigenspace.
    """
    evals, vecs = _eigh(h)
    r = vecs.conj().T @ np.asarray(rho, dtype=complex) @ vecs
    mask = np.abs(evals[:, None] - evals[None, :]) <= tol
    return vecs @ (r * mask) @ vecs.conj().T


def trace_norm(m):
    """Sum of singular values of ``m``."""
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return 0.0
    scale = np.max(np.abs(m))
    if scale == 0:
        return 0.0
    # (anti-)Hermitian input: eigenvalues are cheaper than an SVD
    if np.max(np.abs(m - m.conj().T)) <= 1e-13 * scale:
        return float(np.abs(np.linalg.eigvalsh(hermitize(m))).sum())
    if np.max(np.abs(m + m.conj().T)) <= 1e-13 * scale:
        return float(np.abs(np.linalg.eigvalsh(hermitize(1j * m))).sum())
    return float(np.linalg.svd(m, compute_uv=False).sum())


def entropy_of_spectrum(evals, eigcut=EIGCUT):
    """``-sum p ln p`` over entries above ``eigcut``."""
    p = np.asarray(evals, dtype=float)
    p = p[p > eigcut]
    return float(-(p * np.log(p)).sum())


def von_neumann_entropy(rho, eigcut=EIGCUT):
    return entropy_of_spectrum(np.linalg.eigvalsh(hermitize(rho)), eigcut)


def relative_entropy(rho, sigma, eigcut=EIGCUT):
    """Umegaki relative entropy ``tr rho ln rho - tr rho ln sigma``.

    Returns ``inf`` when the support of ``rho`` is not contained in the
    support of ``sigma``.
    """
    rho, sigma = hermitize(rho), hermitize(sigma)
    if rho.shape != sigma.shape:
        raise ValueError("states must have equal dimension")
    r_evals = np.linalg.eigvalsh(rho)
    s_evals, s_vecs = np.linalg.eigh(sigma)
    rho_in_s = (s_vecs.conj().T @ rho @ s_vecs).diagonal().real
    support = s_evals > eigcut
    if rho_in_s[~support].sum() > eigcut:
        return float("inf")
    neg_entropy = -entropy_of_spectrum(r_evals, eigcut)
    cross = float((rho_in_s[support] * np.log(s_evals[support])).sum())
    return max(neg_entropy - cross, 0.0)


def as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_density(dim, seed=None):
    """Full-rank random state ``G G^dagger / tr(G G^dagger)``, ``G`` complex Ginibre."""
    rng = as_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return hermitize(rho / np.trace(rho).real)


def random_unitary(dim, seed=None):
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    rng = as_rng(seed)
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hamiltonian(dim, seed=None, max_level=3):
    """Random Hermitian matrix with integer spectrum in ``0..max_level`` (period ``2 pi``).

    Degenerate levels occur with positive probability, which exercises
    eigenspace grouping in :func:`dephase`.
    """
    rng = as_rng(seed)
    levels = rng.integers(0, max_level + 1, size=dim).astype(float)
    u = random_unitary(dim, rng)
    return Hamiltonian((u * levels) @ u.conj().T)


def hermitize_batch(m):
    """:func:`hermitize` over the last two axes."""
    m = np.asarray(m, dtype=complex)
    return 0.5 * (m + np.swapaxes(m, -1, -2).conj())

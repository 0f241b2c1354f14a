"""State zoo: Werner, GHZ and Bell states, random samplers, squeezed states.

Also holds the Monte Carlo check of the local hidden variable model for
Werner states and the pseudo-spin CHSH curve for two-mode squeezed light.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import GuardError, StructuralError
from .quantum import (
    DensityMatrix,
    chsh_max_qubits,
    is_ppt,
    kron_all,
)

# ------------------------------------------------------------- Werner


def flip_operator(d):
    """``F |i j> = |j i>`` on ``C^d x C^d``."""
    f = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            f[j * d + i, i * d + j] = 1.0
    return f


def werner_state(d, p):
    """``(1-p) P+/r+ + p P-/r-`` with ``P+- = (1 +- F)/2`` and ``r+- = (d**2 +- d)/2``."""
    if d < 2:
        raise GuardError(f"Werner states need d >= 2, got {d}")
    if not 0.0 <= p <= 1.0:
        raise GuardError(f"antisymmetric weight p must be in [0, 1], got {p}")
    f = flip_operator(d)
    eye = np.eye(d * d)
    plus, minus = (eye + f) / 2, (eye - f) / 2
    r_plus, r_minus = (d * d + d) / 2, (d * d - d) / 2
    return DensityMatrix((1 - p) * plus / r_plus + p * minus / r_minus, (d, d))


@dataclass(frozen=True)
class WernerThresholds:
    separable_max_p: float
    lhv_model_p: float


def werner_thresholds(d):
    if d < 2:
        raise GuardError(f"Werner states need d >= 2, got {d}")
    return WernerThresholds(0.5, 1.0 - (d + 1) / (2.0 * d * d))


def werner_maximally_mixed_p(d):
    """Weight at which the Werner state is ``1/d**2``."""
    return (d - 1) / (2.0 * d)


def werner_chsh(p):
    """Closed-form CHSH maximum ``sqrt2 |1 - 4p| / 3`` of the qubit Werner state."""
    return np.sqrt(2) * abs(1 - 4 * p) / 3


def basis_projectors(u):
    """Rank-one projectors onto the columns of a unitary."""
    u = np.asarray(u, dtype=complex)
    return np.einsum("im,jm->mij", u, u.conj())


def check_projector_set(qs, d, tol=1e-9):
    qs = np.asarray(qs, dtype=complex)
    if qs.shape != (d, d, d):
        raise StructuralError(f"expected {d} projectors of size {d}x{d}, got shape {qs.shape}")
    for q in qs:
        if np.max(np.abs(q - q.conj().T)) > tol or np.max(np.abs(q @ q - q)) > tol:
            raise StructuralError("measurement element is not an orthogonal projector")
        if abs(np.trace(q).real - 1) > tol:
            raise StructuralError("measurement projectors must be one-dimensional")
    if np.max(np.abs(qs.sum(axis=0) - np.eye(d))) > tol:
        raise StructuralError("measurement projectors do not sum to the identity")
    return qs


def _sphere(rng, size, d):
    z = rng.standard_normal((size, d)) + 1j * rng.standard_normal((size, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


@dataclass(frozen=True, eq=False)
class WernerMcResult:
    d: int
    p_star: float
    samples: int
    mc_table: np.ndarray
    quantum_table: np.ndarray
    sigma: np.ndarray
    max_abs_dev: float
    max_z: float

    def to_dict(self):
        return {
            "d": self.d,
            "p_star": self.p_star,
            "samples": self.samples,
            "max_abs_dev": self.max_abs_dev,
            "sigma": float(np.max(self.sigma)),
            "max_z": self.max_z,
            "mc_table": self.mc_table.tolist(),
            "quantum_table": self.quantum_table.tolist(),
        }


def werner_lhv_mc(d, alice_projectors, bob_projectors, samples=10**6, seed=0, shard_size=100_000):
    """Monte Carlo integral of the hidden-variable model against the quantum table.

    The hidden variable is a uniform unit vector ``lam`` in ``C^d``. Alice
    answers ``mu`` with probability ``<lam, Q_mu lam>``; Bob answers the
    ``nu`` minimizing ``<lam, Q'_nu lam>`` (lowest index on ties). Shards of
    ``shard_size`` samples use seeds ``seed + shard`` and are combined in
    shard order.
    """
    if samples < 10**4:
        raise GuardError("werner_lhv_mc needs at least 1e4 samples")
    qa = check_projector_set(alice_projectors, d)
    qb = check_projector_set(bob_projectors, d)
    p_star = werner_thresholds(d).lhv_model_p
    total = np.zeros((d, d))
    total_sq = np.zeros((d, d))
    done, shard = 0, 0
    while done < samples:
        size = min(shard_size, samples - done)
        lam = _sphere(np.random.default_rng(seed + shard), size, d)
        chi_a = np.einsum("ni,mij,nj->nm", lam.conj(), qa, lam).real
        bob = np.argmin(np.einsum("ni,mij,nj->nm", lam.conj(), qb, lam).real, axis=1)
        onehot = np.zeros((size, d))
        onehot[np.arange(size), bob] = 1.0
        joint = chi_a[:, :, None] * onehot[:, None, :]
        total += joint.sum(axis=0)
        total_sq += (joint**2).sum(axis=0)
        done += size
        shard += 1
    mean = total / samples
    var = np.maximum(total_sq / samples - mean**2, 0.0)
    sigma = np.sqrt(var / samples)
    rho = werner_state(d, p_star).matrix
    exact = np.array([[np.trace(rho @ np.kron(qa[m], qb[n])).real for n in range(d)] for m in range(d)])
    dev = np.abs(mean - exact)
    z = dev / np.maximum(sigma, 1e-300)
    return WernerMcResult(d, p_star, samples, mean, exact, sigma, float(dev.max()), float(z.max()))


# ----------------------------------------------------------- pure states


def ghz_state(n):
    if not 2 <= n <= 10:
        raise GuardError(f"ghz_state needs 2 <= n <= 10, got {n}")
    psi = np.zeros(1 << n)
    psi[0] = psi[-1] = 1.0
    return DensityMatrix.from_vector(psi, (2,) * n)


_BELL = {
    "phi+": [1, 0, 0, 1],
    "phi-": [1, 0, 0, -1],
    "psi+": [0, 1, 1, 0],
    "psi-": [0, 1, -1, 0],
}


def bell_vector(name):
    try:
        return np.array(_BELL[name], dtype=complex) / np.sqrt(2)
    except KeyError:
        raise StructuralError(f"unknown Bell state {name!r}; choose from {sorted(_BELL)}") from None


def bell_state(name):
    return DensityMatrix.from_vector(bell_vector(name), (2, 2))


def two_qubit_pure(phi):
    """``cos(phi)|00> + sin(phi)|11>``."""
    return DensityMatrix.from_vector([np.cos(phi), 0, 0, np.sin(phi)], (2, 2))


def random_pure_vector(d, rng):
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return z / np.linalg.norm(z)


# ------------------------------------------------------------- samplers


def separable_sampler(site_dims, terms, seed):
    """Random convex combination of ``terms`` random pure product states."""
    if terms < 1:
        raise GuardError("separable_sampler needs at least one term")
    rng = np.random.default_rng(seed)
    site_dims = tuple(int(d) for d in site_dims)
    weights = rng.dirichlet(np.ones(terms))
    dim = int(np.prod(site_dims))
    rho = np.zeros((dim, dim), dtype=complex)
    for w in weights:
        psi = kron_all([random_pure_vector(d, rng) for d in site_dims])
        rho += w * np.outer(psi, psi.conj())
    return DensityMatrix(rho / np.trace(rho).real, site_dims)


def random_density_matrix(site_dims, rng, rank=None):
    """Ginibre-distributed mixed state (full rank unless ``rank`` is given)."""
    site_dims = tuple(int(d) for d in site_dims)
    dim = int(np.prod(site_dims))
    k = dim if rank is None else rank
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real, site_dims)


def random_ppt_state(site_dims, rng, rank=None, iters=60):
    """Random state that is PPT across every bipartition.

    Mixes a Ginibre state with white noise, ``t rho + (1-t) 1/D``, at the
    largest ``t`` (found by bisection) for which all partial transposes
    stay positive, so samples sit on the PPT boundary where violations
    would show up first.
    """
    site_dims = tuple(int(d) for d in site_dims)
    dim = int(np.prod(site_dims))
    base = random_density_matrix(site_dims, rng, rank).matrix
    white = np.eye(dim) / dim

    def ok(t):
        return is_ppt(DensityMatrix(t * base + (1 - t) * white, site_dims), tol=0.0).all

    if ok(1.0):
        lo = 1.0
    else:
        lo, hi = 0.0, 1.0
        for _ in range(iters):
            mid = (lo + hi) / 2
            if ok(mid):
                lo = mid
            else:
                hi = mid
    return DensityMatrix(lo * base + (1 - lo) * white, site_dims)


# ------------------------------------------------- squeezed light


@dataclass(frozen=True, eq=False)
class PseudoSpinSet:
    n_cut: int
    s_x: np.ndarray
    s_y: np.ndarray
    s_z: np.ndarray

    @property
    def ops(self):
        return (self.s_x, self.s_y, self.s_z)


def pseudo_spin(n_cut):
    """Parity ``s_z`` and parity-flip operators on Fock levels ``0..n_cut-1``."""
    if n_cut < 2 or n_cut % 2:
        raise GuardError(f"n_cut must be even and >= 2, got {n_cut}")
    s_z = np.diag([1.0 if k % 2 == 0 else -1.0 for k in range(n_cut)]).astype(complex)
    s_plus = np.zeros((n_cut, n_cut), dtype=complex)
    for k in range(0, n_cut, 2):
        s_plus[k, k + 1] = 1.0
    s_minus = s_plus.conj().T
    return PseudoSpinSet(n_cut, s_plus + s_minus, -1j * (s_plus - s_minus), s_z)


@dataclass(frozen=True, eq=False)
class TwoModeSqueezed:
    r: float
    n_cut: int
    coefficients: np.ndarray
    deficit: float

    def vector(self):
        """Joint Fock-space vector ``sum_n c_n |n, n>`` (dimension ``n_cut**2``)."""
        psi = np.zeros(self.n_cut * self.n_cut)
        psi[np.arange(self.n_cut) * (self.n_cut + 1)] = self.coefficients
        return psi


def two_mode_squeezed(r, n_cut, renormalize=True):
    """Coefficients ``tanh(r)**n / cosh(r)`` for ``n < n_cut``."""
    if r < 0:
        raise GuardError(f"squeezing parameter must be >= 0, got {r}")
    if n_cut < 1:
        raise GuardError("n_cut must be positive")
    c = np.tanh(r) ** np.arange(n_cut) / np.cosh(r)
    deficit = float(max(0.0, 1.0 - np.sum(c**2)))
    if renormalize:
        c = c / np.linalg.norm(c)
    return TwoModeSqueezed(float(r), int(n_cut), c, deficit)


@dataclass(frozen=True, eq=False)
class GaussianChsh:
    r: float
    n_cut: int
    value: float
    analytic: float
    deficit: float
    R: np.ndarray

    def to_dict(self):
        return {"r": self.r, "n_cut": self.n_cut, "value": self.value,
                "analytic": self.analytic, "deficit": self.deficit}


def gaussian_analytic(r):
    return float(np.sqrt(1 + np.tanh(2 * r) ** 2))


def gaussian_chsh(r, n_cut, renormalize=True, warn_deficit=1e-6):
    """CHSH maximum of the truncated squeezed state over pseudo-spin observables.

    With ``psi = sum_n c_n |n, n>`` each correlation is
    ``<psi| S_i x S_j |psi> = sum_{m,n} c_m c_n S_i[m, n] S_j[m, n]``, so the
    ``n_cut**2``-dimensional joint state is never formed.
    """
    spins = pseudo_spin(n_cut)
    state = two_mode_squeezed(r, n_cut, renormalize)
    if renormalize and state.deficit > warn_deficit:
        warnings.warn(
            f"truncation at n_cut={n_cut} drops weight {state.deficit:.3g} of the squeezed state",
            RuntimeWarning,
            stacklevel=2,
        )
    c = state.coefficients
    R = np.array([[float(np.real(c @ (a * b) @ c)) for b in spins.ops] for a in spins.ops])
    ev = np.linalg.eigvalsh(R.T @ R)
    value = float(np.sqrt(max(ev[-1] + ev[-2], 0.0)))
    return GaussianChsh(float(r), int(n_cut), value, gaussian_analytic(r), state.deficit, R)


def gaussian_curve(r_values, n_cut, renormalize=True):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return [gaussian_chsh(r, n_cut, renormalize) for r in r_values]


def werner_chsh_numeric(p):
    """CHSH maximum of the qubit Werner state via the correlation matrix."""
    return chsh_max_qubits(werner_state(2, p)).value

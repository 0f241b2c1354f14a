"""Quantum side: states, observables, Bell operators and their maximization.

Tensor products follow site order, so site 1 is the most significant
factor of a computational-basis index. Bell coefficients keep the family's
convention (setting bit of party 1 is the least significant bit of ``s``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from . import bits
from ._config import HERMITIAN_TOL, PSD_TOL, max_operator_dim
from .correlation import CorrelationTable, ExperimentShape
from .errors import GuardError, StructuralError
from .family import BellCoefficients, classical_max

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

SIGN_ZERO_TOL = 1e-12
OBSERVABLE_TOL = 1e-9


def kron_all(mats):
    return reduce(np.kron, mats)


def _check_dim(dim):
    limit = max_operator_dim()
    if dim > limit:
        raise GuardError(f"operator dimension {dim} exceeds the guard {limit} (BELLSCOPE_MAX_DIM)")


def _as_matrix(m):
    arr = np.array(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise StructuralError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise StructuralError("matrix has non-finite entries")
    _check_dim(arr.shape[0])
    return arr


def check_hermitian(m, tol=HERMITIAN_TOL, what="operator"):
    arr = _as_matrix(m)
    scale = max(1.0, float(np.max(np.abs(arr))))
    if np.max(np.abs(arr - arr.conj().T)) > tol * scale:
        raise StructuralError(f"{what} is not Hermitian")
    return (arr + arr.conj().T) / 2


def check_observable(m, tol=OBSERVABLE_TOL):
    """Validate ``-1 <= A <= 1`` and return the Hermitian-symmetrized matrix."""
    arr = check_hermitian(m, what="observable")
    ev = np.linalg.eigvalsh(arr)
    if ev[0] < -1 - tol or ev[-1] > 1 + tol:
        raise StructuralError(f"observable spectrum [{ev[0]:.6g}, {ev[-1]:.6g}] leaves [-1, 1]")
    return arr


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray
    site_dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.site_dims)
        if not dims or min(dims) < 1:
            raise StructuralError("site_dims must be a nonempty list of positive integers")
        arr = check_hermitian(self.matrix, what="density matrix")
        if arr.shape[0] != int(np.prod(dims)):
            raise StructuralError(f"matrix dimension {arr.shape[0]} != product of site_dims {dims}")
        if abs(np.trace(arr).real - 1.0) > 1e-12 * max(1, arr.shape[0]) or abs(np.trace(arr).imag) > 1e-12:
            raise StructuralError(f"density matrix trace is {np.trace(arr)}, expected 1")
        if np.linalg.eigvalsh(arr)[0] < -PSD_TOL:
            raise StructuralError("density matrix is not positive semidefinite")
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)
        object.__setattr__(self, "site_dims", dims)

    @property
    def n(self):
        return len(self.site_dims)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @classmethod
    def from_vector(cls, psi, site_dims):
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), site_dims)

    def tensor(self):
        """Matrix as an array with axes ``(i_1..i_n, j_1..j_n)``."""
        return self.matrix.reshape(self.site_dims * 2)

    def reduced(self, keep):
        """Partial trace onto the sites in ``keep`` (in increasing order)."""
        keep = sorted(set(int(k) for k in keep))
        n = self.n
        t = self.tensor()
        letters = [chr(ord("a") + k) for k in range(n)]
        cols = [chr(ord("A") + k) if k in keep else letters[k] for k in range(n)]
        out = [letters[k] for k in keep] + [cols[k] for k in keep]
        red = np.einsum("".join(letters) + "".join(cols) + "->" + "".join(out), t)
        d = int(np.prod([self.site_dims[k] for k in keep]))
        return red.reshape(d, d)

    def to_dict(self):
        return {
            "site_dims": list(self.site_dims),
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix],
        }

    @classmethod
    def from_dict(cls, data):
        raw = np.array(data["matrix"], dtype=float)
        if raw.ndim != 3 or raw.shape[-1] != 2:
            raise StructuralError("state matrix entries must be [re, im] pairs")
        return cls(raw[..., 0] + 1j * raw[..., 1], data["site_dims"])


def _as_state(rho, site_dims=None):
    if isinstance(rho, DensityMatrix):
        return rho
    if site_dims is None:
        raise StructuralError("a raw matrix needs site_dims")
    return DensityMatrix(rho, site_dims)


@dataclass(frozen=True, eq=False)
class ObservableSet:
    """Two observables ``(A_k(0), A_k(1))`` for every site ``k``."""

    ops: tuple

    def __post_init__(self):
        sites = []
        for pair in self.ops:
            if len(pair) != 2:
                raise StructuralError("each site needs exactly two observables")
            a0, a1 = check_observable(pair[0]), check_observable(pair[1])
            if a0.shape != a1.shape:
                raise StructuralError("observables of one site act on different dimensions")
            sites.append((a0, a1))
        object.__setattr__(self, "ops", tuple(sites))

    @property
    def n(self):
        return len(self.ops)

    @property
    def site_dims(self):
        return tuple(pair[0].shape[0] for pair in self.ops)

    def to_dict(self):
        def enc(m):
            return [[[float(z.real), float(z.imag)] for z in row] for row in m]

        return {"site_dims": list(self.site_dims), "observables": [[enc(a), enc(b)] for a, b in self.ops]}

    @classmethod
    def from_dict(cls, data):
        def dec(m):
            raw = np.array(m, dtype=float)
            return raw[..., 0] + 1j * raw[..., 1]

        return cls(tuple((dec(a), dec(b)) for a, b in data["observables"]))


def planar_observable(alpha):
    """``sigma_1 sin(alpha) + sigma_2 cos(alpha)``."""
    return SIGMA_X * np.sin(alpha) + SIGMA_Y * np.cos(alpha)


def planar_observables(angles):
    angles = np.asarray(angles, dtype=float).reshape(-1, 2)
    return ObservableSet(tuple((planar_observable(a0), planar_observable(a1)) for a0, a1 in angles))


def planar_angles(obs, tol=1e-10):
    """Recover planar angles from an observable set, rejecting anything else."""
    out = []
    for pair in obs.ops:
        row = []
        for a in pair:
            if a.shape != (2, 2):
                raise StructuralError("planar observables act on qubits")
            x = np.trace(a @ SIGMA_X).real / 2
            y = np.trace(a @ SIGMA_Y).real / 2
            if np.max(np.abs(a - x * SIGMA_X - y * SIGMA_Y)) > tol or abs(x * x + y * y - 1) > tol:
                raise StructuralError("observable is not of the planar form sigma_1 sin a + sigma_2 cos a")
            row.append(float(np.arctan2(x, y)))
        out.append(row)
    return np.array(out)


def bell_operator(beta, obs):
    """``sum_s beta(s) A_1(s_1) x ... x A_n(s_n)``."""
    beta = beta if isinstance(beta, BellCoefficients) else BellCoefficients(beta)
    if beta.n != obs.n:
        raise StructuralError(f"coefficients are for n = {beta.n} sites, observables for {obs.n}")
    _check_dim(int(np.prod(obs.site_dims)))
    total = None
    for i, b in enumerate(beta.beta):
        if b == 0.0:
            continue
        s = bits.to_bits(i, beta.n)
        term = b * kron_all([obs.ops[k][s[k]] for k in range(beta.n)])
        total = term if total is None else total + term
    if total is None:
        d = int(np.prod(obs.site_dims))
        total = np.zeros((d, d), dtype=complex)
    return (total + total.conj().T) / 2


def expectation(rho, op, tol=1e-10):
    rho = _as_state(rho)
    op = check_hermitian(op, tol=HERMITIAN_TOL)
    if op.shape != rho.matrix.shape:
        raise StructuralError(f"operator shape {op.shape} does not match state {rho.matrix.shape}")
    val = np.trace(rho.matrix @ op)
    if abs(val.imag) > tol:
        raise StructuralError(f"expectation has imaginary part {val.imag:.3g}")
    return float(val.real)


def full_correlations(rho, obs):
    """``xi(s) = tr(rho A_1(s_1) x ... x A_n(s_n))`` for every setting string."""
    rho = _as_state(rho)
    n = obs.n
    return np.array(
        [
            expectation(rho, kron_all([obs.ops[k][s[k]] for k in range(n)]))
            for s in (bits.to_bits(i, n) for i in range(1 << n))
        ]
    )


def quantum_table(rho, obs):
    """Probability table with outcome ``+-1`` measured by ``(1 +- A)/2``."""
    rho = _as_state(rho)
    n = obs.n
    shape = ExperimentShape(n, 2, 2)
    probs = np.zeros(shape.array_shape)
    effects = [[[(np.eye(a.shape[0]) + sgn * a) / 2 for sgn in (1, -1)] for a in pair] for pair in obs.ops]
    for s in itertools.product(range(2), repeat=n):
        for a in itertools.product(range(2), repeat=n):
            op = kron_all([effects[k][s[k]][a[k]] for k in range(n)])
            probs[s + a] = np.trace(rho.matrix @ op).real
    return CorrelationTable(shape, probs)


# ---------------------------------------------------------------- see-saw


@dataclass(frozen=True, eq=False)
class SeesawResult:
    value: float
    observables: ObservableSet
    trace: tuple
    converged: bool
    restart: int = 0
    restart_values: tuple = ()
    restart_traces: tuple = field(default=(), repr=False)

    @property
    def iterations(self):
        return len(self.trace) - 1


def haar_unitary(d, rng):
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph[None, :]


def random_dichotomic(d, rng):
    """``U diag(+-1) U*`` with Haar ``U`` and a balanced spectrum."""
    u = haar_unitary(d, rng)
    signs = np.where(np.arange(d) < (d + 1) // 2, 1.0, -1.0)
    return (u * signs[None, :]) @ u.conj().T


def operator_sign(x, zero_tol=SIGN_ZERO_TOL):
    """Batched sign of Hermitian matrices; eigenvalues in ``[-tol, tol]`` map to +1."""
    x = (x + np.conj(np.swapaxes(x, -1, -2))) / 2
    w, v = np.linalg.eigh(x)
    sgn = np.where(w >= -zero_tol, 1.0, -1.0)
    return (v * sgn[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


_LETTERS = "abcdefghijklmnopqrstuvwxyz"
_UPPER = "ABCDEFGHIJKLMNOPQRSTUVWXY"


class _Contractor:
    """Pairwise einsum plans computing one site's effective operator ``X_k(t)``.

    ``X_k(t)[i, j] = sum_{s: s_k = t} beta(s) sum rho[I, J] prod_{l != k} A_l(s_l)[J_l, I_l]``
    with ``I_k = i``, ``J_k = j``; then ``tr(A_k(t) X_k(t))`` summed over
    ``t`` is the Bell value with all other sites held fixed. Sites are
    contracted one at a time, which keeps every step a small batched product.
    """

    def __init__(self, n, rho_batched):
        if 2 * n + 1 > len(_LETTERS) or n > len(_UPPER):
            raise GuardError("too many sites for the see-saw contraction")
        self.n = n
        self.rho_batched = rho_batched
        self.plans = {k: self._plan(k) for k in range(n)}

    def _plan(self, k):
        n = self.n
        rows = _LETTERS[:n]
        cols = _LETTERS[n : 2 * n]
        sets = _UPPER[:n]
        labels = ("z" if self.rho_batched else "") + rows + cols
        steps = []
        for l in range(n):
            if l == k:
                continue
            out = "z" + sets[l] + labels.replace("z", "").replace(rows[l], "").replace(cols[l], "")
            steps.append((l, f"{labels},z{sets[l]}{cols[l]}{rows[l]}->{out}"))
            labels = out
        final = f"{labels},z{sets}->z{sets[k]}{rows[k]}{cols[k]}"
        return steps, final

    def __call__(self, k, rho_t, beta_t, obs):
        steps, final = self.plans[k]
        t = rho_t
        for l, sub in steps:
            t = np.einsum(sub, t, obs[l])
        if not steps and not self.rho_batched:
            t = np.broadcast_to(t, (beta_t.shape[0],) + t.shape)
        return np.einsum(final, t, beta_t)


def _values(xk, ak):
    # sum_t tr(A(t) X(t)) per batch member
    return np.einsum("ztij,ztji->z", ak, xk).real


def _run_batch(betas, rho_t, dims, inits, iters, tol, rho_batched=False):
    """Batched see-saw; ``betas`` (B, 2**n), ``inits`` list of (B, 2, d, d).

    Members drop out of the batch once converged, so results do not depend
    on what else is being computed alongside them.
    """
    n = len(dims)
    batch = betas.shape[0]
    beta_t = bits.tensor_from_bits(betas, n).astype(complex)
    obs = [a.copy() for a in inits]
    contract = _Contractor(n, rho_batched)
    current = _values(contract(n - 1, rho_t, beta_t, obs), obs[n - 1])
    traces = [[float(v)] for v in current]
    active = np.arange(batch)
    converged = np.zeros(batch, dtype=bool)
    for _ in range(iters):
        if active.size == 0:
            break
        sub_obs = [a[active] for a in obs]
        sub_beta = beta_t[active]
        sub_rho = rho_t[active] if rho_batched else rho_t
        for k in range(n):
            sub_obs[k] = operator_sign(contract(k, sub_rho, sub_beta, sub_obs))
        value = _values(contract(n - 1, sub_rho, sub_beta, sub_obs), sub_obs[n - 1])
        for k in range(n):
            obs[k][active] = sub_obs[k]
        for b, v in zip(active, value):
            traces[b].append(float(v))
        done = value - current[active] < tol
        current[active] = value
        converged[active[done]] = True
        active = active[~done]
    return current, obs, traces, converged


def _initial_observables(dims, restarts, seed):
    inits = [np.empty((restarts, 2, d, d), dtype=complex) for d in dims]
    for r in range(restarts):
        rng = np.random.default_rng(seed + r)
        for k, d in enumerate(dims):
            for t in range(2):
                inits[k][r, t] = random_dichotomic(d, rng)
    return inits


def _classical_observables(beta, dims):
    """Observables ``+-1`` realizing the classical optimum of ``beta``."""
    signs = classical_max(beta).argmax.signs()
    return [np.array([signs[k][t] * np.eye(d, dtype=complex) for t in range(2)]) for k, d in enumerate(dims)]


def _starts(betas, dims, restarts, seed, classical_start):
    """Initial observables for every (coefficients, start) pair, grouped by coefficients."""
    random_inits = _initial_observables(dims, restarts, seed)
    per_site = [[] for _ in dims]
    for beta in betas:
        extra = _classical_observables(beta, dims) if classical_start else None
        for k in range(len(dims)):
            per_site[k].append(random_inits[k])
            if extra is not None:
                per_site[k].append(extra[k][None])
    return [np.concatenate(blocks) for blocks in per_site]


def _seesaw_checks(beta, rho):
    if beta.n != rho.n:
        raise StructuralError(f"coefficients are for n = {beta.n} sites, state has {rho.n}")
    _check_dim(rho.dim)


def seesaw(beta, rho, iters=500, restarts=20, seed=0, tol=1e-10, classical_start=True):
    """Alternating maximization of ``tr(rho B)`` over one site at a time.

    Restart ``r`` draws its initial observables from ``default_rng(seed + r)``.
    With ``classical_start`` one more run starts from the observables
    ``+-1`` of the best deterministic assignment, so the result never falls
    below the classical maximum. The best run wins, ties going to the
    lowest index (the classical start comes last).
    """
    beta = beta if isinstance(beta, BellCoefficients) else BellCoefficients(beta)
    rho = _as_state(rho)
    _seesaw_checks(beta, rho)
    if restarts < 1 or iters < 1:
        raise GuardError("seesaw needs at least one restart and one iteration")
    dims = rho.site_dims
    inits = _starts([beta.beta], dims, restarts, seed, classical_start)
    betas = np.repeat(beta.beta[None, :], len(inits[0]), axis=0)
    values, obs, traces, converged = _run_batch(betas, rho.tensor(), dims, inits, iters, tol)
    best = int(np.argmax(values))  # first maximal index
    final = ObservableSet(tuple((obs[k][best, 0], obs[k][best, 1]) for k in range(len(dims))))
    return SeesawResult(
        value=float(values[best]),
        observables=final,
        trace=tuple(traces[best]),
        converged=bool(converged[best]),
        restart=best,
        restart_values=tuple(float(v) for v in values),
        restart_traces=tuple(tuple(t) for t in traces),
    )


def seesaw_many(betas, rho, iters=500, restarts=5, seed=0, tol=1e-10, classical_start=True):
    """Best see-saw value for each coefficient vector against one state.

    Runs all (coefficients, start) pairs as one batch; each pair uses the
    same initial observables as :func:`seesaw` would.
    """
    betas = np.array([b.beta if isinstance(b, BellCoefficients) else np.asarray(b, float) for b in betas])
    rho = _as_state(rho)
    _seesaw_checks(BellCoefficients(betas[0]), rho)
    dims = rho.site_dims
    inits = _starts(betas, dims, restarts, seed, classical_start)
    per = restarts + int(classical_start)
    big = np.repeat(betas, per, axis=0)
    values, *_ = _run_batch(big, rho.tensor(), dims, inits, iters, tol)
    return values.reshape(len(betas), per).max(axis=1)


def seesaw_states(beta, rhos, iters=500, restarts=3, seed=0, tol=1e-10, classical_start=True):
    """Best see-saw value of one coefficient vector for each of many states."""
    beta = beta if isinstance(beta, BellCoefficients) else BellCoefficients(beta)
    rhos = [_as_state(r) for r in rhos]
    dims = rhos[0].site_dims
    if any(r.site_dims != dims for r in rhos):
        raise StructuralError("all states must share site_dims")
    _seesaw_checks(beta, rhos[0])
    one = _starts([beta.beta], dims, restarts, seed, classical_start)
    per = len(one[0])
    m = len(rhos)
    inits = [np.tile(a, (m, 1, 1, 1)) for a in one]
    rho_t = np.repeat(np.stack([r.tensor() for r in rhos]), per, axis=0)
    betas = np.repeat(beta.beta[None, :], m * per, axis=0)
    values, *_ = _run_batch(betas, rho_t, dims, inits, iters, tol, rho_batched=True)
    return values.reshape(m, per).max(axis=1)


# ------------------------------------------------------------ two qubits


@dataclass(frozen=True, eq=False)
class ChshMax:
    """Closed-form CHSH maximum over traceless qubit observables.

    ``overall`` also admits the trivial observables ``+-1``, which always
    reach the classical bound 1; it is the quantity see-saw maximizes.
    """

    value: float
    R: np.ndarray

    @property
    def overall(self):
        return max(1.0, self.value)


def correlation_matrix(rho):
    rho = _as_state(rho)
    if rho.site_dims != (2, 2):
        raise StructuralError(f"two qubits required, got site_dims {rho.site_dims}")
    return np.array([[np.trace(rho.matrix @ np.kron(a, b)).real for b in PAULIS] for a in PAULIS])


def chsh_max_qubits(rho):
    r = correlation_matrix(rho)
    ev = np.linalg.eigvalsh(r.T @ r)
    return ChshMax(float(np.sqrt(max(ev[-1] + ev[-2], 0.0))), r)


# ---------------------------------------------------------------- PPT


def partial_transpose(rho, sites, site_dims=None):
    """Transpose the tensor factors listed in ``sites`` (0-based)."""
    if isinstance(rho, DensityMatrix):
        matrix, dims = rho.matrix, rho.site_dims
    else:
        matrix, dims = _as_matrix(rho), tuple(site_dims)
    n = len(dims)
    sites = set(int(s) for s in sites)
    if not sites <= set(range(n)):
        raise StructuralError(f"sites {sorted(sites)} out of range for {n} sites")
    t = matrix.reshape(tuple(dims) * 2)
    perm = list(range(2 * n))
    for k in sites:
        perm[k], perm[n + k] = n + k, k
    d = matrix.shape[0]
    return t.transpose(perm).reshape(d, d)


@dataclass(frozen=True)
class PptReport:
    per_partition: dict
    min_eigenvalues: dict
    all: bool


def bipartitions(n):
    """Nontrivial bipartitions, each named by the side containing site 0."""
    rest = range(1, n)
    out = []
    for size in range(0, n - 1):
        for combo in itertools.combinations(rest, size):
            out.append((0,) + combo)
    return out


def is_ppt(rho, tol=PSD_TOL):
    rho = _as_state(rho)
    if rho.n < 2:
        raise StructuralError("PPT needs at least two sites")
    per, mins = {}, {}
    for part in bipartitions(rho.n):
        ev = np.linalg.eigvalsh(partial_transpose(rho, part))[0]
        mins[part] = float(ev)
        per[part] = bool(ev >= -tol)
    return PptReport(per, mins, all(per.values()))


@dataclass(frozen=True)
class VarianceCheck:
    lhs: float
    rhs: float
    holds: bool
    ppt: bool


def variance_check(rho, b, partition=(0,)):
    """Compare ``(tr rho B)**2`` with ``tr(rho^T_P (B^T_P)**2)``."""
    rho = _as_state(rho)
    b = check_hermitian(b)
    lhs = float(np.trace(rho.matrix @ b).real ** 2)
    rho_t = partial_transpose(rho, partition)
    b_t = partial_transpose(b, partition, rho.site_dims)
    rhs = float(np.trace(rho_t @ b_t @ b_t).real)
    ppt = bool(np.linalg.eigvalsh((rho_t + rho_t.conj().T) / 2)[0] >= -PSD_TOL)
    return VarianceCheck(lhs, rhs, lhs <= rhs + 1e-9, ppt)


# ------------------------------------------------------- GHZ structure


def _basis_index(omega, n):
    # omega stores site k in bit k; kron order puts site 1 first
    return sum(((omega >> k) & 1) << (n - 1 - k) for k in range(n))


@dataclass(frozen=True, eq=False)
class GhzSpectrum:
    """Spectrum of a Bell operator with planar qubit observables.

    Each pattern ``omega`` with site 1 unflipped pairs ``|omega>`` with its
    complement; on that plane the operator is off-diagonal with entry
    ``g = <complement| B |omega>`` and has eigenvalues ``+-|g|``.
    """

    n: int
    omegas: tuple
    couplings: np.ndarray

    @property
    def eigenvalues(self):
        lam = np.abs(self.couplings)
        return np.sort(np.concatenate([lam, -lam]))

    def eigenvectors(self):
        """List of ``(eigenvalue, descriptor)``; descriptor = (omega, theta).

        The vector is ``(exp(i theta)|omega> + |complement>)/sqrt(2)``.
        """
        out = []
        for omega, g in zip(self.omegas, self.couplings):
            phase = float(np.angle(g)) if abs(g) > 0 else 0.0
            # B(e^{i th}|w> + |w'>) = e^{i th} g|w'> + conj(g)|w>, eigen for th = -arg g (+|g|)
            out.append((abs(g), (omega, -phase)))
            out.append((-abs(g), (omega, np.pi - phase)))
        return out

    def vector(self, descriptor):
        omega, theta = descriptor
        full = (1 << self.n) - 1
        psi = np.zeros(1 << self.n, dtype=complex)
        psi[_basis_index(omega, self.n)] = np.exp(1j * theta)
        psi[_basis_index(full ^ omega, self.n)] = 1.0
        return psi / np.sqrt(2)


def ghz_spectrum(beta, angles):
    """Eigen-structure of ``B`` for planar observables given by angles.

    ``angles`` is an (n, 2) array of ``alpha_k(s_k)`` or an
    :class:`ObservableSet` of planar observables.
    """
    beta = beta if isinstance(beta, BellCoefficients) else BellCoefficients(beta)
    if isinstance(angles, ObservableSet):
        angles = planar_angles(angles)
    angles = np.asarray(angles, dtype=float)
    n = beta.n
    if angles.shape != (n, 2):
        raise StructuralError(f"angles must have shape ({n}, 2), got {angles.shape}")
    svals = bits.bit_matrix(n)
    alpha = angles[np.arange(n)[None, :], svals]  # (2**n, n)
    omegas = tuple(o for o in range(1 << n) if not o & 1)
    couplings = []
    for omega in omegas:
        flips = np.array([(omega >> k) & 1 for k in range(n)])
        # A|0> = i e^{-i a}|1>,  A|1> = -i e^{i a}|0>
        factors = np.where(flips[None, :] == 0, 1j * np.exp(-1j * alpha), -1j * np.exp(1j * alpha))
        couplings.append(complex(beta.beta @ factors.prod(axis=1)))
    return GhzSpectrum(n, omegas, np.array(couplings))


# --------------------------------------------- maximal-violation algebra


@dataclass(frozen=True)
class PauliReport:
    square: float
    anticommutator: float
    product: float
    pauli_like: bool


def pauli_structure_check(a1, a2, rho, tol=1e-9):
    """Residuals of the Pauli relations for Alice's two observables.

    With ``A = (A1 + i A2)/2`` a Pauli pair satisfies ``A**2 = 0``,
    ``A*A + AA* = 1`` and ``A1 A2 = i A3`` for ``A3 = AA* - A*A``. The first
    residual is measured on the support of Alice's reduced state only.
    """
    a1, a2 = check_observable(a1), check_observable(a2)
    rho = _as_state(rho)
    red = rho.reduced([0])
    if red.shape != a1.shape:
        raise StructuralError("observables do not act on the first site of the state")
    w, v = np.linalg.eigh(red)
    support = v[:, w > 1e-12]
    proj = support @ support.conj().T
    a = (a1 + 1j * a2) / 2
    ad = a.conj().T
    eye = np.eye(a.shape[0])
    a3 = a @ ad - ad @ a
    square = float(np.linalg.norm(a @ a @ proj, 2))
    anti = float(np.linalg.norm(ad @ a + a @ ad - eye, 2))
    prod = float(np.linalg.norm(a1 @ a2 - 1j * a3, 2))
    return PauliReport(square, anti, prod, max(square, anti, prod) < tol)


@dataclass(frozen=True, eq=False)
class CirelsonSos:
    lhs: np.ndarray
    rhs: np.ndarray
    identity_residual: float
    rhs_min_eigenvalue: float
    bell_max_eigenvalue: float


def cirelson_sos(obs):
    """Sum-of-squares certificate for the CHSH operator.

    For ``A = (A1 + iA2)/2`` and ``B = ((B1+B2) + i(B1-B2))/(2 sqrt 2)`` one has
    ``1 - CHSH/sqrt2 = [(A-B)*(A-B) + (A-B)(A-B)*]/2 + sum_X (1 - X**2)/4``
    over the four observables, with both sides acting on the joint space.
    """
    if obs.n != 2:
        raise StructuralError("the CHSH certificate needs two sites")
    (a1, a2), (b1, b2) = obs.ops
    da, db = a1.shape[0], b1.shape[0]
    ia, ib = np.eye(da), np.eye(db)
    big_a = np.kron((a1 + 1j * a2) / 2, ib)
    big_b = np.kron(ia, ((b1 + b2) + 1j * (b1 - b2)) / (2 * np.sqrt(2)))
    chsh = bell_operator(BellCoefficients([0.5, 0.5, 0.5, -0.5]), obs)
    eye = np.eye(da * db)
    lhs = eye - chsh / np.sqrt(2)
    diff = big_a - big_b
    squares = [np.kron(ia - a1 @ a1, ib), np.kron(ia - a2 @ a2, ib), np.kron(ia, ib - b1 @ b1), np.kron(ia, ib - b2 @ b2)]
    rhs = (diff.conj().T @ diff + diff @ diff.conj().T) / 2 + sum(squares) / 4
    return CirelsonSos(
        lhs,
        rhs,
        float(np.max(np.abs(lhs - rhs))),
        float(np.linalg.eigvalsh((rhs + rhs.conj().T) / 2)[0]),
        float(np.linalg.eigvalsh(chsh)[-1]),
    )

"""The complete family of full-correlation Bell inequalities for (n, 2, 2).

Every sign vector ``f`` in ``{-1, +1}**(2**n)`` gives one inequality
``sum_s beta(s) xi(s) <= 1`` through a Walsh-Hadamard transform, and the
whole family is equivalent to the single condition ``sum_r |xi_hat(r)| <= 1``
(the unit cross-polytope in transformed coordinates).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import bits
from .correlation import ClassicalConfiguration
from .errors import GuardError, NotInFamilyError, StructuralError

MEMBERSHIP_TOL = 1e-12
FAMILY_TOL = 1e-9


def _as_power_of_two(values, what):
    arr = np.asarray(values, dtype=float).reshape(-1)
    size = arr.size
    if size < 2 or size & (size - 1):
        raise StructuralError(f"{what} must have length 2**n with n >= 1, got {size}")
    return arr, size.bit_length() - 1


@dataclass(frozen=True, eq=False)
class SignVector:
    f: np.ndarray

    def __post_init__(self):
        arr, _ = _as_power_of_two(self.f, "sign vector")
        if not np.all(np.abs(np.abs(arr) - 1.0) == 0.0):
            raise StructuralError("sign vector entries must be exactly +1 or -1")
        arr.setflags(write=False)
        object.__setattr__(self, "f", arr)

    @property
    def n(self):
        return self.f.size.bit_length() - 1


@dataclass(frozen=True, eq=False)
class BellCoefficients:
    """Coefficients ``beta(s)`` indexed by setting bitstring (party 1 = bit 0)."""

    beta: np.ndarray

    def __post_init__(self):
        arr, _ = _as_power_of_two(self.beta, "coefficient vector")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "beta", arr)

    @property
    def n(self):
        return self.beta.size.bit_length() - 1

    def tensor(self):
        """Coefficients as an n-axis array indexed ``[s_1, ..., s_n]``."""
        return bits.tensor_from_bits(self.beta, self.n)

    def value(self, xi):
        return float(self.beta @ np.asarray(xi, dtype=float))

    def to_dict(self):
        return {"version": "beta-v1", "n": self.n, "beta": [float(b) for b in self.beta]}

    @classmethod
    def from_dict(cls, data):
        if data.get("version") != "beta-v1":
            raise StructuralError(f"unsupported inequality format {data.get('version')!r}")
        beta = cls(data["beta"])
        if beta.n != int(data["n"]):
            raise StructuralError(f"beta has length {beta.beta.size}, expected 2**{data['n']}")
        return beta

    def __repr__(self):
        return f"BellCoefficients({np.array2string(self.beta, precision=4)})"


def _coefficients(beta):
    return beta if isinstance(beta, BellCoefficients) else BellCoefficients(beta)


def beta_from_f(f):
    """``beta(s) = 2**-n sum_r f(r) (-1)**<r, s>``."""
    f = f if isinstance(f, SignVector) else SignVector(f)
    return BellCoefficients(bits.fwht(f.f) / f.f.size)


def f_from_beta(beta, tol=FAMILY_TOL):
    """Inverse transform; raises :class:`NotInFamilyError` off the family."""
    beta = _coefficients(beta)
    f = bits.fwht(beta.beta)
    bad = np.nonzero(np.abs(np.abs(f) - 1.0) > tol)[0]
    if bad.size:
        r = int(bad[0])
        raise NotInFamilyError(
            f"coefficients are not a family member: f({r}) = {f[r]:.6g} is not +-1",
            r=r,
            value=float(f[r]),
        )
    return SignVector(np.sign(f))


@dataclass(frozen=True)
class ClassicalMax:
    value: float
    argmax: ClassicalConfiguration


def _check_classical_n(n):
    if n > 14:
        raise GuardError(f"classical maximization is guarded to n <= 14, got n = {n}")


def classical_max(beta):
    """Maximum of ``sum_s beta(s) prod_k a_k(s_k)`` over all +-1 assignments.

    Writing ``a_k(1) = a_k(0) (-1)**r_k`` turns every assignment into a sign
    times a Walsh character, so the maximum is ``max_r |(H beta)(r)|``.
    """
    beta = _coefficients(beta)
    n = beta.n
    _check_classical_n(n)
    h = bits.fwht(beta.beta)
    r = int(np.argmax(np.abs(h)))
    sign = 1 if h[r] >= 0 else -1
    rows = []
    for k in range(n):
        a0 = sign if k == 0 else 1
        a1 = a0 * (-1 if (r >> k) & 1 else 1)
        rows.append(((1 - a0) // 2, (1 - a1) // 2))
    return ClassicalMax(float(abs(h[r])), ClassicalConfiguration(tuple(rows)))


def configuration_value(beta, config):
    """Value of the Bell polynomial at one deterministic configuration."""
    beta = _coefficients(beta)
    n = beta.n
    signs = config.signs()
    total = 0.0
    for i in range(1 << n):
        s = bits.to_bits(i, n)
        total += beta.beta[i] * np.prod([signs[k][s[k]] for k in range(n)])
    return float(total)


def classical_max_bruteforce(beta):
    """Reference maximum by enumerating all 4**n assignments (n <= 8)."""
    beta = _coefficients(beta)
    n = beta.n
    if n > 8:
        raise GuardError("brute-force classical maximum is limited to n <= 8")
    svals = bits.bit_matrix(n)
    best = -np.inf
    best_cfg = None
    assignments = np.array(list(itertools.product([1, -1], repeat=2 * n))).reshape(-1, n, 2)
    # prod_k a_k(s_k) for every assignment and setting string
    picked = assignments[:, np.arange(n)[None, :], svals]  # (A, 2**n, n)
    values = picked.prod(axis=2) @ beta.beta
    i = int(np.argmax(values))
    best = float(values[i])
    best_cfg = ClassicalConfiguration(tuple(tuple((1 - a) // 2 for a in row) for row in assignments[i]))
    return ClassicalMax(best, best_cfg)


@dataclass(frozen=True, eq=False)
class FamilyMembership:
    inside: bool
    l1_mass: float
    spectrum: np.ndarray


def transform_correlations(xi):
    """``xi_hat(r) = 2**-n sum_s xi(s) (-1)**<r, s>``."""
    arr, _ = _as_power_of_two(xi, "correlation vector")
    return bits.fwht(arr) / arr.size


def lhv_membership(xi, tol=MEMBERSHIP_TOL):
    """Decide membership in the classical region by the l1 norm of the spectrum."""
    arr, _ = _as_power_of_two(xi, "correlation vector")
    if np.any(np.abs(arr) > 1.0 + tol):
        raise StructuralError("full correlations must lie in [-1, 1]")
    spectrum = transform_correlations(arr)
    mass = float(np.sum(np.abs(spectrum)))
    return FamilyMembership(mass <= 1.0 + tol, mass, spectrum)


def mermin(n):
    """Coefficients of Mermin's inequality from the nested-CHSH recursion.

    Starts at ``B_1 = A_1`` and uses
    ``B_n = B_{n-1} (A_n + A_n') / 2 + B_{n-1}' (A_n - A_n') / 2`` where the
    primed polynomial swaps both settings on every site.
    """
    if not 2 <= n <= 14:
        raise GuardError(f"mermin(n) needs 2 <= n <= 14, got {n}")
    b = np.array([1.0, 0.0])
    for k in range(1, n):
        # primed: complement every setting bit
        bp = b[::-1]
        b = np.concatenate([(b + bp) / 2, (b - bp) / 2])
    return BellCoefficients(b)


def enumerate_family(n):
    """Yield all ``2**(2**n)`` family members, in sign-vector counting order."""
    if not 1 <= n <= 4:
        raise GuardError(f"family enumeration is guarded to 1 <= n <= 4, got {n}")
    size = 1 << n
    for code in range(1 << size):
        f = 1.0 - 2.0 * ((code >> np.arange(size)) & 1)
        yield beta_from_f(f)


def _site_transforms():
    # (swap settings?, flip sign of A(0)?, flip sign of A(1)?)
    return list(itertools.product((False, True), repeat=3))


def canonicalize(beta, decimals=12):
    """Orbit representative under site-local setting swaps and sign flips.

    Relabelling which observable is called ``A_k(0)`` or flipping the sign
    of one observable permutes and re-signs the coefficients without
    changing the maximal classical or quantum value. The representative is
    the lexicographically largest coefficient vector in the orbit.
    """
    beta = _coefficients(beta)
    n = beta.n
    if n > 4:
        raise GuardError("canonicalization enumerates 8**n images; guarded to n <= 4")
    base = beta.tensor()
    best = None
    for ops in itertools.product(_site_transforms(), repeat=n):
        t = base
        for k, (swap, flip0, flip1) in enumerate(ops):
            if swap:
                t = np.flip(t, axis=k)
            if flip0 or flip1:
                scale = np.array([-1.0 if flip0 else 1.0, -1.0 if flip1 else 1.0])
                shape = [1] * n
                shape[k] = 2
                t = t * scale.reshape(shape)
        key = tuple(np.round(bits.bits_from_tensor(t, n), decimals) + 0.0)
        if best is None or key > best:
            best = key
    return BellCoefficients(np.array(best))

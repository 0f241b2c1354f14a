"""Correlation tables, finite local hidden-variable models and their checks.

A table for ``n`` parties with ``m`` settings and ``v`` outcomes each is stored
as an array ``probs[s_1, ..., s_n, a_1, ..., a_n]``. Parties are indexed from
0 in the API (party 0 is "party 1", Alice). For dichotomic observables the
outcome index 0 stands for ``+1`` and index 1 for ``-1``.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from . import bits
from ._config import EQUAL_TOL, LP_TOL, MAX_CONFIG_BITS, MAX_DERANDOMIZED_STATES, TABLE_TOL
from .errors import GuardError, InconsistentDeviceError, SignallingError, StructuralError

_LETTERS = "abcdefghijklmnopqrstuvwxyz"
_KEY_RE = re.compile(r"^s=(\d+);a=(\d+)$")


@dataclass(frozen=True)
class ExperimentShape:
    n: int
    m: int
    v: int

    def __post_init__(self):
        for name in ("n", "m"):
            if int(getattr(self, name)) < 1:
                raise StructuralError(f"{name} must be >= 1, got {getattr(self, name)}")
        if int(self.v) < 2:
            raise StructuralError(f"v must be >= 2, got {self.v}")
        config_bits = self.n * self.m * math.log2(self.v)
        if config_bits > MAX_CONFIG_BITS:
            raise GuardError(
                f"configuration space 2**{config_bits:.1f} exceeds the 2**{MAX_CONFIG_BITS} guard"
            )

    @property
    def array_shape(self):
        return (self.m,) * self.n + (self.v,) * self.n

    @property
    def num_configurations(self):
        return self.v ** (self.n * self.m)

    def setting_tuples(self):
        return itertools.product(range(self.m), repeat=self.n)

    def outcome_tuples(self):
        return itertools.product(range(self.v), repeat=self.n)

    def to_dict(self):
        return {"n": self.n, "m": self.m, "v": self.v}


def _outcome_signs(v):
    if v != 2:
        raise StructuralError("correlators are only defined for dichotomic outcomes (v = 2)")
    return np.array([1.0, -1.0])


class CorrelationTable:
    """Joint probabilities ``prob(outcomes | settings)`` of an n-party experiment."""

    def __init__(self, shape, probs):
        probs = np.array(probs, dtype=float)
        if probs.shape != shape.array_shape:
            raise StructuralError(
                f"probability array has shape {probs.shape}, expected {shape.array_shape}"
            )
        if not np.all(np.isfinite(probs)):
            raise StructuralError("probability array contains non-finite entries")
        probs.setflags(write=False)
        self.shape = shape
        self.probs = probs

    @classmethod
    def from_entries(cls, shape, entries):
        """Build a table from ``{(settings, outcomes): prob}``; missing keys are 0."""
        probs = np.zeros(shape.array_shape)
        for key, value in entries.items():
            settings, outcomes = _parse_key(key, shape)
            probs[settings + outcomes] = value
        return cls(shape, probs)

    def __getitem__(self, key):
        settings, outcomes = _parse_key(key, self.shape)
        return float(self.probs[settings + outcomes])

    def entries(self):
        return {
            (s, a): float(self.probs[s + a])
            for s in self.shape.setting_tuples()
            for a in self.shape.outcome_tuples()
        }

    def setting_distribution(self, settings):
        return self.probs[tuple(settings)]

    def correlator(self, settings):
        """Expectation of the product of all parties' ``+-1`` outcomes."""
        signs = _outcome_signs(self.shape.v)
        dist = self.probs[tuple(settings)]
        prod = signs
        for _ in range(self.shape.n - 1):
            prod = np.multiply.outer(prod, signs)
        return float(np.sum(dist * prod))

    def full_correlations(self):
        """Full correlation vector xi(s) for m = 2, indexed by setting bitstring."""
        if self.shape.m != 2:
            raise StructuralError("full correlation vectors need m = 2 settings per party")
        n = self.shape.n
        return np.array([self.correlator(bits.to_bits(i, n)) for i in range(1 << n)])

    def __repr__(self):
        s = self.shape
        return f"CorrelationTable(n={s.n}, m={s.m}, v={s.v})"


def _parse_key(key, shape):
    if isinstance(key, str):
        match = _KEY_RE.match(key)
        if not match:
            raise StructuralError(f"malformed table key {key!r}")
        settings = tuple(int(c) for c in match.group(1))
        outcomes = tuple(int(c) for c in match.group(2))
    else:
        try:
            settings, outcomes = key
            settings = tuple(int(x) for x in settings)
            outcomes = tuple(int(x) for x in outcomes)
        except (TypeError, ValueError):
            raise StructuralError(f"malformed table key {key!r}") from None
    if len(settings) != shape.n or len(outcomes) != shape.n:
        raise StructuralError(f"key {key!r} does not list one index per party (n={shape.n})")
    if any(not 0 <= s < shape.m for s in settings):
        raise StructuralError(f"key {key!r} has a setting index outside [0, {shape.m})")
    if any(not 0 <= a < shape.v for a in outcomes):
        raise StructuralError(f"key {key!r} has an outcome index outside [0, {shape.v})")
    return settings, outcomes


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    residuals: dict
    negative_entries: list
    max_residual: float


def validate_table(table, tol=TABLE_TOL):
    """Check positivity and per-setting normalization of a table."""
    n = table.shape.n
    sums = table.probs.sum(axis=tuple(range(n, 2 * n)))
    residuals = {s: float(abs(sums[s] - 1.0)) for s in table.shape.setting_tuples()}
    negative = [
        (s, a, float(table.probs[s + a]))
        for s in table.shape.setting_tuples()
        for a in table.shape.outcome_tuples()
        if table.probs[s + a] < 0
    ]
    max_res = max(residuals.values())
    passed = max_res <= tol and all(p >= -tol for _, _, p in negative)
    return ValidationReport(passed, residuals, negative, max_res)


def marginal(table, party, settings):
    """Outcome distribution of ``party`` in the setup ``settings`` (all parties)."""
    n = table.shape.n
    if not 0 <= party < n:
        raise IndexError(f"party index {party} out of range for n={n}")
    settings = tuple(settings)
    if len(settings) != n:
        raise StructuralError(f"settings {settings} must list one index per party")
    dist = table.probs[settings]
    others = tuple(k for k in range(n) if k != party)
    return dist.sum(axis=others)


def _marginal_array(table, party):
    n = table.shape.n
    others = tuple(n + k for k in range(n) if k != party)
    return table.probs.sum(axis=others)


@dataclass(frozen=True)
class NoSignallingReport:
    passed: bool
    deviations: tuple
    max_deviation: float


def no_signalling_check(table, tol=TABLE_TOL):
    """Largest change of each party's marginal under the other parties' settings."""
    n = table.shape.n
    deviations = []
    for k in range(n):
        marg = _marginal_array(table, k)
        # axes: settings s_1..s_n then a_k; spread over the settings of the others
        others = tuple(j for j in range(n) if j != k)
        if others:
            spread = marg.max(axis=others) - marg.min(axis=others)
            deviations.append(float(spread.max()))
        else:
            deviations.append(0.0)
    max_dev = max(deviations)
    return NoSignallingReport(max_dev <= tol, tuple(deviations), max_dev)


@dataclass(frozen=True)
class ClassicalConfiguration:
    """One outcome index for every (party, setting) pair."""

    assignment: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "assignment", tuple(tuple(int(a) for a in row) for row in self.assignment)
        )

    def check(self, shape):
        rows = self.assignment
        if len(rows) != shape.n or any(len(r) != shape.m for r in rows):
            raise StructuralError("configuration does not match the experiment shape")
        if any(not 0 <= a < shape.v for r in rows for a in r):
            raise StructuralError(f"configuration outcome indices must lie in [0, {shape.v})")

    def signs(self):
        """The assignment as ``+-1`` values (dichotomic case)."""
        return tuple(tuple(1 - 2 * a for a in row) for row in self.assignment)

    def responses(self, shape):
        self.check(shape)
        resp = np.zeros((shape.n, shape.m, shape.v))
        for k, row in enumerate(self.assignment):
            for s, a in enumerate(row):
                resp[k, s, a] = 1.0
        return resp


class LhvModel:
    """Finite local hidden-variable model.

    ``weights[l]`` is the probability of hidden state ``l`` and
    ``responses[l, k, s, a]`` the probability that party ``k`` answers ``a``
    to setting ``s`` in that state. Locality holds by construction: a
    party's response is indexed only by its own setting.
    """

    def __init__(self, shape, weights, responses, tol=TABLE_TOL):
        weights = np.array(weights, dtype=float).reshape(-1)
        responses = np.array(responses, dtype=float)
        expected = (weights.size, shape.n, shape.m, shape.v)
        if responses.shape != expected:
            raise StructuralError(f"responses have shape {responses.shape}, expected {expected}")
        if np.any(weights < -tol) or abs(weights.sum() - 1.0) > tol:
            raise StructuralError("hidden-state weights must be nonnegative and sum to 1")
        if np.any(responses < -tol) or np.any(np.abs(responses.sum(axis=-1) - 1.0) > tol):
            raise StructuralError("every response distribution must be nonnegative and sum to 1")
        weights.setflags(write=False)
        responses.setflags(write=False)
        self.shape = shape
        self.weights = weights
        self.responses = responses

    @classmethod
    def from_configurations(cls, shape, configurations, weights):
        resp = np.array([c.responses(shape) for c in configurations])
        return cls(shape, weights, resp)

    @property
    def num_states(self):
        return self.weights.size

    def is_deterministic(self, tol=EQUAL_TOL):
        r = self.responses
        return bool(np.all((np.abs(r) <= tol) | (np.abs(r - 1.0) <= tol)))

    def __repr__(self):
        return f"LhvModel(shape={self.shape}, states={self.num_states})"


def lhv_to_table(model):
    """Correlation table ``sum_l w_l prod_k response_k(a_k | s_k, l)``."""
    n = model.shape.n
    if 2 * n + 1 > len(_LETTERS):
        raise GuardError("too many parties for the einsum contraction")
    lam = "z"
    set_idx = _LETTERS[:n]
    out_idx = _LETTERS[n : 2 * n]
    operands = [model.weights]
    subs = [lam]
    for k in range(n):
        operands.append(model.responses[:, k])
        subs.append(lam + set_idx[k] + out_idx[k])
    expr = ",".join(subs) + "->" + set_idx + out_idx
    probs = np.einsum(expr, *operands, optimize=True)
    return CorrelationTable(model.shape, probs)


def derandomize(model, limit=MAX_DERANDOMIZED_STATES, tol=0.0):
    """Replace every hidden state by the classical configurations it mixes.

    The new hidden variable is the pair (state, configuration) with weight
    ``w_l * prod_{k,s} response_k(c_{k,s} | s, l)``; responses become 0/1.
    Pairs of weight ``<= tol`` are pruned.
    """
    shape = model.shape
    nm = shape.n * shape.m
    if model.num_states * shape.num_configurations > limit:
        raise GuardError(
            f"{model.num_states} states x {shape.num_configurations} configurations "
            f"exceeds the limit {limit}"
        )
    configs = np.array(list(itertools.product(range(shape.v), repeat=nm)), dtype=int)
    configs = configs.reshape(-1, shape.n, shape.m)
    new_weights = []
    new_configs = []
    for w, resp in zip(model.weights, model.responses):
        if w <= tol:
            continue
        flat = resp.reshape(nm, shape.v)
        cw = np.ones(len(configs))
        for j in range(nm):
            k, s = divmod(j, shape.m)
            cw *= flat[j, configs[:, k, s]]
        cw *= w
        keep = np.nonzero(cw > tol)[0]
        new_weights.extend(cw[keep])
        new_configs.extend(configs[keep])
    resp = np.zeros((len(new_configs), shape.n, shape.m, shape.v))
    for i, c in enumerate(new_configs):
        for k in range(shape.n):
            resp[i, k, np.arange(shape.m), c[k]] = 1.0
    weights = np.array(new_weights)
    return LhvModel(shape, weights / weights.sum(), resp)


def _check_chsh_shape(table):
    s = table.shape
    if (s.n, s.m, s.v) != (2, 2, 2):
        raise StructuralError(f"CHSH needs shape (2, 2, 2), got ({s.n}, {s.m}, {s.v})")


def _correlators_2x2(table):
    signs = np.array([1.0, -1.0])
    return np.einsum("xyab,a,b->xy", table.probs, signs, signs)


def chsh_value(table):
    """``|E(A1,B1) + E(A1,B2) + E(A2,B1) - E(A2,B2)| / 2``."""
    _check_chsh_shape(table)
    e = _correlators_2x2(table)
    return float(0.5 * abs(e[0, 0] + e[0, 1] + e[1, 0] - e[1, 1]))


def _two_party_family():
    signs = np.array(list(itertools.product([1.0, -1.0], repeat=4)))
    return bits.fwht(signs) / 4.0


def chsh_variants(table):
    """Coefficients and values of the 16 full-correlation inequalities for (2,2,2).

    These are the CHSH expression with observables or outcomes relabelled,
    together with the trivial bounds ``+-E(A_i, B_j) <= 1``. Returns
    ``(betas, values)`` with ``betas`` of shape (16, 4) in setting-bit order.
    """
    _check_chsh_shape(table)
    e = _correlators_2x2(table)
    xi = np.array([e[0, 0], e[1, 0], e[0, 1], e[1, 1]])  # s = s_A + 2 s_B
    betas = _two_party_family()
    return betas, betas @ xi


@dataclass(frozen=True)
class ViolatedInequality:
    beta: np.ndarray
    value: float


@dataclass(frozen=True)
class FineResult:
    feasible: bool
    joint: np.ndarray | None
    certificate: ViolatedInequality | None
    residual: float


def _fine_constraint_matrix():
    # q indexed [a1, a2, b1, b2] flattened C-order; rows (sA, sB, a, b)
    rows = []
    for sa, sb, a, b in itertools.product(range(2), repeat=4):
        row = np.zeros((2, 2, 2, 2))
        if sa == 0:
            if sb == 0:
                row[a, :, b, :] = 1
            else:
                row[a, :, :, b] = 1
        else:
            if sb == 0:
                row[:, a, b, :] = 1
            else:
                row[:, a, :, b] = 1
        rows.append(row.ravel())
    return np.array(rows)


_FINE_MATRIX = _fine_constraint_matrix()


def fine_joint_lp(table, tol=LP_TOL):
    """Search for a joint distribution of (A1, A2, B1, B2) reproducing the table.

    Solves ``min t`` subject to ``|M q - p| <= t``, ``q >= 0``, ``sum q = 1``;
    the table is declared local when ``t <= tol``. On failure the most
    violated CHSH variant is returned as certificate.
    """
    _check_chsh_shape(table)
    report = validate_table(table)
    if not report.passed:
        raise StructuralError(f"table is not a valid probability table (residual {report.max_residual:.3g})")
    ns = no_signalling_check(table)
    if not ns.passed:
        raise SignallingError(
            f"table is signalling (max marginal deviation {ns.max_deviation:.3g}); "
            "Fine's joint-distribution test assumes no-signalling"
        )
    p = table.probs.reshape(-1)
    m = _FINE_MATRIX
    nq = m.shape[1]
    # variables: q (16), t
    c = np.zeros(nq + 1)
    c[-1] = 1.0
    ones = np.ones((m.shape[0], 1))
    a_ub = np.vstack([np.hstack([m, -ones]), np.hstack([-m, -ones])])
    b_ub = np.concatenate([p, -p])
    a_eq = np.hstack([np.ones((1, nq)), np.zeros((1, 1))])
    res = linprog(
        c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0],
        bounds=[(0, None)] * (nq + 1), method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    q = np.clip(res.x[:nq], 0.0, None)
    residual = float(np.max(np.abs(m @ q - p)))
    feasible = residual <= tol
    if feasible:
        return FineResult(True, (q / q.sum()).reshape(2, 2, 2, 2), None, residual)
    betas, values = chsh_variants(table)
    i = int(np.argmax(values))
    cert = ViolatedInequality(betas[i], float(values[i])) if values[i] > 1.0 else None
    return FineResult(False, None, cert, residual)


@dataclass(frozen=True)
class JointDevice:
    """Bob's joint device for B1 & B2, one distribution per Alice setting.

    ``p1[a, b1, b2]`` and ``p2[a, b1, b2]`` use outcome index 0 for ``+1``.
    If ``table`` is given the device must reproduce it as marginals.
    """

    p1: np.ndarray
    p2: np.ndarray
    table: CorrelationTable | None = field(default=None, compare=False)

    def __post_init__(self):
        tol = TABLE_TOL
        for name in ("p1", "p2"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (2, 2, 2):
                raise StructuralError(f"{name} must have shape (2, 2, 2)")
            if np.any(arr < -tol) or abs(arr.sum() - 1.0) > tol:
                raise InconsistentDeviceError(f"{name} is not a probability distribution")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.table is not None:
            _check_chsh_shape(self.table)
            dev = np.max(np.abs(self.implied_table().probs - self.table.probs))
            if dev > tol:
                raise InconsistentDeviceError(
                    f"joint device marginals deviate from the single-device table by {dev:.3g}"
                )

    def implied_table(self):
        probs = np.zeros((2, 2, 2, 2))
        for i, p in enumerate((self.p1, self.p2)):
            probs[i, 0] = p.sum(axis=2)  # B1: sum over b2
            probs[i, 1] = p.sum(axis=1)  # B2: sum over b1
        return CorrelationTable(ExperimentShape(2, 2, 2), probs)


@dataclass(frozen=True)
class TelephoneResult:
    p_ok: float
    beta: float
    bound_satisfied: bool


def telephone_p_ok(device):
    """Success probability of Bob guessing Alice's setting from coincidences."""
    val = np.array([1.0, -1.0])
    b1 = val[:, None]
    b2 = val[None, :]
    same = np.abs((b1 + b2) / 2)
    diff = np.abs((b1 - b2) / 2)
    p_ok = 0.5 * float(np.sum(same[None] * device.p1)) + 0.5 * float(np.sum(diff[None] * device.p2))
    beta = chsh_value(device.implied_table())
    return TelephoneResult(p_ok, beta, p_ok >= beta / 2 - EQUAL_TOL)


# random generators for property checks


def random_lhv_model(shape, states, rng, deterministic_fraction=0.0):
    """Random finite model with Dirichlet weights and responses."""
    weights = rng.dirichlet(np.ones(states))
    responses = rng.dirichlet(np.ones(shape.v), size=(states, shape.n, shape.m))
    if deterministic_fraction > 0:
        mask = rng.random((states, shape.n, shape.m)) < deterministic_fraction
        hard = np.eye(shape.v)[rng.integers(shape.v, size=(states, shape.n, shape.m))]
        responses = np.where(mask[..., None], hard, responses)
    return LhvModel(shape, weights, responses)


def _deterministic_box(a_outcomes, b_outcomes):
    probs = np.zeros((2, 2, 2, 2))
    for sa in range(2):
        for sb in range(2):
            probs[sa, sb, a_outcomes[sa], b_outcomes[sb]] = 1.0
    return probs


def _pr_box(x0, y0, z0):
    # a xor b = (sa xor x0)(sb xor y0) xor z0, uniform marginals
    probs = np.zeros((2, 2, 2, 2))
    for sa, sb, a in itertools.product(range(2), repeat=3):
        b = a ^ (((sa ^ x0) & (sb ^ y0)) ^ z0)
        probs[sa, sb, a, b] = 0.5
    return probs


def no_signalling_vertices():
    """The 16 local deterministic and 8 PR boxes spanning the (2,2,2) no-signalling set."""
    local = [
        _deterministic_box(a, b)
        for a in itertools.product(range(2), repeat=2)
        for b in itertools.product(range(2), repeat=2)
    ]
    pr = [_pr_box(x, y, z) for x, y, z in itertools.product(range(2), repeat=3)]
    return np.array(local), np.array(pr)


def random_no_signalling_table(rng, nonlocal_weight=None):
    """Random (2,2,2) no-signalling table: a PR box mixed with local boxes."""
    local, pr = no_signalling_vertices()
    if nonlocal_weight is None:
        nonlocal_weight = rng.uniform(0.0, 0.6)
    w_local = rng.dirichlet(np.full(len(local), 0.5))
    probs = (1 - nonlocal_weight) * np.tensordot(w_local, local, axes=1)
    probs = probs + nonlocal_weight * pr[rng.integers(len(pr))]
    return CorrelationTable(ExperimentShape(2, 2, 2), probs)

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bellscope import bits, family
from bellscope.correlation import ClassicalConfiguration
from bellscope.errors import GuardError, NotInFamilyError, StructuralError

CHSH = [0.5, 0.5, 0.5, -0.5]


def direct_beta(f):
    """Term-by-term sum 2**-n sum_r f(r) (-1)**<r, s>."""
    size = len(f)
    return [
        sum(f[r] * (-1) ** bin(r & s).count("1") for r in range(size)) / size for s in range(size)
    ]


def mermin_by_polynomials(n):
    """Expand the recursion on explicit polynomials {setting tuple: coefficient}."""
    poly = {(0,): 1.0}
    for _ in range(1, n):
        primed = {tuple(1 - s for s in key): c for key, c in poly.items()}
        new = {}
        for key, c in poly.items():
            for t, w in ((0, 0.5), (1, 0.5)):
                new[key + (t,)] = new.get(key + (t,), 0.0) + w * c
        for key, c in primed.items():
            for t, w in ((0, 0.5), (1, -0.5)):
                new[key + (t,)] = new.get(key + (t,), 0.0) + w * c
        poly = new
    out = np.zeros(1 << n)
    for key, c in poly.items():
        out[bits.from_bits(key)] = c
    return out


@pytest.mark.parametrize(
    "f, beta",
    [
        ([1, 1, 1, 1], [1, 0, 0, 0]),
        ([1, 1, 1, -1], CHSH),
        ([1, -1], [0, 1]),
    ],
)
def test_beta_from_f_examples(f, beta):
    np.testing.assert_allclose(family.beta_from_f(f).beta, beta, atol=1e-15)
    np.testing.assert_allclose(direct_beta(f), beta, atol=1e-15)


def test_f_from_beta_examples():
    np.testing.assert_array_equal(family.f_from_beta(CHSH).f, [1, 1, 1, -1])
    np.testing.assert_array_equal(family.f_from_beta([1, 0, 0, 0]).f, [1, 1, 1, 1])
    with pytest.raises(NotInFamilyError) as info:
        family.f_from_beta([0.7, 0, 0, 0])
    assert info.value.r == 0 and info.value.value == pytest.approx(0.7)


def test_sign_vector_validation():
    with pytest.raises(StructuralError):
        family.SignVector([1, 0.5])
    with pytest.raises(StructuralError):
        family.SignVector([1, 1, 1])


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_round_trip_and_unit_classical_max(n, seed):
    f = np.random.default_rng(seed).choice([-1.0, 1.0], size=1 << n)
    beta = family.beta_from_f(f)
    np.testing.assert_array_equal(family.f_from_beta(beta).f, f)
    np.testing.assert_allclose(family.beta_from_f(family.f_from_beta(beta)).beta, beta.beta, atol=1e-12)
    assert family.classical_max(beta).value == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(beta.beta, direct_beta(list(f)), atol=1e-12)


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_classical_max_matches_brute_force(n, seed):
    beta = np.random.default_rng(seed).standard_normal(1 << n)
    fast = family.classical_max(beta)
    slow = family.classical_max_bruteforce(beta)
    assert fast.value == pytest.approx(slow.value, abs=1e-12)
    assert family.configuration_value(beta, fast.argmax) == pytest.approx(fast.value, abs=1e-12)


def test_classical_max_examples():
    assert family.classical_max(CHSH).value == 1.0
    assert family.classical_max([1, 1, 1, 1]).value == 4.0
    assert family.classical_max_bruteforce(family.mermin(3)).value == 1.0
    with pytest.raises(GuardError):
        family.classical_max(np.ones(1 << 15))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_family_values_on_configurations_are_plus_minus_one(n):
    for code in range(1 << (1 << n)):
        f = 1.0 - 2.0 * ((code >> np.arange(1 << n)) & 1)
        beta = family.beta_from_f(f)
        values = [
            family.configuration_value(beta, ClassicalConfiguration(np.array(cfg).reshape(n, 2)))
            for cfg in itertools.product((0, 1), repeat=2 * n)
        ]
        np.testing.assert_allclose(np.abs(values), 1.0, atol=1e-12)
        assert max(values) == pytest.approx(1.0, abs=1e-12)


def test_membership_examples():
    zero = family.lhv_membership(np.zeros(4))
    assert zero.inside and zero.l1_mass == 0
    vertex = [a * b for b in (1, -1) for a in (1, 1)]  # a(0)=a(1)=1, b(0)=1, b(1)=-1
    assert family.lhv_membership(vertex).l1_mass == 1.0
    quantum = family.lhv_membership(np.array(CHSH) * np.sqrt(2))
    assert not quantum.inside
    assert quantum.l1_mass == pytest.approx(np.sqrt(2), abs=1e-12)


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_spectrum_inverts(n, seed):
    xi = np.random.default_rng(seed).uniform(-1, 1, 1 << n)
    spectrum = family.transform_correlations(xi)
    np.testing.assert_allclose(bits.fwht(spectrum), xi, atol=1e-12)


def test_membership_mass_bounds_every_family_value():
    # sum_s beta(s) xi(s) = sum_r f(r) xi_hat(r) <= sum_r |xi_hat(r)|
    rng = np.random.default_rng(3)
    for _ in range(50):
        xi = rng.uniform(-1, 1, 8)
        mass = family.lhv_membership(xi).l1_mass
        best = max(b.value(xi) for b in family.enumerate_family(3))
        assert best == pytest.approx(mass, abs=1e-12)


@pytest.mark.parametrize("n", range(2, 11))
def test_mermin_matches_polynomial_expansion_and_is_in_family(n):
    beta = family.mermin(n)
    np.testing.assert_allclose(beta.beta, mermin_by_polynomials(n), atol=1e-15)
    family.f_from_beta(beta)
    assert family.classical_max(beta).value == pytest.approx(1.0, abs=1e-12)
    if n <= 7:
        assert family.classical_max_bruteforce(beta).value == pytest.approx(1.0, abs=1e-12)


def test_mermin_small_cases():
    np.testing.assert_array_equal(family.mermin(2).beta, CHSH)
    m3 = family.mermin(3).beta
    np.testing.assert_array_equal(m3, [0, 0.5, 0.5, 0, 0.5, 0, 0, -0.5])
    with pytest.raises(GuardError):
        family.mermin(1)


@pytest.mark.parametrize("n, count", [(1, 4), (2, 16), (3, 256)])
def test_enumerate_family_counts_and_uniqueness(n, count):
    members = [tuple(b.beta) for b in family.enumerate_family(n)]
    assert len(members) == count == len(set(members))


def test_enumerate_family_n2_kinds():
    members = list(family.enumerate_family(2))
    single = [b for b in members if np.count_nonzero(b.beta) == 1]
    chsh_like = [b for b in members if np.allclose(np.abs(b.beta), 0.5)]
    assert len(single) == 8 and len(chsh_like) == 8


def test_canonicalize_orbits():
    reps2 = {tuple(family.canonicalize(b).beta) for b in family.enumerate_family(2)}
    assert len(reps2) == 2
    np.testing.assert_array_equal(family.canonicalize(family.mermin(2)).beta, family.canonicalize(CHSH).beta)
    reps3 = {tuple(family.canonicalize(b).beta) for b in family.enumerate_family(3)}
    # every orbit keeps classical maximum 1
    assert all(family.classical_max(r).value == pytest.approx(1.0) for r in reps3)


def test_inequality_json_round_trip():
    beta = family.mermin(3)
    again = family.BellCoefficients.from_dict(beta.to_dict())
    np.testing.assert_array_equal(again.beta, beta.beta)
    with pytest.raises(StructuralError):
        family.BellCoefficients.from_dict({"version": "beta-v0", "n": 1, "beta": [0, 1]})
    with pytest.raises(StructuralError):
        family.BellCoefficients.from_dict({"version": "beta-v1", "n": 2, "beta": [0, 1]})

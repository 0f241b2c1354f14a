import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from bellscope import bits


def test_bit_order_party_one_is_least_significant():
    assert bits.to_bits(0b110, 3) == (0, 1, 1)
    assert bits.from_bits((1, 0, 1)) == 5


@given(st.integers(1, 8), st.data())
def test_codec_round_trip(n, data):
    i = data.draw(st.integers(0, (1 << n) - 1))
    assert bits.from_bits(bits.to_bits(i, n)) == i
    assert tuple(bits.bit_matrix(n)[i]) == bits.to_bits(i, n)


@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_fwht_matches_dense_hadamard(n, seed):
    v = np.random.default_rng(seed).standard_normal(1 << n)
    np.testing.assert_allclose(bits.fwht(v), bits.parity_matrix(n) @ v, atol=1e-12)


@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_fwht_is_its_own_inverse_up_to_scale(n, seed):
    v = np.random.default_rng(seed).standard_normal(1 << n)
    np.testing.assert_allclose(bits.fwht(bits.fwht(v)) / (1 << n), v, atol=1e-12)


def test_tensor_axes_follow_parties():
    n = 3
    v = np.arange(8.0)
    t = bits.tensor_from_bits(v, n)
    for i in range(8):
        assert t[bits.to_bits(i, n)] == v[i]
    np.testing.assert_array_equal(bits.bits_from_tensor(t, n), v)

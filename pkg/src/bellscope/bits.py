"""Shared bitstring codec: party k occupies bit k-1 (party 1 least significant)."""

import numpy as np


def to_bits(index, n):
    """Return the bit tuple ``(s_1, ..., s_n)`` encoded by ``index``."""
    return tuple((index >> k) & 1 for k in range(n))


def from_bits(bits):
    return sum(int(b) << k for k, b in enumerate(bits))


def bit_matrix(n):
    """Array of shape (2**n, n) whose row ``i`` is ``to_bits(i, n)``."""
    idx = np.arange(1 << n)
    return (idx[:, None] >> np.arange(n)[None, :]) & 1


def parity_matrix(n):
    """Hadamard-sign matrix ``(-1)**<r, s>`` of shape (2**n, 2**n).

    Only meant for small ``n``; used as a brute-force reference.
    """
    idx = np.arange(1 << n)
    and_ = idx[:, None] & idx[None, :]
    pop = np.zeros_like(and_)
    for k in range(n):
        pop += (and_ >> k) & 1
    return 1 - 2 * (pop & 1)


def fwht(values):
    """Unnormalized fast Walsh-Hadamard transform along the last axis.

    Computes ``out[r] = sum_s values[s] * (-1)**popcount(r & s)`` in
    ``O(N log N)``. The length of the last axis must be a power of two.
    """
    a = np.array(values, dtype=float, copy=True)
    size = a.shape[-1]
    if size & (size - 1) or size == 0:
        raise ValueError(f"length {size} is not a power of two")
    lead = a.shape[:-1]
    h = 1
    while h < size:
        a = a.reshape(*lead, size // (2 * h), 2, h)
        x = a[..., 0, :].copy()
        y = a[..., 1, :]
        a[..., 0, :] = x + y
        a[..., 1, :] = x - y
        a = a.reshape(*lead, size)
        h *= 2
    return a


def tensor_from_bits(vector, n):
    """View a length-2**n vector as an n-axis array indexed ``[s_1, ..., s_n]``."""
    arr = np.asarray(vector)
    return arr.reshape(arr.shape[:-1] + (2,) * n).transpose(
        tuple(range(arr.ndim - 1)) + tuple(arr.ndim - 1 + np.arange(n)[::-1])
    )


def bits_from_tensor(tensor, n):
    """Inverse of :func:`tensor_from_bits`."""
    arr = np.asarray(tensor)
    lead = arr.ndim - n
    arr = arr.transpose(tuple(range(lead)) + tuple(lead + np.arange(n)[::-1]))
    return arr.reshape(arr.shape[:lead] + (1 << n,))

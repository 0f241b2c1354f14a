"""Correlation Bell inequalities, classical polytopes and quantum violations.

Bit conventions used throughout: a setting (or pattern) bitstring ``s`` for
``n`` parties is stored as the integer ``sum(s_k << (k - 1))``, i.e. party 1
is the least significant bit. Dichotomic outcome index 0 means ``+1`` and
index 1 means ``-1``. Tensor products of site operators are taken in site
order, site 1 first (the usual ``np.kron`` convention).
"""

__version__ = "0.1.0"

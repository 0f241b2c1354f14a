import os

TABLE_TOL = 1e-9
EQUAL_TOL = 1e-12
GEOM_TOL = 1e-9
LP_TOL = 1e-9
HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-9

# log2 of the configuration space n*m*log2(v) accepted by ExperimentShape
MAX_CONFIG_BITS = 24
# |Lambda| * v**(n*m) accepted by derandomize
MAX_DERANDOMIZED_STATES = 1 << 20

_DEFAULT_MAX_DIM = 4096


def max_operator_dim():
    """Largest total Hilbert-space dimension accepted by quantum operations."""
    raw = os.environ.get("BELLSCOPE_MAX_DIM")
    if raw is None:
        return _DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"BELLSCOPE_MAX_DIM must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError("BELLSCOPE_MAX_DIM must be positive")
    return value

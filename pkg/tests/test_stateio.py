"""Binary state container: exact roundtrip and format validation."""

import numpy as np
import pytest

from qutritml.errors import FormatError
from qutritml.sampler import SeedSpec, random_density_hs
from qutritml.stateio import (
    load_state,
    save_state,
    state_from_bytes,
    state_to_bytes,
)


def test_roundtrip_is_bit_exact(tmp_path):
    rho = random_density_hs(9, SeedSpec(8, 0))
    p = tmp_path / "state.q3st"
    save_state(p, rho)
    back = load_state(p)
    assert back.tobytes() == rho.astype(complex).tobytes()


def test_bytes_roundtrip_non_state_matrix():
    m = np.arange(9, dtype=float).reshape(3, 3) + 1j
    assert np.array_equal(state_from_bytes(state_to_bytes(m)), m)


def test_rejects_non_square():
    with pytest.raises(FormatError):
        state_to_bytes(np.zeros((2, 3)))


def test_rejects_bad_magic_version_truncation():
    blob = state_to_bytes(np.eye(2, dtype=complex))
    with pytest.raises(FormatError):
        state_from_bytes(b"XXXX" + blob[4:])
    with pytest.raises(FormatError):
        state_from_bytes(blob[:4] + b"\x09" + blob[5:])
    with pytest.raises(FormatError):
        state_from_bytes(blob[:-1])
    with pytest.raises(FormatError):
        state_from_bytes(b"Q3")

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isacopt.codebook import build_codebook


def test_two_bit_alphabet_is_exact():
    cb = build_codebook(2, 8.0, 2, 1)
    d = 2.0
    assert list(cb.symbols) == [d, 1j * d, -d, -1j * d]


def test_one_bit_alphabet():
    cb = build_codebook(1, 1.0, 1, 1)
    assert list(cb.symbols) == [1.0, -1.0]


@given(st.integers(1, 5), st.floats(1e-3, 1e4), st.integers(1, 4), st.integers(1, 16))
def test_magnitude_matches_power_split(q, P, K, N):
    cb = build_codebook(q, P, K, N)
    assert cb.size == 2 ** q
    np.testing.assert_allclose(np.abs(cb.symbols), np.sqrt(P / (K * N)), rtol=1e-12)
    # a full-power beam on every RF chain spends exactly P
    assert K * N * cb.magnitude ** 2 == pytest.approx(P, rel=1e-12)


def test_gram_is_outer_of_conjugate():
    cb = build_codebook(2, 4.0, 1, 1)
    S = cb.gram
    np.testing.assert_allclose(S, S.conj().T)
    np.testing.assert_allclose(np.diag(S), cb.magnitude ** 2)


def test_decode_entry():
    cb = build_codebook(2, 4.0, 1, 1)
    assert cb.decode_entry([0, 0, 1, 0]) == -2.0
    assert cb.decode_entry([0, 0, 0, 0]) == 0
    with pytest.raises(ValueError):
        cb.decode_entry([1, 1, 0, 0])
    with pytest.raises(ValueError):
        cb.decode_entry([1, 0])


def test_membership():
    cb = build_codebook(3, 8.0, 1, 1)
    assert cb.contains(cb.symbols[5])
    assert cb.index_of(cb.symbols[5]) == 5
    assert not cb.contains(cb.symbols[5] * np.exp(0.1j))


@pytest.mark.parametrize("args", [(0, 1.0, 1, 1), (1, 0.0, 1, 1), (1, 1.0, 0, 1)])
def test_invalid_arguments(args):
    with pytest.raises(ValueError):
        build_codebook(*args)

import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from icahoc.errors import DataError
from icahoc.store import (CACHE_MAGIC, EmbeddingMatrix, load_arrays, load_cache,
                          load_frequencies, load_word2vec_text, normalize_rows, save_arrays,
                          save_cache, with_frequencies)


def test_load_minimal(write):
    m = load_word2vec_text(write("e.vec", "2 3\ncat 1 0 0\ndog 0 1 0\n"))
    assert m.vocab == ("cat", "dog")
    np.testing.assert_array_equal(m.vectors, [[1, 0, 0], [0, 1, 0]])


def test_load_scientific_notation(write):
    m = load_word2vec_text(write("e.vec", "1 2\nx 1e-3 -2.5E+2\n"))
    np.testing.assert_array_equal(m.vectors, [[1e-3, -250.0]])


def test_row_count_mismatch(write):
    with pytest.raises(DataError, match="row count mismatch"):
        load_word2vec_text(write("e.vec", "3 3\ncat 1 0 0\ndog 0 1 0\n"))


def test_duplicate_word(write):
    with pytest.raises(DataError, match="duplicate word: cat"):
        load_word2vec_text(write("e.vec", "2 3\ncat 1 0 0\ncat 0 1 0\n"))


def test_wrong_width(write):
    with pytest.raises(DataError, match="expected 3 values"):
        load_word2vec_text(write("e.vec", "1 3\ncat 1 0\n"))


@pytest.mark.parametrize("bad", ["nan", "inf", "-inf"])
def test_non_finite(write, bad):
    with pytest.raises(DataError, match="non-finite"):
        load_word2vec_text(write("e.vec", f"1 2\ncat 1 {bad}\n"))


def test_frequencies(write):
    assert load_frequencies(write("f.tsv", "the\t1061396\n")) == {"the": 1061396}


def test_frequencies_negative(write):
    with pytest.raises(DataError, match="negative count"):
        load_frequencies(write("f.tsv", "cat\t-5\n"))


def test_frequencies_non_integer(write):
    with pytest.raises(DataError, match="non-integer"):
        load_frequencies(write("f.tsv", "cat\t2.5\n"))


def test_frequencies_duplicate_overwrites(write):
    with pytest.warns(UserWarning):
        f = load_frequencies(write("f.tsv", "a\t3\na\t7\n"))
    assert f == {"a": 7}
    assert f.duplicates == 1


def test_missing_frequency_defaults_to_zero():
    m = EmbeddingMatrix(np.eye(2), ("a", "b"))
    with pytest.warns(UserWarning):
        m2 = with_frequencies(m, {"a": 5})
    assert m2.freq == {"a": 5, "b": 0}
    with pytest.raises(DataError):
        with_frequencies(m, {"a": 5}, strict=True)


def test_normalize_rows():
    m = EmbeddingMatrix(np.array([[3.0, 4.0], [2 ** -0.5, 2 ** -0.5]]), ("a", "b"), {"a": 1})
    out = normalize_rows(m)
    np.testing.assert_allclose(out.vectors[0], [0.6, 0.8], atol=1e-12)
    np.testing.assert_allclose(out.vectors[1], [2 ** -0.5, 2 ** -0.5], atol=1e-12)
    assert out.vocab == m.vocab and out.freq == m.freq


def test_normalize_zero_row_names_word():
    m = EmbeddingMatrix(np.array([[1.0, 0.0], [0.0, 0.0]]), ("a", "zero"))
    with pytest.raises(DataError, match="zero"):
        normalize_rows(m)


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 5)), elements=finite))
def test_normalize_idempotent(x):
    x = x + (np.linalg.norm(x, axis=1, keepdims=True) == 0)  # no zero rows
    m = EmbeddingMatrix(x, tuple(f"w{i}" for i in range(len(x))))
    once = normalize_rows(m)
    np.testing.assert_allclose(np.linalg.norm(once.vectors, axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(normalize_rows(once).vectors, once.vectors, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(0, 6), st.integers(1, 4)), elements=finite),
       st.data())
def test_cache_round_trip(tmp_path_factory, x, data):
    vocab = tuple(data.draw(st.lists(st.text(min_size=1).filter(lambda w: " " not in w),
                                     min_size=len(x), max_size=len(x), unique=True)))
    freq = {w: data.draw(st.integers(0, 2 ** 62)) for w in vocab}
    m = EmbeddingMatrix(x, vocab, freq)
    path = tmp_path_factory.mktemp("c") / "m.bin"
    save_cache(m, path)
    back = load_cache(path)
    assert back.vectors.tobytes() == m.vectors.tobytes()
    assert back.vocab == m.vocab and back.freq == m.freq


def test_cache_truncated(tmp_path):
    m = EmbeddingMatrix(np.arange(6.0).reshape(2, 3), ("a", "b"), {"a": 1, "b": 2})
    p = tmp_path / "m.bin"
    save_cache(m, p)
    raw = p.read_bytes()
    p.write_bytes(raw[:-5])
    with pytest.raises(DataError, match="unexpected end of cache"):
        load_cache(p)


def test_cache_old_version(tmp_path):
    p = tmp_path / "old.bin"
    p.write_bytes(CACHE_MAGIC + bytes([1]) + struct.pack("<QQ", 0, 0))
    with pytest.raises(DataError, match="version 1"):
        load_cache(p)


def test_cache_bad_magic(tmp_path):
    p = tmp_path / "x.bin"
    p.write_bytes(b"NOTACACHEFILE")
    with pytest.raises(DataError, match="magic"):
        load_cache(p)


def test_text_load_then_cache_identity(write, tmp_path):
    m = load_word2vec_text(write("e.vec", "2 2\nb 0.1 0.2\na -3e-5 7\n"))
    save_cache(m, tmp_path / "c.bin")
    back = load_cache(tmp_path / "c.bin")
    assert back.vocab == ("b", "a")
    assert back.vectors.tobytes() == m.vectors.tobytes()


def test_arrays_container_round_trip(tmp_path):
    arrs = {"a": np.arange(6.0).reshape(2, 3), "idx": np.array([3, 1, 2])}
    save_arrays(tmp_path / "x.bin", arrs, {"seed": 3})
    back, meta = load_arrays(tmp_path / "x.bin")
    assert meta == {"seed": 3}
    np.testing.assert_array_equal(back["a"], arrs["a"])
    np.testing.assert_array_equal(back["idx"], arrs["idx"])
    save_arrays(tmp_path / "y.bin", arrs, {"seed": 3})
    assert (tmp_path / "x.bin").read_bytes() == (tmp_path / "y.bin").read_bytes()


def test_matrix_is_read_only():
    m = EmbeddingMatrix(np.eye(2), ("a", "b"))
    with pytest.raises(ValueError):
        m.vectors[0, 0] = 5.0

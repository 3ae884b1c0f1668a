import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmsent.embeddings import (
    EmbeddingFormatError,
    EmbeddingSpace,
    Vocabulary,
    l2_normalize,
    load_embeddings,
    lookup,
    save_embeddings,
)


def _write(tmp_path, text, name="space.vec"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_basic(tmp_path):
    space = load_embeddings(_write(tmp_path, "2 2\na 1 0\nb 0 1\n"))
    assert space.vocab.tokens == ["a", "b"]
    assert space.dim == 2
    np.testing.assert_array_equal(space.matrix, [[1.0, 0.0], [0.0, 1.0]])


def test_load_limit(tmp_path):
    space = load_embeddings(_write(tmp_path, "2 2\na 1 0\nb 0 1\n"), limit=1)
    assert space.vocab.tokens == ["a"]


def test_load_arity_error(tmp_path):
    with pytest.raises(EmbeddingFormatError, match="expected 3 fields"):
        load_embeddings(_write(tmp_path, "1 2\na 1 0 3\n"))


@pytest.mark.parametrize(
    "text",
    ["", "x\n", "1 2 3\na 1 0\n", "x 2\na 1 0\n", "1 0\na\n", "0 2\n"],
)
def test_load_bad_header(tmp_path, text):
    with pytest.raises(EmbeddingFormatError):
        load_embeddings(_write(tmp_path, text))


def test_load_nonfinite_value(tmp_path):
    with pytest.raises(EmbeddingFormatError, match="non-finite"):
        load_embeddings(_write(tmp_path, "1 2\na nan 0\n"))


def test_load_duplicates_keep_first(tmp_path):
    space = load_embeddings(_write(tmp_path, "3 1\na 1\na 2\nb 3\n"))
    assert space.vocab.tokens == ["a", "b"]
    np.testing.assert_array_equal(space.matrix[:, 0], [1.0, 3.0])


def test_round_trip_identity(tmp_path, tiny_space):
    path = tmp_path / "out.vec"
    save_embeddings(tiny_space, path)
    back = load_embeddings(path)
    assert back.vocab.tokens == tiny_space.vocab.tokens
    np.testing.assert_array_equal(back.matrix, tiny_space.matrix)


def test_round_trip_precision(tmp_path):
    space = EmbeddingSpace(Vocabulary(["x"]), np.array([[0.1234567891]]))
    path = tmp_path / "out.vec"
    save_embeddings(space, path)
    value = load_embeddings(path).matrix[0, 0]
    assert abs(value - 0.1234567891) / 0.1234567891 <= 1e-6


def test_save_empty_refused(tmp_path):
    space = EmbeddingSpace(Vocabulary([]), np.zeros((0, 3)))
    with pytest.raises(ValueError, match="empty"):
        save_embeddings(space, tmp_path / "out.vec")


@settings(max_examples=30, deadline=None)
@given(
    tokens=st.lists(
        st.text(
            alphabet=st.characters(blacklist_categories=("Zs", "Zl", "Zp", "Cc", "Cs")),
            min_size=1,
            max_size=8,
        ),
        min_size=1,
        max_size=6,
        unique=True,
    ),
    dim=st.integers(min_value=1, max_value=4),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_round_trip_property(tokens, dim, seed):
    import tempfile

    rng = np.random.default_rng(seed)
    space = EmbeddingSpace(Vocabulary(tokens), rng.normal(size=(len(tokens), dim)))
    with tempfile.TemporaryDirectory() as tmp:
        path = f"{tmp}/prop.vec"
        save_embeddings(space, path)
        back = load_embeddings(path)
    assert back.vocab.tokens == tokens
    np.testing.assert_array_equal(back.matrix, space.matrix)


def test_lookup(tiny_space):
    np.testing.assert_array_equal(lookup(tiny_space, "a"), [1.0, 0.0])
    assert lookup(tiny_space, "z") is None
    assert lookup(tiny_space, "A") is None  # case-sensitive


def test_l2_normalize():
    space = EmbeddingSpace(
        Vocabulary(["a", "zero", "unit"]),
        np.array([[3.0, 4.0], [0.0, 0.0], [1.0, 0.0]]),
    )
    normed = l2_normalize(space)
    np.testing.assert_allclose(normed.matrix[0], [0.6, 0.8])
    np.testing.assert_array_equal(normed.matrix[1], [0.0, 0.0])
    np.testing.assert_array_equal(normed.matrix[2], [1.0, 0.0])
    # idempotent
    np.testing.assert_allclose(l2_normalize(normed).matrix, normed.matrix)


def test_vocabulary_rejects_duplicates():
    with pytest.raises(ValueError, match="duplicate"):
        Vocabulary(["a", "a"])


def test_space_shape_and_finite_checks():
    with pytest.raises(ValueError, match="rows"):
        EmbeddingSpace(Vocabulary(["a"]), np.zeros((2, 3)))
    with pytest.raises(ValueError, match="non-finite"):
        EmbeddingSpace(Vocabulary(["a"]), np.array([[np.inf, 0.0]]))

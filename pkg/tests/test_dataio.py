import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from preck.core import Batch, row_norms
from preck.dataio import (Dataset, LibsvmFormatError, SplitSpec, batcher, load_libsvm,
                          multi_pass_stream, parse_libsvm, rescale_max_norm, save_libsvm,
                          serialize_libsvm, split)

SAMPLE = """\
# leading comment
+1 1:0.5 3:-2 # trailing comment
-1 2:1.25
0
1 4:1e-3 5:0
"""


class TestParse:
    def test_sample(self):
        ds = parse_libsvm(SAMPLE, name="sample")
        assert_array_equal(ds.y, [1, 0, 0, 1])
        assert ds.dim == 5 and ds.name == "sample"
        assert_allclose(ds.X.toarray(), [[0.5, 0, -2, 0, 0], [0, 1.25, 0, 0, 0],
                                         [0, 0, 0, 0, 0], [0, 0, 0, 1e-3, 0]])
        assert ds.X.nnz == 4

    def test_bytes_and_forced_dim(self):
        ds = parse_libsvm(SAMPLE.encode(), dim=9)
        assert ds.dim == 9
        with pytest.raises(ValueError):
            parse_libsvm(SAMPLE, dim=3)

    @pytest.mark.parametrize("text,lineno", [
        ("+1 1:1\n2 1:1\n", 2),
        ("+1 3:1 2:1\n", 1),
        ("+1 1:1 1:2\n", 1),
        ("-1 0:1\n", 1),
        ("+1 1:abc\n", 1),
        ("+1 1\n", 1),
        ("1:0.5 2:1\n", 1),
        ("+1 1:1\n\n-1 1:inf\n", 3),
    ])
    def test_errors_carry_line_number(self, text, lineno):
        with pytest.raises(LibsvmFormatError) as err:
            parse_libsvm(text)
        assert err.value.lineno == lineno
        assert f"line {lineno}" in str(err.value)

    def test_large_index(self):
        ds = parse_libsvm("+1 2147483647:1\n-1 1:1\n")
        assert ds.dim == 2**31 - 1
        with pytest.raises(LibsvmFormatError):
            parse_libsvm("+1 2147483648:1\n")


@given(st.lists(
    st.tuples(st.integers(0, 1),
              st.dictionaries(st.integers(1, 40), st.floats(-1e9, 1e9, allow_nan=False,
                                                           allow_infinity=False), max_size=6)),
    min_size=1, max_size=20))
def test_serialize_round_trip(records):
    lines = []
    for y, feats in records:
        pairs = " ".join(f"{i}:{v!r}" for i, v in sorted(feats.items()))
        lines.append(f"{'+1' if y else '-1'} {pairs}")
    ds = parse_libsvm("\n".join(lines) + "\n")
    again = parse_libsvm(serialize_libsvm(ds), dim=ds.dim)
    assert again == ds


def test_file_round_trip(tmp_path):
    ds = parse_libsvm(SAMPLE)
    path = tmp_path / "d.svm"
    save_libsvm(ds, path)
    back = load_libsvm(path, dim=ds.dim)
    assert back == ds and back.name == "d.svm"


def test_rescale_max_norm(rng):
    ds = Dataset(rng.normal(size=(20, 3)) * 5, rng.integers(0, 2, 20))
    out = rescale_max_norm(ds, 2.0)
    assert row_norms(out.X).max() == pytest.approx(2.0)


class TestSplit:
    def test_sizes_and_determinism(self):
        ds = Dataset(np.arange(10.0).reshape(10, 1) + 1, [1, 0] * 5)
        spec = SplitSpec(0.7, seed=3)
        tr, te = split(ds, spec, 0)
        assert (tr.n, te.n) == (7, 3)
        tr2, _ = split(ds, spec, 0)
        assert tr == tr2
        tr3, _ = split(ds, spec, 1)
        assert tr != tr3
        values = sorted(np.concatenate([tr.X.toarray().ravel(), te.X.toarray().ravel()]))
        assert values == list(np.arange(1.0, 11.0))

    def test_bad_fraction(self):
        with pytest.raises(ValueError):
            SplitSpec(1.0)


class TestBatcher:
    def test_chunks_cover_everything(self):
        ds = Batch(np.arange(1.0, 12.0).reshape(11, 1), [1] * 11)
        batches = batcher(ds, 4, seed=(1, 2), pass_index=0)
        assert [b.n for b in batches] == [4, 4, 3]
        seen = sorted(np.concatenate([b.X.toarray().ravel() for b in batches]))
        assert seen == list(np.arange(1.0, 12.0))

    def test_passes_reshuffle(self):
        ds = Batch(np.arange(1.0, 21.0).reshape(20, 1), [0, 1] * 10)
        stream = list(multi_pass_stream(ds, 5, 2, seed=7))
        assert len(stream) == 8
        first = np.concatenate([b.X.toarray().ravel() for b in stream[:4]])
        second = np.concatenate([b.X.toarray().ravel() for b in stream[4:]])
        assert not np.array_equal(first, second)
        again = list(multi_pass_stream(ds, 5, 2, seed=7))
        assert all(a == b for a, b in zip(stream, again))

    def test_bad_length(self):
        with pytest.raises(ValueError):
            batcher(Batch(np.eye(2), [1, 0]), 0)

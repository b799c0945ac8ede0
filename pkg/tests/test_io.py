from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lcsim import cluster, io, witness
from lcsim.errors import ParseError
from lcsim.statevec import Counts, ProbDist


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_distribution_roundtrip(n, seed):
    rng = np.random.default_rng(seed)
    # mitigated distributions can carry negative entries
    d = ProbDist(n, rng.normal(size=1 << n))
    back = io.read_distribution_csv(io.distribution_csv(d))
    assert back.n_qubits == n and np.array_equal(back.p, d.p)


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_counts_roundtrip(n, seed):
    rng = np.random.default_rng(seed)
    c = Counts(n, rng.integers(0, 3, size=1 << n))
    back = io.read_counts_csv(io.counts_csv(c))
    assert back.n_qubits == n and np.array_equal(back.counts, c.counts)
    assert isinstance(io.read_outcome_file(io.counts_csv(c)), Counts)


def test_counts_empty_and_header():
    c = Counts(3, np.zeros(8, dtype=int))
    assert io.read_counts_csv(io.counts_csv(c)).n_qubits == 3
    with pytest.raises(ParseError):
        io.read_counts_csv("outcome,count\n")
    with pytest.raises(ParseError):
        io.read_counts_csv("# qubits 3\noutcome,count\n01,4\n")


def test_bitstring_order_qn_first():
    c = Counts(3, [0, 5, 0, 0, 0, 0, 0, 0])
    assert "001,5" in io.counts_csv(c)


def test_bad_files():
    with pytest.raises(ParseError):
        io.read_distribution_csv("")
    with pytest.raises(ParseError):
        io.read_distribution_csv("a,b\n0,1\n")
    with pytest.raises(ParseError):
        io.read_distribution_csv("outcome,probability\n0x,1\n")
    with pytest.raises(ParseError):
        io.read_distribution_csv("outcome,probability\n0,1\n10,0\n")
    with pytest.raises(ParseError):
        io.read_json("{")


def test_histogram_roundtrip():
    pxz, pzx = cluster.ideal_distributions(4)
    from lcsim import readout

    t = [readout.TransitionMatrix(0.96, 0.87)] * 4
    study = witness.transition_fluctuation_sigma(pxz, pzx, cluster.witness_coefficients(4), t,
                                                 (0.01, 0.01), trials=500, seed=1, bins=12)
    edges, counts = io.read_histogram_csv(io.histogram_csv(study))
    assert np.array_equal(edges, study.bin_edges) and np.array_equal(counts, study.histogram)


@given(st.lists(st.tuples(st.integers(-5, 5), st.floats(allow_nan=False, allow_infinity=False),
                          st.sampled_from(["a", "XZ"])), max_size=10))
def test_table_roundtrip(rows):
    header, back = io.read_table_csv(io.table_csv(["i", "x", "s"], [list(r) for r in rows]))
    assert header == ["i", "x", "s"]
    assert back == [list(r) for r in rows]


def test_json_roundtrip(tmp_path):
    obj = {"a": np.float64(0.1), "b": np.arange(3), "c": [np.True_, None], "d": {"e": 2}}
    path = io.write(Path(tmp_path) / "x" / "r.json", io.json_text(obj))
    assert io.read_json(path) == {"a": 0.1, "b": [0, 1, 2], "c": [True, None], "d": {"e": 2}}
    assert io.json_text(obj) == io.json_text(io.read_json(path))

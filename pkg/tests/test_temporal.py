import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pairprox.errors import ConfigError, InputError
from pairprox.temporal import (COLLAB, TemporalGraph, activity, career_span_flags, collab_matrix,
                               collab_vector, preferential_attachment, read_temporal_edges,
                               weighted_indices, windowed_common_collaborators,
                               windowed_weight_sum, write_temporal_edges, yearwise_labels)

import oracles

T0_RECORDS = [(0, 1, 2010, 2), (0, 1, 2015, 1), (1, 2, 2005, 3), (0, 2, 2013, 1)]
ALL, RECENT, SHORT = COLLAB.all_years, COLLAB.recent, COLLAB.short


@pytest.fixture
def t0():
    return TemporalGraph.from_records(3, T0_RECORDS)


@pytest.fixture
def t0_aug():
    return TemporalGraph.from_records(3, T0_RECORDS + [(1, 2, 2010, 2)])


def test_weight_sums(t0):
    assert windowed_weight_sum(t0, 0, 1, ALL) == 3
    assert windowed_weight_sum(t0, 1, 2, RECENT) == 0
    assert windowed_weight_sum(t0, 0, 1, SHORT) == 1
    with pytest.raises(InputError):
        windowed_weight_sum(t0, 0, 1, (2017, 2007))


def test_activity_and_pa(t0):
    assert activity(t0, 0) == 4
    assert preferential_attachment(t0, 0, 1) == 12
    tg = TemporalGraph.from_records(4, T0_RECORDS)
    assert preferential_attachment(tg, 0, 3) == 0


def test_weighted_indices_examples(t0, t0_aug):
    assert weighted_indices(t0, 0, 1) == (0.0, 0.0, 0.0)
    aa, jac, sal = weighted_indices(t0_aug, 0, 1)
    assert aa == pytest.approx(1 / math.log(3), abs=1e-12)
    # union {0,1,2}: (0+3) + (3+0) + (1+2) = 9, numerator through node 2 = 3
    assert jac == pytest.approx(3 / 9, abs=1e-12)
    assert sal == pytest.approx(3 / math.sqrt(4 * 5), abs=1e-12)


def test_common_collaborators_and_labels(t0, t0_aug):
    assert windowed_common_collaborators(t0_aug, 0, 1, RECENT) == 1
    labels = yearwise_labels(t0, 0, 1)
    assert labels.tolist() == [1.0 if y in (2010, 2015) else 0.0 for y in range(2007, 2017)]


def test_career_flags():
    tg = TemporalGraph.from_records(4, [(0, 1, 2005, 1), (0, 2, 2013, 1), (1, 2, 1984, 1),
                                        (1, 2, 1985, 1)])
    assert career_span_flags(tg, 0) == (1, 1)
    assert career_span_flags(tg, 1) == (0, 1)
    with pytest.raises(ConfigError):
        career_span_flags(tg, 3)
    assert career_span_flags(tg, 3, strict=False) == (1, 1)


def test_cutoff_is_strict():
    tg = TemporalGraph.from_records(2, [(0, 1, 1985, 1)])
    assert career_span_flags(tg, 0) == (1, 1)


def test_collab_vector_layout(t0_aug):
    emb = np.array([[1.0, 0.0], [1.0, 1.0], [0.0, 0.0]])
    vec = collab_vector(t0_aug, emb, 0, 1)
    assert len(vec) == 28
    assert list(vec) == list(COLLAB.names())
    swapped = collab_vector(t0_aug, emb, 1, 0)
    for k in vec:
        if k.endswith("_u"):
            assert vec[k] == swapped[k[:-2] + "_v"]
        elif not k.endswith("_v"):
            assert vec[k] == swapped[k]
    with pytest.raises(ConfigError):
        collab_vector(t0_aug, None, 0, 1)


def test_empty_history_pair():
    tg = TemporalGraph.from_records(4, [(0, 1, 2010, 1)])
    vec = collab_vector(tg, np.zeros((4, 2)), 2, 3, strict=False)
    for k in ("w_all", "w_10", "w_5", "cc_all", "cc_10", "cc_5", "pref_attach"):
        assert vec[k] == 0
    assert all(vec[f"la_{y}"] == 0 for y in range(2007, 2017))


def test_record_validation():
    with pytest.raises(InputError):
        TemporalGraph.from_records(3, [(0, 0, 2010, 1)])
    with pytest.raises(InputError):
        TemporalGraph.from_records(3, [(0, 1, 2010, 0)])


def test_restrict_and_pairs(t0):
    r = t0.restrict(2010)
    assert sorted(r.records()) == sorted(x for x in T0_RECORDS if x[2] <= 2010)
    assert t0.pairs_in_year(2013).tolist() == [[0, 2]]


def test_file_roundtrip(tmp_path, t0):
    write_temporal_edges(tmp_path / "t.tsv", t0)
    back = read_temporal_edges(tmp_path / "t.tsv", num_nodes=3)
    assert sorted(back.records()) == sorted(t0.records())


def test_batch_worker_invariance():
    rng = np.random.default_rng(0)
    recs = [(int(a), int((a + rng.integers(1, 20)) % 20), int(rng.integers(2000, 2018)), 1)
            for a in rng.integers(0, 20, 120)]
    tg = TemporalGraph.from_records(20, recs)
    emb = rng.normal(size=(20, 3))
    pairs = [(u, v) for u in range(20) for v in range(u + 1, 20)]
    a = collab_matrix(tg, emb, pairs, workers=1)
    b = collab_matrix(tg, emb, pairs, workers=2)
    assert a.tobytes() == b.tobytes()


records = st.integers(3, 12).flatmap(lambda n: st.tuples(st.just(n), st.lists(
    st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), st.integers(1995, 2019),
              st.integers(1, 4)).filter(lambda r: r[0] != r[1]), min_size=1, max_size=40)))


@settings(max_examples=200, deadline=None)
@given(records, st.data())
def test_windowed_quantities_match_filter_then_static_oracle(nr, data):
    n, recs = nr
    tg = TemporalGraph.from_records(n, recs)
    u = data.draw(st.integers(0, n - 1))
    v = data.draw(st.integers(0, n - 1).filter(lambda x: x != u))
    for window in (ALL, RECENT, SHORT):
        W, wt, N = oracles.temporal_oracle(recs, n, u, v, *window)
        assert windowed_weight_sum(tg, u, v, window) == wt(u, v)
        assert windowed_common_collaborators(tg, u, v, window) == len(N[u] & N[v])
    W, wt, N = oracles.temporal_oracle(recs, n, u, v, *RECENT)
    act = [sum(wt(x, y) for y in N[x]) for x in range(n)]
    assert activity(tg, u) == act[u]
    assert preferential_attachment(tg, u, v) == act[u] * act[v] == preferential_attachment(tg, v, u)
    common = N[u] & N[v]
    aa = sum(1 / math.log(act[z]) for z in common if act[z] > 1)
    num = sum(wt(u, z) + wt(z, v) for z in common)
    den = sum(wt(u, x) + wt(x, v) for x in N[u] | N[v])
    sal_den = math.sqrt(act[u] * act[v])
    got = weighted_indices(tg, u, v)
    assert got[0] == pytest.approx(aa, abs=1e-12)
    assert got[1] == pytest.approx(num / den if den else 0.0, abs=1e-12)
    assert got[2] == pytest.approx(num / sal_den if sal_den else 0.0, abs=1e-12)
    # window nesting and swap invariance
    assert (windowed_weight_sum(tg, u, v, SHORT) <= windowed_weight_sum(tg, u, v, RECENT)
            <= windowed_weight_sum(tg, u, v, ALL))
    assert yearwise_labels(tg, u, v).tolist() == yearwise_labels(tg, v, u).tolist()
    years = {y for a, b, y, _ in recs if {a, b} == {u, v}}
    assert yearwise_labels(tg, u, v).tolist() == [float(y in years) for y in range(2007, 2017)]

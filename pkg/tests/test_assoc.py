from __future__ import annotations

import math
import random

import pytest

from rackwatch.assoc import (
    AssociativeArray,
    RangeError,
    TripleError,
    elementwise_add,
    from_triples,
    matmul,
    select,
    transpose,
)

from oracles import dense_add, dense_entries, dense_accumulate, dense_matmul, scan_select


def random_triples(rng: random.Random, n: int, keys: int = 8) -> list[tuple[str, str, float]]:
    return [
        (f"r{rng.randrange(keys)}", f"c{rng.randrange(keys)}", round(rng.uniform(-5, 5), 3))
        for _ in range(n)
    ]


def test_singleton():
    a = from_triples([("j1", "n1", 2.0)])
    assert a.triples() == [("j1", "n1", 2.0)]


def test_duplicate_keys_sum_and_cancellation_prunes_zero():
    a = from_triples([("j1", "n1", 2.0), ("j1", "n1", -2.0)])
    assert len(a) == 0
    assert a.triples() == []


def test_nonfinite_value_rejected_naming_triple():
    with pytest.raises(TripleError) as err:
        from_triples([("a", "b", 1.0), ("j9", "n3", math.nan)])
    assert "j9" in str(err.value) and "n3" in str(err.value)
    with pytest.raises(TripleError):
        from_triples([("a", "b", math.inf)])


def test_no_explicit_zero_invariant_after_every_operation():
    rng = random.Random(1)
    a = from_triples(random_triples(rng, 40))
    b = from_triples([(r, c, -v) for r, c, v in a.triples()[:10]] + random_triples(rng, 20))
    for result in (a.add(b), a.matmul(b), a.transpose(), a.select(("a", "z"), None)):
        assert all(v != 0.0 for _, _, v in result.triples())


def test_iteration_deterministic_lexicographic():
    a = from_triples([("b", "y", 1.0), ("a", "z", 2.0), ("a", "a", 3.0), ("b", "a", 4.0)])
    assert [key for key, _ in a.items()] == [("a", "a"), ("a", "z"), ("b", "a"), ("b", "y")]


def test_accumulation_matches_dense_oracle():
    rng = random.Random(2)
    triples = random_triples(rng, 100, keys=5)  # plenty of duplicates
    ours = from_triples(triples)
    expected = dense_entries(*dense_accumulate(triples))
    assert dict(ours.items()) == pytest.approx(expected)


def test_add_identity_and_commutativity():
    rng = random.Random(3)
    a = from_triples(random_triples(rng, 30))
    b = from_triples(random_triples(rng, 30))
    assert a.add(AssociativeArray.empty()) == a
    assert a.add(b) == b.add(a)


def test_add_matches_dense_oracle():
    rng = random.Random(4)
    ta = random_triples(rng, 60, keys=20)
    tb = random_triples(rng, 60, keys=20)
    ours = elementwise_add(from_triples(ta), from_triples(tb))
    assert dict(ours.items()) == pytest.approx(dense_add(ta, tb))


def test_matmul_hand_example():
    a = from_triples([("r1", "c1", 2.0), ("r1", "c2", 3.0)])
    b = from_triples([("c1", "x", 4.0)])
    assert dict(matmul(a, b).items()) == {("r1", "x"): 8.0}


def test_matmul_matches_dense_oracle():
    rng = random.Random(10)
    for _ in range(30):
        ta = random_triples(rng, 50, keys=7)
        tb = random_triples(rng, 50, keys=7)
        got = dict(matmul(from_triples(ta), from_triples(tb)).items())
        want = dense_matmul(ta, tb)
        assert set(got) == set(want)
        assert got == pytest.approx(want)


def test_matmul_empty_annihilates():
    a = from_triples([("r", "c", 1.5)])
    assert matmul(a, AssociativeArray.empty()) == AssociativeArray.empty()


def test_matmul_transpose_identity():
    rng = random.Random(5)
    a = from_triples(random_triples(rng, 40, keys=6))
    b = from_triples(random_triples(rng, 40, keys=6))
    lhs = transpose(matmul(a, b))
    rhs = matmul(transpose(b), transpose(a))
    assert dict(lhs.items()) == pytest.approx(dict(rhs.items()))


def test_transpose_involution_and_count():
    rng = random.Random(6)
    a = from_triples(random_triples(rng, 50))
    assert transpose(transpose(a)) == a
    assert len(transpose(a)) == len(a)
    assert transpose(AssociativeArray.empty()) == AssociativeArray.empty()


def test_select_identity_and_disjoint():
    rng = random.Random(7)
    a = from_triples(random_triples(rng, 30))
    assert select(a, None, None) == a
    assert len(select(a, {"zz-nope"}, None)) == 0


def test_select_inverted_interval_errors():
    a = from_triples([("a", "b", 1.0)])
    with pytest.raises(RangeError):
        select(a, ("z", "a"), None)


def test_select_matches_scan_oracle():
    rng = random.Random(8)
    for _ in range(50):
        triples = random_triples(rng, 40, keys=9)
        lo, hi = sorted((f"r{rng.randrange(9)}", f"r{rng.randrange(9)}"))
        cols = {f"c{rng.randrange(9)}" for _ in range(3)}
        ours = select(from_triples(triples), (lo, hi), cols)
        assert dict(ours.items()) == pytest.approx(scan_select(triples, (lo, hi), cols))


def test_select_composes_by_range_intersection():
    rng = random.Random(9)
    a = from_triples(random_triples(rng, 60, keys=9))
    twice = select(select(a, ("r1", "r7"), None), ("r3", "r9"), None)
    once = select(a, ("r3", "r7"), None)
    assert twice == once


def test_csv_round_trip_with_quoted_keys():
    a = from_triples([("job,1", 'node "a"', 2.5), ("j2", "n2", -1.25)])
    again = AssociativeArray.from_csv(a.to_csv())
    assert again == a


def test_matmul_correlates_jobs_to_racks():
    # jobs x nodes times nodes x racks lands jobs on racks
    jobs_nodes = from_triples([("job1", "n1", 1.0), ("job1", "n2", 1.0), ("job2", "n2", 1.0)])
    nodes_racks = from_triples([("n1", "r01", 1.0), ("n2", "r01", 1.0)])
    jr = matmul(jobs_nodes, nodes_racks)
    assert dict(jr.items()) == {("job1", "r01"): 2.0, ("job2", "r01"): 1.0}

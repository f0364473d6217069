import pickle

import numpy as np
import pytest

from ssbm import (
    ParseError,
    ProblemInstance,
    ValidationError,
    gen_circulant,
    gen_complete,
    j_upper_bound,
    load_instance,
    save_instance,
)
from ssbm.problems import parse_instance


def test_circulant_ring16(ring16):
    assert ring16.n == 16
    assert ring16.num_edges == 24
    assert ring16.n_antiferro == 24
    assert set(ring16.degree.tolist()) == {3}
    chords = [(i, j) for i, j, _ in ring16.edges() if j - i == 8]
    assert len(chords) == 8


def test_circulant_four_cycle(c4):
    assert c4.edges() == [(0, 1, 1.0), (0, 3, 1.0), (1, 2, 1.0), (2, 3, 1.0)]


def test_circulant_fifty():
    assert gen_circulant(50, [1, 25]).num_edges == 75


def test_circulant_ferro_sign():
    inst = gen_circulant(6, [1], sign=-1)
    assert inst.n_ferro == 6 and inst.n_antiferro == 0


@pytest.mark.parametrize("n, offsets", [(4, [3]), (10, [0]), (10, [6]), (2, [1]), (8, [])])
def test_circulant_rejects(n, offsets):
    with pytest.raises(ValidationError):
        gen_circulant(n, offsets)


def test_complete_counts():
    inst = gen_complete(50, "random-pm1", seed=5)
    assert inst.num_edges == 1225
    assert inst.n_ferro > 0 and inst.n_antiferro > 0
    assert inst.is_complete


def test_complete_large_count():
    assert gen_complete(2000, "random-pm1", seed=7).num_edges == 1_999_000


def test_complete_all_af(k3):
    assert k3.edges() == [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]


def test_complete_seeded():
    a = gen_complete(40, "random-pm1", seed=3)
    assert a == gen_complete(40, "random-pm1", seed=3)
    assert a != gen_complete(40, "random-pm1", seed=4)


def test_complete_rejects_mode():
    with pytest.raises(ValidationError):
        gen_complete(5, "gaussian")


def test_j_upper_bound():
    assert j_upper_bound(gen_complete(3, "all-af")) == 0.5
    assert j_upper_bound(gen_circulant(16, [1, 8])) == pytest.approx(1 / 3)
    bound = j_upper_bound(gen_complete(2000, "random-pm1", seed=7))
    assert bound == pytest.approx(5.0025e-4, rel=1e-4)
    assert 4.96e-4 < bound


def test_j_upper_bound_edgeless():
    with pytest.raises(ValidationError):
        j_upper_bound(ProblemInstance(3, [], [], []))


def test_instance_normalizes_and_sorts():
    inst = ProblemInstance(4, [3, 2, 1], [0, 0, 0], [1, -1, 1])
    assert inst.edges() == [(0, 1, 1.0), (0, 2, -1.0), (0, 3, 1.0)]


def test_instance_is_read_only(k3):
    with pytest.raises(ValueError):
        k3.weights[0] = 5


@pytest.mark.parametrize(
    "rows, cols, w",
    [([0], [0], [1]), ([0], [5], [1]), ([0, 1], [1, 0], [1, 1]), ([0], [1], [0]), ([0], [1], [np.inf])],
)
def test_instance_rejects(rows, cols, w):
    with pytest.raises(ValidationError):
        ProblemInstance(3, rows, cols, w)


def test_dense_and_csr_agree():
    inst = gen_complete(7, "random-pm1", seed=1)
    w = inst.dense()
    assert np.array_equal(w, w.T) and np.all(np.diag(w) == 0)
    indptr, idx, wts = inst.csr()
    rebuilt = np.zeros_like(w)
    for i in range(inst.n):
        rebuilt[i, idx[indptr[i] : indptr[i + 1]]] = wts[indptr[i] : indptr[i + 1]]
    assert np.array_equal(rebuilt, w)


def test_prefers_dense():
    assert gen_complete(30, "random-pm1").prefers_dense()
    assert not gen_circulant(1000, [1, 7]).prefers_dense()
    assert not ProblemInstance(3, [0], [1], [0.5]).prefers_dense()


def test_pickle_drops_cache(k3):
    _ = k3.degree
    clone = pickle.loads(pickle.dumps(k3))
    assert clone == k3 and clone._cache == {}


def test_parse_k3():
    inst = parse_instance("3 3\n1 2 1\n1 3 1\n2 3 1\n")
    assert inst == gen_complete(3, "all-af")


def test_parse_comments_and_reversed_pairs():
    inst = parse_instance("# comment\n\n3 2\n2 1 -1\n# mid\n3 2 1\n")
    assert inst.edges() == [(0, 1, -1.0), (1, 2, 1.0)]


@pytest.mark.parametrize(
    "text, line",
    [
        ("3 1\n1 2 0\n", 2),
        ("3 1\n1 1 1\n", 2),
        ("3 1\n1 4 1\n", 2),
        ("3 2\n1 2 1\n2 1 1\n", 3),
        ("3 1\n1 2 x\n", 2),
        ("3\n", 1),
        ("3 1\n1 2\n", 2),
    ],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as exc:
        parse_instance(text)
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_parse_count_mismatch():
    with pytest.raises(ParseError):
        parse_instance("3 2\n1 2 1\n")
    with pytest.raises(ParseError):
        parse_instance("")


def test_round_trip(tmp_path):
    inst = gen_complete(50, "random-pm1", seed=11)
    path = tmp_path / "k50.txt"
    save_instance(inst, path)
    again = load_instance(path)
    assert again == inst
    assert again.fingerprint() == inst.fingerprint()


def test_round_trip_fractional(tmp_path):
    inst = ProblemInstance(3, [0, 1], [1, 2], [0.25, -1.5])
    save_instance(inst, tmp_path / "f.txt")
    assert load_instance(tmp_path / "f.txt") == inst


def test_fingerprint_sensitivity():
    a = gen_circulant(8, [1])
    b = gen_circulant(8, [1], sign=-1)
    assert a.fingerprint() != b.fingerprint()


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_complete_sign_counts_binomial(seed):
    inst = gen_complete(300, "random-pm1", seed=seed)
    m = inst.num_edges
    assert abs(inst.n_antiferro - m / 2) <= 6 * np.sqrt(m / 4)

import random

from fractions import Fraction

from sfpas import _kernels
from sfpas._kernels import pure
from sfpas.linalg import CMatrix, rank_exact


def random_matrix(rng, lo=-9, hi=9, max_dim=6):
    rows = rng.randint(1, max_dim)
    cols = rng.randint(1, max_dim)
    return [[rng.randint(lo, hi) for _ in range(cols)] for _ in range(rows)]


def test_selected_lane_exists():
    assert _kernels.IMPLEMENTATION in ("pure", "compiled")


def test_rank_agrees_with_pure_lane():
    rng = random.Random(17)
    for _ in range(300):
        m = random_matrix(rng)
        assert _kernels.rank_int(m) == pure.rank_int(m)


def test_det_agrees_with_pure_lane():
    rng = random.Random(19)
    for _ in range(300):
        n = rng.randint(1, 6)
        m = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(n)]
        assert _kernels.det_int(m) == pure.det_int(m)


def test_big_entries_use_exact_arithmetic():
    # far beyond int64: the compiled lane must delegate, not overflow
    big = 10 ** 30
    m = [[big, 1], [1, big]]
    assert _kernels.det_int(m) == big * big - 1
    assert _kernels.rank_int(m) == 2
    assert _kernels.rank_int([[big, big], [big, big]]) == 1


def test_rank_matches_exact_field_rank():
    rng = random.Random(23)
    for _ in range(100):
        m = random_matrix(rng, max_dim=5)
        exact = rank_exact(CMatrix([[Fraction(x) for x in row] for row in m]))
        assert _kernels.rank_int(m) == exact


def test_det_known_values():
    assert _kernels.det_int([]) == 1
    assert _kernels.det_int([[5]]) == 5
    assert _kernels.det_int([[1, 2], [3, 4]]) == -2
    assert _kernels.det_int([[0, 1], [1, 0]]) == -1
    assert _kernels.det_int([[1, 2, 3], [4, 5, 6], [7, 8, 9]]) == 0


def test_rank_empty_and_degenerate():
    assert _kernels.rank_int([]) == 0
    assert _kernels.rank_int([[0, 0], [0, 0]]) == 0
    assert _kernels.rank_int([[0, 3]]) == 1

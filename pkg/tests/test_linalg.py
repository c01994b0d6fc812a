import random

import pytest

from hodef.linalg import (Matrix, Echelon, Solver, rank_kernel_image, rank_of,
                          quotient_space, solve, Quotient, QuotientError,
                          InvalidBasisError, vec_from_list)
from hodef.rational import rat, ONE


def test_rank_kernel_identity():
    rank, kernel, image, _ = rank_kernel_image(Matrix.identity(2))
    assert rank == 2
    assert kernel.cols == 0
    assert image.cols == 2


def test_rank_kernel_zero():
    rank, kernel, image, _ = rank_kernel_image(Matrix.zero(2, 2))
    assert rank == 0
    assert kernel.cols == 2
    assert image.cols == 0


def test_rank_kernel_hand_example():
    # [[1,2],[2,4]]: rank 1, kernel spanned by (2,-1) (Gaussian elimination by hand)
    m = Matrix.from_dense([[1, 2], [2, 4]])
    rank, kernel, image, pre = rank_kernel_image(m)
    assert rank == 1
    assert kernel.cols == 1
    k = kernel.column(0)
    # proportional to (2, -1)
    assert k[0] * rat(-1) == k[1] * rat(2)
    assert not m.apply(k)


def test_kernel_image_certificates():
    random.seed(11)
    for _ in range(25):
        rows, cols = random.randint(1, 7), random.randint(1, 7)
        m = Matrix.from_entries(rows, cols,
                                ((random.randrange(rows), random.randrange(cols),
                                  rat(random.randint(-3, 3))) for _ in range(rows * 2)))
        rank, kernel, image, pre = rank_kernel_image(m)
        assert rank + kernel.cols == cols
        for j in range(kernel.cols):
            assert not m.apply(kernel.column(j))
        for j in range(image.cols):
            assert m.apply(pre.column(j)) == image.column(j)
        assert rank_of(image) == rank


def test_solver():
    m = Matrix.from_dense([[1, 2], [0, 1], [1, 0]])
    b = m.apply({0: rat(3), 1: rat(-2)})
    x = solve(m, b)
    assert m.apply(x) == b
    assert solve(m, {0: ONE}) is None


def test_quotient_space_trivial_and_full():
    dim, proj, sec = quotient_space(3, Matrix.zero(3, 0))
    assert dim == 3
    assert (proj @ sec) == Matrix.identity(3)
    dim, proj, sec = quotient_space(3, Matrix.identity(3))
    assert dim == 0


def test_quotient_space_line():
    # ambient dim 2, subspace span{(1,1)}: quotient dim 1, projection kills (1,1)
    sub = Matrix.from_dense([[1], [1]])
    dim, proj, sec = quotient_space(2, sub)
    assert dim == 1
    assert not proj.apply({0: ONE, 1: ONE})
    assert (proj @ sec) == Matrix.identity(1)


def test_quotient_space_rejects_dependent_basis():
    sub = Matrix.from_dense([[1, 2], [1, 2]])
    with pytest.raises(InvalidBasisError):
        quotient_space(2, sub)


def test_relation_quotient_with_model():
    # Q^4 / span{e0-e1, e1-e2}: model map sums the first three coordinates
    gens = [vec_from_list([rat(1), rat(-1), 0, 0]),
            vec_from_list([0, rat(1), rat(-1), 0])]
    model = Matrix.from_dense([[1, 1, 1, 0], [0, 0, 0, 1]])
    q = Quotient(4, gens, model=model)
    assert q.dim == 2
    assert q.project({0: ONE}) == q.project({2: ONE})
    # operator permuting e0<->e2 descends to the identity
    op = Matrix.from_dense([[0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1]])
    m = q.descend_operator(op)
    assert m == Matrix.identity(2)


def test_relation_quotient_model_rejects_escaping_generator():
    gens = [vec_from_list([rat(1), 0, 0, 0])]
    model = Matrix.from_dense([[1, 1, 1, 0], [0, 0, 0, 1]])
    with pytest.raises(QuotientError):
        Quotient(4, gens, model=model)


def test_relation_quotient_plain():
    gens = [vec_from_list([rat(1), rat(-1), 0])]
    q = Quotient(3, gens)
    assert q.dim == 2
    assert q.project({0: ONE}) == q.project({1: ONE})
    assert (q.projection @ q.section) == Matrix.identity(2)


def test_matrix_algebra():
    a = Matrix.from_dense([[1, 2], [3, 4]])
    b = Matrix.from_dense([[0, 1], [1, 0]])
    assert (a @ b).to_dense() == Matrix.from_dense([[2, 1], [4, 3]]).to_dense()
    assert (a + b - b) == a
    assert a.transpose().transpose() == a
    assert a.entry(1, 0) == rat(3)

import random

import pytest

from hodef import algebra as alg
from hodef.algebra import (preset_catalog, validate_algebra, opposite,
                           tensor_algebra, enveloping, multiplication_kernel,
                           right_module_freeness_check, regular_bimodule,
                           outer_bimodule, from_structure_constants,
                           AlgebraError)
from hodef.linalg import Matrix, Echelon
from hodef.rational import rat, ONE


def test_rationals_valid():
    a = preset_catalog("rationals")
    assert a.dim == 1
    assert validate_algebra(a).ok


def test_bad_unit_reported_not_raised():
    # dim-2 table with e1·e1 = e0 but unit claimed e1
    mul = [[{0: ONE}, {1: ONE}], [{1: ONE}, {0: ONE}]]
    a = alg.AssocAlgebra(["a", "b"], mul, {1: ONE}, check=False)
    report = validate_algebra(a)
    assert report.unit_failures
    assert not report.ok


def test_matrix_algebra_valid_all_64_triples():
    a = preset_catalog("matrix", 2)
    assert a.dim == 4
    assert validate_algebra(a).ok
    # E11·E12 = E12
    assert a.product({0: ONE}, {1: ONE}) == {1: ONE}


def test_exterior_square_zero_anticommute():
    a = preset_catalog("exterior", 2)
    assert a.dim == 4
    x, y = {1: ONE}, {2: ONE}
    assert a.product(x, x) == {}
    assert a.product(x, y) == {3: ONE}
    assert a.product(y, x) == {3: rat(-1)}


def test_group_algebra():
    a = preset_catalog("group_algebra", 3)
    assert a.product({1: ONE}, {2: ONE}) == {0: ONE}


def test_unknown_preset():
    with pytest.raises(AlgebraError):
        preset_catalog("nope")


def test_opposite_involution_and_commutative_fixed():
    a = preset_catalog("truncated_poly", 3)
    assert opposite(a).structure_tensor_equal(a)
    b = preset_catalog("matrix", 2)
    assert opposite(opposite(b)).structure_tensor_equal(b)


def test_tensor_algebra_product():
    a = preset_catalog("truncated_poly", 2)
    b = preset_catalog("truncated_poly", 2)
    t = tensor_algebra(a, b)
    assert t.dim == 4
    # (x⊗1)·(1⊗y) = x⊗y: indices: x⊗1 = (1,0) -> 2; 1⊗y = (0,1) -> 1; x⊗y -> 3
    assert t.product({2: ONE}, {1: ONE}) == {3: ONE}


def test_enveloping_of_rationals():
    e = enveloping(preset_catalog("rationals"))
    assert e.dim == 1


def test_enveloping_acts_on_regular_bimodule():
    a = preset_catalog("truncated_poly", 2)
    regular_bimodule(a).validate()
    outer_bimodule(a).validate()


def test_multiplication_kernel_dims():
    assert multiplication_kernel(preset_catalog("rationals")).dim == 0
    I2 = multiplication_kernel(preset_catalog("truncated_poly", 2))
    assert I2.dim == 2
    assert multiplication_kernel(preset_catalog("matrix", 2)).dim == 12
    # x⊗1 - 1⊗x lies in I for dual numbers (indices: x⊗1 -> 1*2+0=2, 1⊗x -> 1)
    ech = Echelon()
    for j in range(I2.inclusion.cols):
        ech.add(I2.inclusion.column(j))
    assert ech.contains({2: ONE, 1: rat(-1)})


def test_multiplication_kernel_dim_formula_random_and_catalog():
    random.seed(5)
    cases = [preset_catalog("truncated_poly", 3), preset_catalog("exterior", 2),
             preset_catalog("group_algebra", 4), preset_catalog("matrix", 2)]
    for a in cases:
        assert multiplication_kernel(a).dim == a.dim ** 2 - a.dim


def test_freeness_check():
    ok, gens = right_module_freeness_check(
        multiplication_kernel(preset_catalog("truncated_poly", 2)))
    assert ok and gens.cols == 1
    ok, gens = right_module_freeness_check(
        multiplication_kernel(preset_catalog("rationals")))
    assert ok and gens.cols == 0
    ok, gens = right_module_freeness_check(
        multiplication_kernel(preset_catalog("truncated_poly", 3)))
    assert ok and gens.cols == 2


def test_generating_sets():
    a = preset_catalog("exterior", 2)
    gens = a.generating_set()
    # the two degree-one generators suffice
    assert set(gens) == {1, 2}
    b = preset_catalog("matrix", 2)
    span = Echelon()
    span.add(dict(b.unit))
    gset = b.generating_set()
    b._generators = None
    assert gset == b.generating_set()


def test_random_small_tables_accepted_iff_associative():
    # commutative group algebras of random cyclic groups pass; a corrupted
    # table must be caught
    a = preset_catalog("group_algebra", 4)
    entries = [(i, j, k, c) for i in range(4) for j in range(4)
               for k, c in a.mul[i][j].items()]
    entries.append((1, 1, 3, rat(1)))   # corrupt
    with pytest.raises(AlgebraError):
        from_structure_constants(a.labels, entries, a.unit)

# tests/test_exactalg.py
import numpy as np
import pytest
from sympy import QQ

from exactalg import (
    BiForm,
    ParametricEvaluator,
    PolyMatrix,
    determinant,
    det_mod_p,
    dump_matrix,
    generic_rank,
    interpolate_mod_p,
    kernel_basis,
    kernel_mod_p,
    kron_identity,
    load_matrix,
    minor_gcd,
    points_of,
    poly_ring,
    prune_units,
    rank,
    rank_mod_p,
    roots_mod_p,
    smith_normal_form,
    valuation,
)
from utils.errors import ConfidenceError, SchemaError


def test_rank_trivial_cases():
    assert rank(PolyMatrix.identity(2)) == 2
    assert rank(PolyMatrix.zeros(3, 5)) == 0
    assert rank(PolyMatrix.from_rows([[1, 2], [2, 4]])) == 1


def test_kernel_basis():
    assert kernel_basis(PolyMatrix.identity(3)) == []
    (v,) = kernel_basis(PolyMatrix.from_rows([[1, 1]]))
    assert v[0] == -v[1] and v[0] != 0


def test_kernel_vector_is_annihilated():
    m = PolyMatrix.from_rows([[1, 2, 3], [2, 4, 6]])
    ker = kernel_basis(m)
    assert len(ker) == 2
    for v in ker:
        col = PolyMatrix.from_rows([[x] for x in v])
        assert (m @ col).is_zero()


def test_determinant_over_polynomials():
    R, (t,) = poly_ring("t")
    m = PolyMatrix.from_rows([[t, 1], [0, t]], R.to_domain())
    assert determinant(m) == t**2


def test_smith_form_diagonal_one_t():
    R, (t,) = poly_ring("t")
    snf = smith_normal_form(PolyMatrix.from_rows([[1, 0], [0, t]], R.to_domain()))
    assert snf.invariants == (R.one, t)


def test_smith_form_keeps_divisibility_chain():
    R, (t,) = poly_ring("t")
    m = PolyMatrix.from_rows([[t, 0], [0, t**2]], R.to_domain())
    assert smith_normal_form(m).invariants == (t, t**2)


def test_smith_form_merges_coprime_factors():
    R, (t,) = poly_ring("t")
    m = PolyMatrix.from_rows([[t, 0], [0, t + 1]], R.to_domain())
    snf = smith_normal_form(m)
    assert snf.invariants == (R.one, t**2 + t)
    assert snf.left @ m @ snf.right == snf.diagonal


def test_smith_form_rejects_multivariate():
    R, (a, b) = poly_ring("a,b")
    with pytest.raises(SchemaError):
        smith_normal_form(PolyMatrix.from_rows([[a, b]], R.to_domain()))


def test_valuation_and_points():
    R, (t,) = poly_ring("t")
    assert valuation(t**3 * (t + 1), t) == 3
    pts = points_of(t**2 - 1)
    assert sorted(p.root for p in pts) == [-1, 1]
    assert all(p.degree == 1 for p in pts)
    (irr,) = points_of(t**2 + 1)
    assert irr.degree == 2 and irr.root is None


def test_minor_gcd():
    assert minor_gcd(PolyMatrix.identity(2), 2) == QQ.one
    R, (t,) = poly_ring("t")
    m = PolyMatrix.from_rows([[t, 0], [0, t]], R.to_domain())
    assert minor_gcd(m, 1) == t
    assert minor_gcd(m, 2) == t**2


def test_prune_units_schur_complement():
    pruned, removed = prune_units(PolyMatrix.from_rows([[1, 2], [3, 4]]), limit=1)
    assert removed == [(0, 0)]
    assert pruned.shape == (1, 1)
    assert pruned.entry(0, 0) == -2


def test_generic_rank_small_examples():
    R, (a, b) = poly_ring("a,b")
    D = R.to_domain()
    assert generic_rank(PolyMatrix.from_rows([[a]], D)).rank == 1
    assert generic_rank(PolyMatrix.from_rows([[a, 0], [0, a * b - 1]], D)).rank == 2
    assert generic_rank(PolyMatrix.from_rows([[a, b], [a, b]], D)).rank == 1


def test_generic_rank_refuses_small_prime():
    R, (a, b) = poly_ring("a,b")
    m = PolyMatrix.from_rows([[a, b], [b, a]], R.to_domain())
    with pytest.raises(ConfidenceError):
        generic_rank(m, prime=3)


def test_generic_rank_names_its_failure_formula():
    R, (a, b) = poly_ring("a,b")
    res = generic_rank(PolyMatrix.from_rows([[a, b], [b, a]], R.to_domain()), trials=3, prime=101)
    assert res.degree_bound == 2
    assert res.failure_formula == "(D/p)^trials"
    assert res.failure_bound == pytest.approx((2 / 101) ** 3)
    assert res.to_dict()["failure_formula"] == "(D/p)^trials"
    exact = generic_rank(PolyMatrix.from_rows([[1, 2], [2, 4]]))
    assert (exact.rank, exact.failure_formula, exact.failure_bound) == (1, "exact", 0.0)


def test_mod_p_kernels():
    a = np.array([[1, 2], [3, 4]], dtype=np.int64)
    assert det_mod_p(a, 7) == 5
    assert rank_mod_p(a, 7) == 2
    b = np.array([[1, 2], [2, 4]], dtype=np.int64)
    (v,) = kernel_mod_p(b, 7)
    assert not np.any((b @ v) % 7)


def test_parametric_evaluator_and_pencil():
    R, gens = poly_ring("a,b,c,d")
    a, b, c, d = gens
    ev = ParametricEvaluator(PolyMatrix.from_rows([[a, b], [c, d]], R.to_domain()), 101)
    assert ev((1, 2, 3, 4)).tolist() == [[1, 2], [3, 4]]
    g0, g1 = ev.pencil((1, 2, 3, 4), (1, 1, 1, 1))
    assert g0.tolist() == [[1, 2], [3, 4]]
    assert g1.tolist() == [[1, 1], [1, 1]]


def test_interpolation_and_roots():
    # x^2 + 1 through (0,1), (1,2), (2,5) over GF(7)
    assert interpolate_mod_p([0, 1, 2], [1, 2, 5], 7) == [1, 0, 1]
    assert roots_mod_p([1, 0, 6], 7) == [1, 6]
    assert roots_mod_p([5], 7) == []


def test_biform_arithmetic():
    f = BiForm.linear(1, 1) * BiForm.linear(1, -1)
    assert f.degree == 2
    assert f.coeffs == (1, 0, -1)
    assert f.evaluate(2, 1) == 3
    with pytest.raises(SchemaError):
        BiForm(2, (1, 2))


def test_kron_identity_layout():
    m = PolyMatrix.from_rows([[1, 2]])
    k = kron_identity(m, 2)
    assert k.shape == (2, 4)
    assert k.to_lists() == [[1, 0, 2, 0], [0, 1, 0, 2]]


def test_matrix_text_format():
    text = "2 2 QQ[t]\nt\n0\n1\nt^2\n"
    m = load_matrix(text)
    assert m.shape == (2, 2)
    assert dump_matrix(m) == text


def test_matrix_text_format_rejects_bad_input():
    with pytest.raises(SchemaError):
        load_matrix("2 2 QQ\n1\n2\n3\n")
    with pytest.raises(SchemaError):
        load_matrix("1 1 ZZ\n1\n")


def _random_qt_matrices(count: int, seed: int):
    """Small matrices over Q[t], some with a dependent last row."""
    R, (t,) = poly_ring("t")
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n, c = (int(x) for x in rng.integers(1, 7, size=2))
        rows = []
        for _ in range(n):
            row = []
            for _ in range(c):
                coeffs = rng.integers(-3, 4, size=int(rng.integers(1, 4)))
                row.append(sum((int(a) * t**e for e, a in enumerate(coeffs)), R.zero))
            rows.append(row)
        if n > 1 and rng.random() < 0.25:
            q = int(rng.integers(-2, 3)) + t
            rows[-1] = [x + q * y for x, y in zip(rows[0], rows[1 % (n - 1)])]
        yield R, PolyMatrix.from_rows(rows, R.to_domain(), cols=c)


def test_smith_form_on_random_matrices():
    for R, m in _random_qt_matrices(500, 17):
        snf = smith_normal_form(m)
        assert snf.left @ m @ snf.right == snf.diagonal
        assert determinant(snf.left).is_ground and determinant(snf.left)
        assert determinant(snf.right).is_ground and determinant(snf.right)
        assert all(d.LC == 1 for d in snf.invariants)
        assert all(not b.rem(a) for a, b in zip(snf.invariants, snf.invariants[1:]))
        assert snf.rank == rank(m)
        product = R.one
        for k in range(1, min(m.shape) + 1):
            if k <= snf.rank:
                product = product * snf.invariants[k - 1]
                assert minor_gcd(m, k) == product
            else:
                assert not minor_gcd(m, k)

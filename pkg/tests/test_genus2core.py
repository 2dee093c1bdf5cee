# tests/test_genus2core.py
import pytest

from ellbundles import TauContext
from genus2core import (
    A6_tilde,
    AbstractLine,
    Genus2FiveTuple,
    LocalFiberModel,
    a6_elliptic,
    admissibility_g2,
    build_A_even,
    check_branch_avoids_P,
    check_sigma2,
    chi_deg_Vn,
    conic_singularity,
    godeaux_check,
    horikawa_defect,
    horikawa_type,
    invariants_g2,
    local_torsion_oracle,
    minimal_model_bound,
    rank_Vn,
    rank_Vn_pm,
    relative_invariants,
    solve_tuple_degrees,
    torsion_structure_g2,
    v3_plus,
)
from p1bundles import SplitBundle
from schemas import TupleFile
from utils.errors import InconsistencyError, OutOfScopeError, SchemaError


def _godeaux_tuple():
    return TupleFile.model_validate({
        "kind": "genus2",
        "v1": {"degrees": [1, 1]},
        "tau": {"degree": 5},
        "xi": {
            "v2_degrees": [4, 4, 3],
            "sigma2": [["t0^2", "0", "0"], ["0", "t1^2", "0"], ["0", "0", "t0 - t1"]],
        },
    }).to_tuple()


# ========================================
# numerics
# ========================================
def test_invariants_of_godeaux_data():
    t = Genus2FiveTuple(base_genus=0, v1_degree=2, tau_degree=5)
    assert invariants_g2(t) == (1, 1)
    assert horikawa_defect(0, 1, 1) == 5


@pytest.mark.parametrize("b,chi,ksq,expected", [(1, 1, 3, (1, 1)), (1, 1, 2, (1, 0)), (0, 1, 1, (2, 5))])
def test_solve_tuple_degrees(b, chi, ksq, expected):
    assert solve_tuple_degrees(b, chi, ksq) == expected


def test_solve_tuple_degrees_rejects_negative_tau():
    with pytest.raises(InconsistencyError):
        solve_tuple_degrees(1, 2, 1)


def test_invariants_round_trip_through_degrees():
    for b, deg_v1, deg_tau in [(0, 3, 2), (1, 1, 1), (2, 4, 0)]:
        t = Genus2FiveTuple(base_genus=b, v1_degree=deg_v1, tau_degree=deg_tau)
        chi, ksq = invariants_g2(t)
        assert solve_tuple_degrees(b, chi, ksq) == (deg_v1, deg_tau)
        assert horikawa_defect(b, chi, ksq) == deg_tau


def test_ranks():
    assert rank_Vn(1) == 2
    assert rank_Vn(3) == 5
    assert rank_Vn_pm(2) == (3, 0)
    assert rank_Vn_pm(3) == (1, 4)
    for n in range(2, 8):
        assert sum(rank_Vn_pm(n)) == rank_Vn(n)
    assert [minimal_model_bound(g) for g in (2, 3, 4)] == [1, 9, 25]
    with pytest.raises(SchemaError):
        rank_Vn_pm(1)


def test_relative_invariants_and_v3_degree():
    assert relative_invariants(1, 1, 0) == (9, 2)
    assert chi_deg_Vn(3, 2, 0, 9, 2)[1] == 29


def test_v3_plus_depends_on_base():
    assert v3_plus(Genus2FiveTuple(0, 2, 5)) == SplitBundle((7,))
    assert v3_plus(Genus2FiveTuple(1, 1, 1)).degree == 2
    assert v3_plus(Genus2FiveTuple(3, 4, 1)) == AbstractLine(5)


def test_godeaux_check():
    assert godeaux_check() == {
        "deg_v1": 2,
        "deg_tau": 5,
        "v3_plus": "O(7)",
        "h0_v3_plus_minus_7": 1,
        "ksq_rel": 9,
        "chi_rel": 2,
        "deg_v3": 29,
        "deg_v3_minus": 22,
    }


def test_tuple_validation():
    with pytest.raises(InconsistencyError):
        Genus2FiveTuple(0, 1, -1)
    with pytest.raises(InconsistencyError):
        Genus2FiveTuple(0, 1, 3, local_models=(LocalFiberModel(1), LocalFiberModel(1)))
    with pytest.raises(SchemaError):
        LocalFiberModel(0)


# ========================================
# torsion sheaves
# ========================================
def test_torsion_degrees():
    assert torsion_structure_g2(4, 5).degree == 20
    assert torsion_structure_g2(5, 1).degree == 6
    assert torsion_structure_g2(2, 3).summands == ((1, 1),)
    assert torsion_structure_g2(3, 3).parity == "-"
    assert torsion_structure_g2(6, 0).degree == 0


def test_torsion_local_multiplicities_must_add_up():
    with pytest.raises(InconsistencyError):
        torsion_structure_g2(3, 4, [1, 2])


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("s", [1, 2])
def test_local_oracle_matches_structure(n, s):
    ts = torsion_structure_g2(n, s, [s])
    assert local_torsion_oracle(n, s) == ts.local_valuations(s)


@pytest.mark.parametrize("n", [2, 3])
def test_local_oracle_with_nonzero_lambda(n):
    assert local_torsion_oracle(n, 1, lam=1) == torsion_structure_g2(n, 1).local_valuations(1)


# ========================================
# sigma2, A and A6~
# ========================================
def test_godeaux_sigma2_is_admissible():
    t = _godeaux_tuple()
    an = check_sigma2(t)
    assert an.torsion.length == 5
    conds = {c.name: c.status for c in admissibility_g2(t)}
    assert conds == {"i": "verified", "ii": "out-of-scope", "iii": "out-of-scope"}


def test_a_even_ranks():
    t = _godeaux_tuple()
    assert build_A_even(t, 2).rank == 5
    assert build_A_even(t, 3).rank == 7
    assert build_A_even(t, 3).cokernel.is_locally_free


def test_a6_tilde_on_p1():
    res = A6_tilde(_godeaux_tuple())
    assert res.rank == 7
    assert res.degree == -11
    assert res.h0 == res.h0_range[0]


def test_a6_tilde_needs_xi():
    with pytest.raises(OutOfScopeError):
        A6_tilde(Genus2FiveTuple(0, 2, 5))
    with pytest.raises(OutOfScopeError):
        A6_tilde(Genus2FiveTuple(2, 2, 5))
    with pytest.raises(SchemaError):
        A6_tilde(Genus2FiveTuple(1, 1, 1))


@pytest.mark.parametrize(
    "pattern,tau,h0",
    [
        ((2, 3), "[0]", 5),
        ((2, 3), "L1", 5),
        ((2, 3), "L2", 4),
        ((2, 3), "general", 4),
        ((1,), "general", 2),
        ((), "general", 2),
        ((), "L1", 2),
    ],
)
def test_a6_elliptic_sections(pattern, tau, h0):
    res = a6_elliptic(pattern, TauContext.parse(tau))
    assert res.rank == 7
    assert res.h0 == h0


def test_a6_elliptic_three_torsion_tau_is_a_range():
    res = a6_elliptic((), TauContext.parse("[0]"))
    assert res.h0 is None
    assert res.h0_range == (2, 4)
    assert a6_elliptic((), TauContext.parse("M4")).h0_range == (2, 3)


# ========================================
# fibre types
# ========================================
@pytest.mark.parametrize(
    "s,lambda_zero,expected",
    [(1, False, ["I_1"]), (2, False, ["II_1"]), (4, True, ["IV_2"]), (3, True, ["III_2"]), (1, True, ["III_1", "V"])],
)
def test_horikawa_type(s, lambda_zero, expected):
    assert [str(x) for x in horikawa_type(s, lambda_zero)] == expected


def test_conic_singularity():
    assert conic_singularity(1, False).at_p == "A_3"
    assert conic_singularity(2, True).at_p == "D_4"
    assert conic_singularity(2, False, in_support=False).fibre == "smooth"
    ii = conic_singularity(2, True, double_case="ii")
    assert ii.at_p == "A_1" and ii.extra == ("A_1",)
    assert not ii.branch_must_avoid_p
    with pytest.raises(SchemaError):
        conic_singularity(2, True, double_case="iii")


def test_branch_avoids_p():
    assert check_branch_avoids_P(LocalFiberModel(1, 0, "z^2 - y^3 - x1^2*(y^2 + x1^4)"))
    assert not check_branch_avoids_P(LocalFiberModel(1, 0, "z^2 - t*y^3 - x1^6"))
    with pytest.raises(SchemaError):
        check_branch_avoids_P(LocalFiberModel(1))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_torsion_degree_formulas(n):
    for deg_tau in (1, 2, 5):
        assert torsion_structure_g2(2 * n, deg_tau).degree == n * n * deg_tau
        assert torsion_structure_g2(2 * n + 1, deg_tau).degree == n * (n + 1) * deg_tau


@pytest.mark.parametrize("s", range(1, 9))
def test_horikawa_type_is_total(s):
    for lambda_zero in (True, False):
        types = horikawa_type(s, lambda_zero)
        assert len(types) == (2 if (s, lambda_zero) == (1, True) else 1)

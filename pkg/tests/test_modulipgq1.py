# tests/test_modulipgq1.py
import pytest

from ellbundles import TauContext
from modulipgq1 import (
    PARAMETER_COUNTS,
    Fprime,
    base_setup,
    classify_stratum,
    clemens_bound,
    exact_minor_gcd,
    f_ring,
    h0_A6,
    matriciona_M,
    minimalize_resolution,
    parameter_counts,
    resolution_complex,
    stratify,
    support_profile,
)
from utils.errors import InconsistencyError, SchemaError


def test_base_setup():
    s = base_setup()
    assert (s.deg_v1, s.deg_tau, s.ext_dim) == (1, 1, 3)
    assert s.s2v1.rank == 3 and s.s2v1.degree == 3
    assert s.to_dict()["ext1_dim"] == 3


# ========================================
# strata
# ========================================
@pytest.mark.parametrize(
    "pattern,tau,label",
    [
        ("none-zero", "general", "I°"),
        ("none-zero", "[0]", "I₃"),
        ("none-zero", "M4", "I₃"),
        ("f1=0", "general", "II"),
        ("f2=f3=0", "L2", "III"),
    ],
)
def test_classify_stratum(pattern, tau, label):
    assert classify_stratum(pattern, tau).label == label


def test_classify_stratum_rejects_all_vanishing():
    with pytest.raises(InconsistencyError):
        classify_stratum("f1=f2=f3=0", "general")


@pytest.mark.parametrize(
    "pattern,tau,h0",
    [
        ("f2=f3=0", "[0]", 5),
        ("f2=f3=0", "L1", 5),
        ("f2=f3=0", "L2", 4),
        ("f2=f3=0", "general", 4),
        ("f1=0", "general", 2),
        ("none-zero", "general", 2),
        ("none-zero", "L1", 2),
    ],
)
def test_h0_a6_per_stratum(pattern, tau, h0):
    rep = h0_A6(classify_stratum(pattern, tau))
    assert rep.h0 == h0
    assert rep.h0_range == (h0, h0)
    assert rep.delegated is None


def test_h0_a6_at_origin_is_delegated_to_sampling():
    rep = h0_A6(classify_stratum("none-zero", "[0]"))
    assert rep.h0 is None
    assert rep.h0_range == (2, 4)
    assert rep.delegated == "stratify"
    assert rep.flags["tau_is_origin"]


@pytest.mark.parametrize("tau", ["M1", "M4", "M5"])
def test_h0_a6_at_three_torsion_is_only_bounded(tau):
    rep = h0_A6(classify_stratum("none-zero", TauContext.parse(tau)))
    assert rep.label == "I₃"
    assert rep.h0 is None
    assert rep.h0_range == (2, 3)
    assert rep.delegated is None
    assert "<= 3" in rep.provenance
    assert "not computed" in rep.provenance
    assert rep.to_dict()["h0_A6"] is None
    assert rep.flags["three_tau_is_three_origin"]
    assert not rep.flags["tau_two_torsion_related"]


def test_stratum_report_dict():
    body = h0_A6(classify_stratum("f2=f3=0", "L1")).to_dict()
    assert body["stratum"] == "III"
    assert body["tau"] == "[0]+L1"
    assert body["flags"]["tau_two_torsion_related"]
    assert body["parameters"]["components"] == 2


def test_parameter_counts():
    assert PARAMETER_COUNTS["I°"].to_dict() == {
        "stratum": "I°", "B": 1, "tau": 1, "xi": 2, "w": 1, "dimension": 5, "components": 1,
    }
    assert PARAMETER_COUNTS["III"].components == 2
    assert PARAMETER_COUNTS["II"].to_dict()["dimension"] == "<= 4"
    assert clemens_bound(1, 3) == 5
    body = parameter_counts()
    assert body["clemens_bound"] == 5
    assert body["components_M_prime"] == 3


# ========================================
# M and the resolution
# ========================================
def test_matrix_M():
    R, (f0, f1, f2, f3) = f_ring()
    M = matriciona_M()
    assert M.shape == (9, 16)
    assert M.nonzero_count() == 39
    assert M.entry(0, 0) == f0
    assert M.entry(3, 4) == -f3
    assert support_profile(M, axis=0) == (4, 4, 4, 4, 4, 4, 5, 5, 5)


def test_resolution_shapes():
    res = resolution_complex()
    assert res.alpha.shape == (14, 1)
    assert res.beta.shape == (20, 14)
    assert (res.beta @ res.alpha).is_zero()


def test_minimalised_resolution_matches_M_profile():
    residual = minimalize_resolution()
    assert residual.shape == (16, 9)
    assert residual.nonzero_count() == 39
    assert support_profile(residual, axis=1) == support_profile(matriciona_M(), axis=0)


def test_fprime_shape():
    assert Fprime().shape == (18, 16)


# ========================================
# stratification
# ========================================
def test_stratify_small_run():
    rep = stratify(samples=20, seed=3, lines=2)
    assert len(rep.rows) == 20
    assert rep.generic_corank == 0
    assert rep.corank2_sightings == 0
    assert all(c >= 1 for c in rep.on_locus_coranks)
    assert rep.summary()["generic_h0"] == 2


def test_stratify_is_deterministic():
    a = stratify(samples=8, seed=11, lines=1)
    b = stratify(samples=8, seed=11, lines=1)
    c = stratify(samples=8, seed=11, lines=1, workers=2)
    assert a.to_tsv() == b.to_tsv() == c.to_tsv()


def test_stratify_single_sample():
    rep = stratify(samples=1, seed=5, lines=0)
    data = [ln for ln in rep.to_tsv().splitlines()[1:] if not ln.startswith("#")]
    assert len(data) == 1
    assert rep.to_tsv().splitlines()[0].split("\t")[0] == "seed"


@pytest.mark.parametrize("kwargs", [{"samples": 0}, {"prime": 4}, {"lines": -1}])
def test_stratify_rejects_bad_arguments(kwargs):
    with pytest.raises(SchemaError):
        stratify(**kwargs)


@pytest.mark.slow
def test_stratify_acceptance_size():
    rep = stratify(samples=1000, seed=7, lines=100)
    assert rep.generic_corank == 0
    assert rep.hypersurface_lines >= 1


@pytest.mark.slow
def test_exact_minor_gcd_is_nonconstant():
    text = exact_minor_gcd()
    assert any(v in text for v in "abcd")

# reporting.py
"""Report assembly shared by the CLI and the HTTP routers."""
from __future__ import annotations

from typing import Optional

from ellbundles import TauContext, parse_pattern
from genus2core import (
    A6_tilde,
    Genus2FiveTuple,
    a6_elliptic,
    admissibility_g2,
    chi_deg_Vn,
    check_sigma2,
    conic_singularity,
    horikawa_defect,
    horikawa_type,
    invariants_g2,
    local_torsion_oracle,
    relative_invariants,
    torsion_structure_g2,
    v3_plus,
)
from genus3core import (
    Genus3FiveTuple,
    L4_pair,
    V3_of,
    V4_tilde,
    admissibility_g3,
    canonical_image_class,
    invariants_g3,
    pg3_example,
    torsion_rank_g3,
)
from modulipgq1 import classify_stratum, h0_A6, stratify
from schemas import ConditionOut, Report, TupleFile
from utils.config import DEFAULT_LINES, DEFAULT_PRIME, DEFAULT_SAMPLES, DEFAULT_SEED
from utils.errors import FibratoError
from utils.logs import get_logger

log = get_logger("reporting")


def _bundle(x) -> object:
    if x is None:
        return None
    return x.to_dict() if hasattr(x, "to_dict") else str(x)


def _conditions(items) -> list[ConditionOut]:
    return [ConditionOut(**c.to_dict()) for c in items]


# ========================================
# 🧮 INVARIANTS
# ========================================
def invariants_report(tf: TupleFile) -> Report:
    t = tf.to_tuple()
    if isinstance(t, Genus2FiveTuple):
        return _genus2_invariants(tf, t)
    return _genus3_invariants(tf, t)


def _genus2_invariants(tf: TupleFile, t: Genus2FiveTuple) -> Report:
    b = t.base_genus
    chi, ksq = invariants_g2(t)
    ksq_rel, chi_rel = relative_invariants(ksq, chi, b)
    torsion = {
        f"T{n}": torsion_structure_g2(n, t.tau_degree, [m.s for m in t.local_models] or None).to_dict()
        for n in range(2, 7)
    }
    bundles = {"V1": _bundle(t.v1), "V3_plus": _bundle(v3_plus(t))}
    provenance = ["chi = deg V1 + (b-1)", "K^2 = 2 deg V1 + deg tau + 8(b-1)"]
    if t.sigma2 is not None:
        check_sigma2(t)
        bundles["V2"] = t.sigma2.target.to_dict()
        bundles["A6_tilde"] = A6_tilde(t).to_dict()
        provenance.append("A6~ from the cokernel of i_3 over P^1")
    _, deg_v3 = chi_deg_Vn(3, 2, b, ksq_rel, chi_rel)
    return Report(
        command="invariants",
        input=tf.model_dump(exclude_none=True),
        invariants={
            "chi": chi,
            "K2": ksq,
            "deg_v1": t.v1_degree,
            "deg_tau": t.tau_degree,
            "horikawa_defect": horikawa_defect(b, chi, ksq),
            "K2_rel": ksq_rel,
            "chi_rel": chi_rel,
            "deg_V3": deg_v3,
            "torsion": torsion,
            "two_connected_declared": t.two_connected_declared,
        },
        bundles=bundles,
        admissibility=_conditions(admissibility_g2(t)),
        provenance=provenance,
    )


def _genus3_invariants(tf: TupleFile, t: Genus3FiveTuple) -> Report:
    chi, ksq = invariants_g3(t)
    L4, L4p = L4_pair(t)
    bundles = {"V1": _bundle(t.v1), "L4": _bundle(L4), "L4_prime": _bundle(L4p)}
    provenance = ["chi = deg V1 + 2(b-1)", "K^2 = 3 deg V1 + deg tau + 16(b-1)"]
    if t.sigma2 is not None:
        bundles["V2"] = t.sigma2.target.to_dict()
        bundles["V3"] = V3_of(t).to_dict()
        bundles["V4_tilde"] = V4_tilde(t).to_dict()
        provenance.append("V3 and V4~ from explicit cokernels over P^1")
    return Report(
        command="invariants",
        input=tf.model_dump(exclude_none=True),
        invariants={
            "chi": chi,
            "K2": ksq,
            "deg_v1": t.v1_degree,
            "deg_tau": t.tau_degree,
            "canonical_class": canonical_image_class(t).to_dict(),
            "torsion_ranks": {f"T{n}": torsion_rank_g3(n) for n in range(2, 6)},
            "two_connected_declared": t.two_connected_declared,
        },
        bundles=bundles,
        admissibility=_conditions(admissibility_g3(t)),
        provenance=provenance,
    )


# ========================================
# 🗂 STRATA, A6~, TORSION, HORIKAWA
# ========================================
def classify_report(pattern: Optional[str], tau: Optional[str]) -> Report:
    rep = h0_A6(classify_stratum(pattern, tau))
    return Report(
        command="classify",
        input={"pattern": pattern or "none-zero", "tau": tau or "general"},
        invariants=rep.to_dict(),
        bundles={"V2_minus_origin": rep.v2.v2_untwisted.to_dict()},
        provenance=[rep.provenance] if rep.provenance else [],
    )


def a6_report(tf: Optional[TupleFile] = None, pattern: Optional[str] = None,
              tau: Optional[str] = None) -> Report:
    if tf is not None:
        res = A6_tilde(tf.to_tuple())
        inp = tf.model_dump(exclude_none=True)
    else:
        res = a6_elliptic(parse_pattern(pattern), TauContext.parse(tau))
        inp = {"pattern": pattern or "none-zero", "tau": tau or "general"}
    return Report(command="a6", input=inp, bundles={"A6_tilde": res.to_dict()}, provenance=[res.provenance])


def torsion_report(n: int, tau_degree: int, s: Optional[list] = None, lam: int = 0) -> Report:
    ts = torsion_structure_g2(n, tau_degree, s)
    inv = {"structure": ts.to_dict()}
    if s:
        inv["local"] = [
            {"s": k, "expected": list(ts.local_valuations(k)), "oracle": list(local_torsion_oracle(n, k, lam))}
            for k in s
        ]
    return Report(
        command="torsion",
        input={"n": n, "deg_tau": tau_degree, "s": s or [], "lambda": lam},
        invariants=inv,
        provenance=["oracle: Smith form of S^n V1 -> A_n on the local model"] if s else [],
    )


def horikawa_report(s: int, lambda_zero: bool, double_case: str = "i") -> Report:
    types = [str(x) for x in horikawa_type(s, lambda_zero)]
    sing = conic_singularity(s, lambda_zero, double_case=double_case)
    return Report(
        command="horikawa",
        input={"s": s, "lambda_zero": lambda_zero},
        invariants={"types": types, "ambiguous": len(types) > 1, "conic": sing.to_dict()},
    )


# ========================================
# 🌱 FAMILIES AND SAMPLING
# ========================================
def pg3_report(d: int, seed: int = DEFAULT_SEED) -> Report:
    rep = pg3_example(d, seed)
    body = rep.to_dict()
    checklist = body.pop("admissibility")
    notes = body.pop("notes")
    return Report(
        command="pg3-example",
        input={"d": d, "seed": seed},
        invariants={k: body[k] for k in (
            "d", "chi", "K2", "h1_obstruction", "linear_system_dim", "moduli_dim",
            "noether_expected_dim", "globally_generated", "base_locus",
        )},
        bundles={k: body[k] for k in (
            "V1", "V2", "S2V2", "S2V2_display_value", "V3", "V4_tilde", "L4", "L4_prime",
        )},
        admissibility=[ConditionOut(**c) for c in checklist],
        provenance=notes,
    )


def stratify_run(samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED, prime: int = DEFAULT_PRIME,
                 lines: int = DEFAULT_LINES, exact_gcd: bool = False, workers: int = 1):
    try:
        return stratify(samples, seed, prime, lines, exact_gcd, workers)
    except FibratoError as e:
        log.error("❌ stratify failed: %r", e)
        raise

# genus2core.py
"""
Genus-2 fibrations S -> B as data: the 5-tuple (B, V1, tau, xi, w), its
numerical invariants, the torsion sheaves T_n, the conic-bundle algebra A
and the branch bundle A6~, local fibre models and Horikawa types.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from math import comb
from typing import Any, Optional

from sympy import Poly, QQ, Symbol

from ellbundles import (
    EllLine,
    PointLabel,
    Sym,
    TAU,
    TauContext,
    Twist,
    cancel,
    classify_V2,
    h0_h1,
    rewrite,
)
from exactalg import BiForm, PolyMatrix, poly_ring, rank, smith_normal_form, valuation
from p1bundles import GradedMap, SplitBundle, cokernel_analysis, h0
from utils.errors import InconsistencyError, OutOfScopeError, SchemaError
from utils.logs import get_logger
from utils.polyparse import parse_polynomial

log = get_logger("genus2core")

GENUS = 2


# ========================================
# 📦 DATA
# ========================================
@dataclass(frozen=True)
class LocalFiberModel:
    """Stalk at a point of supp(tau): x0^2 - lam*x0*x1 + t^s*y (+ t*R), optional Q6(t)."""

    s: int
    lam: Any = 0
    q6: Optional[str] = None  # polynomial in x0, x1, y, z, t

    def __post_init__(self):
        if self.s < 1:
            raise SchemaError("multiplicity s must be >= 1")

    @property
    def lambda_zero(self) -> bool:
        return QQ.convert(self.lam) == 0


@dataclass(frozen=True)
class AbstractLine:
    """Line bundle known only by its degree (base genus >= 2)."""

    degree: int

    def __str__(self) -> str:
        return f"deg {self.degree}"


@dataclass(frozen=True)
class Genus2FiveTuple:
    base_genus: int
    v1_degree: int
    tau_degree: int
    v1: Any = None  # SplitBundle (b=0) or AtiyahExpr (b=1)
    sigma2: Optional[GradedMap] = None  # b=0
    pattern: Optional[tuple] = None  # b=1, indices of vanishing f_i
    tau_context: TauContext = TauContext()
    w: Optional[tuple] = None
    local_models: tuple = ()
    two_connected_declared: bool = False

    def __post_init__(self):
        if self.base_genus < 0:
            raise SchemaError("base genus must be >= 0")
        if self.tau_degree < 0:
            raise InconsistencyError("deg tau must be >= 0")
        if self.v1 is not None:
            if self.v1.rank != 2:
                raise SchemaError(f"V1 must have rank 2, got {self.v1.rank}")
            if self.v1.degree != self.v1_degree:
                raise SchemaError(f"V1 has degree {self.v1.degree}, tuple says {self.v1_degree}")
        if self.sigma2 is not None:
            if self.base_genus != 0:
                raise SchemaError("explicit sigma2 is supported on P^1 only")
            want = _s2_degrees(self.v1.degrees if self.v1 is not None else ())
            if self.sigma2.source_degrees != want:
                raise SchemaError(f"sigma2 source must be S^2 V1 with degrees {want}")
            if self.sigma2.rows != 3:
                raise SchemaError("sigma2 must map onto a rank-3 V2")
        if self.local_models and sum(m.s for m in self.local_models) != self.tau_degree:
            raise InconsistencyError("local multiplicities must add up to deg tau")

    @property
    def v2_degrees(self) -> Optional[tuple]:
        return self.sigma2.target_degrees if self.sigma2 is not None else None


def _s2_degrees(degrees) -> tuple:
    return tuple(degrees[i] + degrees[j] for i, j in combinations_with_replacement(range(len(degrees)), 2))


# ========================================
# 🔢 NUMERICS
# ========================================
def invariants_g2(t: Genus2FiveTuple) -> tuple[int, int]:
    b = t.base_genus
    chi = t.v1_degree + (b - 1)
    ksq = 2 * t.v1_degree + t.tau_degree + 8 * (b - 1)
    return chi, ksq


def horikawa_defect(b: int, chi: int, ksq: int) -> int:
    """K^2 - 2chi - 6(b-1); equals deg tau, hence >= 0 for every genus-2 fibration."""
    return ksq - 2 * chi - 6 * (b - 1)


def solve_tuple_degrees(b: int, chi: int, ksq: int) -> tuple[int, int]:
    deg_v1 = chi - (b - 1)
    deg_tau = ksq - 2 * deg_v1 - 8 * (b - 1)
    if deg_tau < 0:
        raise InconsistencyError(
            f"no genus-2 fibration data: K^2 - 2chi - 6(b-1) = {deg_tau} < 0"
        )
    return deg_v1, deg_tau


def relative_invariants(ksq: int, chi: int, b: int, g: int = GENUS) -> tuple[int, int]:
    """(K^2_{S|B}, chi(S|B))"""
    return ksq - 8 * (b - 1) * (g - 1), chi - (b - 1) * (g - 1)


def rank_Vn(n: int, g: int = GENUS) -> int:
    if n < 1:
        raise SchemaError("n must be >= 1")
    return g if n == 1 else (2 * n - 1) * (g - 1)


def rank_Vn_pm(n: int, g: int = GENUS) -> tuple[int, int]:
    if n < 2:
        raise SchemaError("n must be >= 2")
    even = (n * (g - 1) + 1, (n - 1) * (g - 1) - 1)
    return even if n % 2 == 0 else (even[1], even[0])


def chi_deg_Vn(n: int, g: int, b: int, ksq_rel: int, chi_rel: int) -> tuple:
    """(chi(V_n), deg(V_n)) from the relative invariants."""
    r = rank_Vn(n, g)
    top = n * (n - 1) // 2 * ksq_rel
    return top + r * (1 - b) + chi_rel, top + chi_rel


def deg_sym_v1(n: int, deg_v1: int, g: int = GENUS) -> int:
    """deg S^n(V1) for V1 of rank g."""
    return comb(n + g - 1, g) * deg_v1


def minimal_model_bound(g: int) -> int:
    if g < 2:
        raise SchemaError("genus must be >= 2")
    return (2 * g - 3) ** 2


def v3_plus(t: Genus2FiveTuple):
    """det V1 (x) O(tau)."""
    d = t.v1_degree + t.tau_degree
    if t.base_genus == 0:
        return SplitBundle((d,))
    if t.base_genus == 1:
        det_v1 = t.v1.det if t.v1 is not None else EllLine(t.v1_degree)
        return det_v1 * EllLine(t.tau_degree, PointLabel.gen(TAU) if t.tau_degree else PointLabel())
    return AbstractLine(d)


# ========================================
# 🧮 TORSION SHEAVES T_n
# ========================================
@dataclass(frozen=True)
class TorsionStructure:
    """T_n as a sum of O_{k tau}, stored as (k, multiplicity)."""

    n: int
    parity: str
    summands: tuple
    degree: int

    def local_valuations(self, s: int) -> tuple:
        """Invariant-factor valuations at a point of multiplicity s."""
        return tuple(sorted(k * s for k, mult in self.summands for _ in range(mult)))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "parity": self.parity,
            "summands": [{"k": k, "mult": m} for k, m in self.summands],
            "degree": self.degree,
        }


def torsion_structure_g2(n: int, tau_degree: int, s_list=None) -> TorsionStructure:
    if n < 2:
        raise SchemaError("n must be >= 2")
    if s_list is not None and sum(s_list) != tau_degree:
        raise InconsistencyError("local multiplicities must add up to deg tau")
    k = n // 2
    if n % 2 == 0:
        summands = ((k, 1),) + tuple((i, 2) for i in range(1, k))
        parity = "+"
    else:
        summands = tuple((i, 2) for i in range(1, k + 1))
        parity = "-"
    if tau_degree == 0:
        return TorsionStructure(n, parity, (), 0)
    degree = sum(i * m for i, m in summands) * tau_degree
    return TorsionStructure(n, parity, summands, degree)


def local_torsion_oracle(n: int, s: int, lam=0) -> tuple:
    """Valuations of coker(S^n V1 -> A_n) on the stalk x0^2 = lam*x0*x1 - t^s*y.

    A_n has the normal basis x0^e x1^b y^c with e <= 1 and e + b + 2c = n.
    """
    if n < 1 or s < 1:
        raise SchemaError("n and s must be >= 1")
    R, (t,) = poly_ring("t")
    lam = R.ground_new(QQ.convert(lam))
    ts = t ** s
    basis = [(e, n - e - 2 * c, c) for c in range(n // 2 + 1) for e in (0, 1) if n - e - 2 * c >= 0]
    index = {mono: i for i, mono in enumerate(basis)}
    cols = []
    for a in range(n + 1):
        todo = {(a, n - a, 0): R.one}
        done: dict = {}
        while todo:
            (e, b, c), coeff = todo.popitem()
            if e <= 1:
                done[(e, b, c)] = done.get((e, b, c), R.zero) + coeff
                continue
            for mono, f in (((e - 1, b + 1, c), lam), ((e - 2, b, c + 1), -ts)):
                if f:
                    todo[mono] = todo.get(mono, R.zero) + coeff * f
        cols.append(done)
    rows = [[cols[j].get(mono, R.zero) for j in range(n + 1)] for mono in basis]
    snf = smith_normal_form(PolyMatrix.from_rows(rows, R.to_domain(), cols=n + 1))
    return tuple(sorted(v for v in (valuation(d, t) for d in snf.invariants) if v))


# ========================================
# 🧷 SIGMA_2 AND THE ALGEBRA A
# ========================================
def check_sigma2(t: Genus2FiveTuple):
    """coker(sigma2) must be O_tau: torsion of length deg tau, rank drop <= 1."""
    if t.sigma2 is None:
        raise SchemaError("tuple carries no explicit sigma2")
    an = cokernel_analysis(t.sigma2)
    if an.rank != 0:
        raise InconsistencyError("coker(sigma2) is not a torsion sheaf")
    if an.torsion.length != t.tau_degree:
        raise InconsistencyError(f"coker(sigma2) has length {an.torsion.length}, deg tau is {t.tau_degree}")
    for p in an.torsion.points:
        if len(p.valuations) > 1:
            raise InconsistencyError(f"sigma2 drops rank by {len(p.valuations)} at {p.poly}")
    return an


def conic_form(sigma2: GradedMap) -> dict:
    """sigma(x0^2) sigma(x1^2) - sigma(x0 x1)^2 as an element of S^2 V2 (pairs i <= j)."""
    K = sigma2.domain
    c0, c1, c2 = ([sigma2.entries[i][j] for i in range(sigma2.rows)] for j in range(3))
    out: dict = {}
    for i in range(sigma2.rows):
        for j in range(sigma2.rows):
            key = (min(i, j), max(i, j))
            term = c0[i] * c2[j] - c1[i] * c1[j]
            out[key] = out[key] + term if key in out else term
    return out


def build_i_n(t: Genus2FiveTuple, n: int) -> GradedMap:
    """i_n: (det V1)^2 (x) S^{n-2}(V2) -> S^n(V2), q -> Q*q."""
    if n < 2:
        raise SchemaError("n must be >= 2")
    if t.sigma2 is None:
        raise OutOfScopeError("i_n is built from an explicit sigma2 on P^1")
    v2 = t.sigma2.target_degrees
    K = t.sigma2.domain
    Q = conic_form(t.sigma2)
    src = list(combinations_with_replacement(range(3), n - 2))
    tgt = list(combinations_with_replacement(range(3), n))
    tindex = {m: i for i, m in enumerate(tgt)}
    sdeg = tuple(2 * t.v1_degree + sum(v2[i] for i in q) for q in src)
    tdeg = tuple(sum(v2[i] for i in m) for m in tgt)
    rows = [[None] * len(src) for _ in tgt]
    for c, q in enumerate(src):
        for pair, f in Q.items():
            if f.is_zero:
                continue
            r = tindex[tuple(sorted(pair + q))]
            rows[r][c] = f if rows[r][c] is None else rows[r][c] + f
    built = [
        tuple(rows[r][c] if rows[r][c] is not None else BiForm.zero(tdeg[r] - sdeg[c], K) for c in range(len(src)))
        for r in range(len(tgt))
    ]
    return GradedMap(sdeg, tdeg, tuple(built), K)


@dataclass(frozen=True)
class AEven:
    n: int
    rank: int
    i_n: Optional[GradedMap] = None
    cokernel: Any = None


def build_A_even(t: Genus2FiveTuple, n: int) -> AEven:
    """A_{2n} = coker(i_n); rank C(n+2,2) - C(n,2)."""
    r = comb(n + 2, 2) - comb(n, 2)
    if t.base_genus != 0 or t.sigma2 is None:
        return AEven(n, r)
    i_n = build_i_n(t, n)
    an = cokernel_analysis(i_n)
    if not an.is_locally_free:
        raise InconsistencyError(f"i_{n} is not injective on every fibre: xi is invalid")
    if an.rank != r:
        raise InconsistencyError(f"coker(i_{n}) has rank {an.rank}, expected {r}")
    return AEven(n, r, i_n, an)


def j_map_fiber(n: int) -> int:
    """rank of j_n on a general fibre; rank A_{2n+1} = 2 rank A_{2n} - rank j_n."""
    if n < 1:
        raise SchemaError("n must be >= 1")
    sq = {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 2}  # x_a x_b -> u index
    src = list(combinations_with_replacement(range(3), n - 1))
    tgt = list(combinations_with_replacement(range(3), n))
    tindex = {m: i for i, m in enumerate(tgt)}
    size = 2 * len(tgt)

    def pos(slot: int, mono) -> int:
        return slot * len(tgt) + tindex[tuple(sorted(mono))]

    jcols = []
    for l in (0, 1):
        for q in src:
            v = [0] * size
            v[pos(0, q + (sq[(1, l)],))] += 1
            v[pos(1, q + (sq[(0, l)],))] -= 1
            jcols.append(v)
    qcols = []
    for slot in (0, 1):
        for q in combinations_with_replacement(range(3), n - 2) if n >= 2 else ():
            v = [0] * size
            v[pos(slot, q + (0, 2))] += 1
            v[pos(slot, q + (1, 1))] -= 1
            qcols.append(v)
    Qm = PolyMatrix.from_rows([list(r) for r in zip(*qcols)], QQ, cols=len(qcols)) if qcols else None
    both = PolyMatrix.from_rows([list(r) for r in zip(*(jcols + qcols))], QQ, cols=len(jcols) + len(qcols))
    return rank(both) - (rank(Qm) if Qm is not None else 0)


def rank_A_odd(n: int) -> int:
    """rank A_{2n+1}"""
    return 2 * (2 * n + 1) - j_map_fiber(n)


# ========================================
# 🌿 BRANCH BUNDLE A6~
# ========================================
@dataclass(frozen=True)
class A6Result:
    rank: int
    degree: int
    h0_range: tuple
    bundle: Any = None  # SplitBundle or AtiyahExpr when known
    provenance: str = ""

    @property
    def h0(self) -> Optional[int]:
        lo, hi = self.h0_range
        return lo if lo == hi else None

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "degree": self.degree,
            "h0": self.h0,
            "h0_range": list(self.h0_range),
            "bundle": self.bundle.to_dict() if self.bundle is not None else None,
            "provenance": self.provenance,
        }


def A6_tilde(t: Genus2FiveTuple) -> A6Result:
    """(coker i_3) (x) (det V1 (x) O(tau))^-2"""
    if t.base_genus == 0:
        if t.sigma2 is None:
            raise OutOfScopeError("b=0 needs an explicit sigma2")
        check_sigma2(t)
        a6 = build_A_even(t, 3).cokernel.locally_free_part
        twisted = SplitBundle(tuple(d - 2 * (t.v1_degree + t.tau_degree) for d in a6.degrees))
        h = h0(twisted)
        return A6Result(twisted.rank, twisted.degree, (h, h), twisted, "cokernel of i_3 on P^1")
    if t.base_genus == 1:
        if t.pattern is None:
            raise SchemaError("b=1 needs the vanishing pattern of f1, f2, f3")
        return a6_elliptic(t.pattern, t.tau_context)
    raise OutOfScopeError("A6~ is computed for base genus 0 and 1")


def a6_elliptic(pattern, ctx: TauContext) -> A6Result:
    """A6~ = coker(U([0]-2tau) -> S^3 U([0]-2tau)) with U = V2(-[0])."""
    v2 = classify_V2(pattern)
    U = v2.v2_untwisted
    N = EllLine(-1, PointLabel.gen(TAU, -2))
    S3 = rewrite(Sym(3, U))
    if any(isinstance(x, EllLine) and x.degree == 0 and x.label.two for x in U.terms):
        # U = W + L with L^2 = O: the copy of U in S^3 U splits off
        a6 = rewrite(Twist(cancel(S3, U), N))
        h = h0_h1(a6, ctx)[0]
        return A6Result(a6.rank, a6.degree, (h, h), a6, f"case {v2.case}: S^3 W + S^2 W (x) L, twisted")
    A = rewrite(Twist(U, N))
    B = rewrite(Twist(S3, N))
    h0a, h1a = h0_h1(A, ctx)
    h0b, h1b = h0_h1(B, ctx)
    kmin, kmax = max(0, h1a - h1b), h1a
    lo, hi = h0b - h0a + kmin, h0b - h0a + kmax
    note = f"case {v2.case}: long exact sequence, dim ker(H^1 A -> H^1 B) in [{kmin}, {kmax}]"
    return A6Result(B.rank - A.rank, B.degree - A.degree, (lo, hi), None, note)


# ========================================
# 🏷 FIBRE TYPES
# ========================================
@dataclass(frozen=True)
class HorikawaType:
    family: str
    index: Optional[int] = None

    def __str__(self) -> str:
        return self.family if self.index is None else f"{self.family}_{self.index}"


def horikawa_type(s: int, lambda_zero: bool) -> tuple:
    """Horikawa types compatible with (s, lambda); two candidates only at s=1, lambda=0."""
    if s < 1:
        raise SchemaError("s must be >= 1")
    if not lambda_zero:
        return (HorikawaType("I", (s + 1) // 2),) if s % 2 else (HorikawaType("II", s // 2),)
    if s == 1:
        return (HorikawaType("III", 1), HorikawaType("V"))
    return (HorikawaType("III", (s + 1) // 2),) if s % 2 else (HorikawaType("IV", s // 2),)


@dataclass(frozen=True)
class ConicSingularity:
    fibre: str  # smooth, reduced, double-line
    at_p: Optional[str]
    extra: tuple = ()
    branch_must_avoid_p: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "fibre": self.fibre,
            "at_P": self.at_p,
            "extra": list(self.extra),
            "branch_must_avoid_P": self.branch_must_avoid_p,
            "note": self.note,
        }


def conic_singularity(s: int, lambda_zero: bool, kernel_is_square: Optional[bool] = None,
                      in_support: bool = True, double_case: str = "i") -> ConicSingularity:
    """Singularity of the conic bundle over a point; ker(sigma2) is a square iff lambda = 0."""
    if s < 1:
        raise SchemaError("s must be >= 1")
    if not in_support:
        return ConicSingularity("smooth", None)
    square = lambda_zero if kernel_is_square is None else kernel_is_square
    if not square:
        return ConicSingularity("reduced", f"A_{2 * s + 1}", (), True)
    if double_case == "i":
        return ConicSingularity("double-line", f"D_{2 * s}", (), True)
    if double_case == "ii":
        return ConicSingularity(
            "double-line", "A_1", ("A_1",), False,
            "branch curve may pass through the second A_1; the double cover must then have an RDP",
        )
    raise SchemaError("double-line case must be 'i' or 'ii'")


def check_branch_avoids_P(model: LocalFiberModel) -> bool:
    """The y^3 coefficient of Q6 mod t is a unit."""
    if not model.q6:
        raise SchemaError("local model carries no Q6")
    names = ("x0", "x1", "y", "z", "t")
    expr = parse_polynomial(model.q6, names).subs(Symbol("t"), 0)
    x0, x1, y, z = (Symbol(n) for n in names[:4])
    return Poly(expr, x0, x1, y, z).coeff_monomial(y ** 3) != 0


# ========================================
# ✅ CHECKS
# ========================================
@dataclass(frozen=True)
class Condition:
    name: str
    status: str  # verified, violated, out-of-scope
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "detail": self.detail}


def admissibility_g2(t: Genus2FiveTuple) -> list[Condition]:
    out = []
    try:
        if t.base_genus == 0 and t.sigma2 is not None:
            check_sigma2(t)
            build_A_even(t, 3)
            out.append(Condition("i", "verified", "coker(sigma2) = O_tau and i_3 injective on fibres"))
        elif t.base_genus == 1 and t.pattern is not None:
            classify_V2(t.pattern)
            out.append(Condition("i", "verified", "V2 locally free by the vanishing pattern"))
        else:
            out.append(Condition("i", "out-of-scope", "no explicit xi"))
    except InconsistencyError as e:
        out.append(Condition("i", "violated", str(e)))
    with_q6 = [m for m in t.local_models if m.q6]
    if t.tau_degree == 0:
        out.append(Condition("ii", "verified", "tau is empty"))
    elif with_q6 and len(with_q6) == len(t.local_models):
        ok = all(check_branch_avoids_P(m) for m in with_q6)
        out.append(Condition("ii", "verified" if ok else "violated", "y^3 coefficient of Q6 mod t"))
    else:
        out.append(Condition("ii", "out-of-scope", "no local Q6 data"))
    out.append(Condition("iii", "out-of-scope", "rational double points are not decided"))
    return out


def godeaux_check() -> dict:
    """(b, chi, K^2) = (0, 1, 1): the numerical data behind a genus-2 bicanonical pencil."""
    deg_v1, deg_tau = solve_tuple_degrees(0, 1, 1)
    v3p = SplitBundle((deg_v1 + deg_tau,))
    ksq_rel, chi_rel = relative_invariants(1, 1, 0)
    _, deg_v3 = chi_deg_Vn(3, GENUS, 0, ksq_rel, chi_rel)
    return {
        "deg_v1": deg_v1,
        "deg_tau": deg_tau,
        "v3_plus": str(v3p),
        "h0_v3_plus_minus_7": h0(v3p, -7),
        "ksq_rel": ksq_rel,
        "chi_rel": chi_rel,
        "deg_v3": deg_v3,
        "deg_v3_minus": deg_v3 - v3p.degree,
    }

# p1bundles.py
"""
Split bundles on P^1 and graded maps between them.

A graded map keeps its summands in the order its matrix uses; the
`source` / `target` properties give the sorted splitting types.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement
from typing import Any, Optional, Sequence

from sympy import QQ
from sympy.polys.rings import ring

from exactalg import BiForm, PolyMatrix, rank, smith_normal_form, points_of, valuation
from utils.errors import InconsistencyError, SchemaError
from utils.logs import get_logger
from utils.polyparse import parse_binary_form

log = get_logger("p1bundles")


# ========================================
# 📦 SPLIT BUNDLES
# ========================================
@dataclass(frozen=True)
class SplitBundle:
    degrees: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(sorted((int(d) for d in self.degrees), reverse=True)))

    @classmethod
    def of(cls, *parts: tuple[int, int]) -> "SplitBundle":
        """SplitBundle.of((5, 3), (4, 3)) == O(5)^3 + O(4)^3"""
        return cls(tuple(d for d, mult in parts for _ in range(mult)))

    @property
    def rank(self) -> int:
        return len(self.degrees)

    @property
    def degree(self) -> int:
        return sum(self.degrees)

    def __add__(self, other: "SplitBundle") -> "SplitBundle":
        return SplitBundle(self.degrees + other.degrees)

    def __str__(self) -> str:
        if not self.degrees:
            return "0"
        parts = []
        for d, mult in sorted(Counter(self.degrees).items(), reverse=True):
            parts.append(f"O({d})" if mult == 1 else f"O({d})^{mult}")
        return " + ".join(parts)

    def to_dict(self) -> dict:
        return {"degrees": list(self.degrees), "rank": self.rank, "degree": self.degree, "text": str(self)}


def sym_power(obj, n: int):
    """S^n of a SplitBundle or of a GradedMap."""
    if n < 0:
        raise SchemaError("symmetric power needs n >= 0")
    if isinstance(obj, GradedMap):
        return obj.sym_power(n)
    return SplitBundle(_sym_degrees(obj.degrees, n))


def _sym_degrees(degrees: Sequence[int], n: int) -> tuple:
    return tuple(sum(degrees[i] for i in mono) for mono in combinations_with_replacement(range(len(degrees)), n))


def wedge_power(b: SplitBundle, k: int) -> SplitBundle:
    if k < 0 or k > b.rank:
        raise SchemaError(f"wedge power {k} of a rank {b.rank} bundle")
    return SplitBundle(tuple(sum(c) for c in combinations(b.degrees, k)))


def tensor(a: SplitBundle, b: SplitBundle) -> SplitBundle:
    return SplitBundle(tuple(x + y for x in a.degrees for y in b.degrees))


def twist(obj, m: int):
    if isinstance(obj, GradedMap):
        return obj.twist(m)
    return SplitBundle(tuple(d + m for d in obj.degrees))


def dual(obj):
    if isinstance(obj, GradedMap):
        return obj.dual()
    return SplitBundle(tuple(-d for d in obj.degrees))


def det(b: SplitBundle) -> SplitBundle:
    return SplitBundle((b.degree,))


def h0(b: SplitBundle, m: int = 0) -> int:
    return sum(max(d + m + 1, 0) for d in b.degrees)


def h1(b: SplitBundle, m: int = 0) -> int:
    return sum(max(-d - m - 1, 0) for d in b.degrees)


def global_generation(b: SplitBundle, m: int = 0) -> bool:
    """O(d) on P^1 is globally generated iff d >= 0."""
    return all(d + m >= 0 for d in b.degrees)


# ========================================
# 🔀 GRADED MAPS
# ========================================
@dataclass(frozen=True)
class GradedMap:
    """Matrix of binary forms; entry (i, j) has degree target_degrees[i] - source_degrees[j]."""

    source_degrees: tuple
    target_degrees: tuple
    entries: tuple
    domain: Any = QQ

    def __post_init__(self):
        object.__setattr__(self, "source_degrees", tuple(int(d) for d in self.source_degrees))
        object.__setattr__(self, "target_degrees", tuple(int(d) for d in self.target_degrees))
        if len(self.entries) != len(self.target_degrees):
            raise SchemaError("one row per target summand is required")
        for i, row in enumerate(self.entries):
            if len(row) != len(self.source_degrees):
                raise SchemaError(f"row {i} has {len(row)} entries, expected {len(self.source_degrees)}")
            for j, f in enumerate(row):
                want = self.target_degrees[i] - self.source_degrees[j]
                if f.degree != want and not (want < 0 and f.is_zero):
                    raise SchemaError(f"entry ({i},{j}) has degree {f.degree}, forced degree is {want}")

    # ---- constructors ----
    @classmethod
    def from_rows(cls, source_degrees, target_degrees, rows, domain=QQ) -> "GradedMap":
        """Rows may hold BiForm, numbers (constants or 0) or polynomial strings in t0, t1."""
        built = []
        for i, row in enumerate(rows):
            out = []
            for j, x in enumerate(row):
                want = target_degrees[i] - source_degrees[j]
                out.append(_as_form(x, want, domain))
            built.append(tuple(out))
        return cls(tuple(source_degrees), tuple(target_degrees), tuple(built), domain)

    @classmethod
    def identity(cls, degrees: Sequence[int], domain=QQ) -> "GradedMap":
        n = len(degrees)
        rows = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        return cls.from_rows(tuple(degrees), tuple(degrees), rows, domain)

    @classmethod
    def diagonal(cls, source_degrees, target_degrees, forms, domain=QQ) -> "GradedMap":
        n = len(source_degrees)
        rows = [[forms[i] if i == j else 0 for j in range(n)] for i in range(n)]
        return cls.from_rows(source_degrees, target_degrees, rows, domain)

    # ---- shape ----
    @property
    def source(self) -> SplitBundle:
        return SplitBundle(self.source_degrees)

    @property
    def target(self) -> SplitBundle:
        return SplitBundle(self.target_degrees)

    @property
    def rows(self) -> int:
        return len(self.target_degrees)

    @property
    def cols(self) -> int:
        return len(self.source_degrees)

    def forced_degree(self, i: int, j: int) -> int:
        return self.target_degrees[i] - self.source_degrees[j]

    # ---- algebra ----
    def twist(self, m: int) -> "GradedMap":
        return GradedMap(
            tuple(d + m for d in self.source_degrees),
            tuple(d + m for d in self.target_degrees),
            self.entries,
            self.domain,
        )

    def dual(self) -> "GradedMap":
        return GradedMap(
            tuple(-d for d in self.target_degrees),
            tuple(-d for d in self.source_degrees),
            tuple(tuple(self.entries[i][j] for i in range(self.rows)) for j in range(self.cols)),
            self.domain,
        )

    def compose(self, inner: "GradedMap") -> "GradedMap":
        """self after inner."""
        if inner.target_degrees != self.source_degrees:
            raise SchemaError("maps are not composable: summand degrees differ")
        K = self.domain
        rows = []
        for i in range(self.rows):
            row = []
            for j in range(inner.cols):
                want = self.target_degrees[i] - inner.source_degrees[j]
                acc = BiForm.zero(want, K)
                if want >= 0:
                    for k in range(self.cols):
                        a, b = self.entries[i][k], inner.entries[k][j]
                        if a.is_zero or b.is_zero:
                            continue
                        acc = acc + a * b
                row.append(acc)
            rows.append(tuple(row))
        return GradedMap(inner.source_degrees, self.target_degrees, tuple(rows), K)

    def __matmul__(self, inner: "GradedMap") -> "GradedMap":
        return self.compose(inner)

    def sym_power(self, n: int) -> "GradedMap":
        """Induced map S^n(source) -> S^n(target), monomial bases in lex order."""
        K = self.domain
        src = list(combinations_with_replacement(range(self.cols), n))
        tgt = list(combinations_with_replacement(range(self.rows), n))
        sdeg = tuple(sum(self.source_degrees[i] for i in mono) for mono in src)
        tdeg = tuple(sum(self.target_degrees[i] for i in mono) for mono in tgt)
        cols = []
        for mono in src:
            images = {(): BiForm.constant(1, K)}
            for j in mono:
                nxt: dict = {}
                for key, coeff in images.items():
                    for i in range(self.rows):
                        f = self.entries[i][j]
                        if f.is_zero:
                            continue
                        k2 = tuple(sorted(key + (i,)))
                        prod = coeff * f
                        nxt[k2] = nxt[k2] + prod if k2 in nxt else prod
                images = nxt
            cols.append(images)
        rows = []
        for r, tmono in enumerate(tgt):
            row = []
            for c, smono in enumerate(src):
                want = tdeg[r] - sdeg[c]
                row.append(cols[c].get(tmono, BiForm.zero(want, K)))
            rows.append(tuple(row))
        return GradedMap(sdeg, tdeg, tuple(rows), K)

    def tensor_identity(self, degrees: Sequence[int]) -> "GradedMap":
        """self (x) Id_E with summand (i, k) at position i*rank(E) + k."""
        K = self.domain
        e = len(degrees)
        sdeg = tuple(s + d for s in self.source_degrees for d in degrees)
        tdeg = tuple(t + d for t in self.target_degrees for d in degrees)
        rows = []
        for i in range(self.rows):
            for k in range(e):
                row = []
                for j in range(self.cols):
                    for l in range(e):
                        want = tdeg[i * e + k] - sdeg[j * e + l]
                        row.append(self.entries[i][j] if k == l else BiForm.zero(want, K))
                rows.append(tuple(row))
        return GradedMap(sdeg, tdeg, tuple(rows), K)

    def drop_source(self, keep: Sequence[int]) -> "GradedMap":
        return GradedMap(
            tuple(self.source_degrees[j] for j in keep),
            self.target_degrees,
            tuple(tuple(row[j] for j in keep) for row in self.entries),
            self.domain,
        )

    def fiber(self, t0, t1) -> PolyMatrix:
        """Value at the point [t0 : t1] in the trivialisation by monomials."""
        K = self.domain
        return PolyMatrix.from_rows(
            [[K.zero if f.degree < 0 else f.evaluate(t0, t1) for f in row] for row in self.entries],
            K,
            cols=self.cols,
        )

    def on_chart(self, chart: str = "t1"):
        """PolyMatrix over K[x] (chart t1=1) or K[y] (chart t0=1)."""
        name = "x" if chart == "t1" else "y"
        R, _ = ring(name, self.domain)
        rows = []
        for row in self.entries:
            out = []
            for f in row:
                if f.is_zero:
                    out.append(R.zero)
                else:
                    out.append(f.on_chart_t1(R) if chart == "t1" else f.on_chart_t0(R))
            rows.append(out)
        return PolyMatrix.from_rows(rows, R.to_domain(), cols=self.cols)

    def to_text_rows(self) -> list[list[str]]:
        return [[str(f) for f in row] for row in self.entries]


def _as_form(x, degree: int, domain) -> BiForm:
    if isinstance(x, BiForm):
        return x
    if isinstance(x, str):
        coeffs = parse_binary_form(x, degree)
        if not coeffs:
            return BiForm.zero(degree, domain)
        return BiForm(degree, tuple(coeffs), domain)
    if x == 0:
        return BiForm.zero(degree, domain)
    if degree != 0:
        raise SchemaError(f"constant entry {x!r} where a form of degree {degree} is required")
    return BiForm.constant(x, domain)


# ========================================
# 🧾 COHOMOLOGY MATRICES
# ========================================
def _h0_basis(degrees: Sequence[int], m: int) -> list[tuple[int, int]]:
    """(summand, i) for the monomial t0^(e-i) t1^i, e = degree + m."""
    return [(s, i) for s, d in enumerate(degrees) for i in range(d + m + 1)]


def _h1_basis(degrees: Sequence[int], m: int) -> list[tuple[int, int]]:
    """(summand, beta) for t0^-alpha t1^-beta with alpha, beta >= 1, alpha + beta = -(degree + m)."""
    return [(s, beta) for s, d in enumerate(degrees) for beta in range(1, -(d + m))]


def sections_map(phi: GradedMap, m: int = 0) -> PolyMatrix:
    """H^0(source(m)) -> H^0(target(m)) in monomial bases."""
    K = phi.domain
    src = _h0_basis(phi.source_degrees, m)
    tgt = _h0_basis(phi.target_degrees, m)
    tindex = {b: r for r, b in enumerate(tgt)}
    out = [[K.zero] * len(src) for _ in tgt]
    for c, (j, i) in enumerate(src):
        e = phi.source_degrees[j] + m
        for r in range(phi.rows):
            f = phi.entries[r][j]
            if f.is_zero:
                continue
            for b, coeff in enumerate(f.coeffs):
                if K.is_zero(coeff):
                    continue
                out[tindex[(r, i + b)]][c] += coeff
    return PolyMatrix.from_rows(out, K, cols=len(src))


def h1_map(phi: GradedMap, m: int = 0) -> PolyMatrix:
    """H^1(source(m)) -> H^1(target(m)) on negative Laurent monomials, truncated."""
    K = phi.domain
    src = _h1_basis(phi.source_degrees, m)
    tgt = _h1_basis(phi.target_degrees, m)
    tindex = {b: r for r, b in enumerate(tgt)}
    out = [[K.zero] * len(src) for _ in tgt]
    for c, (j, beta) in enumerate(src):
        alpha = -(phi.source_degrees[j] + m) - beta
        for r in range(phi.rows):
            f = phi.entries[r][j]
            if f.is_zero:
                continue
            d = f.degree
            for b, coeff in enumerate(f.coeffs):
                if K.is_zero(coeff):
                    continue
                a2, b2 = alpha - d + b, beta - b
                if a2 >= 1 and b2 >= 1:
                    out[tindex[(r, b2)]][c] += coeff
    return PolyMatrix.from_rows(out, K, cols=len(src))


# ========================================
# 🧩 TORSION AND COKERNELS
# ========================================
@dataclass(frozen=True)
class TorsionPoint:
    """Closed point of P^1 with the valuations of the invariant factors there."""

    coords: Optional[tuple]  # (t0, t1) for rational points
    poly: str  # defining polynomial in its chart
    degree: int
    valuations: tuple

    @property
    def length(self) -> int:
        return self.degree * sum(self.valuations)

    def to_dict(self) -> dict:
        return {
            "coords": [str(c) for c in self.coords] if self.coords else None,
            "poly": self.poly,
            "degree": self.degree,
            "valuations": list(self.valuations),
            "length": self.length,
        }


@dataclass(frozen=True)
class TorsionSheafP1:
    points: tuple = ()

    @property
    def length(self) -> int:
        return sum(p.length for p in self.points)

    def __len__(self) -> int:
        return self.length

    def to_dict(self) -> dict:
        return {"length": self.length, "points": [p.to_dict() for p in self.points]}


@dataclass(frozen=True)
class CokernelAnalysis:
    is_injective: bool
    torsion: Optional[TorsionSheafP1]
    locally_free_part: Optional[SplitBundle]
    rank: int
    profile: dict = field(default_factory=dict)

    def __iter__(self):
        yield self.is_injective
        yield self.torsion
        yield self.locally_free_part

    @property
    def is_locally_free(self) -> bool:
        return self.is_injective and self.torsion is not None and self.torsion.length == 0


def torsion_of(phi: GradedMap) -> tuple[int, TorsionSheafP1]:
    """Generic rank and the torsion of coker(phi), from Smith forms on both charts."""
    K = phi.domain
    affine = smith_normal_form(phi.on_chart("t1"))
    points = []
    seen = {}
    for d in affine.invariants:
        if d.degree() < 1:
            continue
        for pt in points_of(d):
            seen.setdefault(str(pt.poly), pt)
    for pt in seen.values():
        vals = tuple(v for v in (valuation(d, pt.poly) for d in affine.invariants) if v)
        coords = (pt.root, K.one) if pt.root is not None else None
        points.append(TorsionPoint(coords, str(pt.poly.as_expr()), pt.degree, vals))
    at_inf = smith_normal_form(phi.on_chart("t0"))
    y = at_inf.diagonal.domain.ring.gens[0]
    vals = tuple(v for v in (valuation(d, y) for d in at_inf.invariants) if v)
    if vals:
        points.append(TorsionPoint((K.one, K.zero), "y", 1, vals))
    return affine.rank, TorsionSheafP1(tuple(points))


def cokernel_analysis(phi: GradedMap, require_injective: bool = True) -> CokernelAnalysis:
    """Injectivity, torsion, and the splitting type of coker(phi) modulo torsion.

    The free part is read from m -> h0(coker(m)) - length(torsion), where
    h0(coker(m)) = h0(target, m) - h0(source, m) + dim ker h1_map(phi, m).
    """
    if phi.cols > phi.rows and require_injective:
        raise InconsistencyError(f"source rank {phi.cols} exceeds target rank {phi.rows}")
    r, torsion = torsion_of(phi)
    injective = r == phi.cols
    if not injective:
        if require_injective:
            raise InconsistencyError(f"map is not injective: generic rank {r} < {phi.cols}")
        return CokernelAnalysis(False, None, None, phi.rows - r)

    S, T = phi.source, phi.target
    rk = T.rank - S.rank
    if rk == 0:
        if T.degree - S.degree != torsion.length:
            raise InconsistencyError("torsion length differs from deg(target) - deg(source)")
        return CokernelAnalysis(True, torsion, SplitBundle(()), 0, {})

    deg_free = T.degree - S.degree - torsion.length
    lo = min(phi.target_degrees)
    hi = deg_free - (rk - 1) * lo
    profile = {}
    # monotone in m: scan down and stop at the first twist without sections
    for m in range(-lo, -hi - 2, -1):
        h1s = h1(S, m)
        k = h1s - (rank(h1_map(phi, m)) if h1s else 0)
        profile[m] = h0(T, m) - h0(S, m) + k - torsion.length
        if profile[m] == 0:
            break
    free = splitting_from_h0_profile(profile, rk)
    if free.degree != deg_free:
        raise InconsistencyError(f"free part degree {free.degree} differs from {deg_free}")
    log.debug("coker: rank %d, free %s, torsion length %d", rk, free, torsion.length)
    return CokernelAnalysis(True, torsion, free, rk, profile)


def splitting_from_h0_profile(profile: dict, rank: int) -> SplitBundle:
    """The unique splitting type whose h0 profile matches on a contiguous window."""
    if rank == 0:
        if any(profile.values()):
            raise InconsistencyError("nonzero profile for a rank-0 bundle")
        return SplitBundle(())
    ms = sorted(profile)
    if not ms or ms != list(range(ms[0], ms[-1] + 1)):
        raise InconsistencyError("profile window must be a contiguous range of twists")
    if profile[ms[0]] != 0:
        raise InconsistencyError(f"profile must vanish at the window start m={ms[0]}")
    degrees: list[int] = []
    prev = 0
    for lo_m, m in zip(ms, ms[1:]):
        c = profile[m] - profile[lo_m]
        if c < prev:
            raise InconsistencyError(f"profile is not convex at m={m}")
        degrees.extend([-m] * (c - prev))
        prev = c
    if prev != rank:
        raise InconsistencyError(f"profile window recovers rank {prev}, expected {rank}")
    out = SplitBundle(tuple(degrees))
    for m in ms:
        if h0(out, m) != profile[m]:
            raise InconsistencyError(f"profile mismatch at m={m}")
    return out


# ========================================
# 🎯 BASE LOCUS OF RELATIVE QUADRICS
# ========================================
def quadric_base_locus(degrees: Sequence[int], m: int) -> Optional[tuple]:
    """Base locus of the relative quadrics H^0(S^2(E)(m)) on P(E).

    z_a z_b has sections iff degrees[a] + degrees[b] + m >= 0. Returns None when
    the system is base point free, else the coordinates cutting out the locus.
    """
    n = len(degrees)
    forced = tuple(a for a in range(n) if 2 * degrees[a] + m >= 0)
    if len(forced) == n:
        return None
    return forced

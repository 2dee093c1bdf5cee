# ellbundles.py
"""
Formal bundle calculus on an elliptic base curve B.

Points are labels in a formal abelian group: the Klein four group of
2-torsion classes L1..L3, the (Z/3)^2 of 3-torsion classes M1..M8 and free
generators for general points. The label "t" always stands for tau - [0].
Rewriting follows a closed rule list; anything else raises OutOfScopeError.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from itertools import combinations_with_replacement
from math import gcd
from typing import Any, Optional, Union

from exactalg import poly_ring
from utils.errors import InconsistencyError, OutOfScopeError, SchemaError
from utils.logs import get_logger

log = get_logger("ellbundles")

THREE_TORSION = ((0, 1), (0, 2), (1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2))
TAU = "t"


# ========================================
# 🏷 LABELS
# ========================================
@dataclass(frozen=True)
class PointLabel:
    two: int = 0  # 0..3, group law is XOR
    three: tuple = (0, 0)
    free: tuple = ()  # sorted (name, coeff), coeff != 0

    @classmethod
    def L(cls, i: int) -> "PointLabel":
        if i not in (1, 2, 3):
            raise SchemaError(f"2-torsion index must be 1..3, got {i}")
        return cls(two=i)

    @classmethod
    def M(cls, j: int) -> "PointLabel":
        if not 1 <= j <= 8:
            raise SchemaError(f"3-torsion index must be 1..8, got {j}")
        return cls(three=THREE_TORSION[j - 1])

    @classmethod
    def gen(cls, name: str, coeff: int = 1) -> "PointLabel":
        return cls(free=((name, coeff),) if coeff else ())

    def __add__(self, other: "PointLabel") -> "PointLabel":
        free = Counter(dict(self.free))
        for k, v in other.free:
            free[k] += v
        return PointLabel(
            self.two ^ other.two,
            ((self.three[0] + other.three[0]) % 3, (self.three[1] + other.three[1]) % 3),
            tuple(sorted((k, v) for k, v in free.items() if v)),
        )

    def __neg__(self) -> "PointLabel":
        return PointLabel(self.two, ((-self.three[0]) % 3, (-self.three[1]) % 3),
                          tuple((k, -v) for k, v in self.free))

    def __sub__(self, other: "PointLabel") -> "PointLabel":
        return self + (-other)

    def __mul__(self, n: int) -> "PointLabel":
        return PointLabel(
            self.two if n % 2 else 0,
            ((self.three[0] * n) % 3, (self.three[1] * n) % 3),
            tuple((k, v * n) for k, v in self.free) if n else (),
        )

    __rmul__ = __mul__

    @property
    def is_zero(self) -> bool:
        return self.two == 0 and self.three == (0, 0) and not self.free

    def coeff(self, name: str) -> int:
        return dict(self.free).get(name, 0)

    def drop(self, name: str) -> "PointLabel":
        return PointLabel(self.two, self.three, tuple((k, v) for k, v in self.free if k != name))

    def __str__(self) -> str:
        parts = []
        if self.two:
            parts.append(f"L{self.two}")
        if self.three != (0, 0):
            parts.append(f"M{THREE_TORSION.index(self.three) + 1}")
        for k, v in self.free:
            parts.append(k if v == 1 else f"-{k}" if v == -1 else f"{v}*{k}")
        return " ".join(parts) if parts else "0"

    @classmethod
    def parse(cls, atoms: list[str]) -> "PointLabel":
        out = cls()
        for a in atoms:
            out = out + _parse_label_atom(a)
        return out


_FREE_ATOM = re.compile(r"^(-?\d*)\*?([a-z_][a-z0-9_]*)$")


def _parse_label_atom(a: str) -> PointLabel:
    if a == "0":
        return PointLabel()
    m = re.fullmatch(r"L([1-3])", a)
    if m:
        return PointLabel.L(int(m.group(1)))
    m = re.fullmatch(r"M([1-8])", a)
    if m:
        return PointLabel.M(int(m.group(1)))
    m = _FREE_ATOM.match(a)
    if not m:
        raise SchemaError(f"bad label atom {a!r}")
    c = m.group(1)
    coeff = -1 if c == "-" else int(c) if c else 1
    return PointLabel.gen(m.group(2), coeff)


# ========================================
# 🎯 TAU CONTEXT
# ========================================
@dataclass(frozen=True)
class TauContext:
    """What tau - [0] is: 'general', 'zero', 'two' (= L_index) or 'three' (= M_index)."""

    kind: str = "general"
    index: int = 0

    def __post_init__(self):
        if self.kind not in {"general", "zero", "two", "three"}:
            raise SchemaError(f"unknown tau context {self.kind!r}")
        if self.kind == "two" and self.index not in (1, 2, 3):
            raise SchemaError("2-torsion tau needs index 1..3")
        if self.kind == "three" and not 1 <= self.index <= 8:
            raise SchemaError("3-torsion tau needs index 1..8")

    @classmethod
    def parse(cls, text: Optional[str]) -> "TauContext":
        s = (text or "general").strip()
        if s in {"[0]", "0", "zero"}:
            return cls("zero")
        if s in {"general", "generic", "tau"}:
            return cls("general")
        m = re.fullmatch(r"\[0\]\+L([1-3])|L([1-3])", s)
        if m:
            return cls("two", int(m.group(1) or m.group(2)))
        m = re.fullmatch(r"\[0\]\+M([1-8])|M([1-8])", s)
        if m:
            return cls("three", int(m.group(1) or m.group(2)))
        raise SchemaError(f"cannot read tau {text!r}; use [0], general, L1..L3 or M1..M8")

    @property
    def label(self) -> Optional[PointLabel]:
        if self.kind == "zero":
            return PointLabel()
        if self.kind == "two":
            return PointLabel.L(self.index)
        if self.kind == "three":
            return PointLabel.M(self.index)
        return None

    def resolve(self, label: PointLabel) -> PointLabel:
        c = label.coeff(TAU)
        if not c or self.kind == "general":
            return label
        return label.drop(TAU) + self.label * c

    def is_trivial(self, label: PointLabel) -> bool:
        return self.resolve(label).is_zero

    @property
    def three_tau_is_three_zero(self) -> bool:
        return self.kind in {"zero", "three"}

    def __str__(self) -> str:
        return {"general": "general", "zero": "[0]"}.get(self.kind) or (
            f"[0]+L{self.index}" if self.kind == "two" else f"[0]+M{self.index}"
        )


def two_torsion_related(ctx: TauContext) -> bool:
    """True iff O([0] - tau) is a nontrivial 2-torsion bundle."""
    return ctx.kind == "two"


# ========================================
# 🧱 BUNDLES AND EXPRESSIONS
# ========================================
@dataclass(frozen=True)
class EllLine:
    degree: int
    label: PointLabel = PointLabel()

    def __mul__(self, other: "EllLine") -> "EllLine":
        return EllLine(self.degree + other.degree, self.label + other.label)

    def __pow__(self, n: int) -> "EllLine":
        return EllLine(self.degree * n, self.label * n)

    def inverse(self) -> "EllLine":
        return EllLine(-self.degree, -self.label)

    @property
    def rank(self) -> int:
        return 1

    def __str__(self) -> str:
        return f"O({self.degree}; {self.label})"


@dataclass(frozen=True)
class Indecomposable:
    """Atiyah's E(r, D): indecomposable of rank r and determinant D, gcd(r, deg D) = 1."""

    rank: int
    det: EllLine

    def __post_init__(self):
        if self.rank < 2:
            raise SchemaError("indecomposables of rank 1 are line bundles")
        if gcd(self.rank, self.det.degree) != 1 and self.det.degree != 0:
            raise SchemaError(f"gcd(rank, degree) must be 1 for E({self.rank},{self.det.degree})")
        if self.det.degree == 0:
            raise OutOfScopeError("degree-0 indecomposables of rank >= 2 are not handled")

    @property
    def degree(self) -> int:
        return self.det.degree

    def __str__(self) -> str:
        return f"E({self.rank}; {self.det})"


Leaf = Union[EllLine, Indecomposable]


def _leaf_key(x: Leaf):
    if isinstance(x, EllLine):
        return (0, 1, -x.degree, str(x.label))
    return (1, x.rank, -x.degree, str(x.det.label))


@dataclass(frozen=True)
class AtiyahExpr:
    """Normal form: a sorted multiset of lines and indecomposables."""

    terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(sorted(self.terms, key=_leaf_key)))

    @property
    def rank(self) -> int:
        return sum(t.rank for t in self.terms)

    @property
    def degree(self) -> int:
        return sum(t.degree for t in self.terms)

    @property
    def det(self) -> EllLine:
        out = EllLine(0)
        for t in self.terms:
            out = out * (t if isinstance(t, EllLine) else t.det)
        return out

    def __add__(self, other: "AtiyahExpr") -> "AtiyahExpr":
        return AtiyahExpr(self.terms + other.terms)

    def is_lines(self) -> bool:
        return all(isinstance(t, EllLine) for t in self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for t, mult in Counter(self.terms).items():
            parts.append(str(t) if mult == 1 else f"{t}^{mult}")
        return " + ".join(parts)

    def to_dict(self) -> dict:
        return {"text": str(self), "sexpr": to_sexpr(self), "rank": self.rank, "degree": self.degree}


@dataclass(frozen=True)
class Sum:
    parts: tuple


@dataclass(frozen=True)
class Sym:
    n: int
    arg: Any


@dataclass(frozen=True)
class Wedge:
    k: int
    arg: Any


@dataclass(frozen=True)
class Tensor:
    left: Any
    right: Any


@dataclass(frozen=True)
class Dual:
    arg: Any


@dataclass(frozen=True)
class Twist:
    arg: Any
    line: EllLine


# ========================================
# 🔁 REWRITING
# ========================================
def rewrite(e) -> AtiyahExpr:
    """Normal form of an expression; preserves rank and determinant."""
    if isinstance(e, AtiyahExpr):
        return e
    if isinstance(e, (EllLine, Indecomposable)):
        return AtiyahExpr((e,))
    if isinstance(e, Sum):
        out = AtiyahExpr()
        for p in e.parts:
            out = out + rewrite(p)
        return out
    if isinstance(e, Twist):
        return _tensor(rewrite(e.arg), AtiyahExpr((e.line,)))
    if isinstance(e, Tensor):
        return _tensor(rewrite(e.left), rewrite(e.right))
    if isinstance(e, Dual):
        return AtiyahExpr(tuple(_dual_leaf(t) for t in rewrite(e.arg).terms))
    if isinstance(e, Sym):
        return _sym(rewrite(e.arg), e.n)
    if isinstance(e, Wedge):
        return _wedge(rewrite(e.arg), e.k)
    raise SchemaError(f"not a bundle expression: {e!r}")


def _dual_leaf(x: Leaf) -> Leaf:
    if isinstance(x, EllLine):
        return x.inverse()
    return Indecomposable(x.rank, x.det.inverse())


def _tensor(a: AtiyahExpr, b: AtiyahExpr) -> AtiyahExpr:
    out = []
    for x in a.terms:
        for y in b.terms:
            out.extend(_tensor_leaves(x, y).terms)
    return AtiyahExpr(tuple(out))


def _tensor_leaves(x: Leaf, y: Leaf) -> AtiyahExpr:
    if isinstance(x, EllLine) and isinstance(y, EllLine):
        return AtiyahExpr((x * y,))
    if isinstance(x, EllLine):
        x, y = y, x
    if isinstance(y, EllLine):
        # E(r, D) (x) N = E(r, D N^r)
        return AtiyahExpr((Indecomposable(x.rank, x.det * y ** x.rank),))
    if x.rank == y.rank == 3:
        for a, b in ((x, y), (y, x)):
            if b.det == a.det ** 2:
                A = a.det
                return AtiyahExpr((A,) + tuple(EllLine(A.degree, A.label + PointLabel.M(j)) for j in range(1, 9)))
    raise OutOfScopeError(f"no rule for {x} (x) {y}")


def _line_power(x: EllLine, n: int) -> EllLine:
    return x ** n


def _sym_leaf(x: Leaf, n: int) -> AtiyahExpr:
    if n == 0:
        return AtiyahExpr((EllLine(0),))
    if isinstance(x, EllLine):
        return AtiyahExpr((_line_power(x, n),))
    if n == 1:
        return AtiyahExpr((x,))
    D = x.det
    if x.rank == 2 and n == 2:
        return AtiyahExpr(tuple(EllLine(D.degree, D.label + PointLabel.L(i)) for i in (1, 2, 3)))
    if x.rank == 2 and n == 3:
        return AtiyahExpr((Indecomposable(2, D ** 3),) * 2)
    if x.rank == 3 and n == 2:
        return AtiyahExpr((Indecomposable(3, D ** 2),) * 2)
    if x.rank == 3 and n == 3:
        return AtiyahExpr((D, D) + tuple(EllLine(D.degree, D.label + PointLabel.M(j)) for j in range(1, 9)))
    raise OutOfScopeError(f"no rule for S^{n}({x})")


def _wedge_leaf(x: Leaf, k: int) -> AtiyahExpr:
    if k == 0:
        return AtiyahExpr((EllLine(0),))
    if k == 1:
        return AtiyahExpr((x,))
    if isinstance(x, EllLine) or k > x.rank:
        return AtiyahExpr()
    if k == x.rank:
        return AtiyahExpr((x.det,))
    if k == x.rank - 1:
        return AtiyahExpr((Indecomposable(x.rank, x.det ** (x.rank - 1)),))
    raise OutOfScopeError(f"no rule for wedge^{k}({x})")


def _compositions(n: int, parts: int):
    """All (n_1, ..., n_parts) with sum n."""
    for cut in combinations_with_replacement(range(parts), n):
        c = Counter(cut)
        yield tuple(c[i] for i in range(parts))


def _sym(e: AtiyahExpr, n: int) -> AtiyahExpr:
    if n < 0:
        raise SchemaError("symmetric power needs n >= 0")
    if not e.terms:
        return AtiyahExpr((EllLine(0),)) if n == 0 else AtiyahExpr()
    out = AtiyahExpr()
    for comp in _compositions(n, len(e.terms)):
        piece = AtiyahExpr((EllLine(0),))
        for leaf, k in zip(e.terms, comp):
            if k:
                piece = _tensor(piece, _sym_leaf(leaf, k))
        out = out + piece
    return out


def _wedge(e: AtiyahExpr, k: int) -> AtiyahExpr:
    if k < 0:
        raise SchemaError("wedge power needs k >= 0")
    out = AtiyahExpr()
    for comp in _compositions(k, len(e.terms)) if e.terms else ([()] if k == 0 else []):
        piece = AtiyahExpr((EllLine(0),))
        for leaf, j in zip(e.terms, comp):
            if j:
                piece = _tensor(piece, _wedge_leaf(leaf, j))
        out = out + piece
    return out


def cancel(big: AtiyahExpr, small: AtiyahExpr) -> AtiyahExpr:
    """Remove the summands of `small` from `big` as multisets."""
    left = list(big.terms)
    for t in small.terms:
        if t not in left:
            raise InconsistencyError(f"summand {t} not present for cancellation")
        left.remove(t)
    return AtiyahExpr(tuple(left))


# ========================================
# 📊 COHOMOLOGY
# ========================================
def h0_h1(e, ctx: TauContext = TauContext()) -> tuple[int, int]:
    e = rewrite(e)
    h0 = h1 = 0
    for t in e.terms:
        d = t.degree
        if d > 0:
            h0 += d
        elif d < 0:
            h1 += -d
        elif isinstance(t, EllLine):
            if ctx.is_trivial(t.label):
                h0 += 1
                h1 += 1
        else:
            raise OutOfScopeError(f"cohomology of the degree-0 indecomposable {t}")
    return h0, h1


def ext1_dim(tau_degree: int, e) -> int:
    """dim Ext^1(O_tau, E) = rank(E) * deg(tau) for a sum of lines."""
    if tau_degree < 0:
        raise SchemaError("tau must be effective")
    e = rewrite(e)
    if not e.is_lines():
        raise SchemaError("Ext^1(O_tau, -) is computed for sums of line bundles")
    return e.rank * tau_degree


# ========================================
# 🧭 CLASSIFICATION OF V2
# ========================================
@dataclass(frozen=True)
class V2Class:
    case: str  # "I", "II" or "III"
    v2_untwisted: AtiyahExpr  # V2(-[0])
    zero_indices: tuple
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "zero_indices": list(self.zero_indices),
            "v2_minus_origin": self.v2_untwisted.to_dict(),
            "note": self.note,
        }


def parse_pattern(text: Optional[str]) -> tuple:
    """'none-zero', 'f1=0', 'f2=f3=0' -> sorted indices of vanishing f_i."""
    s = (text or "none-zero").replace(" ", "").lower()
    if s in {"none-zero", "none", ""}:
        return ()
    if not s.endswith("=0"):
        raise SchemaError(f"bad vanishing pattern {text!r}")
    idx = []
    for part in s[:-2].split("="):
        m = re.fullmatch(r"f([0-3])", part)
        if not m:
            raise SchemaError(f"bad vanishing pattern {text!r}")
        idx.append(int(m.group(1)))
    if 0 in idx:
        raise SchemaError("f0 never vanishes")
    return tuple(sorted(set(idx)))


def classify_V2(zero_indices) -> V2Class:
    zeros = tuple(sorted(set(zero_indices)))
    if any(i not in (1, 2, 3) for i in zeros):
        raise SchemaError("vanishing sections are indexed by 1..3")
    t = PointLabel.gen(TAU)
    if len(zeros) == 3:
        raise InconsistencyError("f1 = f2 = f3 = 0: V2 is not locally free")
    if not zeros:
        return V2Class("I", AtiyahExpr((Indecomposable(3, EllLine(1, t)),)), zeros)
    if len(zeros) == 1:
        i = zeros[0]
        Li = PointLabel.L(i)
        return V2Class(
            "II",
            AtiyahExpr((Indecomposable(2, EllLine(1, Li + t)), EllLine(0, Li))),
            zeros,
            note=f"E(2,1) centred at tau_{i}, the point with O(tau_{i}) = L{i}(tau)",
        )
    (i,) = [k for k in (1, 2, 3) if k not in zeros]
    j, k = zeros
    return V2Class(
        "III",
        AtiyahExpr((EllLine(1, PointLabel.L(i) + t), EllLine(0, PointLabel.L(j)), EllLine(0, PointLabel.L(k)))),
        zeros,
    )


# ========================================
# 🎼 THETA PRODUCTS
# ========================================
@dataclass(frozen=True)
class ThetaParams:
    a: Any
    b: Any
    c: Any
    d: Any
    domain: Any

    @classmethod
    def formal(cls) -> "ThetaParams":
        R, (a, b, c, d) = poly_ring("a,b,c,d")
        return cls(a, b, c, d, R.to_domain())

    @classmethod
    def at(cls, values, domain) -> "ThetaParams":
        a, b, c, d = (domain.convert(int(v)) for v in values)
        return cls(a, b, c, d, domain)


@dataclass(frozen=True)
class ThetaProduct:
    label: int  # 0 for O(2[0]), i for L_i(2[0])
    coords: tuple

    def basis(self) -> tuple:
        if self.label == 0:
            return ("f0^2", "f1^2")
        j, k = [x for x in (1, 2, 3) if x != self.label]
        return (f"f0*f{self.label}", f"f{j}*f{k}")


def theta_multiply(m: int, n: int, params: Optional[ThetaParams] = None) -> ThetaProduct:
    """f_m * f_n in the designated basis of H^0(L_{m^n}(2[0]))."""
    if m not in range(4) or n not in range(4):
        raise SchemaError("theta indices are 0..3")
    params = params or ThetaParams.formal()
    K = params.domain
    one, zero = K.one, K.zero
    if m != n:
        return ThetaProduct(m ^ n, (one, zero) if 0 in (m, n) else (zero, one))
    table = {0: (one, zero), 1: (zero, one), 2: (params.a, params.b), 3: (params.c, params.d)}
    return ThetaProduct(0, table[m])


def segre_relation(order: str = "label") -> tuple:
    """The conic through the image of P(V1) in P(S^2 V1).

    'label': sum of squares in (q1^2, q2^2, q3^2, q1q2, q1q3, q2q3);
    'lex': same form in lex order of the q's;
    'monomial': u0*u2 - u1^2 with u = (x0^2, x0x1, x1^2) in lex order.
    """
    if order == "label":
        return (1, 1, 1, 0, 0, 0)
    if order == "lex":
        pairs = list(combinations_with_replacement(range(3), 2))
        return tuple(1 if a == b else 0 for a, b in pairs)
    if order == "monomial":
        pairs = list(combinations_with_replacement(range(3), 2))
        coeffs = {(0, 2): 1, (1, 1): -1}
        return tuple(coeffs.get(p, 0) for p in pairs)
    raise SchemaError(f"unknown basis order {order!r}")


# ========================================
# 🔤 S-EXPRESSIONS
# ========================================
def _line_sexpr(x: EllLine) -> str:
    atoms = str(x.label).split() if not x.label.is_zero else []
    return "(line " + " ".join([str(x.degree)] + [a.replace("*", "") for a in atoms]) + ")"


def to_sexpr(e) -> str:
    if isinstance(e, EllLine):
        return _line_sexpr(e)
    if isinstance(e, Indecomposable):
        return f"(E {e.rank} {_line_sexpr(e.det)})"
    if isinstance(e, AtiyahExpr):
        return "(sum " + " ".join(to_sexpr(t) for t in e.terms) + ")" if e.terms else "(sum)"
    if isinstance(e, Sum):
        return "(sum " + " ".join(to_sexpr(t) for t in e.parts) + ")"
    if isinstance(e, Sym):
        return f"(sym {e.n} {to_sexpr(e.arg)})"
    if isinstance(e, Wedge):
        return f"(wedge {e.k} {to_sexpr(e.arg)})"
    if isinstance(e, Tensor):
        return f"(tensor {to_sexpr(e.left)} {to_sexpr(e.right)})"
    if isinstance(e, Dual):
        return f"(dual {to_sexpr(e.arg)})"
    if isinstance(e, Twist):
        return f"(twist {to_sexpr(e.arg)} {to_sexpr(e.line)})"
    raise SchemaError(f"cannot serialise {e!r}")


def _tokens(text: str) -> list[str]:
    return re.findall(r"\(|\)|[^\s()]+", text)


def parse_sexpr(text: str):
    toks = _tokens(text)
    if not toks:
        raise SchemaError("empty expression")
    node, pos = _read(toks, 0)
    if pos != len(toks):
        raise SchemaError("trailing tokens after expression")
    return _build(node)


def _read(toks, pos):
    if toks[pos] != "(":
        return toks[pos], pos + 1
    out = []
    pos += 1
    while pos < len(toks) and toks[pos] != ")":
        node, pos = _read(toks, pos)
        out.append(node)
    if pos >= len(toks):
        raise SchemaError("unbalanced parentheses")
    return out, pos + 1


def _int(tok) -> int:
    try:
        return int(tok)
    except (TypeError, ValueError):
        raise SchemaError(f"expected an integer, got {tok!r}")


def _build(node):
    if not isinstance(node, list) or not node:
        raise SchemaError(f"expected a list expression, got {node!r}")
    head, args = node[0], node[1:]
    if head == "line":
        if not args or any(isinstance(a, list) for a in args):
            raise SchemaError("(line deg label...) expected")
        return EllLine(_int(args[0]), PointLabel.parse(args[1:]))
    if head == "E":
        line = _build(args[1])
        if not isinstance(line, EllLine):
            raise SchemaError("(E rank (line ...)) expected")
        r = _int(args[0])
        return line if r == 1 else Indecomposable(r, line)
    if head == "sum":
        parts = tuple(_build(a) for a in args)
        if all(isinstance(p, (EllLine, Indecomposable)) for p in parts):
            return AtiyahExpr(parts)
        return Sum(parts)
    if head == "sym":
        return Sym(_int(args[0]), _build(args[1]))
    if head == "wedge":
        return Wedge(_int(args[0]), _build(args[1]))
    if head == "tensor":
        return Tensor(_build(args[0]), _build(args[1]))
    if head == "dual":
        return Dual(_build(args[0]))
    if head == "twist":
        line = _build(args[1])
        if not isinstance(line, EllLine):
            raise SchemaError("twist needs a line bundle")
        return Twist(_build(args[0]), line)
    raise SchemaError(f"unknown constructor {head!r}")

# exactalg.py
"""
Exact linear algebra over Q, prime fields and polynomial rings.

Matrices are stored as tuples of sympy domain elements (QQ, GF(p),
QQ[t], QQ[a,b,c,d], ...). Dense work mod p goes through numpy int64
arrays, which is safe for every modulus below 2^31.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Any, Iterable, Optional, Sequence

import numpy as np
from sympy import GF, QQ, ZZ, Poly
from sympy.polys.galoistools import gf_add, gf_factor, gf_gcd, gf_mul, gf_mul_ground
from sympy.polys.matrices import DomainMatrix
from sympy.polys.rings import ring

from utils.config import DEFAULT_MAX_FAILURE, DEFAULT_PRIME, DEFAULT_SEED, DEFAULT_TRIALS, validate_prime
from utils.errors import ConfidenceError, OutOfScopeError, SchemaError
from utils.logs import get_logger
from utils.polyparse import format_expr, parse_polynomial

log = get_logger("exactalg")

ZZ_GF = ZZ  # coefficient domain for galoistools calls


# ========================================
# 🧮 DOMAINS
# ========================================
def base_field(prime: Optional[int] = None):
    """QQ, or GF(p) for an odd prime p."""
    if prime is None:
        return QQ
    return GF(validate_prime(prime))


def poly_ring(names: str | Sequence[str], prime: Optional[int] = None):
    """(R, gens) with R a sympy PolyRing over QQ or GF(p)."""
    if not isinstance(names, str):
        names = ",".join(names)
    R, *gens = ring(names, base_field(prime))
    return R, tuple(gens)


def is_poly_domain(K) -> bool:
    return bool(getattr(K, "is_PolynomialRing", False))


def to_mod_p(c, K, p: int) -> int:
    """Residue of a scalar of K (QQ, ZZ or GF(q) with q == p) modulo p."""
    if getattr(K, "is_FiniteField", False):
        return int(K.to_int(c)) % p
    num, den = int(K.numer(c)), int(K.denom(c))
    if den % p == 0:
        raise SchemaError(f"prime {p} divides a denominator")
    return num * pow(den, -1, p) % p


def _total_degree(f) -> int:
    if not f:
        return -1
    return max(sum(m) for m in f.monoms())


# ========================================
# 📐 BINARY FORMS
# ========================================
@dataclass(frozen=True)
class BiForm:
    """Binary form: coeffs[i] multiplies t0^(degree-i) t1^i.

    A negative degree is allowed only for the structural zero (empty coeffs).
    """

    degree: int
    coeffs: tuple
    domain: Any = QQ

    def __post_init__(self):
        expected = self.degree + 1 if self.degree >= 0 else 0
        if len(self.coeffs) != expected:
            raise SchemaError(
                f"form of degree {self.degree} needs {expected} coefficients, got {len(self.coeffs)}"
            )
        object.__setattr__(self, "coeffs", tuple(self.domain.convert(c) for c in self.coeffs))

    @classmethod
    def zero(cls, degree: int, domain=QQ) -> "BiForm":
        return cls(degree, (domain.zero,) * (degree + 1 if degree >= 0 else 0), domain)

    @classmethod
    def constant(cls, c, domain=QQ) -> "BiForm":
        return cls(0, (c,), domain)

    @classmethod
    def monomial(cls, degree: int, i: int, c=1, domain=QQ) -> "BiForm":
        coeffs = [domain.zero] * (degree + 1)
        coeffs[i] = domain.convert(c)
        return cls(degree, tuple(coeffs), domain)

    @classmethod
    def linear(cls, a, b, domain=QQ) -> "BiForm":
        """a*t0 + b*t1"""
        return cls(1, (a, b), domain)

    @property
    def is_zero(self) -> bool:
        return all(self.domain.is_zero(c) for c in self.coeffs)

    def __mul__(self, other: "BiForm") -> "BiForm":
        K = self.domain
        deg = self.degree + other.degree
        if deg < 0 or self.degree < 0 or other.degree < 0:
            return BiForm.zero(deg, K)
        out = [K.zero] * (deg + 1)
        for i, a in enumerate(self.coeffs):
            if K.is_zero(a):
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return BiForm(deg, tuple(out), K)

    def __add__(self, other: "BiForm") -> "BiForm":
        if self.degree != other.degree:
            raise SchemaError(f"cannot add forms of degrees {self.degree} and {other.degree}")
        return BiForm(self.degree, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.domain)

    def __neg__(self) -> "BiForm":
        return BiForm(self.degree, tuple(-c for c in self.coeffs), self.domain)

    def __sub__(self, other: "BiForm") -> "BiForm":
        return self + (-other)

    def scale(self, c) -> "BiForm":
        c = self.domain.convert(c)
        return BiForm(self.degree, tuple(c * x for x in self.coeffs), self.domain)

    def evaluate(self, t0, t1):
        K = self.domain
        t0, t1 = K.convert(t0), K.convert(t1)
        total = K.zero
        for i, c in enumerate(self.coeffs):
            total += c * t0 ** (self.degree - i) * t1 ** i
        return total

    def on_chart_t1(self, R):
        """Dehomogenise at t1 = 1; the ring variable stands for t0."""
        return R.from_dict({(self.degree - i,): c for i, c in enumerate(self.coeffs) if c})

    def on_chart_t0(self, R):
        """Dehomogenise at t0 = 1; the ring variable stands for t1."""
        return R.from_dict({(i,): c for i, c in enumerate(self.coeffs) if c})

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        terms = []
        for i, c in enumerate(self.coeffs):
            if self.domain.is_zero(c):
                continue
            mono = "*".join(
                p for p in (
                    _power("t0", self.degree - i),
                    _power("t1", i),
                ) if p
            )
            coeff = str(self.domain.to_sympy(c))
            terms.append(f"{coeff}*{mono}" if mono else coeff)
        return " + ".join(terms)


def _power(name: str, e: int) -> str:
    if e == 0:
        return ""
    return name if e == 1 else f"{name}^{e}"


# ========================================
# 🧱 MATRICES
# ========================================
@dataclass(frozen=True)
class PolyMatrix:
    rows: int
    cols: int
    entries: tuple
    domain: Any = QQ
    degrees: Optional[tuple] = None

    def __post_init__(self):
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise SchemaError(f"entries do not match shape {self.rows}x{self.cols}")
        if self.degrees is not None:
            self._check_degrees()

    def _check_degrees(self):
        if not is_poly_domain(self.domain):
            return
        for i, row in enumerate(self.entries):
            for j, f in enumerate(row):
                if not f:
                    continue
                want = self.degrees[i][j]
                if not f.is_homogeneous or _total_degree(f) != want:
                    raise SchemaError(f"entry ({i},{j}) is not homogeneous of degree {want}")

    # ---- constructors ----
    @classmethod
    def from_rows(cls, rows: Iterable[Iterable], domain=QQ, cols: Optional[int] = None,
                  degrees=None) -> "PolyMatrix":
        rows = [list(r) for r in rows]
        ncols = cols if cols is not None else (len(rows[0]) if rows else 0)
        conv = tuple(tuple(domain.convert(x) for x in r) for r in rows)
        deg = tuple(tuple(r) for r in degrees) if degrees is not None else None
        return cls(len(rows), ncols, conv, domain, deg)

    @classmethod
    def zeros(cls, rows: int, cols: int, domain=QQ) -> "PolyMatrix":
        return cls(rows, cols, tuple((domain.zero,) * cols for _ in range(rows)), domain)

    @classmethod
    def identity(cls, n: int, domain=QQ) -> "PolyMatrix":
        return cls(
            n, n,
            tuple(tuple(domain.one if i == j else domain.zero for j in range(n)) for i in range(n)),
            domain,
        )

    # ---- access ----
    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def entry(self, i: int, j: int):
        return self.entries[i][j]

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.entries)

    def is_zero(self) -> bool:
        return all(self.domain.is_zero(x) for r in self.entries for x in r)

    def nonzero_count(self) -> int:
        return sum(1 for r in self.entries for x in r if not self.domain.is_zero(x))

    def to_lists(self) -> list[list]:
        return [list(r) for r in self.entries]

    def to_domain_matrix(self) -> DomainMatrix:
        return DomainMatrix(self.to_lists(), self.shape, self.domain)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "PolyMatrix":
        return PolyMatrix.from_rows(
            [[self.entries[i][j] for j in cols] for i in rows], self.domain, cols=len(cols)
        )

    def transpose(self) -> "PolyMatrix":
        return PolyMatrix.from_rows(
            [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)],
            self.domain, cols=self.rows,
        )

    T = property(transpose)

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        return matmul(self, other)

    def map(self, fn, domain) -> "PolyMatrix":
        return PolyMatrix.from_rows([[fn(x) for x in r] for r in self.entries], domain, cols=self.cols)

    def __str__(self) -> str:
        return dump_matrix(self)


def matmul(a: PolyMatrix, b: PolyMatrix) -> PolyMatrix:
    if a.cols != b.rows:
        raise SchemaError(f"cannot multiply {a.shape} by {b.shape}")
    K = a.domain
    out = []
    for i in range(a.rows):
        row = []
        for j in range(b.cols):
            acc = K.zero
            for k in range(a.cols):
                x = a.entries[i][k]
                if K.is_zero(x):
                    continue
                y = b.entries[k][j]
                if not K.is_zero(y):
                    acc += x * y
            row.append(acc)
        out.append(row)
    return PolyMatrix.from_rows(out, K, cols=b.cols)


def kron_identity(m: PolyMatrix, n: int) -> PolyMatrix:
    """m ⊗ I_n with row/column index (i, k) -> i*n + k."""
    K = m.domain
    out = [[K.zero] * (m.cols * n) for _ in range(m.rows * n)]
    for i in range(m.rows):
        for j in range(m.cols):
            x = m.entries[i][j]
            for k in range(n):
                out[i * n + k][j * n + k] = x
    return PolyMatrix.from_rows(out, K, cols=m.cols * n)


def evaluate(m: PolyMatrix, values: dict, target=None) -> PolyMatrix:
    """Specialise every generator of a polynomial-ring matrix."""
    K = m.domain
    if not is_poly_domain(K):
        raise SchemaError("evaluate needs a polynomial-ring matrix")
    R = K.ring
    base = R.domain
    target = target or base
    pairs = [(g, base.convert(values[str(g)])) for g in R.gens]

    def _eval(f):
        v = f.evaluate(pairs) if f else base.zero
        if target == base:
            return v
        if getattr(target, "is_FiniteField", False):
            return target(to_mod_p(v, base, target.mod))
        return target.convert_from(v, base)

    return m.map(_eval, target)


# ========================================
# ⚡ MOD-p KERNELS (numpy int64)
# ========================================
def to_numpy_mod_p(m: PolyMatrix, p: int) -> np.ndarray:
    K = m.domain
    out = np.zeros((m.rows, m.cols), dtype=np.int64)
    for i, row in enumerate(m.entries):
        for j, x in enumerate(row):
            if not K.is_zero(x):
                out[i, j] = to_mod_p(x, K, p)
    return out


def rref_mod_p(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    a = np.array(a, dtype=np.int64) % p
    nrows, ncols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            a[[r, k]] = a[[k, r]]
        inv = pow(int(a[r, c]), -1, p)
        a[r] = (a[r] * inv) % p
        col = a[:, c].copy()
        col[r] = 0
        hit = np.nonzero(col)[0]
        if hit.size:
            a[hit] = (a[hit] - (np.outer(col[hit], a[r]) % p)) % p
        pivots.append(c)
        r += 1
    return a, pivots


def rank_mod_p(a: np.ndarray, p: int) -> int:
    if a.size == 0:
        return 0
    return len(rref_mod_p(a, p)[1])


def det_mod_p(a: np.ndarray, p: int) -> int:
    a = np.array(a, dtype=np.int64) % p
    n = a.shape[0]
    det = 1
    for c in range(n):
        nz = np.nonzero(a[c:, c])[0]
        if nz.size == 0:
            return 0
        k = c + int(nz[0])
        if k != c:
            a[[c, k]] = a[[k, c]]
            det = -det
        piv = int(a[c, c])
        det = det * piv % p
        inv = pow(piv, -1, p)
        factors = (a[c + 1:, c] * inv) % p
        if factors.size:
            a[c + 1:] = (a[c + 1:] - (np.outer(factors, a[c]) % p)) % p
    return det % p


def kernel_mod_p(a: np.ndarray, p: int) -> list[np.ndarray]:
    ncols = a.shape[1]
    red, pivots = rref_mod_p(a, p)
    basis = []
    for f in (c for c in range(ncols) if c not in pivots):
        v = np.zeros(ncols, dtype=np.int64)
        v[f] = 1
        for r, pc in enumerate(pivots):
            v[pc] = (-red[r, f]) % p
        basis.append(v)
    return basis


class ParametricEvaluator:
    """Specialise a polynomial-ring matrix mod p from per-monomial tensors."""

    def __init__(self, m: PolyMatrix, prime: int):
        K = m.domain
        if not is_poly_domain(K):
            raise SchemaError("ParametricEvaluator needs a polynomial-ring matrix")
        self.prime = validate_prime(prime)
        self.names = tuple(str(g) for g in K.ring.gens)
        base = K.ring.domain
        index: dict = {}
        slices: list[np.ndarray] = []
        for i, row in enumerate(m.entries):
            for j, f in enumerate(row):
                for mono, c in f.terms():
                    if mono not in index:
                        index[mono] = len(slices)
                        slices.append(np.zeros(m.shape, dtype=np.int64))
                    s = slices[index[mono]]
                    s[i, j] = (s[i, j] + to_mod_p(c, base, self.prime)) % self.prime
        self.monomials = list(index)
        self.tensors = slices
        self.shape = m.shape

    def __call__(self, point: Sequence[int]) -> np.ndarray:
        p = self.prime
        pt = [int(x) % p for x in point]
        out = np.zeros(self.shape, dtype=np.int64)
        for mono, tensor in zip(self.monomials, self.tensors):
            v = 1
            for x, e in zip(pt, mono):
                if e:
                    v = v * pow(x, e, p) % p
            if v:
                out = (out + (tensor * v) % p) % p
        return out

    def pencil(self, base_point: Sequence[int], direction: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
        """(G0, G1) with F(base + s*direction) = G0 + s*G1; linear entries only."""
        if any(sum(m) > 1 for m in self.monomials):
            raise OutOfScopeError("pencil restriction needs entries of degree <= 1")
        p = self.prime
        g0 = self(base_point)
        g1 = np.zeros(self.shape, dtype=np.int64)
        for mono, tensor in zip(self.monomials, self.tensors):
            if sum(mono) == 1:
                k = mono.index(1)
                g1 = (g1 + (tensor * (int(direction[k]) % p)) % p) % p
        return g0, g1


# ========================================
# 🔢 FIELD LINEAR ALGEBRA (sparse rows)
# ========================================
def _as_field(m: PolyMatrix) -> PolyMatrix:
    K = m.domain
    if K.is_Field:
        return m
    F = K.get_field()
    return m.map(lambda x: F.convert_from(x, K), F)


def _rref_sparse(m: PolyMatrix) -> tuple[list[dict], list[int]]:
    K = m.domain
    work = [{j: x for j, x in enumerate(r) if not K.is_zero(x)} for r in m.entries]
    work = [r for r in work if r]
    pivot_rows: list[dict] = []
    pivots: list[int] = []
    for col in range(m.cols):
        at = next((i for i, r in enumerate(work) if col in r), None)
        if at is None:
            continue
        prow = work.pop(at)
        inv = K.one / prow[col]
        prow = {j: x * inv for j, x in prow.items()}
        for r in work + pivot_rows:
            c = r.get(col)
            if c is None:
                continue
            for j, x in prow.items():
                v = r.get(j, K.zero) - c * x
                if K.is_zero(v):
                    r.pop(j, None)
                else:
                    r[j] = v
        work = [r for r in work if r]
        pivot_rows.append(prow)
        pivots.append(col)
    return pivot_rows, pivots


def rank(m: PolyMatrix) -> int:
    """Row-reduction rank; polynomial entries are read in the fraction field."""
    if m.rows == 0 or m.cols == 0:
        return 0
    K = m.domain
    if getattr(K, "is_FiniteField", False) and K.mod < 2**31:
        return rank_mod_p(to_numpy_mod_p(m, K.mod), K.mod)
    return len(_rref_sparse(_as_field(m))[1])


def kernel_basis(m: PolyMatrix) -> list[tuple]:
    """Basis of the right kernel; empty iff m is injective."""
    f = _as_field(m)
    K = f.domain
    pivot_rows, pivots = _rref_sparse(f)
    basis = []
    for free in (c for c in range(f.cols) if c not in pivots):
        v = [K.zero] * f.cols
        v[free] = K.one
        for prow, pc in zip(pivot_rows, pivots):
            v[pc] = -prow.get(free, K.zero)
        basis.append(tuple(v))
    return basis


def determinant(m: PolyMatrix):
    if m.rows != m.cols:
        raise SchemaError(f"determinant of non-square {m.shape}")
    if m.rows == 0:
        return m.domain.one
    return m.to_domain_matrix().det()


# ========================================
# 🎲 GENERIC RANK
# ========================================
@dataclass(frozen=True)
class GenericRank:
    rank: int
    trials: int
    prime: Optional[int]
    degree_bound: int
    failure_bound: float
    failure_formula: str = "(D/p)^trials"  # independent trials; "exact" when no specialisation ran

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "trials": self.trials,
            "prime": self.prime,
            "degree_bound": self.degree_bound,
            "failure_bound": self.failure_bound,
            "failure_formula": self.failure_formula,
        }


def generic_rank(
    m: PolyMatrix,
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
    prime: int = DEFAULT_PRIME,
    max_failure: Optional[float] = DEFAULT_MAX_FAILURE,
) -> GenericRank:
    """Max rank over `trials` random GF(p) specialisations.

    A maximal nonzero minor has degree <= D = min(rows, cols) * (max entry degree),
    so each trial misses it with probability <= D/p and all trials with (D/p)^trials.
    """
    if trials < 1:
        raise SchemaError("trials must be >= 1")
    if not is_poly_domain(m.domain):
        return GenericRank(rank(m), trials, None, 0, 0.0, "exact")
    prime = validate_prime(prime)
    maxdeg = max((_total_degree(f) for r in m.entries for f in r), default=0)
    D = min(m.rows, m.cols) * max(maxdeg, 0)
    if D and prime <= D:
        raise ConfidenceError(f"prime {prime} does not exceed the minor degree bound {D}")
    bound = (D / prime) ** trials if D else 0.0
    if max_failure is not None and bound > max_failure:
        raise ConfidenceError(
            f"failure bound {bound:.3g} exceeds {max_failure:.3g}; raise trials or the prime"
        )
    ev = ParametricEvaluator(m, prime)
    rng = np.random.default_rng(seed)
    best = 0
    for _ in range(trials):
        point = rng.integers(0, prime, size=len(ev.names))
        best = max(best, rank_mod_p(ev(point), prime))
    return GenericRank(best, trials, prime, D, bound)


# ========================================
# 🧷 SMITH NORMAL FORM (univariate PID)
# ========================================
@dataclass(frozen=True)
class SmithForm:
    invariants: tuple  # nonzero monic d_1 | d_2 | ... | d_r
    diagonal: PolyMatrix
    left: PolyMatrix
    right: PolyMatrix

    @property
    def rank(self) -> int:
        return len(self.invariants)

    def valuations(self, g) -> list[int]:
        return [valuation(d, g) for d in self.invariants]


def _pick_min_degree(A, cells):
    best = None
    for i, j in cells:
        x = A[i][j]
        if x and (best is None or x.degree() < A[best[0]][best[1]].degree()):
            best = (i, j)
    return best


def smith_normal_form(m: PolyMatrix) -> SmithForm:
    K = m.domain
    if not is_poly_domain(K) or K.ring.ngens != 1 or not K.ring.domain.is_Field:
        raise SchemaError("Smith form needs entries in a univariate polynomial ring over a field")
    R = K.ring
    n, c = m.shape
    A = m.to_lists()
    L = PolyMatrix.identity(n, K).to_lists()
    Rt = PolyMatrix.identity(c, K).to_lists()

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        L[i], L[j] = L[j], L[i]

    def swap_cols(i, j):
        for M in (A, Rt):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def add_row(src, dst, q):
        # row dst -= q * row src
        for M in (A, L):
            M[dst] = [x - q * y for x, y in zip(M[dst], M[src])]

    def add_col(src, dst, q):
        for M in (A, Rt):
            for row in M:
                row[dst] = row[dst] - q * row[src]

    t = 0
    while t < min(n, c):
        cells = [(i, j) for i in range(t, n) for j in range(t, c)]
        at = _pick_min_degree(A, cells)
        if at is None:
            break
        swap_rows(t, at[0])
        swap_cols(t, at[1])
        while True:
            piv = A[t][t]
            dirty = False
            for i in range(t + 1, n):
                if A[i][t]:
                    q, r = A[i][t].div(piv)
                    add_row(t, i, q)
                    dirty = dirty or bool(r)
            for j in range(t + 1, c):
                if A[t][j]:
                    q, r = A[t][j].div(piv)
                    add_col(t, j, q)
                    dirty = dirty or bool(r)
            if dirty:
                line = [(i, t) for i in range(t, n)] + [(t, j) for j in range(t + 1, c)]
                at = _pick_min_degree(A, line)
                swap_rows(t, at[0])
                swap_cols(t, at[1])
                continue
            bad = next(
                ((i, j) for i in range(t + 1, n) for j in range(t + 1, c)
                 if A[i][j] and A[i][j].rem(piv)),
                None,
            )
            if bad is None:
                break
            # pull the offending row into the pivot row, then reduce again
            add_row(bad[0], t, -R.one)
        inv = R.domain.revert(A[t][t].LC)
        A[t] = [x.mul_ground(inv) for x in A[t]]
        L[t] = [x.mul_ground(inv) for x in L[t]]
        t += 1

    invariants = tuple(A[i][i] for i in range(t))
    return SmithForm(
        invariants=invariants,
        diagonal=PolyMatrix.from_rows(A, K, cols=c),
        left=PolyMatrix.from_rows(L, K, cols=n),
        right=PolyMatrix.from_rows(Rt, K, cols=c),
    )


def valuation(f, g) -> int:
    """Largest e with g^e | f, by repeated exact division."""
    if not f:
        raise SchemaError("valuation of the zero polynomial")
    if g.degree() < 1:
        raise SchemaError("valuation needs a nonconstant divisor")
    e = 0
    q, r = f.div(g)
    while not r:
        e += 1
        f = q
        q, r = f.div(g)
    return e


@dataclass(frozen=True)
class ClosedPoint:
    """Irreducible monic factor of a univariate polynomial; `root` for degree one."""

    poly: Any
    degree: int
    root: Any = None


def points_of(f) -> list[ClosedPoint]:
    """Closed points of the zero locus of a univariate PolyElement."""
    if not f:
        raise SchemaError("zero polynomial has no finite zero locus")
    R = f.ring
    x = R.symbols[0]
    poly = Poly(f.as_expr(), x, domain=R.domain)
    out = []
    for fac, _mult in poly.factor_list()[1]:
        g = R(fac.as_expr()).monic()
        root = -g.coeff(1) if g.degree() == 1 else None
        out.append(ClosedPoint(g, g.degree(), root))
    return out


# ========================================
# 🧹 UNIT PRUNING AND MINOR GCDS
# ========================================
def _unit_inverse(x, K):
    """Inverse of x if x is a unit of K (nonzero constant), else None."""
    if K.is_zero(x):
        return None
    if is_poly_domain(K):
        if not x.is_ground:
            return None
        return K.ring.domain.revert(x.LC)
    if K.is_Field:
        return K.one / x
    return None


def _mul_ground(x, c, K):
    return x.mul_ground(c) if is_poly_domain(K) else x * c


def prune_units(m: PolyMatrix, limit: Optional[int] = None) -> tuple[PolyMatrix, list[tuple[int, int]]]:
    """Cancel unit entries by Schur complement, scanning column-major.

    Each cancellation lowers the size of every Fitting ideal index by one.
    Returned positions index the matrix as it was at the time of the pivot.
    """
    K = m.domain
    A = m.to_lists()
    ncols = m.cols
    removed: list[tuple[int, int]] = []
    while limit is None or len(removed) < limit:
        found = None
        for j in range(ncols):
            for i in range(len(A)):
                inv = _unit_inverse(A[i][j], K)
                if inv is not None:
                    found = (i, j, inv)
                    break
            if found:
                break
        if not found:
            break
        i0, j0, inv = found
        prow = A[i0]
        nxt = []
        for i, row in enumerate(A):
            if i == i0:
                continue
            f = row[j0]
            if K.is_zero(f):
                nxt.append([x for j, x in enumerate(row) if j != j0])
                continue
            f = _mul_ground(f, inv, K)
            nxt.append([x - f * prow[j] for j, x in enumerate(row) if j != j0])
        A = nxt
        ncols -= 1
        removed.append((i0, j0))
    return PolyMatrix.from_rows(A, K, cols=ncols), removed


def minor_gcd(m: PolyMatrix, k: int, max_minors: int = 20000):
    """gcd of all k x k minors, made monic; the zero polynomial if they all vanish."""
    if k < 0 or k > min(m.rows, m.cols):
        raise SchemaError(f"minor size {k} out of range for {m.shape}")
    K = m.domain
    one = K.one
    if k == 0:
        return one
    pruned, removed = prune_units(m, limit=k)
    k2 = k - len(removed)
    if k2 == 0:
        return one
    count = _choose(pruned.rows, k2) * _choose(pruned.cols, k2)
    if count > max_minors:
        if is_poly_domain(K) and K.ring.ngens == 1:
            log.info("⚠️ %d minors, using the Smith product instead", count)
            snf = smith_normal_form(pruned)
            if snf.rank < k2:
                return K.zero
            g = one
            for d in snf.invariants[:k2]:
                g = g * d
            return g
        raise OutOfScopeError(f"{count} minors exceed the configured limit {max_minors}")
    g = K.zero
    for rs in combinations(range(pruned.rows), k2):
        for cs in combinations(range(pruned.cols), k2):
            d = determinant(pruned.submatrix(rs, cs))
            if K.is_zero(d):
                continue
            g = d if K.is_zero(g) else _gcd(g, d, K)
            if _unit_inverse(g, K) is not None:
                return one
    if K.is_zero(g):
        return g
    return g.monic() if is_poly_domain(K) else one


def _gcd(a, b, K):
    return a.gcd(b) if is_poly_domain(K) else K.gcd(a, b)


def _choose(n: int, k: int) -> int:
    return comb(n, k)


# ========================================
# 📈 RANDOM-LINE MINOR GCD (mod p)
# ========================================
def interpolate_mod_p(xs: Sequence[int], ys: Sequence[int], p: int) -> list[int]:
    """Lagrange interpolation; coefficients high to low (galoistools order)."""
    result: list[int] = []
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        num = [1]
        den = 1
        for j, xj in enumerate(xs):
            if j != i:
                num = gf_mul(num, [1, (-xj) % p], p, ZZ_GF)
                den = den * (xi - xj) % p
        coef = yi * pow(den, -1, p) % p
        result = gf_add(result, gf_mul_ground(num, coef, p, ZZ_GF), p, ZZ_GF)
    return result


def pencil_minor_gcd(g0: np.ndarray, g1: np.ndarray, k: int, p: int,
                     rng: np.random.Generator, combos: int = 2) -> list[int]:
    """gcd over GF(p)[s] of random combinations of the k x k minors of g0 + s*g1."""
    rows, cols = g0.shape
    xs = list(range(k + 1))
    g: list[int] = []
    for _ in range(combos):
        left = rng.integers(0, p, size=(k, rows))
        right = rng.integers(0, p, size=(cols, k))
        ys = []
        for s in xs:
            a = (g0 + (g1 * s) % p) % p
            a = _mulmod(_mulmod(left, a, p), right, p)
            ys.append(det_mod_p(a, p))
        h = interpolate_mod_p(xs, ys, p)
        g = gf_gcd(g, h, p, ZZ_GF) if g else h
    return g


def _mulmod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    # row by row keeps every partial sum below 2^63
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for k in range(a.shape[1]):
        out = (out + np.outer(a[:, k], b[k]) % p) % p
    return out


def roots_mod_p(f: Sequence[int], p: int) -> list[int]:
    if len(f) <= 1:
        return []
    _, factors = gf_factor(list(f), p, ZZ_GF)
    return sorted((-g[1]) % p for g, _ in factors if len(g) == 2)


# ========================================
# 💾 TEXT FORMAT
# ========================================
def _domain_token(K) -> str:
    if is_poly_domain(K):
        R = K.ring
        return f"{_domain_token(R.domain)}[{','.join(str(g) for g in R.gens)}]"
    if getattr(K, "is_FiniteField", False):
        return f"GF({K.mod})"
    return "QQ"


def _parse_domain(token: str):
    token = token.strip()
    names = None
    if "[" in token:
        token, rest = token.split("[", 1)
        names = rest.rstrip("]")
    prime = None
    if token.startswith("GF(") and token.endswith(")"):
        prime = int(token[3:-1])
    elif token != "QQ":
        raise SchemaError(f"unknown field token {token!r}")
    if names:
        R, _ = poly_ring(names, prime)
        return R.to_domain(), [str(g) for g in R.gens]
    return base_field(prime), []


def dump_matrix(m: PolyMatrix) -> str:
    """`rows cols field` header, then one entry per line in row-major order."""
    K = m.domain
    lines = [f"{m.rows} {m.cols} {_domain_token(K)}"]
    for row in m.entries:
        for x in row:
            lines.append(format_expr(K.to_sympy(x)))
    return "\n".join(lines) + "\n"


def load_matrix(text: str) -> PolyMatrix:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise SchemaError("empty matrix text")
    try:
        r, c, token = lines[0].split(None, 2)
        r, c = int(r), int(c)
    except ValueError:
        raise SchemaError(f"bad matrix header {lines[0]!r}")
    K, names = _parse_domain(token)
    body = lines[1:]
    if len(body) != r * c:
        raise SchemaError(f"expected {r * c} entries, found {len(body)}")
    vals = [K.from_sympy(parse_polynomial(s, names)) for s in body]
    return PolyMatrix.from_rows([vals[i * c:(i + 1) * c] for i in range(r)], K, cols=c)

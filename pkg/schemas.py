# schemas.py
from __future__ import annotations

import json
from itertools import combinations_with_replacement
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, ValidationError, model_validator

from ellbundles import TauContext, parse_pattern, parse_sexpr, rewrite
from exactalg import BiForm
from genus2core import Genus2FiveTuple, LocalFiberModel
from genus3core import Genus3FiveTuple
from p1bundles import GradedMap, SplitBundle, sym_power
from utils.errors import SchemaError
from utils.polyparse import parse_binary_form


# ========================================
# 📄 TUPLE FILES
# ========================================
class BaseCurveSpec(BaseModel):
    genus: int = Field(default=0, ge=0)


class V1Spec(BaseModel):
    degrees: Optional[List[int]] = None  # splitting type on P^1
    expr: Optional[str] = None  # s-expression on an elliptic curve
    degree: Optional[int] = None  # when nothing else is known

    @model_validator(mode="after")
    def _one_source(self):
        given = [x for x in (self.degrees, self.expr) if x is not None]
        if len(given) > 1:
            raise ValueError("give either degrees or expr for v1")
        if not given and self.degree is None:
            raise ValueError("v1 needs degrees, expr or degree")
        return self


class LocalModelSpec(BaseModel):
    s: int = Field(..., ge=1)
    lam: int = 0
    q6: Optional[str] = None


class TauSpec(BaseModel):
    degree: int = 0
    context: Optional[str] = None  # [0], general, L1..L3, M1..M8
    local_models: List[LocalModelSpec] = Field(default_factory=list)


class XiSpec(BaseModel):
    v2_degrees: Optional[List[int]] = None
    sigma2: Optional[List[List[str]]] = None
    pattern: Optional[str] = None

    @model_validator(mode="after")
    def _matrix_needs_degrees(self):
        if (self.sigma2 is None) != (self.v2_degrees is None):
            raise ValueError("sigma2 and v2_degrees go together")
        return self


class TupleFile(BaseModel):
    kind: Literal["genus2", "genus3"]
    base: BaseCurveSpec = Field(default_factory=BaseCurveSpec)
    v1: V1Spec
    tau: TauSpec = Field(default_factory=TauSpec)
    xi: Optional[XiSpec] = None
    w: Optional[List[str]] = None
    two_connected: bool = False

    @classmethod
    def from_json(cls, text: str) -> "TupleFile":
        try:
            return cls.model_validate_json(text)
        except ValidationError as e:
            raise SchemaError(f"invalid tuple file: {e.errors()[0]['msg']} at {e.errors()[0]['loc']}")

    def dump(self) -> str:
        return self.model_dump_json(exclude_none=True, indent=2)

    # ---- conversion ----
    def _v1(self):
        if self.v1.degrees is not None:
            return SplitBundle(tuple(self.v1.degrees))
        if self.v1.expr is not None:
            if self.base.genus != 1:
                raise SchemaError("Atiyah expressions describe bundles on an elliptic base")
            return rewrite(parse_sexpr(self.v1.expr))
        return None

    def _sigma2(self, v1) -> Optional[GradedMap]:
        if self.xi is None or self.xi.sigma2 is None:
            return None
        if not isinstance(v1, SplitBundle):
            raise SchemaError("an explicit sigma2 needs V1 as a splitting type")
        src = tuple(
            v1.degrees[i] + v1.degrees[j]
            for i, j in combinations_with_replacement(range(v1.rank), 2)
        )
        return GradedMap.from_rows(src, tuple(self.xi.v2_degrees), self.xi.sigma2)

    def to_tuple(self):
        v1 = self._v1()
        deg_v1 = v1.degree if v1 is not None else self.v1.degree
        if v1 is not None and self.v1.degree is not None and self.v1.degree != deg_v1:
            raise SchemaError(f"v1.degree {self.v1.degree} differs from the bundle degree {deg_v1}")
        sigma2 = self._sigma2(v1)
        if self.kind == "genus2":
            pattern = None
            if self.xi is not None and self.xi.pattern is not None:
                pattern = parse_pattern(self.xi.pattern)
            return Genus2FiveTuple(
                base_genus=self.base.genus,
                v1_degree=deg_v1,
                tau_degree=self.tau.degree,
                v1=v1,
                sigma2=sigma2,
                pattern=pattern,
                tau_context=TauContext.parse(self.tau.context),
                w=tuple(self.w) if self.w else None,
                local_models=tuple(LocalFiberModel(m.s, m.lam, m.q6) for m in self.tau.local_models),
                two_connected_declared=self.two_connected,
            )
        w = None
        if self.w is not None:
            if sigma2 is None:
                raise SchemaError("w is read against an explicit sigma2")
            shift = deg_v1 + self.tau.degree
            degrees = sym_power(sigma2, 2).target_degrees
            if len(self.w) != len(degrees):
                raise SchemaError(f"w needs {len(degrees)} entries, got {len(self.w)}")
            w = tuple(_form(text, d - shift) for text, d in zip(self.w, degrees))
        return Genus3FiveTuple(
            base_genus=self.base.genus,
            v1_degree=deg_v1,
            tau_degree=self.tau.degree,
            v1=v1 if isinstance(v1, SplitBundle) else None,
            sigma2=sigma2,
            w=w,
            two_connected_declared=self.two_connected,
        )


def _form(text: str, degree: int) -> BiForm:
    coeffs = parse_binary_form(text, degree)
    if not coeffs:
        return BiForm.zero(degree)
    return BiForm(degree, tuple(coeffs))


# ========================================
# 🧾 REPORTS
# ========================================
class ConditionOut(BaseModel):
    name: str
    status: Literal["verified", "violated", "out-of-scope"]
    detail: str = ""


class Report(BaseModel):
    command: str
    input: Dict[str, Any] = Field(default_factory=dict)
    invariants: Dict[str, Any] = Field(default_factory=dict)
    bundles: Dict[str, Any] = Field(default_factory=dict)
    admissibility: List[ConditionOut] = Field(default_factory=list)
    provenance: List[str] = Field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), indent=2, sort_keys=True, default=str)

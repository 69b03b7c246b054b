from fractions import Fraction
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator
from sympy import isprime

from flatrank.config import get_settings

# Schema version written into every report document
REPORT_VERSION = "1"


class FieldSpec(BaseModel):
    """Coefficient field: a prime field F_p or the rationals."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["prime", "rational"] = "prime"
    p: int | None = None

    @model_validator(mode="after")
    def check_modulus(self):
        if self.kind == "prime":
            if self.p is None:
                raise ValueError("a prime field needs a modulus")
            if self.p <= 2 or not isprime(self.p):
                raise ValueError(f"modulus {self.p} is not an odd prime")
        elif self.p is not None:
            raise ValueError("the rational field takes no modulus")
        return self

    @classmethod
    def prime_field(cls, p: int | None = None) -> "FieldSpec":
        return cls(kind="prime", p=p if p is not None else get_settings().default_prime)

    @classmethod
    def rational(cls) -> "FieldSpec":
        return cls(kind="rational")

    @property
    def label(self) -> str:
        return f"F_{self.p}" if self.kind == "prime" else "Q"

    def reduce(self, value: int | Fraction) -> int | Fraction:
        """Normalize a coefficient; prime fields use the symmetric residue so +-1 stay +-1."""
        if self.kind == "rational":
            if isinstance(value, Fraction) and value.denominator == 1:
                return value.numerator
            return value
        if isinstance(value, Fraction):
            value = value.numerator * pow(value.denominator, -1, self.p) if value.denominator != 1 else value.numerator
        residue = value % self.p
        return residue - self.p if residue > self.p // 2 else residue


class RankResult(BaseModel):
    rank: int = Field(ge=0)
    rows: int = Field(ge=0)
    cols: int = Field(ge=0)
    field_spec: FieldSpec
    method: Literal["dense-elimination", "sparse-elimination", "fraction-free"]
    certified: bool = False
    justification: str | None = None
    primes: list[int] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_rank_bound(self):
        if self.rank > min(self.rows, self.cols):
            raise ValueError(f"rank {self.rank} exceeds min({self.rows}, {self.cols})")
        return self


class CheckOutcome(BaseModel):
    """One named check. Checks outside a theorem's range are recorded with asserted=False."""

    name: str
    passed: bool
    asserted: bool = True
    expected: int | None = None
    observed: int | None = None
    detail: str = ""


class FlatteningReport(BaseModel):
    subject: Literal["cw_power", "matmul"] = "cw_power"
    m: int | None = None
    q: int | None = None
    n: int | None = None
    p: int = 1
    variant: str = "Tq"
    rows: int
    cols: int
    rank: RankResult
    expected_rank: int | None = None
    lo_bound: int
    in_theorem_range: bool = False
    checks: list[CheckOutcome] = Field(default_factory=list)
    component_ranks: dict[str, int] = Field(default_factory=dict)
    primes: list[int] = Field(default_factory=list)
    seed: int | None = None
    wall_time: float = 0.0
    notes: list[str] = Field(default_factory=list)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks if check.asserted)

    def check(self, name: str) -> CheckOutcome:
        for outcome in self.checks:
            if outcome.name == name:
                return outcome
        raise KeyError(name)


# === Image tables ===


class ImageTerm(BaseModel):
    """One summand e_a ^ e_b (x) c_K, with the wedge written in the order the table states it."""

    model_config = ConfigDict(frozen=True)

    wedge: tuple[int, int]
    c_index: tuple[int, ...]
    coef: int = 1


class ImageTableEntry(BaseModel):
    family: str
    block: str
    x: int = Field(ge=0, le=2)
    b_index: tuple[int, ...]
    expected: list[ImageTerm]

    @model_validator(mode="after")
    def check_terms(self):
        if len(self.expected) > 2 or any(term.coef not in (1, -1) for term in self.expected):
            raise ValueError("an image holds at most two terms with coefficients +-1")
        return self

    @property
    def label(self) -> str:
        return f"{self.family}: e{self.x} x b{self.b_index}"


class TableVerdict(BaseModel):
    q: int
    m: int
    count: int
    expected_count: int
    block_counts: dict[str, int]
    expected_block_counts: dict[str, int]
    matched: int
    mismatched: list[str] = Field(default_factory=list)
    listed_rank: int
    column_space_rank: int
    combined_rank: int

    @computed_field  # type: ignore[prop-decorator]
    @property
    def independent(self) -> bool:
        return self.listed_rank == self.count

    @computed_field  # type: ignore[prop-decorator]
    @property
    def spans(self) -> bool:
        return self.listed_rank == self.combined_rank == self.column_space_rank

    @computed_field  # type: ignore[prop-decorator]
    @property
    def counts_match(self) -> bool:
        return self.count == self.expected_count and self.block_counts == self.expected_block_counts

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        return not self.mismatched and self.independent and self.spans and self.counts_match


# === Report documents ===


class Environment(BaseModel):
    primes: list[int]
    seed: int | None = None


class ReportDocument(BaseModel):
    version: str = REPORT_VERSION
    command: str
    params: dict[str, Any] = Field(default_factory=dict)
    reports: list[FlatteningReport] = Field(default_factory=list)
    checks: list[CheckOutcome] = Field(default_factory=list)
    environment: Environment

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        return all(report.passed for report in self.reports) and all(
            check.passed for check in self.checks if check.asserted
        )

from typing import Optional

from pydantic import BaseModel


class MembershipReport(BaseModel):
    """Result of checking a matrix against the positive monoid fixing p"""

    is_row_stochastic: bool
    row_sum_violation: float
    fixes_p: bool
    stationarity_violation: float
    is_nonnegative: bool
    min_entry: float
    violated: Optional[str] = None

    @property
    def is_member(self) -> bool:
        return self.is_row_stochastic and self.fixes_p and self.is_nonnegative


class CheckResult(BaseModel):
    """Outcome of one named property check"""

    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0

"""Discharge-workflow arithmetic: length-of-stay impact of starting
insurance authorization at admission instead of at discharge readiness,
per-day cost savings by hospital ownership, and the year-over-year
expense trend table.
"""

import csv
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Optional

from .errors import EmptyCohort, NonConsecutiveYears, UnknownOwnership

TRADITIONAL = "traditional"
PREDICTIVE = "predictive"

DEFAULT_PAC_SERVICE_DAYS = 7.0
DEFAULT_AUTHORIZATION_DAYS = 2.0

DEFAULT_PER_DAY_EXPENSE = {
    "state_government": 1974.0,
    "non_profit": 2346.0,
    "for_profit": 1798.0,
}


@dataclass(frozen=True)
class FlowScenario:
    pac_service_days: float = DEFAULT_PAC_SERVICE_DAYS
    authorization_days: float = DEFAULT_AUTHORIZATION_DAYS
    policy: str = TRADITIONAL

    def __post_init__(self):
        if self.pac_service_days < 1:
            raise ValueError("pac_service_days must be >= 1")
        if self.authorization_days < 0:
            raise ValueError("authorization_days must be >= 0")
        if self.policy not in (TRADITIONAL, PREDICTIVE):
            raise ValueError(f"unknown policy {self.policy!r}")


@dataclass(frozen=True)
class CostModel:
    per_day: dict = field(default_factory=lambda: dict(DEFAULT_PER_DAY_EXPENSE))

    def __post_init__(self):
        for ownership, rate in self.per_day.items():
            if rate <= 0:
                raise ValueError(f"per-day expense for {ownership!r} must be positive")

    def rate(self, ownership):
        try:
            return self.per_day[ownership]
        except KeyError:
            raise UnknownOwnership(ownership, self.per_day) from None


@dataclass(frozen=True)
class ExpenseTrendRow:
    year: int
    expense: float
    pct_change: Optional[float]
    moving_avg: Optional[float]


@dataclass(frozen=True)
class CohortImpactReport:
    n_test: int
    flagged: int
    true_positives: int
    false_positive_authorizations: int
    days_saved_per_patient: float
    percent_reduction: float
    days_saved_total: float
    dollars_saved_total: float
    ownership: str
    traditional_los: float
    predictive_los: float


def total_los(scenario):
    """Inpatient days under one policy.

    The traditional path serializes authorization after care readiness;
    the predictive path runs it in parallel from day 1.
    """
    x = scenario.pac_service_days
    a = scenario.authorization_days
    if scenario.policy == TRADITIONAL:
        return x + a
    return max(x, a)


def los_reduction(pac_service_days, authorization_days):
    """Days and percent saved by switching policies: (min(X,A), 100*min/(X+A))."""
    scenario = FlowScenario(pac_service_days, authorization_days, TRADITIONAL)
    traditional = total_los(scenario)
    predictive = max(pac_service_days, authorization_days)
    saved = traditional - predictive
    return saved, 100.0 * saved / traditional


def cost_savings(days_saved, ownership, cost_model=CostModel()):
    if days_saved < 0:
        raise ValueError("days_saved must be >= 0")
    return days_saved * cost_model.rate(ownership)


def round2(value):
    """Half-up rounding to cents/percent style 2 decimals."""
    return float(Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def expense_trend(expenses):
    """Year-over-year change and its 3-year moving average.

    pct_change uses the current-year denominator, 100*(E_t - E_{t-1})/E_t,
    defined from the second year; moving_avg is the mean of the last
    three pct_change values, defined from the fourth year. Both columns
    are rounded half-up to 2 decimals on output; the moving average is
    taken over full-precision values.
    """
    if not expenses:
        raise ValueError("need at least one (year, expense) row")
    years = [int(y) for y, _ in expenses]
    for prev, cur in zip(years, years[1:]):
        if cur != prev + 1:
            raise NonConsecutiveYears(f"{prev} -> {cur}")
    values = [float(e) for _, e in expenses]
    if any(v <= 0 for v in values):
        raise ValueError("expenses must be positive")
    pct = [None]
    for prev, cur in zip(values, values[1:]):
        pct.append(100.0 * (cur - prev) / cur)
    rows = []
    for i, (year, expense) in enumerate(zip(years, values)):
        ma = None
        if i >= 3:
            window = pct[i - 2 : i + 1]
            ma = round2(sum(window) / 3.0)
        rows.append(
            ExpenseTrendRow(
                year=year,
                expense=expense,
                pct_change=None if pct[i] is None else round2(pct[i]),
                moving_avg=ma,
            )
        )
    return rows


def load_expenses(path):
    """Read a (year, expense_per_day) CSV with that exact header."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["year", "expense_per_day"]:
            raise ValueError(f"expected header year,expense_per_day, got {header}")
        out = []
        for raw in reader:
            if len(raw) != 2:
                raise ValueError(f"bad expense row: {raw}")
            out.append((int(raw[0]), float(raw[1])))
    return out


def simulate_policy_cohort(
    report,
    pac_service_days=DEFAULT_PAC_SERVICE_DAYS,
    authorization_days=DEFAULT_AUTHORIZATION_DAYS,
    ownership="non_profit",
    cost_model=CostModel(),
):
    """Cohort-level impact of acting on the model's flags.

    Rows the model flags (true and false positives) get authorization
    started on day 1. Only true positives realize the LOS saving; false
    positives cost administrative effort but no extra days.
    """
    if report.n_test == 0:
        raise EmptyCohort("report covers zero test rows")
    days_each, percent = los_reduction(pac_service_days, authorization_days)
    confusion = report.confusion
    tp = confusion.tp
    fp = confusion.fp
    days_total = tp * days_each
    dollars = cost_savings(days_total, ownership, cost_model)
    return CohortImpactReport(
        n_test=report.n_test,
        flagged=tp + fp,
        true_positives=tp,
        false_positive_authorizations=fp,
        days_saved_per_patient=days_each,
        percent_reduction=percent,
        days_saved_total=days_total,
        dollars_saved_total=dollars,
        ownership=ownership,
        traditional_los=pac_service_days + authorization_days,
        predictive_los=max(pac_service_days, authorization_days),
    )

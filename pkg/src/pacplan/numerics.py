"""Statistical primitives: chi-square tests, the chi-square survival
function, and partition-counting multipliers for multiple-comparison
adjustment.

Everything here is pure and dependency-free so the tree code can call it
in tight loops without pulling in a numeric stack.
"""

import math
from dataclasses import dataclass

from .errors import DegenerateTable

_EPS = 1e-15
_FPMIN = 1e-300
_MAX_ITER = 500


@dataclass(frozen=True)
class ContingencyTable:
    """Observed frequencies, rows x columns, with labels."""

    row_labels: tuple
    col_labels: tuple
    counts: tuple  # tuple of row tuples, non-negative ints

    def __post_init__(self):
        if len(self.counts) != len(self.row_labels):
            raise ValueError("row label/count mismatch")
        for row in self.counts:
            if len(row) != len(self.col_labels):
                raise ValueError("column label/count mismatch")
            for c in row:
                if c < 0:
                    raise ValueError("negative cell count")
        if self.grand_total() < 1:
            raise ValueError("empty table")

    @classmethod
    def from_pairs(cls, pairs, row_labels=None, col_labels=None):
        """Build from (row_value, col_value) observations.

        Label order defaults to first-seen order so callers that want a
        specific order pass it explicitly.
        """
        if row_labels is None:
            row_labels = []
            for r, _ in pairs:
                if r not in row_labels:
                    row_labels.append(r)
        if col_labels is None:
            col_labels = []
            for _, c in pairs:
                if c not in col_labels:
                    col_labels.append(c)
        r_index = {lab: i for i, lab in enumerate(row_labels)}
        c_index = {lab: i for i, lab in enumerate(col_labels)}
        cells = [[0] * len(col_labels) for _ in row_labels]
        for r, c in pairs:
            cells[r_index[r]][c_index[c]] += 1
        return cls(tuple(row_labels), tuple(col_labels),
                   tuple(tuple(row) for row in cells))

    def grand_total(self):
        return sum(sum(row) for row in self.counts)

    def row_totals(self):
        return tuple(sum(row) for row in self.counts)

    def col_totals(self):
        return tuple(sum(row[j] for row in self.counts)
                     for j in range(len(self.col_labels)))

    def percentages(self):
        """Cell percentages of the grand total, same shape as counts."""
        total = self.grand_total()
        return tuple(tuple(100.0 * c / total for c in row)
                     for row in self.counts)


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    df: int
    p_value: float


def chi_square_independence(table):
    """Pearson chi-square test of independence on a contingency table.

    Rows and columns with zero marginal totals are dropped before the
    test; no continuity correction is applied.
    """
    rows = [list(r) for r in table.counts]
    keep_rows = [i for i, r in enumerate(rows) if sum(r) > 0]
    keep_cols = [j for j in range(len(table.col_labels))
                 if sum(rows[i][j] for i in keep_rows) > 0]
    if len(keep_rows) < 2 or len(keep_cols) < 2:
        raise DegenerateTable(
            f"need at least a 2x2 table after dropping empty lines, "
            f"got {len(keep_rows)}x{len(keep_cols)}"
        )
    obs = [[rows[i][j] for j in keep_cols] for i in keep_rows]
    row_tot = [sum(r) for r in obs]
    col_tot = [sum(r[j] for r in obs) for j in range(len(keep_cols))]
    total = sum(row_tot)
    stat = 0.0
    for i, rt in enumerate(row_tot):
        for j, ct in enumerate(col_tot):
            expected = rt * ct / total
            diff = obs[i][j] - expected
            stat += diff * diff / expected
    df = (len(keep_rows) - 1) * (len(keep_cols) - 1)
    return ChiSquareResult(stat, df, chi_square_sf(stat, df))


def chi_square_sf(x, df):
    """Survival function of the chi-square distribution.

    Equals Q(df/2, x/2), the regularized upper incomplete gamma
    function, evaluated by the classic series / continued-fraction
    hybrid.
    """
    if x < 0:
        raise ValueError("x must be non-negative")
    if df < 1:
        raise ValueError("df must be a positive integer")
    return _gamma_q(df / 2.0, x / 2.0)


def _gamma_q(a, x):
    """Regularized upper incomplete gamma Q(a, x)."""
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_p_series(a, x)
    return _gamma_q_contfrac(a, x)


def _gamma_p_series(a, x):
    """Series expansion for P(a, x), fastest for x < a + 1."""
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))

def _gamma_q_contfrac(a, x):
    """Lentz continued fraction for Q(a, x), for x >= a + 1."""
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def bonferroni_multiplier(c, r, kind):
    """Number of admissible ways to partition c categories into r groups.

    Ordinal predictors allow only contiguous groupings, C(c-1, r-1);
    nominal predictors allow any set partition, the Stirling number of
    the second kind S(c, r).
    """
    if not 1 <= r <= c:
        raise ValueError(f"need 1 <= r <= c, got c={c} r={r}")
    if kind == "ordinal":
        return math.comb(c - 1, r - 1)
    if kind == "nominal":
        return _stirling2(c, r)
    raise ValueError(f"unknown kind {kind!r}")


def _stirling2(n, k):
    """Stirling number of the second kind, exact integer arithmetic."""
    total = 0
    for i in range(k + 1):
        term = math.comb(k, i) * (k - i) ** n
        total += term if i % 2 == 0 else -term
    return total // math.factorial(k)

"""Plate-count pressure-drop calibration against bench measurements.

Fits three candidate models of the N-plate drop to measured data and scores
them the same way: drop = a*sqrt(N) with a fitted, drop = sqrt(N)*dp_o with
the single-plate drop fixed, and a second-order polynomial through the
origin.  Plate counts of zero (plain tube baseline) never enter coefficient
estimation, but the models are scored over every row provided, the baseline
included, where they predict zero drop.

Pressure drops are kept in kPa throughout, matching the measurement files;
all three scores are invariant to that scale choice.
"""

import math
from dataclasses import dataclass

from .errors import (ConfigError, DegenerateFit, InsufficientData,
                     MissingBaseline, ZeroVariance)

CSV_HEADER = "n_plates,mean_time,std_time,delta_t,pressure_drop"


@dataclass(frozen=True)
class MeasurementRow:
    """One resistor's timing/drop summary: fill times in s, drop in kPa."""

    n_plates: int
    mean_time: float
    std_time: float
    delta_t: float
    pressure_drop: float


class MeasurementSet:
    """Rows keyed by unique, non-negative plate count."""

    def __init__(self, rows):
        rows = tuple(rows)
        seen = set()
        for row in rows:
            if row.n_plates < 0:
                raise ConfigError(f"negative plate count {row.n_plates}")
            if row.n_plates in seen:
                raise ConfigError(f"duplicate plate count {row.n_plates}")
            if row.pressure_drop < 0.0:
                raise ConfigError("pressure_drop must be >= 0")
            seen.add(row.n_plates)
        self.rows = rows

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)


# Bench characterisation of the printed resistor family (N0..N7 plates) at a
# 50 kPa input: mean/STD time to 95% of the input, delay versus the plain
# tube, and the drop at the activation inflection.
REFERENCE_MEASUREMENTS = MeasurementSet([
    MeasurementRow(0, 7.15, 0.11, 0.00, 2.19),
    MeasurementRow(1, 7.81, 0.05, 0.66, 12.95),
    MeasurementRow(2, 8.93, 0.09, 1.78, 17.91),
    MeasurementRow(3, 8.77, 0.04, 1.62, 19.90),
    MeasurementRow(4, 8.88, 0.12, 1.73, 25.41),
    MeasurementRow(5, 9.34, 0.09, 2.19, 23.67),
    MeasurementRow(6, 9.86, 0.42, 2.71, 23.46),
    MeasurementRow(7, 14.41, 0.12, 7.25, 34.66),
])

# Scores published with the bench data, fitted on the raw per-trial records
# (4 trials per resistor; only the means above are available here).  Printed
# next to our on-means scores for comparison, never asserted against.
PUBLISHED_SCORES = {
    "scaled_sqrt": (3.1, 0.89),
    "fixed_sqrt": (3.15, 0.88),
    "poly2": (3.94, 0.84),
}


@dataclass(frozen=True)
class FitResult:
    model: str
    coefficients: tuple
    rmse: float
    r_squared: float

    def predict(self, n_plates):
        if self.model == "poly2":
            a1, a2 = self.coefficients
            return a1 * n_plates + a2 * n_plates * n_plates
        (a,) = self.coefficients
        return a * math.sqrt(n_plates)


def goodness(observed, predicted):
    """(RMSE, R^2) with R^2 = 1 - SSE/SST about the observed mean."""
    observed = [float(y) for y in observed]
    predicted = [float(y) for y in predicted]
    if len(observed) != len(predicted) or not observed:
        raise InsufficientData("observed/predicted must be equal-length, non-empty")
    m = len(observed)
    sse = sum((y - p) ** 2 for y, p in zip(observed, predicted))
    ybar = sum(observed) / m
    sst = sum((y - ybar) ** 2 for y in observed)
    if sst == 0.0:
        raise ZeroVariance("observed values are constant; R^2 undefined")
    return math.sqrt(sse / m), 1.0 - sse / sst


def _usable(data):
    return [row for row in data if row.n_plates >= 1]


def _score(data, predict):
    observed = [row.pressure_drop for row in data]
    predicted = [predict(row.n_plates) for row in data]
    return goodness(observed, predicted)


def fit_scaled_sqrt(data):
    """Least-squares a for drop = a*sqrt(N); closed form a = sum(sqrt(N)*y)/sum(N)."""
    usable = _usable(data)
    if len(usable) < 2:
        raise InsufficientData(
            f"need >= 2 rows with plates, got {len(usable)}")
    num = sum(math.sqrt(row.n_plates) * row.pressure_drop for row in usable)
    den = sum(row.n_plates for row in usable)
    a = num / den
    rmse, r2 = _score(data, lambda n: a * math.sqrt(n))
    return FitResult("scaled_sqrt", (a,), rmse, r2)


def evaluate_fixed_sqrt(data, delta_p_o=None):
    """Score drop = sqrt(N)*dp_o with the single-plate drop fixed, no fitting.

    ``delta_p_o`` defaults to the measured N=1 row of the data set.
    """
    if delta_p_o is None:
        for row in data:
            if row.n_plates == 1:
                delta_p_o = row.pressure_drop
                break
        else:
            raise MissingBaseline("no N=1 row to anchor the single-plate drop")
    if delta_p_o <= 0.0:
        raise MissingBaseline(f"single-plate drop must be > 0, got {delta_p_o}")
    rmse, r2 = _score(data, lambda n: delta_p_o * math.sqrt(n))
    return FitResult("fixed_sqrt", (delta_p_o,), rmse, r2)


def fit_poly2(data):
    """Least-squares drop = a1*N + a2*N^2 via the 2x2 normal equations."""
    usable = _usable(data)
    if len(usable) < 3:
        raise InsufficientData(
            f"need >= 3 rows with plates, got {len(usable)}")
    s2 = sum(row.n_plates ** 2 for row in usable)
    s3 = sum(row.n_plates ** 3 for row in usable)
    s4 = sum(row.n_plates ** 4 for row in usable)
    sy1 = sum(row.n_plates * row.pressure_drop for row in usable)
    sy2 = sum(row.n_plates ** 2 * row.pressure_drop for row in usable)
    det = s2 * s4 - s3 * s3
    if abs(det) <= 1e-12 * max(s2 * s4, s3 * s3):
        raise DegenerateFit("normal equations are singular (plate counts coincide)")
    a1 = (sy1 * s4 - sy2 * s3) / det
    a2 = (s2 * sy2 - s3 * sy1) / det
    rmse, r2 = _score(data, lambda n: a1 * n + a2 * n * n)
    return FitResult("poly2", (a1, a2), rmse, r2)


def fit_all(data):
    """The three standard fits in report order."""
    return [fit_scaled_sqrt(data), evaluate_fixed_sqrt(data), fit_poly2(data)]


# ---------------------------------------------------------------------------
# CSV I/O


def parse_measurements(text):
    """MeasurementSet from CSV with the mandatory header line."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigError(f"measurement CSV must start with header '{CSV_HEADER}'",
                          line=1)
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != 5:
            raise ConfigError(f"expected 5 fields, got {len(parts)}", line=i)
        try:
            rows.append(MeasurementRow(int(parts[0]), float(parts[1]),
                                       float(parts[2]), float(parts[3]),
                                       float(parts[4])))
        except ValueError as exc:
            raise ConfigError(str(exc), line=i) from None
    return MeasurementSet(rows)


def measurements_csv(data):
    lines = [CSV_HEADER]
    for row in data:
        lines.append(f"{row.n_plates},{row.mean_time:.9g},{row.std_time:.9g},"
                     f"{row.delta_t:.9g},{row.pressure_drop:.9g}")
    return "\n".join(lines) + "\n"


def fit_results_csv(results):
    lines = ["model,coefficients,rmse_kpa,r_squared"]
    for res in results:
        coeffs = ";".join(f"{c:.9g}" for c in res.coefficients)
        lines.append(f"{res.model},{coeffs},{res.rmse:.9g},{res.r_squared:.9g}")
    return "\n".join(lines) + "\n"

import math

import numpy as np
import pytest

from siaflow.calibration import (CSV_HEADER, REFERENCE_MEASUREMENTS,
                                 MeasurementRow, MeasurementSet,
                                 evaluate_fixed_sqrt, fit_poly2,
                                 fit_scaled_sqrt, fit_results_csv, goodness,
                                 measurements_csv, parse_measurements)
from siaflow.errors import (ConfigError, DegenerateFit, InsufficientData,
                            MissingBaseline, ZeroVariance)


def rows(*pairs):
    return [MeasurementRow(n, 0.0, 0.0, 0.0, drop) for n, drop in pairs]


def plated_reference():
    """The bench rows with at least one plate (the N0 baseline removed)."""
    return [r for r in REFERENCE_MEASUREMENTS if r.n_plates >= 1]


class TestGoodness:
    def test_perfect(self):
        assert goodness([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == (0.0, 1.0)

    def test_mean_prediction_scores_zero(self):
        obs = [1.0, 2.0, 3.0]
        rmse, r2 = goodness(obs, [2.0, 2.0, 2.0])
        assert r2 == pytest.approx(0.0)
        assert rmse == pytest.approx(math.sqrt(2.0 / 3.0))

    def test_constant_observations(self):
        with pytest.raises(ZeroVariance):
            goodness([5.0, 5.0], [5.0, 5.0])

    def test_negative_r2_for_bad_model(self):
        _, r2 = goodness([1.0, 2.0, 3.0], [30.0, -10.0, 99.0])
        assert r2 < 0.0


class TestScaledSqrt:
    def test_exact_data(self):
        data = rows(*((n, 5.0 * math.sqrt(n)) for n in range(1, 8)))
        res = fit_scaled_sqrt(data)
        assert res.coefficients[0] == pytest.approx(5.0, rel=1e-12)
        assert res.rmse == pytest.approx(0.0, abs=1e-12)
        assert res.r_squared == pytest.approx(1.0)

    def test_reference_plated_rows(self):
        # frozen from the closed-form oracle a = sum(sqrt(N) y) / sum(N) and
        # the standard definitions evaluated over the same seven rows
        res = fit_scaled_sqrt(plated_reference())
        assert res.coefficients[0] == pytest.approx(11.6307455, rel=1e-7)
        assert res.rmse == pytest.approx(2.7883952, rel=1e-7)
        assert res.r_squared == pytest.approx(0.8039581, rel=1e-6)

    def test_reference_full_set(self):
        # baseline row included in the scoring only: the fitted coefficient
        # is unchanged, the tube row is predicted at zero drop
        res = fit_scaled_sqrt(REFERENCE_MEASUREMENTS)
        assert res.coefficients[0] == pytest.approx(11.6307455, rel=1e-7)
        assert res.rmse == pytest.approx(2.7208026, rel=1e-7)
        assert res.r_squared == pytest.approx(0.9075951, rel=1e-6)

    def test_single_row_insufficient(self):
        with pytest.raises(InsufficientData):
            fit_scaled_sqrt(rows((3, 20.0)))

    def test_residual_orthogonality(self):
        res = fit_scaled_sqrt(plated_reference())
        a = res.coefficients[0]
        dot = sum(math.sqrt(r.n_plates)
                  * (r.pressure_drop - a * math.sqrt(r.n_plates))
                  for r in plated_reference())
        assert abs(dot) <= 1e-9


class TestFixedSqrt:
    def test_exact_data(self):
        data = rows(*((n, 7.25 * math.sqrt(n)) for n in range(1, 6)))
        res = evaluate_fixed_sqrt(data, 7.25)
        assert res.rmse == pytest.approx(0.0, abs=1e-12)
        assert res.r_squared == pytest.approx(1.0)

    def test_reference_plated_rows_default_baseline(self):
        res = evaluate_fixed_sqrt(plated_reference())
        assert res.coefficients[0] == 12.95
        assert res.rmse == pytest.approx(3.8388641, rel=1e-7)

    def test_reference_full_set(self):
        res = evaluate_fixed_sqrt(REFERENCE_MEASUREMENTS, 12.95)
        assert res.rmse == pytest.approx(3.6734562, rel=1e-7)

    def test_zero_baseline_invalid(self):
        with pytest.raises(MissingBaseline):
            evaluate_fixed_sqrt(plated_reference(), 0.0)

    def test_missing_single_plate_row(self):
        with pytest.raises(MissingBaseline):
            evaluate_fixed_sqrt(rows((2, 17.91), (3, 19.90)))


class TestPoly2:
    def test_exact_parabola(self):
        data = rows(*((n, 2.5 * n + 0.75 * n * n) for n in range(1, 6)))
        res = fit_poly2(data)
        assert res.coefficients[0] == pytest.approx(2.5, rel=1e-9)
        assert res.coefficients[1] == pytest.approx(0.75, rel=1e-9)
        assert res.rmse == pytest.approx(0.0, abs=1e-9)

    def test_reference_vs_normal_equation_oracle(self):
        data = plated_reference()
        n = np.array([r.n_plates for r in data], dtype=float)
        y = np.array([r.pressure_drop for r in data])
        design = np.column_stack([n, n * n])
        expected = np.linalg.solve(design.T @ design, design.T @ y)
        res = fit_poly2(data)
        assert res.coefficients[0] == pytest.approx(expected[0], rel=1e-9)
        assert res.coefficients[1] == pytest.approx(expected[1], rel=1e-9)

    def test_duplicate_plate_counts_degenerate(self):
        with pytest.raises(DegenerateFit):
            fit_poly2(rows((4, 20.0), (4, 21.0), (4, 22.0)))

    def test_too_few_rows(self):
        with pytest.raises(InsufficientData):
            fit_poly2(rows((1, 12.95), (2, 17.91)))


class TestModelComparisons:
    def test_fitted_beats_fixed_for_any_baseline(self):
        data = plated_reference()
        fitted = fit_scaled_sqrt(data)
        for dpo in (8.0, 10.0, 11.63, 12.95, 15.0, 20.0):
            assert fitted.rmse <= evaluate_fixed_sqrt(data, dpo).rmse + 1e-12

    def test_poly2_beats_single_basis(self):
        data = plated_reference()
        n = [r.n_plates for r in data]
        y = [r.pressure_drop for r in data]
        # one-basis least squares, solved in closed form
        a_lin = sum(ni * yi for ni, yi in zip(n, y)) / sum(ni ** 2 for ni in n)
        a_sq = (sum(ni ** 2 * yi for ni, yi in zip(n, y))
                / sum(ni ** 4 for ni in n))
        sse_lin = sum((yi - a_lin * ni) ** 2 for ni, yi in zip(n, y))
        sse_sq = sum((yi - a_sq * ni ** 2) ** 2 for ni, yi in zip(n, y))
        res = fit_poly2(data)
        sse_poly = res.rmse ** 2 * len(n)
        assert sse_poly <= min(sse_lin, sse_sq) + 1e-9

    def test_scale_equivariance(self):
        base = plated_reference()
        scaled = [MeasurementRow(r.n_plates, r.mean_time, r.std_time, r.delta_t,
                                 r.pressure_drop * 3.0) for r in base]
        for fit in (fit_scaled_sqrt, fit_poly2):
            a = fit(base)
            b = fit(scaled)
            assert b.rmse == pytest.approx(3.0 * a.rmse, rel=1e-12)
            assert b.r_squared == pytest.approx(a.r_squared, rel=1e-12)


class TestMeasurementSet:
    def test_duplicate_plate_count_rejected(self):
        with pytest.raises(ConfigError):
            MeasurementSet(rows((1, 10.0), (1, 11.0)))

    def test_negative_plate_count_rejected(self):
        with pytest.raises(ConfigError):
            MeasurementSet([MeasurementRow(-1, 0, 0, 0, 1.0)])

    def test_csv_round_trip(self):
        text = measurements_csv(REFERENCE_MEASUREMENTS)
        back = parse_measurements(text)
        assert list(back) == list(REFERENCE_MEASUREMENTS)

    def test_header_required(self):
        with pytest.raises(ConfigError):
            parse_measurements("a,b\n1,2\n")

    def test_bad_number_reports_line(self):
        text = CSV_HEADER + "\n1,7.81,0.05,0.66,twelve\n"
        with pytest.raises(ConfigError) as err:
            parse_measurements(text)
        assert "line 2" in str(err.value)

    def test_fit_results_csv_layout(self):
        res = fit_scaled_sqrt(REFERENCE_MEASUREMENTS)
        text = fit_results_csv([res])
        lines = text.strip().split("\n")
        assert lines[0] == "model,coefficients,rmse_kpa,r_squared"
        assert lines[1].startswith("scaled_sqrt,11.63")

"""Grating objective: residual algebra, error combination, profiles, and
the synthetic recording model's landscape."""

import json
import math

import numpy as np
import pytest
from scipy.optimize import minimize

from nichebench.grating import (
    DESIGN_VARIABLE_NAMES,
    GratingDesign,
    GratingParams,
    default_anchor,
    default_bounds,
    default_params,
    grating_problem,
    integrated_square_error,
    load_profile,
    make_default_problem,
    nm_to_mm,
    perfect_recording_values,
    residuals,
    synthetic_recording_model,
)


class TestResiduals:
    def test_perfect_values_zero_every_residual(self):
        params = default_params()
        r = residuals(perfect_recording_values(params), params)
        # algebraically zero; the division leaves float-rounding crumbs
        assert all(abs(v) < 1e-9 for v in r)
        assert r[3] == 0.0  # b4 = 0 keeps the last residual exact

    def test_zero_recording_values(self):
        params = default_params()
        r1, r2, r3, r4 = residuals((0.0, 0.0, 0.0, 0.0), params)
        assert r1 == -params.n0
        assert r2 == -params.n0 * params.b2
        assert r3 == -params.n0 * params.b3
        assert r4 == -params.n0 * params.b4 == 0.0

    def test_b4_zero_profile(self):
        params = default_params()
        j40 = 0.123
        _, _, _, r4 = residuals((0.0, 0.0, 0.0, j40), params)
        assert r4 == j40 / (2.0 * params.lambda0)

    def test_linearity_in_recording_values(self):
        params = default_params()
        rng = np.random.default_rng(7)
        for _ in range(200):
            j1 = tuple(rng.normal(size=4))
            j2 = tuple(rng.normal(size=4))
            combined = residuals(tuple(a + b for a, b in zip(j1, j2)), params)
            r1 = residuals(j1, params)
            r2 = residuals(j2, params)
            r0 = residuals((0.0, 0.0, 0.0, 0.0), params)
            for c, a, b, z in zip(combined, r1, r2, r0):
                assert c - a - b + z == pytest.approx(0.0, abs=1e-9)


class TestIntegratedSquareError:
    def test_zero_residuals(self):
        assert integrated_square_error((0.0, 0.0, 0.0, 0.0), 90.0) == 0.0

    def test_unit_first_residual(self):
        assert integrated_square_error((1.0, 0.0, 0.0, 0.0), 90.0) == 1.0

    def test_unit_second_residual(self):
        assert integrated_square_error((0.0, 1.0, 0.0, 0.0), 90.0) == 2700.0

    def test_even_under_sign_flip(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            r = tuple(rng.normal(size=4))
            flipped = tuple(-v for v in r)
            assert integrated_square_error(r, 90.0) == integrated_square_error(flipped, 90.0)

    def test_nonnegative_on_random_residuals(self):
        rng = np.random.default_rng(13)
        r = rng.uniform(-10, 10, size=(1_000_000, 4))
        w2, w4, w6 = 90.0 ** 2, 90.0 ** 4, 90.0 ** 6
        values = (
            r[:, 0] ** 2
            + w2 * (2 * r[:, 0] * r[:, 2] + r[:, 1] ** 2) / 3.0
            + w4 * (r[:, 2] ** 2 + 2 * r[:, 1] * r[:, 3]) / 5.0
            + w6 * r[:, 3] ** 2 / 7.0
        )
        assert np.all(values >= 0.0)
        # spot-check the vectorized oracle against the implementation
        for row in r[:100]:
            assert integrated_square_error(tuple(row), 90.0) == pytest.approx(
                float(
                    row[0] ** 2
                    + w2 * (2 * row[0] * row[2] + row[1] ** 2) / 3
                    + w4 * (row[2] ** 2 + 2 * row[1] * row[3]) / 5
                    + w6 * row[3] ** 2 / 7
                )
            )

    def test_invalid_half_width(self):
        with pytest.raises(ValueError):
            integrated_square_error((0.0, 0.0, 0.0, 0.0), 0.0)


class TestUnitsAndProfiles:
    def test_wavelength_roundtrip_is_exact(self):
        assert nm_to_mm(413.1) == 4.131e-4

    def test_default_profile_values(self):
        params, bounds = load_profile()
        assert params.n0 == 1400.0
        assert params.b2 == 8.2453e-4
        assert params.b3 == 3.0015e-7
        assert params.b4 == 0.0
        assert params.w0 == 90.0
        assert params.lambda0 == 4.131e-4
        assert params.mirror_radii == (1000.0, 1000.0)
        assert bounds.shape == (8, 2)
        assert np.array_equal(bounds, default_bounds())

    def test_default_params_matches_packaged_profile(self):
        assert default_params() == load_profile()[0]

    def test_custom_profile_roundtrip(self, tmp_path):
        payload = {
            "n0": 900.0, "b2": 1e-3, "b3": 2e-7, "b4": 5e-10,
            "w0": 45.0, "lambda0": 5e-4,
            "mirror_radii": [800.0, 1200.0],
            "bounds": {"angle": [-1.0, 1.0], "distance": [200.0, 900.0]},
        }
        path = tmp_path / "profile.json"
        path.write_text(json.dumps(payload))
        params, bounds = load_profile(path)
        assert params.n0 == 900.0 and params.w0 == 45.0
        assert params.mirror_radii == (800.0, 1200.0)
        assert np.array_equal(bounds[0], [-1.0, 1.0])
        assert np.array_equal(bounds[7], [200.0, 900.0])

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text(json.dumps({"n0": 1.0}))
        with pytest.raises(ValueError):
            load_profile(path)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            GratingParams(n0=-1.0, b2=0.0, b3=0.0, b4=0.0, w0=90.0, lambda0=1e-4)
        with pytest.raises(ValueError):
            GratingParams(n0=1.0, b2=math.nan, b3=0.0, b4=0.0, w0=90.0, lambda0=1e-4)


class TestGratingDesign:
    def test_vector_roundtrip(self):
        design = default_anchor()
        again = GratingDesign.from_vector(design.to_vector())
        assert again == design

    def test_vector_order(self):
        design = default_anchor()
        vec = design.to_vector()
        for i, name in enumerate(DESIGN_VARIABLE_NAMES):
            assert vec[i] == getattr(design, name)

    def test_nonpositive_distance_rejected(self):
        with pytest.raises(ValueError):
            GratingDesign(0.0, 0.0, 0.0, 0.0, -1.0, 1.0, 1.0, 1.0)


class TestSyntheticModel:
    def test_anchor_is_exactly_zero_error(self):
        params = default_params()
        model = synthetic_recording_model()
        j = model(default_anchor().to_vector(), params)
        # sin(0) sums vanish exactly, so the anchor reproduces the
        # zero-residual recording values bit for bit
        assert j == perfect_recording_values(params)
        problem = grating_problem(model, params)
        # the residual division leaves rounding crumbs of ~1e-13 lines/mm
        assert 0.0 <= problem.objective(default_anchor().to_vector()) < 1e-18

    def test_deterministic(self):
        params = default_params()
        model = synthetic_recording_model()
        x = default_bounds().mean(axis=1)
        assert model(x, params) == model(x, params)

    def test_problem_shape(self):
        problem = make_default_problem()
        assert problem.dimension == 8
        assert problem.direction == "min"
        assert problem.known_peaks == ()
        assert problem.name == "grating"

    def test_objective_nonnegative_over_box(self):
        problem = make_default_problem()
        rng = np.random.default_rng(17)
        xs = rng.uniform(problem.bounds[:, 0], problem.bounds[:, 1], size=(2000, 8))
        values = np.array([problem.objective(x) for x in xs])
        assert np.all(values >= 0.0)
        assert values.max() > 1e-4  # the landscape is not flat

    def test_multiple_separated_minima_below_threshold(self):
        # multimodality oracle: random sampling plus local refinement must
        # expose at least two deep optima >0.1 apart in normalized space
        problem = make_default_problem()
        lo, hi = problem.bounds[:, 0], problem.bounds[:, 1]
        span = hi - lo
        rng = np.random.default_rng(19)
        xs = rng.uniform(lo, hi, size=(10_000, 8))
        values = np.array([problem.objective(x) for x in xs])
        starts = xs[np.argsort(values)[:40]]
        minima = []
        for start in starts:
            res = minimize(problem.objective, start, method="Nelder-Mead",
                           options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000,
                                    "maxfev": 20000, "adaptive": True})
            x = np.clip(res.x, lo, hi)
            if problem.objective(x) < 1e-4:
                minima.append(x)
        distinct = []
        for x in minima:
            if all(np.linalg.norm((x - q) / span) >= 0.1 for q in distinct):
                distinct.append(x)
        assert len(distinct) >= 2

    def test_negative_error_warns_once(self, caplog, monkeypatch):
        import nichebench.grating as grating_module

        problem = grating_problem(synthetic_recording_model(), default_params())
        monkeypatch.setattr(grating_module, "integrated_square_error", lambda r, w: -1.0)
        with caplog.at_level("WARNING"):
            v1 = problem.objective(default_anchor().to_vector())
            v2 = problem.objective(default_anchor().to_vector())
        assert v1 == v2 == -1.0
        warnings = [r for r in caplog.records if "negative" in r.message]
        assert len(warnings) == 1

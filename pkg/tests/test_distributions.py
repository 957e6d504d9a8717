import math
from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from redlight.distributions import (
    ExcessGreen,
    ExponentialGreen,
    GreenDistribution,
    UniformGreen,
    cdf,
    excess_from_interarrival,
    pdf,
    validate_density,
)


class TestPdf:
    def test_uniform_midpoint(self):
        assert pdf(UniformGreen(2.0), 1.0) == 0.5

    def test_exponential_at_zero(self):
        assert pdf(ExponentialGreen(0.1), 0.0) == pytest.approx(0.1, rel=1e-15)

    def test_exponential_at_one_mean(self):
        assert pdf(ExponentialGreen(0.1), 10.0) == pytest.approx(0.1 * math.exp(-1.0), rel=1e-14)
        assert pdf(ExponentialGreen(0.1), 10.0) == pytest.approx(0.0367879, abs=1e-7)

    def test_zero_outside_support(self):
        assert pdf(UniformGreen(2.0), 2.0) == 0.0
        assert pdf(UniformGreen(2.0), -0.1) == 0.0
        assert pdf(ExponentialGreen(1.0), -1.0) == 0.0

    def test_vectorized(self):
        out = pdf(UniformGreen(4.0), np.array([0.0, 1.0, 5.0]))
        np.testing.assert_array_equal(out, [0.25, 0.25, 0.0])


class TestCdf:
    def test_uniform_midpoint(self):
        assert cdf(UniformGreen(2.0), 1.0) == 0.5

    def test_exponential_origin(self):
        assert cdf(ExponentialGreen(0.1), 0.0) == 0.0

    def test_exponential_far_tail(self):
        assert cdf(ExponentialGreen(0.1), 1e6) == 1.0

    @pytest.mark.parametrize("dist", [UniformGreen(3.0), ExponentialGreen(0.25)])
    def test_matches_integral_of_pdf(self, dist):
        end = dist.q_support if math.isfinite(dist.q_support) else 10.0 / dist.rate
        for t in np.linspace(0.0, end, 17):
            num, _ = quad(lambda s: float(dist.pdf(s)), 0.0, t, limit=200)
            assert abs(cdf(dist, t) - num) <= 1e-6

    @pytest.mark.parametrize("dist", [UniformGreen(3.0), ExponentialGreen(0.7)])
    def test_ppf_inverts_cdf(self, dist):
        u = np.linspace(0.01, 0.99, 50)
        np.testing.assert_allclose(dist.cdf(dist.ppf(u)), u, rtol=1e-12)


class TestExcess:
    def test_point_mass_gives_uniform(self):
        q = 3.0
        dist = excess_from_interarrival([[0.0, 0.0], [q, 0.0], [q, 1.0]], mean=q)
        t = np.linspace(0.0, q, 1001)[:-1]
        np.testing.assert_allclose(dist.pdf(t), UniformGreen(q).pdf(t), atol=1e-9)

    def test_unit_point_mass_value(self):
        dist = excess_from_interarrival([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]], mean=1.0)
        assert pdf(dist, 0.5) == pytest.approx(1.0, abs=1e-12)

    def test_exponential_interarrival_reproduces_exponential(self):
        lam = 0.5
        x = np.linspace(0.0, 60.0, 60001)
        table = np.column_stack([x, -np.expm1(-lam * x)])
        dist = excess_from_interarrival(table, mean=1.0 / lam)
        t = np.linspace(0.0, 10.0, 101)
        # linear interpolation of the table shifts the total mass by about h^2 lam^2 / 12
        np.testing.assert_allclose(dist.pdf(t), lam * np.exp(-lam * t), rtol=1e-7)

    def test_cdf_reaches_one(self):
        dist = excess_from_interarrival([[0.0, 0.0], [1.0, 0.5], [2.0, 1.0]], mean=1.25)
        assert cdf(dist, dist.q_support) == 1.0
        assert float(np.sum(np.diff(dist.cdf(np.linspace(0, 2, 4001))) < 0)) == 0

    def test_mean_of_uniform_excess(self):
        dist = excess_from_interarrival([[0.0, 0.0], [4.0, 0.0], [4.0, 1.0]], mean=4.0)
        assert dist.mean() == pytest.approx(2.0, rel=1e-12)

    def test_ppf_round_trip(self):
        dist = excess_from_interarrival([[0.0, 0.0], [1.0, 0.3], [3.0, 1.0]], mean=1.6)
        u = np.linspace(0.0, 1.0, 41)
        np.testing.assert_allclose(dist.cdf(dist.ppf(u)), u, atol=1e-12)

    @pytest.mark.parametrize(
        "table, mean",
        [
            ([[0.0, 0.0]], 1.0),
            ([[1.0, 0.0], [2.0, 1.0]], 1.0),
            ([[0.0, 0.5], [1.0, 0.2]], 1.0),
            ([[0.0, 0.0], [1.0, 1.5]], 1.0),
            ([[0.0, 0.0], [1.0, 1.0]], 0.0),
        ],
    )
    def test_rejects_bad_tables(self, table, mean):
        with pytest.raises(ValueError):
            excess_from_interarrival(table, mean)

    def test_json_round_trip(self):
        dist = excess_from_interarrival([[0.0, 0.0], [1.0, 0.5], [2.0, 1.0]], mean=1.25)
        d = dist.to_dict()
        again = ExcessGreen(np.asarray(d["cdf_knots"]), d["mean"])
        t = np.linspace(0.0, 2.0, 9)
        np.testing.assert_array_equal(again.pdf(t), dist.pdf(t))


@dataclass(frozen=True)
class _Stepped(GreenDistribution):
    """Tabulated density with a single upward step, for the validator."""

    kind: str = "stepped"

    @property
    def q_support(self):
        return 4.0

    @property
    def horizon(self):
        return 4.0

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t < 2.0, 0.2, 0.3)


class TestValidateDensity:
    def test_uniform_clean(self):
        assert validate_density(UniformGreen(5.0)).ok

    def test_exponential_clean(self):
        assert validate_density(ExponentialGreen(1.0)).ok

    def test_increasing_step_flagged_once(self):
        rep = validate_density(_Stepped(), grid_points=100)
        assert len(rep.violations) == 1
        check, index, amount = rep.violations[0]
        assert check == "non-increasing"
        assert index == 50
        assert amount == pytest.approx(0.1)

    def test_table_truncated_at_first_full_knot(self):
        dist = excess_from_interarrival([[0.0, 0.0], [1.0, 1.0], [2.0, 1.0]], mean=0.5)
        assert dist.q_support == 1.0
        assert validate_density(dist).ok

    def test_zero_density_flagged(self):
        @dataclass(frozen=True)
        class _Gap(_Stepped):
            def pdf(self, t):
                t = np.asarray(t, dtype=float)
                return np.where(t < 3.0, 0.3, 0.0)

        rep = validate_density(_Gap(), grid_points=100)
        assert {v[0] for v in rep.violations} == {"positive"}
        assert [v[1] for v in rep.violations] == list(range(75, 100))


@settings(max_examples=50, deadline=None)
@given(
    rate=st.floats(0.01, 5.0),
    t1=st.floats(0.0, 50.0),
    gap=st.floats(1e-6, 50.0),
)
def test_exponential_density_non_increasing(rate, t1, gap):
    dist = ExponentialGreen(rate)
    assert dist.pdf(t1 + gap) <= dist.pdf(t1)


@settings(max_examples=50, deadline=None)
@given(
    xs=st.lists(st.floats(0.05, 3.0), min_size=1, max_size=6),
    thetas=st.lists(st.floats(0.0, 1.0), min_size=1, max_size=6),
)
def test_excess_density_non_increasing(xs, thetas):
    n = min(len(xs), len(thetas))
    x = np.concatenate([[0.0], np.cumsum(xs[:n])])
    theta = np.concatenate([[0.0], np.sort(thetas[:n])])
    dist = excess_from_interarrival(np.column_stack([x, theta]), mean=2.0)
    t = np.linspace(0.0, dist.q_support, 501)[:-1]
    assert np.all(np.diff(dist.pdf(t)) <= 1e-12)

import numpy as np
import pytest

from polnet.errors import ComparisonNotApplicableError, ModelError
from polnet.policy import (
    REGIME_BROWN_MODEL,
    REGIME_BROWN_ONLY,
    REGIME_GREEN_ONLY,
    REGIME_INDIFFERENT,
    REGIME_INNER,
    ConvexCost,
    EconomyParams,
    LinearCost,
    NoCost,
    NodePolicy,
    QuadraticCost,
    SiteParams,
    brute_force_maximize,
    emission_comparison,
    flow_value,
    kkt_report,
    solve_brown_only,
    solve_linear,
    solve_node,
    solve_strictly_convex,
)

ALPHA_TABLE = 1 / 0.43  # constant-decay shadow cost at the calibration values
ECON = EconomyParams(rho=0.03, gamma=0.5)


def table_site(cost, a_green=2.75, epsilon=0.1, a_brown=5.0):
    return SiteParams(decay=0.4, brown_productivity=a_brown,
                      green_productivity=a_green, green_intensity=epsilon,
                      awareness=1.0, cost=cost)


def exp_cost(lam=1.0):
    """Strictly convex cost lam (e^r - 1 - r); curvature bounded below by lam.

    The argument is capped at 700 so the oracle's wide grid scans do not
    overflow; any such point is astronomically expensive either way.
    """
    safe_exp = lambda r: np.exp(np.minimum(r, 700.0))
    return ConvexCost(
        value_fn=lambda r: lam * (safe_exp(r) - 1.0 - np.minimum(r, 700.0)),
        marginal_fn=lambda r: lam * (safe_exp(r) - 1.0),
        curvature_fn=lambda r: lam * safe_exp(r),
        label="exp-minus-linear",
        lam=lam,
    )


def draw_params(rng, variant):
    """Admissible draw away from knife edges; mirrors the CLI oracle draws."""
    while True:
        a_brown = float(rng.uniform(1.5, 6.5))
        eps = float(rng.uniform(0.0, 0.9))
        alpha = float(rng.uniform(0.5, 3.5))
        gamma = float(rng.uniform(0.2, 0.9) if rng.random() < 0.5
                      else rng.uniform(1.2, 3.0))
        lam = float(rng.uniform(0.1, 2.0))
        if variant == "brown-only":
            cost, a_green = NoCost(), 1.0
        elif variant == "linear":
            cost, a_green = LinearCost(lam), float(rng.uniform(1.05, 2.75))
            if abs(eps - ((a_green - 1) / (a_brown - 1) - lam / alpha)) < 0.02:
                continue
        elif variant == "quadratic":
            cost, a_green = QuadraticCost(lam), float(rng.uniform(1.05, 2.75))
        else:
            cost, a_green = exp_cost(lam), float(rng.uniform(1.05, 2.75))
        site = SiteParams(decay=0.4, brown_productivity=a_brown,
                          green_productivity=a_green, green_intensity=eps,
                          awareness=1.0, cost=cost)
        return site, EconomyParams(rho=0.03, gamma=gamma), alpha


class TestFlowValue:
    def test_zero_controls_zero_value(self):
        site = table_site(QuadraticCost(1.0))
        assert flow_value(site, ECON, ALPHA_TABLE, 0.0, 0.0) == 0.0

    def test_hand_computed_point(self):
        site = table_site(QuadraticCost(1.0))
        # 2 sqrt(4) - alpha = 4 - 2.32558...
        assert flow_value(site, ECON, ALPHA_TABLE, 1.0, 0.0) \
            == pytest.approx(1.67442, abs=5e-6)

    def test_double_entry_transcription(self):
        # second, literal implementation of the flow value
        rng = np.random.default_rng(1)
        for _ in range(200):
            site, econ, alpha = draw_params(rng, "quadratic")
            brown, green = rng.uniform(0.01, 3.0), rng.uniform(0.01, 3.0)
            c = (site.brown_productivity - 1) * brown \
                + (site.green_productivity - 1) * green
            literal = c ** (1 - econ.gamma) / (1 - econ.gamma) \
                - alpha * (brown + site.green_intensity * green) \
                - site.cost.lam * green ** 2
            got = flow_value(site, econ, alpha, brown, green)
            assert np.isfinite(got)
            assert got == pytest.approx(literal, rel=1e-12)

    def test_zero_consumption_sentinel_when_gamma_large(self):
        econ = EconomyParams(rho=0.03, gamma=2.0)
        site = table_site(QuadraticCost(1.0))
        assert flow_value(site, econ, ALPHA_TABLE, 0.0, 0.0) == -np.inf

    def test_gamma_one_unrepresentable(self):
        with pytest.raises(ModelError):
            EconomyParams(rho=0.03, gamma=1.0)

    def test_negative_controls_rejected(self):
        site = table_site(QuadraticCost(1.0))
        with pytest.raises(ModelError):
            flow_value(site, ECON, ALPHA_TABLE, -0.1, 0.0)


class TestStrictlyConvex:
    def test_calibration_inner_point(self):
        site = table_site(QuadraticCost(1.0))
        pol = solve_strictly_convex(site, ECON, ALPHA_TABLE)
        assert pol.regime == REGIME_INNER
        # derived by hand: R = alpha (1.75/4 - 0.1) / 2, I = (C* - 1.75 R) / 4
        green_exact = ALPHA_TABLE * (1.75 / 4 - 0.1) / 2
        assert pol.green == pytest.approx(green_exact, rel=1e-12)
        assert pol.brown == pytest.approx((1.72 ** 2 - 1.75 * green_exact) / 4, rel=1e-12)
        assert pol.consumption == pytest.approx(2.9584, abs=1e-10)

    def test_high_intensity_goes_brown_only(self):
        site = table_site(QuadraticCost(1.0), epsilon=0.99)
        pol = solve_strictly_convex(site, ECON, ALPHA_TABLE)
        assert pol.regime == REGIME_BROWN_ONLY
        assert pol.green == 0.0
        assert pol.brown == pytest.approx(4 * 0.43 ** 2, abs=1e-12)
        oracle = brute_force_maximize(site, ECON, ALPHA_TABLE)
        assert pol.value >= oracle.value - 1e-6

    def test_barely_productive_green_goes_brown(self):
        site = table_site(QuadraticCost(1.0), a_green=1.0 + 1e-9)
        pol = solve_strictly_convex(site, ECON, ALPHA_TABLE)
        assert pol.regime == REGIME_BROWN_ONLY

    def test_green_only_regime_and_root(self):
        # small epsilon and a green edge beating the brown one
        site = SiteParams(decay=0.4, brown_productivity=1.3,
                          green_productivity=2.75, green_intensity=0.05,
                          awareness=1.0, cost=QuadraticCost(1.0))
        pol = solve_strictly_convex(site, ECON, ALPHA_TABLE)
        assert pol.regime == REGIME_GREEN_ONLY
        assert pol.brown == 0.0
        g = site.green_productivity - 1

        def gap(x):
            return (g * x) ** (-ECON.gamma) * g - site.green_intensity * ALPHA_TABLE \
                - 2.0 * x

        assert gap(pol.green) == pytest.approx(0.0, abs=1e-9)
        # bracket has exactly one sign change: strictly decreasing gap
        xs = np.linspace(pol.green / 10, pol.green * 10, 200)
        vals = np.array([gap(x) for x in xs])
        assert np.all(np.diff(vals) < 0)
        assert np.sum(np.diff(np.sign(vals)) != 0) == 1

    def test_knife_edge_inner_condition_flagged(self):
        # choose epsilon so the interior condition holds with equality
        lam = 0.1
        site0 = table_site(QuadraticCost(lam))
        cstar = ((site0.brown_productivity - 1) / ALPHA_TABLE) ** (1 / ECON.gamma)
        lhs = 2 * lam * cstar / (site0.green_productivity - 1)
        eps = (site0.green_productivity - 1) / (site0.brown_productivity - 1) \
            - lhs / ALPHA_TABLE
        site = table_site(QuadraticCost(lam), epsilon=eps)
        pol = solve_strictly_convex(site, ECON, ALPHA_TABLE)
        assert pol.regime == REGIME_INNER
        assert pol.knife_edge
        assert pol.brown == pytest.approx(0.0, abs=1e-9)

    def test_custom_convex_cost_with_bisected_inverse(self):
        lam = 0.8
        analytic = exp_cost(lam)
        no_inverse = ConvexCost(
            value_fn=analytic.value_fn, marginal_fn=analytic.marginal_fn,
            curvature_fn=analytic.curvature_fn, lam=lam)
        site = table_site(no_inverse)
        pol = solve_strictly_convex(site, ECON, ALPHA_TABLE)
        y = ALPHA_TABLE * ((site.green_productivity - 1)
                           / (site.brown_productivity - 1) - site.green_intensity)
        assert pol.green == pytest.approx(np.log1p(y / lam), abs=1e-9)

    def test_convex_cost_must_vanish_at_zero(self):
        with pytest.raises(ModelError):
            ConvexCost(value_fn=lambda r: r + 1.0, marginal_fn=lambda r: 1.0)


class TestLinear:
    def test_calibration_brown_branch(self):
        site = table_site(LinearCost(1.0))
        pol = solve_linear(site, ECON, ALPHA_TABLE)
        assert pol.regime == REGIME_BROWN_ONLY
        assert pol.brown == pytest.approx(4 * 0.43 ** 2, abs=1e-12)
        assert pol.green == 0.0

    def test_cheap_cost_green_branch(self):
        site = table_site(LinearCost(0.001))
        pol = solve_linear(site, ECON, ALPHA_TABLE)
        assert pol.regime == REGIME_GREEN_ONLY
        assert pol.green == pytest.approx(32.08, abs=0.005)
        assert pol.brown == 0.0

    def test_indifference_segment(self):
        lam = 1.0
        eps = 1.75 / 4.0 - lam / ALPHA_TABLE  # exact threshold
        site = table_site(LinearCost(lam), epsilon=eps)
        pol = solve_linear(site, ECON, ALPHA_TABLE)
        assert pol.regime == REGIME_INDIFFERENT
        assert pol.knife_edge
        assert pol.segment is not None
        (i0, r0), (i1, r1) = pol.segment
        f_rep = pol.value
        f_a = flow_value(site, ECON, ALPHA_TABLE, i0, r0)
        f_b = flow_value(site, ECON, ALPHA_TABLE, i1, r1)
        mid = flow_value(site, ECON, ALPHA_TABLE, i0 / 2, r1 / 2)
        assert f_a == pytest.approx(f_rep, abs=1e-10)
        assert f_b == pytest.approx(f_rep, abs=1e-10)
        assert mid == pytest.approx(f_rep, abs=1e-10)

    def test_invalid_cost_rejected(self):
        with pytest.raises(ModelError):
            LinearCost(0.0)
        with pytest.raises(ModelError):
            LinearCost(-1.0)


class TestBrownOnlyModel:
    def test_calibration_values(self):
        site = table_site(NoCost(), a_green=1.0)
        pol = solve_brown_only(site, ECON, ALPHA_TABLE)
        assert pol.regime == REGIME_BROWN_MODEL
        assert pol.brown == pytest.approx(4 * 0.43 ** 2, abs=1e-12)
        assert pol.consumption == pytest.approx(2.9584, abs=1e-10)
        assert pol.emission == pol.brown

    def test_unit_parameters(self):
        site = SiteParams(decay=0.4, brown_productivity=2.0, green_productivity=1.0,
                          green_intensity=0.0, awareness=1.0, cost=NoCost())
        econ = EconomyParams(rho=0.03, gamma=2.0)
        pol = solve_brown_only(site, econ, 1.0)
        assert pol.brown == pytest.approx(1.0)
        assert pol.consumption == pytest.approx(1.0)

    def test_vanishes_as_shadow_cost_explodes(self):
        site = table_site(NoCost(), a_green=1.0)
        assert solve_brown_only(site, ECON, 1e8).brown < 1e-10

    def test_scaling_law(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            site, econ, alpha = draw_params(rng, "brown-only")
            c = float(rng.uniform(0.5, 4.0))
            base = solve_brown_only(site, econ, alpha).brown
            scaled = solve_brown_only(site, econ, c * alpha).brown
            assert scaled == pytest.approx(c ** (-1 / econ.gamma) * base, rel=1e-12)

    def test_unproductive_brown_rejected(self):
        with pytest.raises(ModelError):
            SiteParams(decay=0.4, brown_productivity=1.0, green_productivity=1.0,
                       green_intensity=0.0, awareness=1.0, cost=NoCost())


class TestDispatch:
    def test_green_productivity_one_selects_brown_model(self):
        site = table_site(QuadraticCost(1.0), a_green=1.0)
        assert solve_node(site, ECON, ALPHA_TABLE).regime == REGIME_BROWN_MODEL

    def test_costless_productive_green_rejected(self):
        site = table_site(NoCost())
        with pytest.raises(ModelError):
            solve_node(site, ECON, ALPHA_TABLE)

    @pytest.mark.parametrize("variant", ["quadratic", "linear", "custom", "brown-only"])
    def test_every_draw_lands_in_exactly_one_regime(self, variant):
        rng = np.random.default_rng(14)
        for _ in range(60):
            site, econ, alpha = draw_params(rng, variant)
            pol = solve_node(site, econ, alpha)
            assert pol.regime in (REGIME_INNER, REGIME_GREEN_ONLY, REGIME_BROWN_ONLY,
                                  REGIME_BROWN_MODEL, REGIME_INDIFFERENT)
            if variant in ("quadratic", "custom"):
                a_b = site.brown_productivity - 1
                a_g = site.green_productivity - 1
                edge = a_g / a_b - float(site.cost.marginal(0.0)) / alpha
                cstar = (a_b / alpha) ** (1 / econ.gamma)
                lhs = float(site.cost.marginal(cstar / a_g))
                rhs = alpha * (a_g / a_b - site.green_intensity)
                flags = [site.green_intensity <= edge and lhs >= rhs,
                         site.green_intensity <= edge and lhs < rhs,
                         site.green_intensity > edge]
                assert sum(flags) == 1
                assert pol.regime == [REGIME_INNER, REGIME_GREEN_ONLY,
                                      REGIME_BROWN_ONLY][flags.index(True)]

    def test_regime_monotone_in_intensity(self):
        rng = np.random.default_rng(15)
        order = {REGIME_GREEN_ONLY: 0, REGIME_INNER: 1, REGIME_BROWN_ONLY: 2}
        for _ in range(25):
            site0, econ, alpha = draw_params(rng, "quadratic")
            seen_brown = False
            last = -1
            for eps in np.linspace(0.0, 0.99, 120):
                site = SiteParams(decay=site0.decay,
                                  brown_productivity=site0.brown_productivity,
                                  green_productivity=site0.green_productivity,
                                  green_intensity=float(eps), awareness=1.0,
                                  cost=site0.cost)
                reg = solve_strictly_convex(site, econ, alpha).regime
                if seen_brown:
                    assert reg == REGIME_BROWN_ONLY
                seen_brown = seen_brown or reg == REGIME_BROWN_ONLY
                assert order[reg] >= last or reg == REGIME_INNER
                last = order[reg]


class TestKKT:
    def test_inner_stationarity_vanishes(self):
        rng = np.random.default_rng(21)
        checked = 0
        for _ in range(300):
            site, econ, alpha = draw_params(rng, "quadratic")
            pol = solve_node(site, econ, alpha)
            rep = kkt_report(site, econ, alpha, pol)
            if pol.regime == REGIME_INNER:
                assert abs(rep["stationarity_brown"]) < 1e-9
                assert abs(rep["stationarity_green"]) < 1e-9
                checked += 1
            else:
                assert rep["multiplier_brown"] >= -1e-9
                assert rep["multiplier_green"] >= -1e-9
        assert checked >= 20

    def test_green_only_stationarity(self):
        rng = np.random.default_rng(22)
        checked = 0
        for _ in range(200):
            site, econ, alpha = draw_params(rng, "custom")
            pol = solve_node(site, econ, alpha)
            if pol.regime == REGIME_GREEN_ONLY:
                rep = kkt_report(site, econ, alpha, pol)
                assert abs(rep["stationarity_green"]) < 1e-7
                checked += 1
        assert checked >= 5


class TestOracleCertification:
    @pytest.mark.parametrize("variant", ["quadratic", "linear", "custom", "brown-only"])
    def test_closed_forms_dominate_oracle(self, variant):
        rng = np.random.default_rng(31)
        for _ in range(40):
            site, econ, alpha = draw_params(rng, variant)
            pol = solve_node(site, econ, alpha)
            oracle = brute_force_maximize(site, econ, alpha)
            assert pol.value >= oracle.value - 1e-6
            if pol.regime != REGIME_INDIFFERENT:
                assert max(abs(pol.brown - oracle.brown),
                           abs(pol.green - oracle.green)) <= 1e-3

    def test_oracle_finds_far_optimum(self):
        # cheap linear cost puts the optimum far outside the initial box scale
        site = table_site(LinearCost(0.001))
        oracle = brute_force_maximize(site, ECON, ALPHA_TABLE)
        pol = solve_linear(site, ECON, ALPHA_TABLE)
        assert abs(oracle.green - pol.green) <= 1e-3
        assert oracle.brown <= 1e-3

    def test_oracle_on_worthless_green(self):
        site = table_site(NoCost(), a_green=1.0)
        oracle = brute_force_maximize(site, ECON, ALPHA_TABLE)
        # no interior green incentive: any reported green is grid noise
        assert oracle.green <= 1e-3
        assert oracle.brown == pytest.approx(4 * 0.43 ** 2, abs=1e-4)

    def test_indifference_value_matches(self):
        lam = 1.0
        eps = 1.75 / 4.0 - lam / ALPHA_TABLE
        site = table_site(LinearCost(lam), epsilon=eps)
        pol = solve_linear(site, ECON, ALPHA_TABLE)
        oracle = brute_force_maximize(site, ECON, ALPHA_TABLE)
        assert abs(pol.value - oracle.value) < 1e-6


class TestEmissionComparison:
    def test_calibration_numbers(self):
        site = table_site(QuadraticCost(1.0))
        two, brown = emission_comparison(site, ECON, ALPHA_TABLE)
        assert brown == pytest.approx(0.7396, abs=1e-4)
        assert two == pytest.approx(0.6072, abs=1e-4)
        assert two < brown

    def test_identity_against_displayed_gap(self):
        site = table_site(QuadraticCost(1.0))
        two, brown = emission_comparison(site, ECON, ALPHA_TABLE)
        m = 1.75 / 4.0 - 0.1
        gap = (ALPHA_TABLE * m / 2.0) * m  # quadratic marginal inverse is y/2
        assert brown - two == pytest.approx(gap, rel=1e-12)

    def test_gap_vanishes_at_the_threshold(self):
        site = table_site(QuadraticCost(1.0), epsilon=1.75 / 4.0 - 1e-6)
        two, brown = emission_comparison(site, ECON, ALPHA_TABLE)
        assert 0 < brown - two < 1e-11

    def test_strict_inequality_on_random_draws(self):
        rng = np.random.default_rng(55)
        hits = 0
        while hits < 100:
            site, econ, alpha = draw_params(rng, "quadratic")
            try:
                two, brown = emission_comparison(site, econ, alpha)
            except ComparisonNotApplicableError:
                continue
            assert two < brown
            hits += 1

    def test_not_applicable_outside_inner(self):
        with pytest.raises(ComparisonNotApplicableError):
            emission_comparison(table_site(QuadraticCost(1.0), epsilon=0.99),
                                ECON, ALPHA_TABLE)
        with pytest.raises(ComparisonNotApplicableError):
            emission_comparison(table_site(LinearCost(1.0)), ECON, ALPHA_TABLE)


class TestNodePolicyInvariants:
    def test_rejects_negative_controls(self):
        with pytest.raises(ModelError):
            NodePolicy(brown=-0.1, green=0.0, consumption=1.0, emission=0.0,
                       regime=REGIME_INNER, value=0.0)

    def test_rejects_zero_consumption(self):
        with pytest.raises(ModelError):
            NodePolicy(brown=0.0, green=0.0, consumption=0.0, emission=0.0,
                       regime=REGIME_INNER, value=0.0)

    def test_consumption_positive_across_draws(self):
        rng = np.random.default_rng(77)
        for variant in ("quadratic", "linear", "custom", "brown-only"):
            for _ in range(30):
                site, econ, alpha = draw_params(rng, variant)
                pol = solve_node(site, econ, alpha)
                assert pol.consumption > 0
                assert pol.emission >= 0
                assert pol.brown >= 0 and pol.green >= 0

#include <gtest/gtest.h>

#include <cmath>

#include "mmw/antenna.hpp"
#include "mmw/link.hpp"
#include "mmw/montecarlo.hpp"
#include "mmw/utility_table.hpp"

using namespace mmw;

namespace {

LinkBudget budget(double l, double gain, double noise) { return LinkBudget{LinkKind::los, l, gain, 0.0, noise}; }

GainDistribution default_gains(const Scenario& s) { return gain_distribution(uniform_alignment(s), s); }

double no_interference(double, double) { return 0.0; }

}  // namespace

TEST(Sinr, ZeroPowerAndLinearity) {
    const Scenario s = default_scenario();
    const auto lb = budget(10.0, 2.0, s.noise_power());
    EXPECT_EQ(sinr(0.0, lb, s), 0.0);
    EXPECT_NEAR(sinr(0.08, lb, s), 2.0 * sinr(0.04, lb, s), 1e-12 * sinr(0.08, lb, s));
    for (double c : {0.1, 3.0, 17.0}) EXPECT_NEAR(sinr(c * 0.01, lb, s), c * sinr(0.01, lb, s), 1e-12 * c * sinr(0.01, lb, s));
}

TEST(Sinr, HandEvaluatedLosLink) {
    const Scenario s = default_scenario();
    const LinkBudget lb{LinkKind::los, 10.0, 2.0, 0.4e-10, 0.6e-10};
    EXPECT_NEAR(sinr(0.1, lb, s), 0.1 * 2.0 * std::pow(10.0, -2.2) / 1e-10, 1.0);
    EXPECT_NEAR(sinr(0.1, lb, s) / 1.262e7, 1.0, 1e-3);
}

TEST(Sinr, InterferenceLowersSinr) {
    const Scenario s = default_scenario();
    LinkBudget lb = budget(5.0, 1.0, s.noise_power());
    const double quiet = sinr(0.05, lb, s);
    lb.interference = s.noise_power();
    EXPECT_NEAR(sinr(0.05, lb, s), 0.5 * quiet, 1e-12 * quiet);
}

TEST(Sinr, RejectsSingularInput) {
    const Scenario s = default_scenario();
    EXPECT_THROW(sinr(0.1, budget(0.0, 1.0, 1e-10), s), DomainError);
    EXPECT_THROW(sinr(-0.1, budget(1.0, 1.0, 1e-10), s), DomainError);
    EXPECT_THROW(energy_efficiency(-1e-3, budget(1.0, 1.0, 1e-10), s), DomainError);
}

TEST(PacketSuccess, ExponentialCurve) {
    Scenario s = default_scenario();
    s.q_model = QModel::exp;
    EXPECT_EQ(packet_success(0.0, s), 0.0);
    EXPECT_NEAR(packet_success(std::log(2.0), s), 0.5, 1e-15);
    for (double k : {0.01, 1.0, 15.0}) {
        s.q_kappa = k;
        EXPECT_GT(packet_success(2.0, s), packet_success(1.0, s));
    }
}

TEST(PacketSuccess, SigmoidCurve) {
    const Scenario s = default_scenario();
    ASSERT_EQ(s.q_model, QModel::sigmoid);
    EXPECT_EQ(packet_success(0.0, s), 0.0);
    EXPECT_NEAR(packet_success(std::log(2.0), s), std::pow(0.5, s.q_order), 1e-15);
    double prev = 0.0;
    for (double g = 0.01; g < 25.0; g *= 1.3) {
        const double q = packet_success(g, s);
        EXPECT_GT(q, prev);
        EXPECT_LE(q, 1.0);
        prev = q;
    }
    EXPECT_NEAR(packet_success(1e3, s), 1.0, 1e-12);
}

TEST(Efficiency, ZeroPowerLimit) {
    Scenario s = default_scenario();
    const auto lb = budget(7.0, 3.0, s.noise_power());
    const double slope = sinr_slope(lb, s);
    s.q_model = QModel::exp;
    EXPECT_NEAR(energy_efficiency(0.0, lb, s), s.rate * s.q_kappa * slope, 1e-12 * s.rate * slope);
    const double tiny = 1e-12 / slope;
    EXPECT_NEAR(energy_efficiency(tiny, lb, s) / energy_efficiency(0.0, lb, s), 1.0, 1e-9);
    s.q_model = QModel::sigmoid;
    EXPECT_EQ(energy_efficiency(0.0, lb, s), 0.0);
    EXPECT_LT(energy_efficiency(tiny, lb, s), 1e-90);
}

TEST(Efficiency, SaturatedRegimeIsRateOverPower) {
    const Scenario s = default_scenario();
    const auto lb = budget(0.5, 50.0, s.noise_power());
    ASSERT_NEAR(packet_success(0.01 * sinr_slope(lb, s), s), 1.0, 1e-12);
    for (double p : {0.01, 0.02, 0.04}) EXPECT_NEAR(energy_efficiency(p, lb, s), s.rate / p, 1e-9 * s.rate / p);
    EXPECT_NEAR(energy_efficiency(0.04, lb, s), 0.5 * energy_efficiency(0.02, lb, s), 1e-6);
}

TEST(Efficiency, PeakMatchesGridSearch) {
    const Scenario s = default_scenario();
    const double gain = main_lobe_gain(s.beam_bs) * main_lobe_gain(s.beam_mu);
    for (LinkKind k : {LinkKind::los, LinkKind::nlos}) {
        const LinkBudget lb{k, 10.0, gain, 0.0, s.noise_power()};
        const double peak = efficiency_peak(lb, s);
        double best = 0.0, best_p = 0.0;
        for (int i = 0; i <= 10000; ++i) {
            const double p = s.p_max * i / 10000.0;
            const double v = energy_efficiency(p, lb, s);
            if (v > best) {
                best = v;
                best_p = p;
            }
        }
        EXPECT_NEAR(peak, best_p, 1e-5) << static_cast<int>(k);
        EXPECT_GE(energy_efficiency(peak, lb, s), best * (1.0 - 1e-12));
    }
}

TEST(Efficiency, UnimodalUnderSigmoid) {
    const Scenario s = default_scenario();
    for (double l : {2.0, 6.0, 14.0}) {
        const auto lb = budget(l, 1.0, s.noise_power());
        const double peak = efficiency_peak(lb, s);
        double prev = energy_efficiency(peak, lb, s);
        for (double p = peak * 1.01; p <= s.p_max; p *= 1.01) {
            const double v = energy_efficiency(p, lb, s);
            EXPECT_LE(v, prev * (1.0 + 1e-12));
            prev = v;
        }
        prev = energy_efficiency(peak, lb, s);
        for (double p = peak / 1.01; p > peak * 1e-4; p /= 1.01) {
            const double v = energy_efficiency(p, lb, s);
            EXPECT_LE(v, prev * (1.0 + 1e-12));
            prev = v;
        }
    }
}

TEST(Efficiency, ExponentialCurveIsDecreasing) {
    Scenario s = default_scenario();
    s.q_model = QModel::exp;
    const auto lb = budget(8.0, 1.0, s.noise_power());
    double prev = energy_efficiency(0.0, lb, s);
    for (double p = 1e-4; p <= s.p_max; p += 1e-3) {
        const double v = energy_efficiency(p, lb, s);
        EXPECT_LT(v, prev);
        prev = v;
    }
    EXPECT_EQ(efficiency_peak(lb, s), 0.0);
}

TEST(ExpectedUtility, EmptyUserField) {
    Scenario s = default_scenario();
    s.lambda_u = 0.0;
    EXPECT_EQ(expected_utility(0.05, no_interference, default_gains(s), s), 0.0);
}

TEST(ExpectedUtility, ZeroPowerIsFinite) {
    Scenario s = default_scenario();
    const double sig = expected_utility(0.0, no_interference, default_gains(s), s, 1e-4);
    EXPECT_TRUE(std::isfinite(sig));
    EXPECT_EQ(sig, 0.0);
    s.q_model = QModel::exp;
    const double ex = expected_utility(0.0, no_interference, default_gains(s), s, 1e-4);
    EXPECT_TRUE(std::isfinite(ex));
    EXPECT_GT(ex, 0.0);
}

TEST(ExpectedUtility, RejectsPowerOutsideRange) {
    const Scenario s = default_scenario();
    EXPECT_THROW(expected_utility(-0.01, no_interference, default_gains(s), s), DomainError);
    EXPECT_THROW(expected_utility(0.2, no_interference, default_gains(s), s), DomainError);
}

TEST(ExpectedUtility, TableAgreesWithAdaptiveQuadrature) {
    const Scenario s = default_scenario();
    const auto gd = default_gains(s);
    const UtilityTable table(s, {});
    for (double p : {1e-9, 0.02, 0.05}) {
        const double a = expected_utility(p, no_interference, gd, s, 1e-4);
        EXPECT_NEAR(table.value(p, gd, 0.0), a, 1e-3 * a) << p;
    }
    const FieldIntegralSpline field(s);
    const double scale = 0.05 * interferer_mean_gain(s);
    auto interf = [&](double r, double l) { return scale * field.geometric_kernel(r, l); };
    const double a = expected_utility(0.05, interf, gd, s, 1e-4);
    EXPECT_NEAR(table.value(0.05, gd, scale), a, 1e-3 * a);
}

// Modulus of continuity: the largest step between neighbouring samples on
// [p_max/100, p_max] shrinks with the grid spacing. Below that the sigmoid
// keeps short links saturated until p is tiny, then the value falls to the
// p = 0 limit.
TEST(ExpectedUtilityProperty, ContinuousInPower) {
    const Scenario s = default_scenario();
    const auto gd = default_gains(s);
    const UtilityTable table(s, {});
    auto modulus = [&](int n) {
        const double a = 0.01 * s.p_max, h = (s.p_max - a) / n;
        double jump = 0.0, prev = table.value(a, gd, 0.0);
        for (int i = 1; i <= n; ++i) {
            const double v = table.value(a + i * h, gd, 0.0);
            jump = std::max(jump, std::abs(v - prev));
            prev = v;
        }
        return jump;
    };
    const double m1 = modulus(100), m2 = modulus(400), m3 = modulus(1600);
    EXPECT_GT(m1, 0.0);
    EXPECT_LT(m2, 0.5 * m1);
    EXPECT_LT(m3, 0.5 * m2);
    EXPECT_LT(m3, 0.1 * table.value(0.01 * s.p_max, gd, 0.0));  // slope there is about v / p
    EXPECT_EQ(table.value(0.0, gd, 0.0), 0.0);
    double prev = table.value(1e-17, gd, 0.0);
    for (double p = 1e-18; p > 1e-24; p /= 10.0) {
        const double v = table.value(p, gd, 0.0);
        EXPECT_LT(v, prev) << p;
        EXPECT_GE(v, 0.0);
        prev = v;
    }
    EXPECT_LT(prev, 1e-30 * table.value(0.05, gd, 0.0));
}

TEST(ExpectedUtilityProperty, MoreInterferenceNeverHelps) {
    const Scenario s = default_scenario();
    const auto gd = default_gains(s);
    const UtilityTable table(s, {});
    for (double p : {0.005, 0.03, 0.1}) {
        double prev = table.value(p, gd, 0.0);
        for (double scale = 1e-4; scale < 10.0; scale *= 4.0) {
            const double v = table.value(p, gd, scale);
            EXPECT_LE(v, prev * (1.0 + 1e-12)) << p << " " << scale;
            prev = v;
        }
    }
    const FieldIntegralSpline field(s);
    auto low = [&](double r, double l) { return 0.001 * field.geometric_kernel(r, l); };
    auto high = [&](double r, double l) { return 0.01 * field.geometric_kernel(r, l); };
    EXPECT_LE(expected_utility(0.05, high, gd, s, 1e-4), expected_utility(0.05, low, gd, s, 1e-4));
}

// Realized networks with strip blockage; position and association sampled,
// gain averaged over its law.
TEST(ExpectedUtility, MatchesMonteCarloWithoutInterference) {
    const Scenario s = default_scenario();
    const double a = UtilityTable(s, {}).value(0.05, default_gains(s), 0.0);
    const auto e = empirical_expected_utility(s, 0.05, 100000, 2024);
    EXPECT_LE(std::abs(e.mean - a) / a, 0.01) << "analytic=" << a << " mc=" << e.mean << " se=" << e.se;
}

TEST(ExpectedUtility, MatchesMonteCarloWithIndependentBlockage) {
    Scenario s = default_scenario();
    s.assoc_mode = AssocMode::union_;
    const double a = UtilityTable(s, {}).value(0.05, default_gains(s), 0.0);
    const auto e = empirical_expected_utility(s, 0.05, 100000, 77, BlockageRule::independent);
    EXPECT_LE(std::abs(e.mean - a), 3.0 * e.se) << "analytic=" << a << " mc=" << e.mean << " se=" << e.se;
}

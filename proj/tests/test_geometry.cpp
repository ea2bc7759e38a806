#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mmw/geometry.hpp"

using namespace mmw;

namespace {

// Arc length by brute force: share of n equally spaced points on the circle
// that fall inside the disk.
double arc_by_sampling(double l, double d, double R, int n = 2000000) {
    int inside = 0;
    for (int k = 0; k < n; ++k) {
        const double a = (k + 0.5) * 2.0 * M_PI / n;
        const double x = d + l * std::cos(a), y = l * std::sin(a);
        inside += x * x + y * y <= R * R;
    }
    return 2.0 * M_PI * l * inside / n;
}

// Plain adaptive integral of the interior-branch exponent 2 pi int_0^l v w(v) dv.
double interior_exponent(LinkKind k, double l, const Scenario& s) {
    auto f = [&](double v) {
        const double pb = s.r_blocker >= v ? 0.0 : 1.0 - std::exp(-s.lambda_total() * (v - s.r_blocker) * s.r_blocker);
        return 2.0 * M_PI * v * (k == LinkKind::los ? 1.0 - pb : pb);
    };
    return quad::integrate_pieces(f, 0.0, l, {s.r_blocker}, 1e-13);
}

}  // namespace

TEST(Blockage, ClampedAtBlockerRadius) {
    const Scenario s = default_scenario();
    EXPECT_EQ(blockage_prob(s.r_blocker, s), 0.0);
    EXPECT_EQ(blockage_prob(0.1, s), 0.0);
    EXPECT_EQ(blockage_prob(0.0, s), 0.0);
}

TEST(Blockage, HandEvaluatedAtTenMetres) {
    const Scenario s = default_scenario();
    EXPECT_NEAR(blockage_prob(10.0, s), 1.0 - std::exp(-0.12 * 9.7 * 0.3), 1e-15);
    EXPECT_NEAR(blockage_prob(10.0, s), 0.2947, 5e-5);
}

TEST(Blockage, IncreasingToOne) {
    const Scenario s = default_scenario();
    EXPECT_GT(blockage_prob(20.0, s), blockage_prob(10.0, s));
    double prev = 0.0;
    for (double l = 0.31; l < 200.0; l *= 1.1) {
        const double p = blockage_prob(l, s);
        EXPECT_GT(p, prev);
        prev = p;
    }
    EXPECT_NEAR(blockage_prob(1000.0, s), 1.0, 1e-12);
}

TEST(ArcLength, InteriorCircle) {
    EXPECT_NEAR(arc_length(3.0, 5.0, 25.0), 2.0 * M_PI * 3.0, 1e-12);
    EXPECT_NEAR(arc_length(3.0, 5.0, 25.0), 18.850, 5e-4);
}

TEST(ArcLength, BoundaryPointHalfCircle) {
    const double c = arc_length(1.0, 25.0, 25.0);
    EXPECT_NEAR(c, arc_by_sampling(1.0, 25.0, 25.0), 1e-4);
    EXPECT_NEAR(c, M_PI, 0.05);
}

TEST(ArcLength, ContinuousAtInteriorBoundary) {
    const double R = 25.0, r = 20.0;
    EXPECT_NEAR(arc_length(5.0 + 1e-9, r, R), 2.0 * M_PI * 5.0, 1e-3);
    EXPECT_NEAR(arc_length(5.0 - 1e-9, r, R), 2.0 * M_PI * 5.0, 1e-7);
    EXPECT_NEAR(arc_length(45.0 - 1e-9, r, R), 0.0, 1e-2);
    EXPECT_EQ(arc_length(45.0, r, R), 0.0);
}

TEST(ArcLength, MatchesDenseSamplingOracle) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 25; ++t) {
        const double d = 35.0 * u(rng);  // includes centres outside the disk
        const double l = 0.05 + 55.0 * u(rng);
        const double a = arc_length(l, d, 25.0);
        EXPECT_NEAR(a, arc_by_sampling(l, d, 25.0), 2e-4 * (1.0 + l)) << "l=" << l << " d=" << d;
        EXPECT_LE(a, 2.0 * M_PI * l * (1.0 + 1e-15));
        if (l > 25.0 - d) {
            EXPECT_LT(a, 2.0 * M_PI * l);
        }
    }
}

// Outside arc from the slopes of the lines joining the circle centre to the
// two intersection points, where the tangent form is single valued.
TEST(ArcLength, AgreesWithSlopeConstruction) {
    const double R = 25.0;
    int checked = 0;
    for (double d : {12.0, 18.0, 22.0, 24.5}) {
        for (double l : {R - d + 0.2, R - d + 0.7, R - d + 1.5}) {
            const double x = (R * R - l * l + d * d) / (2.0 * d);
            const double y = std::sqrt(R * R - x * x);
            const double m1 = y / (x - d), m2 = -y / (x - d);
            if (!(x > d) || !(1.0 + m1 * m2 > 0.0)) continue;
            const double theta_out = std::atan((m1 - m2) / (1.0 + m1 * m2));
            EXPECT_NEAR(arc_length(l, d, R), l * (2.0 * M_PI - theta_out), 1e-10) << d << " " << l;
            ++checked;
        }
    }
    EXPECT_GE(checked, 6);
}

TEST(NearestPdf, NormalizedAtCentreHalfAndEdge) {
    const Scenario s = default_scenario();
    for (double r : {0.0, 12.5, 25.0})
        for (LinkKind k : {LinkKind::los, LinkKind::nlos}) {
            const auto pdf = nearest_bs_pdf(k, r, s);
            const double mass = quad::integrate_pieces_sqrt([&](double l) { return pdf.evaluate(l); }, 0.0, s.r_0,
                                                            {s.r_blocker}, {s.r_max - r}, 1e-11);
            EXPECT_NEAR(mass, 1.0, 1e-6) << to_string(k) << " r=" << r;
            EXPECT_GT(pdf.normalizer(), 0.0);
            EXPECT_LE(pdf.normalizer(), 1.0);
        }
}

TEST(NearestPdf, NormalizedAtRandomRadii) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Scenario s = default_scenario();
    for (int t = 0; t < 20; ++t) {
        const double r = s.r_max * u(rng);
        const LinkKind k = t % 2 ? LinkKind::los : LinkKind::nlos;
        const auto pdf = nearest_bs_pdf(k, r, s);
        // plain Gauss-Kronrod with only the obvious breaks
        const double mass = quad::integrate_pieces([&](double l) { return pdf.evaluate(l); }, 0.0, s.r_0,
                                                   {s.r_blocker, std::clamp(s.r_max - r, 0.0, s.r_0)}, 1e-10);
        EXPECT_NEAR(mass, 1.0, 1e-6) << "r=" << r;
    }
}

TEST(NearestPdf, CentreUsesUnboundedFormula) {
    const Scenario s = default_scenario();
    for (LinkKind k : {LinkKind::los, LinkKind::nlos}) {
        const auto pdf = nearest_bs_pdf(k, 0.0, s);
        const double B = 1.0 - std::exp(-s.lambda_b * interior_exponent(k, s.r_0, s));
        EXPECT_NEAR(pdf.normalizer(), B, 1e-12);
        for (double l : {0.2, 0.5, 1.0, 2.5, 5.0, 9.0, 14.9}) {
            const double pb = blockage_prob(l, s);
            const double w = k == LinkKind::los ? 1.0 - pb : pb;
            const double want = 2.0 * M_PI * l * s.lambda_b * w * std::exp(-s.lambda_b * interior_exponent(k, l, s)) / B;
            EXPECT_NEAR(pdf.evaluate(l), want, 1e-10 * std::max(1.0, want)) << l;
        }
    }
}

TEST(NearestPdf, RejectsRadiusOutsideDisk) {
    const Scenario s = default_scenario();
    EXPECT_THROW(nearest_bs_pdf(LinkKind::los, -1.0, s), DomainError);
    EXPECT_THROW(nearest_bs_pdf(LinkKind::los, 25.1, s), DomainError);
    EXPECT_THROW(void_prob(LinkKind::los, 1.0, 26.0, s), DomainError);
    EXPECT_THROW(void_prob(LinkKind::los, -1.0, 2.0, s), DomainError);
}

TEST(RadialExponent, ClosedFormInteriorMatchesQuadrature) {
    const Scenario s = default_scenario();
    for (double r : {0.0, 3.0, 10.0, 17.0, 24.0, 25.0})
        for (double l : {0.1, 0.3, 1.0, 4.0, 8.0, 12.0, 15.0, 30.0})
            for (LinkKind k : {LinkKind::los, LinkKind::nlos}) {
                const double a = radial_exponent(k, l, r, s);
                const double b = radial_exponent_with([&](double v) { return link_weight(k, v, s); }, l, r, s);
                EXPECT_NEAR(a, b, 1e-8 * std::max(1.0, b)) << to_string(k) << " r=" << r << " l=" << l;
            }
}

TEST(VoidProb, EdgeValues) {
    const Scenario s = default_scenario();
    for (double r : {0.0, 12.0, 25.0}) {
        EXPECT_EQ(void_prob(LinkKind::los, 0.0, r, s), 1.0);
        EXPECT_EQ(void_prob(LinkKind::nlos, 0.0, r, s), 1.0);
        EXPECT_NEAR(void_prob(LinkKind::nlos, s.r_blocker, r, s), 1.0, 1e-15);
        double prev = 1.0;
        for (double l = 0.5; l <= 15.0; l += 0.5) {
            const double v = void_prob(LinkKind::nlos, l, r, s);
            EXPECT_LE(v, prev);
            prev = v;
        }
    }
}

// f B = hazard * void, with the hazard built from the sampled arc length and
// the void probability differentiated numerically.
TEST(VoidProb, HazardTimesVoidIsDensity) {
    const Scenario s = default_scenario();
    for (double r : {0.0, 9.0, 18.0, 24.0})
        for (LinkKind k : {LinkKind::los, LinkKind::nlos}) {
            const auto pdf = nearest_bs_pdf(k, r, s);
            for (double l : {0.7, 3.3, 6.1, 11.9, 14.2}) {
                const double hazard = s.lambda_b * arc_by_sampling(l, r, s.r_max, 4000000) * link_weight(k, l, s);
                const double fb = pdf.evaluate(l) * pdf.normalizer();
                EXPECT_NEAR(fb, hazard * pdf.void_prob(l), 1e-8 + 2e-5 * fb) << r << " " << l;
                EXPECT_NEAR(fb, pdf.hazard(l) * pdf.void_prob(l), 1e-8);
                const double h = 1e-4;
                const double deriv = -(pdf.void_prob(l + h) - pdf.void_prob(l - h)) / (2.0 * h);
                EXPECT_NEAR(fb, deriv, 1e-7 + 1e-6 * fb) << r << " " << l;
            }
        }
}

// Exchanging p_B and 1 - p_B exchanges the LOS and NLOS fields, so the two
// exponents always add up to the exponent of the whole BS process.
TEST(VoidProb, SwapSymmetry) {
    const Scenario s = default_scenario();
    for (double r : {0.0, 10.0, 22.5})
        for (double l : {0.2, 2.0, 7.5, 15.0}) {
            const double los = radial_exponent(LinkKind::los, l, r, s);
            const double nlos = radial_exponent(LinkKind::nlos, l, r, s);
            const double all = radial_exponent_with([](double) { return 1.0; }, l, r, s);
            EXPECT_NEAR(los + nlos, all, 1e-9 * std::max(1.0, all));
            const double swapped = radial_exponent_with([&](double v) { return 1.0 - link_weight(LinkKind::nlos, v, s); }, l, r, s);
            EXPECT_NEAR(swapped, los, 1e-9 * std::max(1.0, los));
            EXPECT_NEAR(void_prob(LinkKind::los, l, r, s) * void_prob(LinkKind::nlos, l, r, s),
                        std::exp(-s.lambda_b * all), 1e-12);
        }
}

TEST(InterfererDensity, NoUsersNoDensity) {
    Scenario s = default_scenario();
    s.lambda_u = 0.0;
    for (double q : {0.0, 1.0, 10.0, 40.0}) EXPECT_EQ(interferer_density(q, 7.0, s), 0.0);
}

TEST(InterfererDensity, CentreIsFullCircle) {
    const Scenario s = default_scenario();
    for (double q : {0.5, 5.0, 24.9}) EXPECT_NEAR(interferer_density(q, 0.0, s), 2.0 * M_PI * q * s.lambda_u, 1e-13);
    EXPECT_EQ(interferer_density(50.1, 25.0, s), 0.0);
}

TEST(InterfererDensity, IntegratesToDiskPopulation) {
    const Scenario s = default_scenario();
    for (double d : {0.0, 5.0, 12.5, 20.0, 25.0, 30.0}) {
        auto f = [&](double q) { return interferer_density(q, d, s); };
        const double total = quad::integrate_pieces_sqrt(f, 0.0, s.r_max + d, {}, {std::abs(s.r_max - d), s.r_max + d}, 1e-12);
        EXPECT_NEAR(total, s.lambda_u * M_PI * s.r_max * s.r_max, 1e-7) << "d=" << d;
    }
}

TEST(InterfererOriginDistance, LawOfCosines) {
    EXPECT_NEAR(interferer_origin_distance(0.0, 3.0, 7.0), 4.0, 1e-12);
    EXPECT_NEAR(interferer_origin_distance(M_PI, 3.0, 7.0), 10.0, 1e-12);
    EXPECT_NEAR(interferer_origin_distance(M_PI / 2.0, 3.0, 4.0), 5.0, 1e-12);
    for (double th = 0.0; th <= 2.0 * M_PI; th += 0.1) {
        const double a = interferer_origin_distance(th, 6.0, 2.5);
        EXPECT_NEAR(a, interferer_origin_distance(2.0 * M_PI - th, 6.0, 2.5), 1e-12);
        EXPECT_GE(a, 3.5 - 1e-12);
        EXPECT_LE(a, 8.5 + 1e-12);
    }
}

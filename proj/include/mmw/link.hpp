#pragma once

// SINR, packet success, energy efficiency and the expected utility rate of an
// MU transmission averaged over position, association and antenna gain.

#include <cmath>
#include <functional>
#include <string>

#include "association.hpp"
#include "config.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"

namespace mmw {

struct LinkBudget {
    LinkKind kind = LinkKind::los;
    double l = 1.0;             // serving distance, m
    double gain = 1.0;          // antenna gain product
    double interference = 0.0;  // W
    double noise = 0.0;         // N0 B, W
};

inline double path_gain(LinkKind k, double l, const Scenario& s) {
    return k == LinkKind::los ? s.a_los * std::pow(l, -s.alpha_los) : s.a_nlos * std::pow(l, -s.alpha_nlos);
}

/// SINR per watt of transmit power.
inline double sinr_slope(const LinkBudget& lb, const Scenario& s) {
    if (!(lb.l > 0.0)) throw DomainError("sinr: serving distance must be > 0");
    return path_gain(lb.kind, lb.l, s) * lb.gain / (lb.noise + lb.interference);
}

inline double sinr(double p, const LinkBudget& lb, const Scenario& s) {
    if (p < 0.0) throw DomainError("sinr: power must be >= 0");
    return p * sinr_slope(lb, s);
}

namespace detail {

inline double ipow(double x, int n) {
    double r = 1.0;
    while (n > 0) {
        if (n & 1) r *= x;
        x *= x;
        n >>= 1;
    }
    return r;
}

}  // namespace detail

inline double packet_success(double gamma, const Scenario& s) {
    const double base = -std::expm1(-s.q_kappa * gamma);
    return s.q_model == QModel::exp ? base : detail::ipow(base, s.q_order);
}

/// xi = R q(gamma) / p with slope c = gamma / p; the p -> 0 limit is R kappa c
/// for the exponential curve and 0 for the sigmoid (order > 1).
inline double efficiency_from_slope(double p, double c, const Scenario& s) {
    if (p > 0.0) return s.rate * packet_success(p * c, s) / p;
    if (s.q_model == QModel::exp || s.q_order == 1) return s.rate * s.q_kappa * c;
    return 0.0;
}

inline double energy_efficiency(double p, const LinkBudget& lb, const Scenario& s) {
    if (p < 0.0) throw DomainError("energy_efficiency: power must be >= 0");
    return efficiency_from_slope(p, sinr_slope(lb, s), s);
}

/// Golden-section search for the power maximizing xi on [0, p_max], done in
/// log(p) over [p_max * 1e-20, p_max]; returns 0 when the p -> 0 limit wins.
inline double efficiency_peak(const LinkBudget& lb, const Scenario& s) {
    auto f = [&](double lp) { return energy_efficiency(std::exp(lp), lb, s); };
    double a = std::log(s.p_max * 1e-20), b = std::log(s.p_max);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - g * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + g * (b - a); fd = f(d);
        }
    }
    const double p = std::exp(0.5 * (a + b));
    return energy_efficiency(0.0, lb, s) >= energy_efficiency(p, lb, s) ? 0.0 : p;
}

/// Interference seen by a BS at distance l from an MU at distance r.
using InterferenceFn = std::function<double(double r, double l)>;

/// Average utility rate of a transmission at power p:
///   int_0^{r_max} 2 pi r lambda_u int_{r_B}^{r_0} [p_B f^c_N xi_N + (1 - p_B) f^c_L xi_L] dl dr,
/// where the gain inside xi is averaged over the qualifying gain set.
inline double expected_utility(double p, const InterferenceFn& interference, const GainDistribution& gd,
                               const Scenario& s, double tol = 1e-7) {
    if (p < 0.0 || p > s.p_max * (1.0 + 1e-12)) throw DomainError("expected_utility: power must lie in [0, p_max]");
    if (s.lambda_u == 0.0) return 0.0;
    const double noise = s.noise_power();
    const auto sets = gain_threshold_sets(gd, s);

    auto mixed_xi = [&](LinkKind k, const GainSet& set, double l, double I) {
        double acc = 0.0;
        for (std::size_t g = 0; g < 4; ++g) {
            if (!set[g] || gd.probs[g] == 0.0) continue;
            const LinkBudget lb{k, l, gd.support[g], I, noise};
            acc += gd.probs[g] * energy_efficiency(p, lb, s);
        }
        return acc;
    };

    auto radial = [&](double r) {
        const AssociationLaw law(r, gd, s);
        auto inner = [&](double l) {
            const double pb = blockage_prob(l, s);
            const double I = interference(r, l);
            double v = 0.0;
            if (pb > 0.0) v += pb * law.nlos_weight(l) * mixed_xi(LinkKind::nlos, sets.nlos_prime, l, I);
            if (pb < 1.0) v += (1.0 - pb) * law.los_weight(l) * mixed_xi(LinkKind::los, sets.los, l, I);
            if (!std::isfinite(v))
                throw NumericalError("expected_utility: non-finite integrand at r=" + std::to_string(r) +
                                     ", l=" + std::to_string(l));
            return v;
        };
        const double in = quad::integrate_pieces_sqrt(inner, s.r_blocker, s.r_0, {}, {s.r_max - r}, tol);
        return kTwoPi * r * s.lambda_u * in;
    };
    return quad::integrate_pieces(radial, 0.0, s.r_max, {s.r_max - s.r_0}, tol);
}

inline double expected_utility(double p, const InterferenceFn& interference, const PhiMarginal& marginal,
                               double psi_ub, const Scenario& s) {
    return expected_utility(p, interference, gain_distribution(marginal, psi_ub, s), s);
}

}  // namespace mmw

#pragma once

// Stochastic geometry of a finite disk network: blockage, boundary arc
// length, nearest LOS/NLOS BS distance laws, void probabilities and the
// interferer location density.

#include <algorithm>
#include <cmath>
#include <string>

#include "config.hpp"
#include "error.hpp"
#include "quadrature.hpp"

namespace mmw {

enum class LinkKind { los, nlos };

inline const char* to_string(LinkKind k) { return k == LinkKind::los ? "LOS" : "NLOS"; }

inline LinkKind other(LinkKind k) { return k == LinkKind::los ? LinkKind::nlos : LinkKind::los; }

/// Boolean-model blockage probability of a link of length l; zero up to r_B.
inline double blockage_prob(double l, const Scenario& s) {
    if (l <= s.r_blocker) return 0.0;
    return -std::expm1(-s.lambda_total() * (l - s.r_blocker) * s.r_blocker);
}

/// Weight of a BS at distance v in the LOS (1 - p_B) or NLOS (p_B) field.
inline double link_weight(LinkKind k, double v, const Scenario& s) {
    const double pb = blockage_prob(v, s);
    return k == LinkKind::los ? 1.0 - pb : pb;
}

/// Length of the part of the circle of radius l, centred at distance d from the
/// origin, that lies inside the disk of radius r_max. d may exceed r_max.
inline double arc_length(double l, double d, double r_max) {
    if (l <= 0.0) return 0.0;
    if (l <= r_max - d) return kTwoPi * l;
    if (l >= r_max + d) return 0.0;
    if (d > r_max && l <= d - r_max) return 0.0;
    const double c = (d * d + l * l - r_max * r_max) / (2.0 * d * l);
    return 2.0 * l * std::acos(std::clamp(c, -1.0, 1.0));
}

inline double arc_length(double l, double r, const Scenario& s) { return arc_length(l, r, s.r_max); }

namespace detail {

/// int_0^x v (1 - p_B(v)) dv in closed form.
inline double los_moment(double x, const Scenario& s) {
    const double rb = s.r_blocker;
    if (x <= rb) return 0.5 * x * x;
    const double c = s.lambda_total() * rb;
    const double L = x - rb;
    const double cl = c * L;
    // (1 - e^{-cL}(1 + cL)) / c^2, with a series for tiny cL
    const double second = cl < 1e-3 ? L * L * (0.5 - cl / 3.0 + cl * cl / 8.0)
                                    : (-std::expm1(-cl) - cl * std::exp(-cl)) / (c * c);
    const double first = cl < 1e-3 ? L * (1.0 - 0.5 * cl + cl * cl / 6.0) : -std::expm1(-cl) / c;
    return 0.5 * rb * rb + second + rb * first;
}

inline double interior_moment(LinkKind k, double x, const Scenario& s) {
    const double los = los_moment(x, s);
    return k == LinkKind::los ? los : std::max(0.0, 0.5 * x * x - los);
}

}  // namespace detail

/// Lambda_k(l, r) = int_0^l C(v, r) w_k(v) dv: the mean number of type-k BSs
/// within distance l of an MU at distance r from the origin, divided by lambda_b.
inline double radial_exponent(LinkKind k, double l, double r, const Scenario& s) {
    if (l <= 0.0) return 0.0;
    const double inner = std::clamp(s.r_max - r, 0.0, l);
    double total = kTwoPi * detail::interior_moment(k, inner, s);
    if (l > inner) {
        auto f = [&](double v) { return arc_length(v, r, s) * link_weight(k, v, s); };
        total += quad::integrate_pieces_sqrt(f, inner, std::min(l, s.r_max + r), {s.r_blocker},
                                             {s.r_max - r, s.r_max + r});
    }
    return total;
}

/// Same integral with an arbitrary weight, evaluated purely by quadrature.
template <class Weight>
double radial_exponent_with(Weight&& w, double l, double r, const Scenario& s) {
    auto f = [&](double v) { return arc_length(v, r, s) * w(v); };
    return quad::integrate_pieces_sqrt(f, 0.0, std::min(l, s.r_max + r), {s.r_blocker},
                                       {s.r_max - r, s.r_max + r});
}

/// Probability that no type-k BS lies within distance l of an MU at distance r.
inline double void_prob(LinkKind k, double l, double r, const Scenario& s) {
    if (r < 0.0 || r > s.r_max) throw DomainError("void_prob: r must lie in [0, r_max]");
    if (l < 0.0) throw DomainError("void_prob: l must be >= 0");
    return std::exp(-s.lambda_b * radial_exponent(k, l, r, s));
}

/// Density of the distance to the nearest type-k BS, conditioned on at least
/// one such BS within the communication range r_0.
class DistancePdf {
public:
    DistancePdf(LinkKind kind, double r, const Scenario& s)
        : kind_(kind), r_(r), s_(s),
          normalizer_(-std::expm1(-s.lambda_b * radial_exponent(kind, s.r_0, r, s))) {}

    LinkKind kind() const { return kind_; }
    double r() const { return r_; }
    /// B_L or B_N: probability of at least one type-k BS within r_0.
    double normalizer() const { return normalizer_; }

    /// lambda_b C(l,r) w_k(l): intensity of type-k BSs on the circle of radius l.
    double hazard(double l) const { return s_.lambda_b * arc_length(l, r_, s_) * link_weight(kind_, l, s_); }

    double void_prob(double l) const { return std::exp(-s_.lambda_b * radial_exponent(kind_, l, r_, s_)); }

    double evaluate(double l) const {
        if (l < 0.0 || l > s_.r_0 || normalizer_ <= 0.0) return 0.0;
        return hazard(l) * void_prob(l) / normalizer_;
    }

    double cdf(double l) const {
        if (l <= 0.0 || normalizer_ <= 0.0) return 0.0;
        if (l >= s_.r_0) return 1.0;
        return -std::expm1(-s_.lambda_b * radial_exponent(kind_, l, r_, s_)) / normalizer_;
    }

    /// Breakpoints where the density has kinks (for quadrature).
    double boundary_kink() const { return s_.r_max - r_; }

private:
    LinkKind kind_;
    double r_;
    Scenario s_;
    double normalizer_;
};

inline DistancePdf nearest_bs_pdf(LinkKind kind, double r, const Scenario& s) {
    if (r < 0.0 || r > s.r_max) throw DomainError("nearest_bs_pdf: r must lie in [0, r_max]");
    return DistancePdf(kind, r, s);
}

/// Intensity (1/m) of interfering MUs at distance q from a BS that sits at
/// distance d from the origin. d may exceed r_max.
inline double interferer_density(double q, double d, const Scenario& s) {
    if (q < 0.0 || d < 0.0) throw DomainError("interferer_density: q and d must be >= 0");
    return s.lambda_u * arc_length(q, d, s.r_max);
}

/// Distance from the origin of a BS at distance l from an MU that is at
/// distance r from the origin, theta being the angle at the MU.
inline double interferer_origin_distance(double theta, double r, double l) {
    return std::sqrt(std::max(0.0, r * r + l * l - 2.0 * r * l * std::cos(theta)));
}

}  // namespace mmw

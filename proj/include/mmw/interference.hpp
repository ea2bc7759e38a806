#pragma once

// Mean-field interference: the coupling kernel Z(r, l) per watt of mean
// transmit power and the aggregate interference at a serving BS.

#include <cmath>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "antenna.hpp"
#include "config.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "quadrature.hpp"

namespace mmw {

/// Mixed path gain p_B A_N q^-alpha_N + (1 - p_B) A_L q^-alpha_L.
inline double mixed_path_gain(double q, const Scenario& s) {
    const double pb = blockage_prob(q, s);
    return pb * s.a_nlos * std::pow(q, -s.alpha_nlos) + (1.0 - pb) * s.a_los * std::pow(q, -s.alpha_los);
}

/// Received power per unit transmit power and unit gain at a BS located at
/// distance d from the origin, summed over the interfering MU field.
inline double interferer_field_integral(double d, const Scenario& s) {
    auto f = [&](double q) { return interferer_density(q, d, s) * mixed_path_gain(q, s); };
    return quad::integrate_pieces_sqrt(f, s.r_blocker, s.r_max + d, {}, {std::abs(s.r_max - d), s.r_max + d}, 1e-10);
}

/// Kernel without the gain factor: the interferer field integral averaged over
/// the bearing theta of the serving BS, using reflection symmetry on [0, pi].
inline double geometric_kernel(double r, double l, const Scenario& s) {
    if (s.lambda_u == 0.0) return 0.0;
    auto f = [&](double th) { return interferer_field_integral(interferer_origin_distance(th, r, l), s); };
    double brk = -1.0;
    if (r > 0.0 && l > 0.0) {
        const double c = (r * r + l * l - s.r_max * s.r_max) / (2.0 * r * l);
        if (c > -1.0 && c < 1.0) brk = std::acos(c);
    }
    return quad::integrate_pieces(f, 0.0, kPi, {brk}, 1e-9) / kPi;
}

/// interferer_field_integral tabulated on a uniform d grid (cubic B-spline),
/// with the bearing average done on fixed Gauss-Legendre panels. Used where Z
/// is needed at thousands of points.
class FieldIntegralSpline {
public:
    explicit FieldIntegralSpline(const Scenario& s, std::size_t n = 4096)
        : s_(s), d_max_(s.r_max + s.r_0), spline_(make(s, n, d_max_)) {}

    double operator()(double d) const { return s_.lambda_u == 0.0 ? 0.0 : spline_(std::min(d, d_max_)); }

    double geometric_kernel(double r, double l) const {
        if (s_.lambda_u == 0.0) return 0.0;
        std::vector<double> br{0.0, 0.25 * kPi, 0.5 * kPi, 0.75 * kPi, kPi};
        if (r > 0.0 && l > 0.0) {
            const double c = (r * r + l * l - s_.r_max * s_.r_max) / (2.0 * r * l);
            if (c > -1.0 && c < 1.0) br.push_back(std::acos(c));
        }
        double acc = 0.0;
        for (const auto& nd : quad::composite_gauss_legendre(16, br))
            acc += nd.w * (*this)(interferer_origin_distance(nd.x, r, l));
        return acc / kPi;
    }

private:
    static boost::math::interpolators::cardinal_cubic_b_spline<double> make(const Scenario& s, std::size_t n,
                                                                            double d_max) {
        std::vector<double> v(n);
        const double h = d_max / static_cast<double>(n - 1);
        if (s.lambda_u > 0.0)
            for (std::size_t i = 0; i < n; ++i) v[i] = interferer_field_integral(static_cast<double>(i) * h, s);
        return {v.begin(), v.end(), 0.0, h};
    }

    Scenario s_;
    double d_max_;
    boost::math::interpolators::cardinal_cubic_b_spline<double> spline_;
};

/// Mean gain product of an interfering link.
inline double interferer_mean_gain(const Scenario& s) { return expected_gain(uniform_alignment(s), s); }

/// Same, with the MU-side alignment averaged over the population's orientations.
inline double interferer_mean_gain(const PhiMarginal& marginal, const Scenario& s) {
    const auto dens = marginal.density();
    const double h = marginal.spacing();
    double f = 0.0;
    for (std::size_t i = 0; i < dens.size(); ++i)
        f += dens[i] * h * marginal.window_mass(static_cast<double>(i) * h, 0.5 * s.beam_mu);
    AlignmentProbs a = uniform_alignment(s);
    a.f = std::clamp(f, 0.0, 1.0);
    return expected_gain(a, s);
}

inline double coupling_kernel(double r, double l, const Scenario& s) {
    return interferer_mean_gain(s) * geometric_kernel(r, l, s);
}

inline double coupling_kernel(double r, double l, const PhiMarginal& marginal, const Scenario& s) {
    return (s.z_time_varying ? interferer_mean_gain(marginal, s) : interferer_mean_gain(s)) *
           geometric_kernel(r, l, s);
}

/// Z tabulated on an (r, l) grid, gain factor split off so it can be updated.
class InterferenceKernel {
public:
    InterferenceKernel(std::vector<double> r_nodes, std::vector<double> l_nodes, const Scenario& s)
        : r_(std::move(r_nodes)), l_(std::move(l_nodes)), gain_(interferer_mean_gain(s)),
          table_(r_.size() * l_.size(), 0.0) {
        for (std::size_t a = 0; a < r_.size(); ++a)
            for (std::size_t b = 0; b < l_.size(); ++b) table_[a * l_.size() + b] = geometric_kernel(r_[a], l_[b], s);
    }

    const std::vector<double>& r_nodes() const { return r_; }
    const std::vector<double>& l_nodes() const { return l_; }
    double mean_gain() const { return gain_; }
    void set_mean_gain(double g) { gain_ = g; }
    double geometric(std::size_t ir, std::size_t il) const { return table_[ir * l_.size() + il]; }
    double at(std::size_t ir, std::size_t il) const { return gain_ * geometric(ir, il); }

private:
    std::vector<double> r_, l_;
    double gain_;
    std::vector<double> table_;
};

/// M = P_bar(t) * Z with P_bar = sum m * P * cell volume.
inline double aggregate_interference(const Slice& m, const Slice& policy, const StateGrid& g, double z) {
    if (m.size() != g.size() || policy.size() != g.size())
        throw DomainError("aggregate_interference: slice size does not match the grid");
    if (std::abs(total_mass(m, g) - 1.0) > 1e-6) throw DomainError("aggregate_interference: mean field is not normalized");
    return mean_power(m, policy, g) * z;
}

}  // namespace mmw

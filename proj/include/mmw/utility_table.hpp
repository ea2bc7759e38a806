#pragma once

// Tabulated evaluation of the expected utility v(P, m, phi) on a fixed
// (r, l) Gauss-Legendre grid, for many powers and gain laws at once.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "antenna.hpp"
#include "association.hpp"
#include "config.hpp"
#include "geometry.hpp"
#include "interference.hpp"
#include "link.hpp"
#include "quadrature.hpp"

namespace mmw {

struct UtilityNode {
    double r, l, weight;  // weight includes 2 pi r lambda_u and both quadrature weights
    double p_b;
    double f_los, f_nlos;        // nearest-BS densities (already divided by B_L, B_N)
    double void_los, void_nlos;  // p_L(l, r), p_N(l, r)
    double z_geo;                // coupling kernel without the gain factor
    double path_los, path_nlos;  // A_k l^-alpha_k
};

namespace detail {

/// Gauss-Legendre nodes on each panel; panels touching a square-root point are
/// mapped through v = end -+ t^2.
inline std::vector<quad::Node> panel_nodes(int n, std::vector<double> breaks, double singular) {
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    std::vector<quad::Node> out;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double p = breaks[i], q = breaks[i + 1];
        if (!(q > p)) continue;
        const bool sl = std::abs(p - singular) < 1e-12, sr = std::abs(q - singular) < 1e-12;
        if (sl || sr) {
            for (const auto& t : quad::gauss_legendre(n, 0.0, std::sqrt(q - p)))
                out.push_back({sl ? p + t.x * t.x : q - t.x * t.x, 2.0 * t.x * t.w});
        } else {
            auto panel = quad::gauss_legendre(n, p, q);
            out.insert(out.end(), panel.begin(), panel.end());
        }
    }
    return out;
}

}  // namespace detail

class UtilityTable {
public:
    UtilityTable(const Scenario& s, std::vector<double> powers) : s_(s), powers_(std::move(powers)) {
        const int q = s.quad_nodes;
        const auto rnodes = detail::panel_nodes(q, {0.0, std::max(0.0, s.r_max - s.r_0), s.r_max}, -1.0);
        const double rb = s.r_blocker;
        const FieldIntegralSpline field(s);
        for (const auto& rn : rnodes) {
            const double r = rn.x;
            const DistancePdf los(LinkKind::los, r, s), nlos(LinkKind::nlos, r, s);
            const double kink = s.r_max - r;
            // geometric panels: xi varies on the scale of l itself
            std::vector<double> br{s.r_0};
            for (double b = rb; b < s.r_0; b *= 2.0) br.push_back(b);
            if (kink > rb && kink < s.r_0) br.push_back(kink);
            for (const auto& ln : detail::panel_nodes(q, br, kink)) {
                UtilityNode u{};
                u.r = r;
                u.l = ln.x;
                u.weight = rn.w * ln.w * kTwoPi * r * s.lambda_u;
                u.p_b = blockage_prob(u.l, s);
                u.f_los = los.evaluate(u.l);
                u.f_nlos = nlos.evaluate(u.l);
                u.void_los = los.void_prob(u.l);
                u.void_nlos = nlos.void_prob(u.l);
                u.z_geo = field.geometric_kernel(r, u.l);
                u.path_los = path_gain(LinkKind::los, u.l, s);
                u.path_nlos = path_gain(LinkKind::nlos, u.l, s);
                nodes_.push_back(u);
            }
        }
        const auto gd = gain_distribution(uniform_alignment(s), s);
        support_ = gd.support;
        sets_ = gain_threshold_sets(gd, s);
        order_los_.resize(nodes_.size());
        std::iota(order_los_.begin(), order_los_.end(), 0);
        order_nlos_ = order_los_;
        std::sort(order_los_.begin(), order_los_.end(),
                  [&](std::size_t a, std::size_t b) { return nodes_[a].void_nlos < nodes_[b].void_nlos; });
        std::sort(order_nlos_.begin(), order_nlos_.end(),
                  [&](std::size_t a, std::size_t b) { return nodes_[a].void_los < nodes_[b].void_los; });
        for (auto i : order_los_) sorted_void_los_side_.push_back(nodes_[i].void_nlos);
        for (auto i : order_nlos_) sorted_void_nlos_side_.push_back(nodes_[i].void_los);
    }

    const std::vector<UtilityNode>& nodes() const { return nodes_; }
    const std::vector<double>& powers() const { return powers_; }
    const GainThresholdSets& gain_sets() const { return sets_; }

    /// Tabulate xi for every node, power level and gain at interference
    /// I(r, l) = scale * z_geo(r, l), where scale = mean power * mean gain.
    void prepare(double interference_scale) {
        const std::size_t n = nodes_.size(), np = powers_.size();
        const double noise = s_.noise_power();
        cum_los_.assign(np * 4 * (n + 1), 0.0);
        cum_los_void_.assign(np * 4 * (n + 1), 0.0);
        cum_nlos_.assign(np * 4 * (n + 1), 0.0);
        cum_nlos_void_.assign(np * 4 * (n + 1), 0.0);
        std::vector<double> den(n);
        for (std::size_t a = 0; a < n; ++a) den[a] = noise + interference_scale * nodes_[a].z_geo;
        for (std::size_t k = 0; k < np; ++k) {
            const double p = powers_[k];
            for (std::size_t g = 0; g < 4; ++g) {
                double* cl = &cum_los_[(k * 4 + g) * (n + 1)];
                double* clv = &cum_los_void_[(k * 4 + g) * (n + 1)];
                double* cn = &cum_nlos_[(k * 4 + g) * (n + 1)];
                double* cnv = &cum_nlos_void_[(k * 4 + g) * (n + 1)];
                for (std::size_t m = 0; m < n; ++m) {
                    double a = 0.0;
                    if (sets_.los[g]) {
                        const auto& u = nodes_[order_los_[m]];
                        const double xi = efficiency_from_slope(p, u.path_los * support_[g] / den[order_los_[m]], s_);
                        a = u.weight * (1.0 - u.p_b) * u.f_los * xi;
                    }
                    cl[m + 1] = cl[m] + a;
                    clv[m + 1] = clv[m] + a * sorted_void_los_side_[m];
                    double b = 0.0;
                    if (sets_.nlos_prime[g]) {
                        const auto& u = nodes_[order_nlos_[m]];
                        const double xi =
                            efficiency_from_slope(p, u.path_nlos * support_[g] / den[order_nlos_[m]], s_);
                        b = u.weight * u.p_b * u.f_nlos * xi;
                    }
                    cn[m + 1] = cn[m] + b;
                    cnv[m + 1] = cnv[m] + b * sorted_void_nlos_side_[m];
                }
            }
        }
    }

    /// v at every power level for the gain law with the given probabilities.
    void evaluate(const std::array<double, 4>& probs, std::vector<double>& out) const {
        const std::size_t n = nodes_.size(), np = powers_.size();
        out.assign(np, 0.0);
        double fail_n = 0.0, fail_l = 0.0;  // P(D in G_N), P(D in G'_L)
        for (std::size_t g = 0; g < 4; ++g) {
            if (sets_.nlos[g]) fail_n += probs[g];
            if (sets_.los_prime[g]) fail_l += probs[g];
        }
        const bool clamp = s_.assoc_mode == AssocMode::clamp;
        const std::size_t il = split(sorted_void_los_side_, 1.0 - fail_n);
        const std::size_t in = split(sorted_void_nlos_side_, 1.0 - fail_l);
        for (std::size_t k = 0; k < np; ++k) {
            double acc = 0.0;
            for (std::size_t g = 0; g < 4; ++g) {
                if (probs[g] == 0.0) continue;
                const std::size_t off = (k * 4 + g) * (n + 1);
                acc += probs[g] * side(&cum_los_[off], &cum_los_void_[off], n, il, fail_n, clamp);
                acc += probs[g] * side(&cum_nlos_[off], &cum_nlos_void_[off], n, in, fail_l, clamp);
            }
            out[k] = acc;
        }
    }

    /// Direct O(nodes) evaluation at an arbitrary power (no prefix sums).
    double value(double p, const GainDistribution& gd, double interference_scale) const {
        const double noise = s_.noise_power();
        double fail_n = 0.0, fail_l = 0.0;
        for (std::size_t g = 0; g < 4; ++g) {
            if (sets_.nlos[g]) fail_n += gd.probs[g];
            if (sets_.los_prime[g]) fail_l += gd.probs[g];
        }
        double acc = 0.0;
        for (const auto& u : nodes_) {
            const double den = noise + interference_scale * u.z_geo;
            const double bl = association_bracket(u.void_nlos, fail_n, s_.assoc_mode);
            const double bn = association_bracket(u.void_los, fail_l, s_.assoc_mode);
            for (std::size_t g = 0; g < 4; ++g) {
                if (sets_.los[g])
                    acc += u.weight * (1.0 - u.p_b) * u.f_los * bl * gd.probs[g] *
                           efficiency_from_slope(p, u.path_los * gd.support[g] / den, s_);
                if (sets_.nlos_prime[g])
                    acc += u.weight * u.p_b * u.f_nlos * bn * gd.probs[g] *
                           efficiency_from_slope(p, u.path_nlos * gd.support[g] / den, s_);
            }
        }
        return acc;
    }

private:
    static std::size_t split(const std::vector<double>& sorted, double threshold) {
        return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), threshold) - sorted.begin());
    }

    // Nodes [0, idx) have void + fail < 1; the rest are capped at 1.
    static double side(const double* cum, const double* cumv, std::size_t n, std::size_t idx, double fail, bool clamp) {
        if (clamp) return (cum[n] - cum[idx]) + fail * cum[idx] + cumv[idx];
        return fail * cum[n] + (1.0 - fail) * cumv[n];
    }

    Scenario s_;
    std::vector<double> powers_;
    std::vector<UtilityNode> nodes_;
    std::array<double, 4> support_{};
    GainThresholdSets sets_{};
    std::vector<std::size_t> order_los_, order_nlos_;
    std::vector<double> sorted_void_los_side_, sorted_void_nlos_side_;
    std::vector<double> cum_los_, cum_los_void_, cum_nlos_, cum_nlos_void_;
};

}  // namespace mmw

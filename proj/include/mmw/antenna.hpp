#pragma once

// Sectored antenna model and the four-point distribution of the link gain
// product D = G_tx * G_rx.

#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "config.hpp"
#include "error.hpp"

namespace mmw {

inline double main_lobe_gain(double beamwidth) {
    if (!(beamwidth > 0.0) || beamwidth > kTwoPi) throw DomainError("main_lobe_gain: beamwidth must be in (0, 2pi]");
    return main_lobe_gain_of(beamwidth);
}

/// Orientation density sampled on the periodic grid phi_i = i * 2pi/n, each
/// value being the mean density over the cell [phi_i - d/2, phi_i + d/2).
class PhiMarginal {
public:
    explicit PhiMarginal(std::vector<double> density) : density_(std::move(density)) {
        if (density_.size() < 2) throw DomainError("PhiMarginal needs at least two cells");
    }

    std::size_t size() const { return density_.size(); }
    double spacing() const { return kTwoPi / static_cast<double>(density_.size()); }
    std::span<const double> density() const { return density_; }
    double mass() const { return std::accumulate(density_.begin(), density_.end(), 0.0) * spacing(); }

    static PhiMarginal uniform(std::size_t n) { return PhiMarginal(std::vector<double>(n, 1.0 / kTwoPi)); }

    /// All mass in the cell containing angle a.
    static PhiMarginal point_mass(std::size_t n, double a) {
        std::vector<double> d(n, 0.0);
        const double h = kTwoPi / static_cast<double>(n);
        auto i = static_cast<long>(std::floor(std::fmod(std::fmod(a, kTwoPi) + kTwoPi + 0.5 * h, kTwoPi) / h));
        d[static_cast<std::size_t>(i) % n] = 1.0 / h;
        return PhiMarginal(std::move(d));
    }

    /// Cell averages of the wrapped normal density with the given mean/variance.
    static PhiMarginal wrapped_gaussian(std::size_t n, double mean, double variance) {
        const double h = kTwoPi / static_cast<double>(n);
        const double sd = std::sqrt(variance);
        std::vector<double> d(n, 0.0);
        auto Phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
        for (std::size_t i = 0; i < n; ++i) {
            const double lo = (static_cast<double>(i) - 0.5) * h;
            const double hi = lo + h;
            double p = 0.0;
            for (int k = -8; k <= 8; ++k) {
                const double shift = mean + k * kTwoPi;
                p += Phi((hi - shift) / sd) - Phi((lo - shift) / sd);
            }
            d[i] = p / h;
        }
        return PhiMarginal(std::move(d));
    }

    /// Probability mass of the wrapped window [center - half, center + half].
    double window_mass(double center, double half) const {
        if (half >= kPi) return mass();
        const double h = spacing();
        const double lo = center - half;
        const double hi = center + half;
        double m = 0.0;
        const auto n = density_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double a = (static_cast<double>(i) - 0.5) * h;
            for (int k = -2; k <= 2; ++k) {
                const double ca = a + k * kTwoPi;
                const double overlap = std::min(ca + h, hi) - std::max(ca, lo);
                if (overlap > 0.0) m += overlap * density_[i];
            }
        }
        return m;
    }

private:
    std::vector<double> density_;
};

struct AlignmentProbs {
    double f;  // MU main lobe covers the serving BS
    double h;  // BS main lobe covers the MU
};

/// F is the marginal's mass in the MU beam window around psi_ub; H follows h_mode.
inline AlignmentProbs alignment_probs(const PhiMarginal& marginal, double psi_ub, const Scenario& s) {
    if (std::abs(marginal.mass() - 1.0) > 1e-6) throw DomainError("alignment_probs: marginal must integrate to 1");
    const double f = std::clamp(marginal.window_mass(psi_ub, 0.5 * s.beam_mu), 0.0, 1.0);
    const double h = s.h_mode == HMode::uniform ? s.beam_bs / kTwoPi
                                                : std::clamp(marginal.window_mass(psi_ub, 0.5 * s.beam_bs), 0.0, 1.0);
    return {f, h};
}

/// Alignment averaged over a uniformly distributed serving-BS bearing.
inline AlignmentProbs uniform_alignment(const Scenario& s) {
    return {std::min(1.0, s.beam_mu / kTwoPi), std::min(1.0, s.beam_bs / kTwoPi)};
}

/// Outcomes in the order (G_B G_m, G_B g_m, g_B G_m, g_B g_m).
struct GainDistribution {
    std::array<double, 4> support{};
    std::array<double, 4> probs{};

    double mean() const {
        double m = 0.0;
        for (std::size_t i = 0; i < 4; ++i) m += support[i] * probs[i];
        return m;
    }
};

inline GainDistribution gain_distribution(AlignmentProbs a, const Scenario& s) {
    const double GB = main_lobe_gain(s.beam_bs), gB = s.sidelobe_bs;
    const double Gm = main_lobe_gain(s.beam_mu), gm = s.sidelobe_mu;
    const double F = a.f, H = a.h;
    return {{GB * Gm, GB * gm, gB * Gm, gB * gm}, {F * H, (1.0 - F) * H, F * (1.0 - H), (1.0 - F) * (1.0 - H)}};
}

inline GainDistribution gain_distribution(const PhiMarginal& marginal, double psi_ub, const Scenario& s) {
    return gain_distribution(alignment_probs(marginal, psi_ub, s), s);
}

/// E[D] in product form.
inline double expected_gain(AlignmentProbs a, const Scenario& s) {
    const double tx = a.f * main_lobe_gain(s.beam_mu) + (1.0 - a.f) * s.sidelobe_mu;
    const double rx = a.h * main_lobe_gain(s.beam_bs) + (1.0 - a.h) * s.sidelobe_bs;
    return tx * rx;
}

}  // namespace mmw

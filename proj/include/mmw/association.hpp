#pragma once

// Adaptive user association: an MU joins the nearest BS (LOS or NLOS) within
// r_0 whose path-loss-scaled gain clears the threshold eta.

#include <algorithm>
#include <array>

#include "antenna.hpp"
#include "config.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"

namespace mmw {

using GainSet = std::array<bool, 4>;

struct GainThresholdSets {
    GainSet los;         // g >= eta / A_L
    GainSet nlos;        // g <= eta / A_N
    GainSet los_prime;   // g <= eta / A_L
    GainSet nlos_prime;  // g >= eta / A_N
};

namespace detail {

// The boundary g = eta/A belongs to both the >= and the <= sets.
inline bool at_least(double g, double t) { return g >= t * (1.0 - 1e-12); }
inline bool at_most(double g, double t) { return g <= t * (1.0 + 1e-12); }

}  // namespace detail

inline GainThresholdSets gain_threshold_sets(const GainDistribution& gd, const Scenario& s) {
    GainThresholdSets out{};
    const double tl = s.eta / s.a_los, tn = s.eta / s.a_nlos;
    for (std::size_t i = 0; i < 4; ++i) {
        const double g = gd.support[i];
        out.los[i] = detail::at_least(g, tl);
        out.nlos[i] = detail::at_most(g, tn);
        out.los_prime[i] = detail::at_most(g, tl);
        out.nlos_prime[i] = detail::at_least(g, tn);
    }
    return out;
}

inline double set_probability(const GainDistribution& gd, const GainSet& set) {
    double p = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
        if (set[i]) p += gd.probs[i];
    return p;
}

/// P(no competitor nearer) combined with P(competitor fails the threshold).
inline double association_bracket(double void_p, double fail_p, AssocMode mode) {
    if (mode == AssocMode::union_) return void_p + (1.0 - void_p) * fail_p;
    return std::min(1.0, void_p + fail_p);
}

class AssociationLaw {
public:
    AssociationLaw(double r, const GainDistribution& gd, const Scenario& s)
        : r_(r), s_(s), gd_(gd), sets_(gain_threshold_sets(gd, s)),
          los_(nearest_bs_pdf(LinkKind::los, r, s)), nlos_(nearest_bs_pdf(LinkKind::nlos, r, s)) {
        auto f = [&](double l) { return pdf_los(l); };
        const double integral = quad::integrate_pieces_sqrt(f, 0.0, s.r_0, {s.r_blocker}, {s.r_max - r}, 1e-9);
        rho_los_ = std::clamp(los_.normalizer() * integral, 0.0, 1.0);
    }

    double r() const { return r_; }
    double rho_los() const { return rho_los_; }
    double rho_nlos() const { return 1.0 - rho_los_; }
    const GainThresholdSets& gain_sets() const { return sets_; }
    const GainDistribution& gains() const { return gd_; }
    const DistancePdf& los_pdf() const { return los_; }
    const DistancePdf& nlos_pdf() const { return nlos_; }

    /// f_L(l, r) times the competition bracket, before the gain-set sum.
    double los_weight(double l) const {
        return los_.evaluate(l) *
               association_bracket(nlos_.void_prob(l), set_probability(gd_, sets_.nlos), s_.assoc_mode);
    }
    double nlos_weight(double l) const {
        return nlos_.evaluate(l) *
               association_bracket(los_.void_prob(l), set_probability(gd_, sets_.los_prime), s_.assoc_mode);
    }

    /// Conditional serving-distance (sub-)densities f^c_L and f^c_N.
    double pdf_los(double l) const { return los_weight(l) * set_probability(gd_, sets_.los); }
    double pdf_nlos(double l) const { return nlos_weight(l) * set_probability(gd_, sets_.nlos_prime); }

    /// B_N times the integral of f^c_N: the NLOS-side counterpart of rho_los.
    double nlos_side_integral() const {
        auto f = [&](double l) { return pdf_nlos(l); };
        return nlos_.normalizer() * quad::integrate_pieces_sqrt(f, 0.0, s_.r_0, {s_.r_blocker}, {s_.r_max - r_}, 1e-9);
    }

private:
    double r_;
    Scenario s_;
    GainDistribution gd_;
    GainThresholdSets sets_;
    DistancePdf los_;
    DistancePdf nlos_;
    double rho_los_ = 0.0;
};

inline AssociationLaw association_law(double r, const GainDistribution& gd, const Scenario& s) {
    if (r < 0.0 || r > s.r_max) throw DomainError("association_law: r must lie in [0, r_max]");
    return AssociationLaw(r, gd, s);
}

inline AssociationLaw association_law(double r, const PhiMarginal& marginal, double psi_ub, const Scenario& s) {
    return association_law(r, gain_distribution(marginal, psi_ub, s), s);
}

}  // namespace mmw

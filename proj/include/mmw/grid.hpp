#pragma once

// Discretization of the MU state (orientation phi, battery energy E) and time.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "config.hpp"
#include "error.hpp"

namespace mmw {

/// phi_i = i * dphi on the periodic circle, E_j = j * dE on [0, e_max], and
/// n_time output steps on [0, T], each split into `substeps` stable FPK steps.
class StateGrid {
public:
    StateGrid(int n_phi, int n_energy, int n_time, double e_max, double horizon, int substeps = 1)
        : n_phi_(n_phi), n_energy_(n_energy), n_time_(n_time), substeps_(substeps), e_max_(e_max),
          horizon_(horizon) {
        if (n_phi < 4 || n_energy < 2 || n_time < 1 || substeps < 1)
            throw DomainError("StateGrid: need n_phi >= 4, n_energy >= 2, n_time >= 1, substeps >= 1");
        if (!(e_max > 0.0) || !(horizon > 0.0)) throw DomainError("StateGrid: e_max and horizon must be > 0");
    }

    /// Grid for a scenario, with substeps chosen to satisfy the explicit bound.
    explicit StateGrid(const Scenario& s)
        : StateGrid(s.n_phi, s.n_energy, s.n_time, s.e_max, s.horizon,
                    required_substeps(s, s.n_phi, s.n_energy, s.n_time)) {}

    int n_phi() const { return n_phi_; }
    int n_energy() const { return n_energy_; }
    int n_time() const { return n_time_; }
    int substeps() const { return substeps_; }
    int n_steps() const { return n_time_ * substeps_; }
    std::size_t size() const { return static_cast<std::size_t>(n_phi_) * static_cast<std::size_t>(n_energy_); }

    double dphi() const { return kTwoPi / n_phi_; }
    double de() const { return e_max_ / (n_energy_ - 1); }
    double dt_out() const { return horizon_ / n_time_; }
    double dt() const { return dt_out() / substeps_; }
    double cell_volume() const { return dphi() * de(); }
    double e_max() const { return e_max_; }
    double horizon() const { return horizon_; }

    double phi(int i) const { return i * dphi(); }
    double energy(int j) const { return j * de(); }
    double time(int n) const { return n * dt_out(); }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_energy_) + static_cast<std::size_t>(j);
    }

    /// Largest stable explicit step: every cell keeps a nonnegative self weight.
    static double max_stable_dt(double mu, double diffusion, double p_max, double dphi, double de) {
        const double rate = std::abs(mu) / dphi + 2.0 * diffusion / (dphi * dphi) + p_max / de;
        return rate > 0.0 ? 1.0 / rate : INFINITY;
    }

    double max_stable_dt(const Scenario& s) const {
        return max_stable_dt(s.mu_phi, s.diffusion(), s.p_max, dphi(), de());
    }

    static int required_substeps(const Scenario& s, int n_phi, int n_energy, int n_time) {
        const double bound = 0.9 * max_stable_dt(s.mu_phi, s.diffusion(), s.p_max, kTwoPi / n_phi,
                                                 s.e_max / (n_energy - 1));
        const double dt_out = s.horizon / n_time;
        return std::max(1, static_cast<int>(std::ceil(dt_out / bound - 1e-12)));
    }

private:
    int n_phi_, n_energy_, n_time_, substeps_;
    double e_max_, horizon_;
};

/// Density over the state grid at one instant, stored phi-major.
using Slice = std::vector<double>;

inline double total_mass(const Slice& m, const StateGrid& g) {
    double acc = 0.0;
    for (double v : m) acc += v;
    return acc * g.cell_volume();
}

/// Orientation marginal: integral of m over E at every phi node.
inline std::vector<double> phi_marginal_of(const Slice& m, const StateGrid& g) {
    std::vector<double> out(static_cast<std::size_t>(g.n_phi()), 0.0);
    for (int i = 0; i < g.n_phi(); ++i)
        for (int j = 0; j < g.n_energy(); ++j) out[static_cast<std::size_t>(i)] += m[g.index(i, j)] * g.de();
    return out;
}

/// Mean transmit power sum m * P * cell volume.
inline double mean_power(const Slice& m, const Slice& power, const StateGrid& g) {
    double acc = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) acc += m[k] * power[k];
    return acc * g.cell_volume();
}

}  // namespace mmw

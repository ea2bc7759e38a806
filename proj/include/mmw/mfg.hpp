#pragma once

// Mean-field game solver: explicit finite-volume FPK transport, the matching
// backward HJB recursion with pointwise Hamiltonian maximization over a power
// grid, the path-loss compensating baseline, and the damped fixed point.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "antenna.hpp"
#include "config.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "interference.hpp"
#include "utility_table.hpp"

namespace mmw {

/// {0} followed by n_power levels log-spaced on [p_max 10^-decades, p_max].
inline std::vector<double> power_levels(const Scenario& s) {
    std::vector<double> out{0.0};
    const int n = s.n_power;
    for (int k = 0; k < n; ++k) {
        const double e = n == 1 ? 0.0 : -s.power_decades * static_cast<double>(n - 1 - k) / (n - 1);
        out.push_back(s.p_max * std::pow(10.0, e));
    }
    return out;
}

/// Wrapped Gaussian in phi (cell averages), all energy in the top cell.
inline Slice initial_density(const Scenario& s, const StateGrid& g) {
    const auto phi = PhiMarginal::wrapped_gaussian(static_cast<std::size_t>(g.n_phi()), s.phi_mean, s.phi_var);
    Slice m(g.size(), 0.0);
    for (int i = 0; i < g.n_phi(); ++i) m[g.index(i, g.n_energy() - 1)] = phi.density()[static_cast<std::size_t>(i)] / g.de();
    return m;
}

struct FpkStats {
    double mass_error = 0.0;  // |mass after - mass before| prior to the correction
};

/// One explicit conservative upwind step of
///   m_t + mu m_phi - P m_E - D m_phiphi = 0
/// with speed P(phi, E) of the source cell, zero flux at the E boundaries and
/// P forced to 0 at E = 0. The result is renormalized to the incoming mass.
inline Slice fpk_step(const Slice& m, const Slice& power, double dt, const StateGrid& g, const Scenario& s,
                      FpkStats* stats = nullptr) {
    if (m.size() != g.size() || power.size() != g.size()) throw DomainError("fpk_step: slice size does not match the grid");
    const double bound = g.max_stable_dt(s);
    if (dt > bound * (1.0 + 1e-12))
        throw NumericalError("fpk_step: dt = " + detail::format_real(dt) + " exceeds the stability bound " +
                             detail::format_real(bound));
    const double mass0 = total_mass(m, g);
    if (std::abs(mass0 - 1.0) > 1e-6) throw DomainError("fpk_step: incoming density is not normalized");

    const int np = g.n_phi(), ne = g.n_energy();
    const double adv = std::abs(s.mu_phi) * dt / g.dphi();
    const int shift = s.mu_phi >= 0.0 ? 1 : -1;
    const double dif = s.diffusion() * dt / (g.dphi() * g.dphi());
    const bool periodic = s.phi_boundary == PhiBoundary::periodic;
    Slice out(m.size(), 0.0);
    auto wrap = [&](int i) { return (i % np + np) % np; };
    auto inside = [&](int i) { return periodic || (i >= 0 && i < np); };
    for (int i = 0; i < np; ++i) {
        for (int j = 0; j < ne; ++j) {
            const double v = m[g.index(i, j)];
            if (v == 0.0) continue;
            const double p = j == 0 ? 0.0 : power[g.index(i, j)];
            if (p < 0.0 || p > s.p_max * (1.0 + 1e-12)) throw DomainError("fpk_step: power outside [0, p_max]");
            const double down = p * dt / g.de();
            out[g.index(i, j)] += v * (1.0 - adv - 2.0 * dif - down);
            if (inside(i + shift)) out[g.index(wrap(i + shift), j)] += v * adv;
            if (inside(i + 1)) out[g.index(wrap(i + 1), j)] += v * dif;
            if (inside(i - 1)) out[g.index(wrap(i - 1), j)] += v * dif;
            if (j > 0) out[g.index(i, j - 1)] += v * down;
        }
    }
    const double mass1 = total_mass(out, g);
    if (stats) stats->mass_error = std::abs(mass1 - mass0);
    if (!(mass1 > 0.0)) throw NumericalError("fpk_step: all mass left the domain");
    const double c = mass0 / mass1;
    if (c != 1.0)
        for (double& x : out) x *= c;
    return out;
}

/// Value function and policy from the backward recursion, on every substep.
struct HjbSolution {
    std::vector<Slice> value;                     // n_steps + 1 slices; value.back() is terminal
    std::vector<std::vector<std::uint8_t>> level;  // n_steps slices of power-level indices
};

/// Backward sweep of the generator adjoint to fpk_step:
///   V^k = V^{k+1} + dt (sum_dest rate (V^{k+1}_dest - V^{k+1}) + v(P*)),
/// P* = argmax_P [v(P) + P (V_{E - dE} - V_E) / dE], ties to the smaller P.
/// `utility(k, i, out)` fills out[l] = v(levels[l]) for substep k at phi_i.
template <class Utility>
HjbSolution hjb_solve(const StateGrid& g, const Scenario& s, const std::vector<double>& levels, Utility&& utility,
                      const Slice* terminal = nullptr) {
    if (levels.empty() || levels.size() > 255) throw DomainError("hjb_solve: need 1..255 power levels");
    const int np = g.n_phi(), ne = g.n_energy(), K = g.n_steps();
    const double dt = g.dt();
    const double adv = std::abs(s.mu_phi) / g.dphi();
    const int shift = s.mu_phi >= 0.0 ? 1 : -1;
    const double dif = s.diffusion() / (g.dphi() * g.dphi());
    const bool periodic = s.phi_boundary == PhiBoundary::periodic;
    HjbSolution out;
    out.value.assign(static_cast<std::size_t>(K) + 1, Slice());
    out.level.assign(static_cast<std::size_t>(K), std::vector<std::uint8_t>(g.size(), 0));
    out.value[static_cast<std::size_t>(K)] = terminal ? *terminal : Slice(g.size(), 0.0);
    std::vector<double> vals;
    for (int k = K - 1; k >= 0; --k) {
        const Slice& V = out.value[static_cast<std::size_t>(k) + 1];
        Slice W(g.size(), 0.0);
        auto& lev = out.level[static_cast<std::size_t>(k)];
        auto at = [&](int i, int j) {
            if (!periodic && (i < 0 || i >= np)) return 0.0;
            return V[g.index((i % np + np) % np, j)];
        };
        for (int i = 0; i < np; ++i) {
            utility(k, i, vals);
            if (vals.size() != levels.size()) throw DomainError("hjb_solve: utility returned the wrong number of levels");
            for (int j = 0; j < ne; ++j) {
                const double here = V[g.index(i, j)];
                const double phi_part =
                    adv * (at(i + shift, j) - here) + dif * (at(i + 1, j) - here) + dif * (at(i - 1, j) - here);
                std::size_t best = 0;
                double h = vals[0];
                if (j > 0) {
                    const double dv = (V[g.index(i, j - 1)] - here) / g.de();
                    for (std::size_t l = 1; l < levels.size(); ++l) {
                        const double c = vals[l] + levels[l] * dv;
                        if (c > h) {
                            h = c;
                            best = l;
                        }
                    }
                }
                const double w = here + dt * (phi_part + h);
                if (!std::isfinite(w))
                    throw NumericalError("hjb_solve: non-finite value at step " + std::to_string(k) + ", phi index " +
                                         std::to_string(i) + ", energy index " + std::to_string(j));
                W[g.index(i, j)] = w;
                lev[g.index(i, j)] = static_cast<std::uint8_t>(best);
            }
        }
        out.value[static_cast<std::size_t>(k)] = std::move(W);
    }
    return out;
}

/// Path-loss compensating policy: one state-independent power.
struct BaselinePolicy {
    double target = 0.0;            // P_target, W
    double raw_power = 0.0;         // association-averaged compensating power, W
    double power = 0.0;             // raw_power snapped to the power grid
    std::size_t level = 0;          // index of `power` in the power grid
    double clipped_fraction = 0.0;  // share of (r, l, kind) mass where P_max binds
};

inline std::size_t nearest_level(double p, const std::vector<double>& levels) {
    std::size_t best = 0;
    double err = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (levels[k] <= 0.0) continue;
        const double e = std::abs(std::log(levels[k] / p));
        if (e < err) {
            err = e;
            best = k;
        }
    }
    return best;
}

/// P = min(P_max, P_target l^alpha_k / (A_k E[D])) averaged over MU position and
/// the association law, P_target giving 0 dB (by default) at noise only.
inline BaselinePolicy baseline_policy(const Scenario& s, const std::vector<double>& levels) {
    BaselinePolicy out;
    out.target = std::pow(10.0, s.baseline_target_sinr_db / 10.0) * s.noise_power();
    const auto a = uniform_alignment(s);
    const auto gd = gain_distribution(a, s);
    const double ed = expected_gain(a, s);
    double mass = 0.0, acc = 0.0, clipped = 0.0;
    const auto rnodes = detail::panel_nodes(s.quad_nodes, {0.0, std::max(0.0, s.r_max - s.r_0), s.r_max}, -1.0);
    for (const auto& rn : rnodes) {
        const AssociationLaw law(rn.x, gd, s);
        const double kink = s.r_max - rn.x;
        std::vector<double> br{0.0, s.r_0};
        for (double b = s.r_blocker; b < s.r_0; b *= 2.0) br.push_back(b);
        if (kink > 0.0 && kink < s.r_0) br.push_back(kink);
        for (const auto& ln : detail::panel_nodes(s.quad_nodes, br, kink)) {
            const double wr = rn.w * kTwoPi * rn.x * ln.w;
            for (LinkKind k : {LinkKind::los, LinkKind::nlos}) {
                const double w = wr * (k == LinkKind::los ? law.pdf_los(ln.x) : law.pdf_nlos(ln.x));
                if (w <= 0.0) continue;
                const double want = out.target / (path_gain(k, ln.x, s) * ed);
                mass += w;
                acc += w * std::min(s.p_max, want);
                if (want > s.p_max) clipped += w;
            }
        }
    }
    out.raw_power = mass > 0.0 ? acc / mass : s.p_max;
    out.clipped_fraction = mass > 0.0 ? clipped / mass : 0.0;
    out.level = nearest_level(out.raw_power, levels);
    out.power = levels[out.level];
    return out;
}

struct MfeDiagnostics {
    int iterations = 0;
    bool converged = false;
    std::vector<double> residuals;
    double final_residual = 0.0;
    double max_mass_error = 0.0;  // largest per-step correction over all FPK sweeps
    int substeps = 1;
    double dt = 0.0;
    std::size_t quadrature_nodes = 0;
    BaselinePolicy baseline;
    double max_relative_improvement = 0.0;
    double min_utility_gap = 0.0;  // min over (t, phi) of utility_mfe - utility_base
    double seconds = 0.0;
};

/// Everything a run produces, sampled at the n_time + 1 output nodes.
struct MfeResult {
    StateGrid grid;
    std::vector<double> levels;
    std::vector<Slice> mean_field;           // MFE density, n_time + 1 slices
    std::vector<Slice> mean_field_baseline;  // density under the baseline, n_time + 1 slices
    std::vector<Slice> value;                // V, n_time + 1 slices
    std::vector<Slice> policy;               // P_mfe, n_time slices
    Slice policy_baseline;                   // P_base (time independent)
    std::vector<double> mean_power;          // P_bar under the MFE, n_time slices
    std::vector<double> mean_power_baseline;
    std::vector<std::vector<double>> utility;           // [n][i] at E = e_max
    std::vector<std::vector<double>> utility_baseline;  // [n][i]
    std::vector<double> average_utility;                // sum m v cell volume, per n
    std::vector<double> average_utility_baseline;
    MfeDiagnostics diagnostics;
};

namespace detail {

struct Trajectory {
    std::vector<Slice> m;      // n_steps + 1
    std::vector<double> pbar;  // n_steps
};

inline Slice level_slice(const std::vector<std::uint8_t>& lev, const std::vector<double>& levels) {
    Slice p(lev.size());
    for (std::size_t k = 0; k < lev.size(); ++k) p[k] = levels[lev[k]];
    return p;
}

template <class PolicyAt>
Trajectory transport(const Slice& m0, const StateGrid& g, const Scenario& s, PolicyAt&& policy_at, double& max_err) {
    Trajectory t;
    t.m.reserve(static_cast<std::size_t>(g.n_steps()) + 1);
    t.m.push_back(m0);
    for (int k = 0; k < g.n_steps(); ++k) {
        const Slice p = policy_at(k);
        t.pbar.push_back(mean_power(t.m.back(), p, g));
        FpkStats st;
        t.m.push_back(fpk_step(t.m.back(), p, g.dt(), g, s, &st));
        max_err = std::max(max_err, st.mass_error);
    }
    return t;
}

/// Alignment of the reference MU at phi_i given the population marginal.
inline AlignmentProbs state_alignment(const PhiMarginal& marg, int i, const StateGrid& g, const Scenario& s) {
    const double phi = g.phi(i);
    auto covered = [&](double beam) {
        switch (s.psi_mode) {
            case PsiMode::crowd: return std::clamp(marg.window_mass(phi, 0.5 * beam), 0.0, 1.0);
            case PsiMode::fixed: {
                // share of the cell around phi_i whose beam covers psi_ub
                const auto cell = PhiMarginal::point_mass(marg.size(), phi);
                return std::clamp(cell.window_mass(s.psi_ub, 0.5 * beam), 0.0, 1.0);
            }
            case PsiMode::uniform: break;
        }
        return std::min(1.0, beam / kTwoPi);
    };
    AlignmentProbs a = uniform_alignment(s);
    a.f = covered(s.beam_mu);
    if (s.h_mode == HMode::like_f) a.h = covered(s.beam_bs);
    return a;
}

/// Evaluates v(P_l, m_k, phi_i) for all levels, re-tabulating once per substep.
class UtilityOracle {
public:
    UtilityOracle(UtilityTable& table, const Trajectory& traj, const StateGrid& g, const Scenario& s)
        : table_(table), traj_(traj), g_(g), s_(s) {}

    void operator()(int k, int i, std::vector<double>& out) {
        if (k != current_) load(k);
        const auto a = state_alignment(*marg_, i, g_, s_);
        table_.evaluate(gain_distribution(a, s_).probs, out);
    }

    void load(int k) {
        current_ = k;
        marg_ = std::make_unique<PhiMarginal>(phi_marginal_of(traj_.m[static_cast<std::size_t>(k)], g_));
        const double ed = s_.z_time_varying ? interferer_mean_gain(*marg_, s_) : interferer_mean_gain(s_);
        table_.prepare(traj_.pbar[static_cast<std::size_t>(k)] * ed);
    }

private:
    UtilityTable& table_;
    const Trajectory& traj_;
    const StateGrid& g_;
    const Scenario& s_;
    int current_ = -1;
    std::unique_ptr<PhiMarginal> marg_;
};

}  // namespace detail

/// Damped Picard iteration HJB -> FPK -> mix until the mean field and the mean
/// power stop moving. The first step is undamped. Never throws on
/// non-convergence: the best iterate is returned with converged = false.
inline MfeResult solve_mfe(const Scenario& s) {
    const auto t_start = std::chrono::steady_clock::now();
    const StateGrid g(s);
    const auto levels = power_levels(s);
    UtilityTable table(s, levels);
    MfeDiagnostics diag;
    diag.substeps = g.substeps();
    diag.dt = g.dt();
    diag.quadrature_nodes = table.nodes().size();
    diag.baseline = baseline_policy(s, levels);

    const Slice m0 = initial_density(s, g);
    std::vector<std::uint8_t> base_lev(g.size(), static_cast<std::uint8_t>(diag.baseline.level));
    for (int i = 0; i < g.n_phi(); ++i) base_lev[g.index(i, 0)] = 0;
    const Slice base_power = detail::level_slice(base_lev, levels);

    const auto base_traj = detail::transport(m0, g, s, [&](int) { return base_power; }, diag.max_mass_error);

    detail::Trajectory cur = base_traj, best = base_traj;
    double best_res = std::numeric_limits<double>::infinity();
    auto best_response = [&](const detail::Trajectory& tr) {
        detail::UtilityOracle oracle(table, tr, g, s);
        return hjb_solve(g, s, levels, oracle);
    };
    for (int it = 1; it <= s.max_iters; ++it) {
        const auto hjb = best_response(cur);
        const auto next = detail::transport(
            m0, g, s, [&](int k) { return detail::level_slice(hjb.level[static_cast<std::size_t>(k)], levels); },
            diag.max_mass_error);
        const double tau = it == 1 ? 1.0 : s.damping;
        double dm = 0.0, dp = 0.0, pscale = 0.0;
        detail::Trajectory mixed = cur;
        for (std::size_t k = 0; k < mixed.m.size(); ++k)
            for (std::size_t c = 0; c < mixed.m[k].size(); ++c) {
                const double v = (1.0 - tau) * cur.m[k][c] + tau * next.m[k][c];
                dm = std::max(dm, std::abs(v - cur.m[k][c]));
                mixed.m[k][c] = v;
            }
        for (std::size_t k = 0; k < mixed.pbar.size(); ++k) {
            const double v = (1.0 - tau) * cur.pbar[k] + tau * next.pbar[k];
            dp = std::max(dp, std::abs(v - cur.pbar[k]));
            pscale = std::max(pscale, std::abs(v));
            mixed.pbar[k] = v;
        }
        const double res = std::max(dm, pscale > 0.0 ? dp / pscale : dp);
        diag.residuals.push_back(res);
        diag.iterations = it;
        cur = std::move(mixed);
        if (res < best_res) {
            best_res = res;
            best = cur;
        }
        if (res < s.tol) {
            diag.converged = true;
            break;
        }
    }
    if (!diag.converged) cur = best;
    diag.final_residual = diag.converged ? diag.residuals.back() : best_res;

    // Final best response to the returned mean field, so the reported policy and
    // utilities are consistent with it.
    const auto hjb = best_response(cur);

    MfeResult out{g, levels, {}, {}, {}, {}, base_power, {}, {}, {}, {}, {}, {}, {}};
    const int S = g.substeps();
    for (int n = 0; n <= g.n_time(); ++n) {
        const auto k = static_cast<std::size_t>(n * S);
        out.mean_field.push_back(cur.m[k]);
        out.mean_field_baseline.push_back(base_traj.m[k]);
        out.value.push_back(hjb.value[k]);
    }
    detail::UtilityOracle mfe_v(table, cur, g, s);
    std::vector<double> vals;
    double max_rel = -std::numeric_limits<double>::infinity(), min_gap = std::numeric_limits<double>::infinity();
    for (int n = 0; n < g.n_time(); ++n) {
        const int k = n * S;
        const auto& lev = hjb.level[static_cast<std::size_t>(k)];
        out.policy.push_back(detail::level_slice(lev, levels));
        out.mean_power.push_back(cur.pbar[static_cast<std::size_t>(k)]);
        out.mean_power_baseline.push_back(base_traj.pbar[static_cast<std::size_t>(k)]);
        std::vector<double> u(static_cast<std::size_t>(g.n_phi())), ub(u.size());
        std::vector<std::vector<double>> v_mfe(u.size());
        mfe_v.load(k);
        for (int i = 0; i < g.n_phi(); ++i) {
            mfe_v(k, i, vals);
            v_mfe[static_cast<std::size_t>(i)] = vals;
            u[static_cast<std::size_t>(i)] = vals[lev[g.index(i, g.n_energy() - 1)]];
        }
        double avg = 0.0;
        for (int i = 0; i < g.n_phi(); ++i)
            for (int j = 0; j < g.n_energy(); ++j)
                avg += cur.m[static_cast<std::size_t>(k)][g.index(i, j)] *
                       v_mfe[static_cast<std::size_t>(i)][lev[g.index(i, j)]];
        out.average_utility.push_back(avg * g.cell_volume());
        out.utility.push_back(std::move(u));
    }
    detail::UtilityOracle base_v(table, base_traj, g, s);
    for (int n = 0; n < g.n_time(); ++n) {
        const int k = n * S;
        std::vector<double> ub(static_cast<std::size_t>(g.n_phi()));
        base_v.load(k);
        double avg = 0.0;
        for (int i = 0; i < g.n_phi(); ++i) {
            base_v(k, i, vals);
            ub[static_cast<std::size_t>(i)] = vals[diag.baseline.level];
            for (int j = 0; j < g.n_energy(); ++j)
                avg += base_traj.m[static_cast<std::size_t>(k)][g.index(i, j)] * vals[base_lev[g.index(i, j)]];
            const double um = out.utility[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)];
            const double b = ub[static_cast<std::size_t>(i)];
            min_gap = std::min(min_gap, um - b);
            if (std::abs(b) > 0.0) max_rel = std::max(max_rel, (um - b) / std::abs(b));
        }
        out.average_utility_baseline.push_back(avg * g.cell_volume());
        out.utility_baseline.push_back(std::move(ub));
    }
    diag.max_relative_improvement = std::isfinite(max_rel) ? max_rel : 0.0;
    diag.min_utility_gap = min_gap;
    diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    out.diagnostics = std::move(diag);
    return out;
}

}  // namespace mmw

#pragma once

// Brute-force oracle: Poisson networks in the disk, geometric blockage, the
// nearest-qualifying-BS association rule, and unit-power interference.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "antenna.hpp"
#include "association.hpp"
#include "config.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "interference.hpp"
#include "link.hpp"
#include "parallel.hpp"

namespace mmw {

struct Point {
    double x = 0.0, y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct NetworkSample {
    std::vector<Point> bs, mu, blockers;  // blockers: external only
    std::vector<double> bs_azimuth, mu_orientation;
    std::uint64_t seed = 0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seed of the index-th independent stream derived from a master seed.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index ^ 0xD1B54A32D192ED03ull));
}

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) { return std::generate_canonical<double, 53>(rng); }

inline Point uniform_in_disk(Rng& rng, double radius) {
    const double r = radius * std::sqrt(uniform01(rng));
    const double a = kTwoPi * uniform01(rng);
    return {r * std::cos(a), r * std::sin(a)};
}

inline double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    return a < 0.0 ? a + kTwoPi : a;
}

inline NetworkSample sample_network(const Scenario& s, std::uint64_t seed) {
    Rng rng(seed);
    NetworkSample n;
    n.seed = seed;
    const double area = kPi * s.r_max * s.r_max;
    auto count = [&](double lambda) {
        if (lambda <= 0.0) return 0;
        std::poisson_distribution<int> pd(lambda * area);
        return pd(rng);
    };
    const int nb = count(s.lambda_b), nu = count(s.lambda_u), ne = count(s.lambda_e);
    std::normal_distribution<double> orient(s.phi_mean, std::sqrt(s.phi_var));
    for (int i = 0; i < nb; ++i) {
        n.bs.push_back(uniform_in_disk(rng, s.r_max));
        n.bs_azimuth.push_back(kTwoPi * uniform01(rng));
    }
    for (int i = 0; i < nu; ++i) {
        n.mu.push_back(uniform_in_disk(rng, s.r_max));
        n.mu_orientation.push_back(wrap_angle(orient(rng)));
    }
    for (int i = 0; i < ne; ++i) n.blockers.push_back(uniform_in_disk(rng, s.r_max));
    return n;
}

namespace detail {

// Center c blocks segment a->b if it lies within r_B/2 of the segment, away
// from the end caps: the blocked region has area r_B (l - r_B).
inline bool blocks(Point a, double ux, double uy, double len, Point c, double rb) {
    const double dx = c.x - a.x, dy = c.y - a.y;
    const double t = dx * ux + dy * uy;
    if (t < 0.5 * rb || t > len - 0.5 * rb) return false;
    return std::abs(dx * uy - dy * ux) <= 0.5 * rb;
}

}  // namespace detail

/// Geometric blockage of the link a->b. BS `skip_bs` and MU `skip_mu` (the
/// link's own endpoints, -1 for none) are not blockers; `extra` adds points.
inline bool link_blocked(Point a, Point b, const NetworkSample& n, double rb, long skip_bs = -1, long skip_mu = -1,
                         std::span<const Point> extra = {}) {
    const double len = distance(a, b);
    if (len <= rb) return false;
    const double ux = (b.x - a.x) / len, uy = (b.y - a.y) / len;
    for (std::size_t i = 0; i < n.bs.size(); ++i)
        if (static_cast<long>(i) != skip_bs && detail::blocks(a, ux, uy, len, n.bs[i], rb)) return true;
    for (std::size_t i = 0; i < n.mu.size(); ++i)
        if (static_cast<long>(i) != skip_mu && detail::blocks(a, ux, uy, len, n.mu[i], rb)) return true;
    for (const auto& c : n.blockers)
        if (detail::blocks(a, ux, uy, len, c, rb)) return true;
    for (const auto& c : extra)
        if (detail::blocks(a, ux, uy, len, c, rb)) return true;
    return false;
}

/// geometric: the strip test against every point of the sample.
/// independent: each link blocked on its own with probability p_B(l).
enum class BlockageRule { geometric, independent };

struct NearestLinks {
    double los = std::numeric_limits<double>::infinity();
    double nlos = std::numeric_limits<double>::infinity();
};

/// Distances from the probe to its nearest LOS and NLOS BS within r_0.
inline NearestLinks nearest_links(const NetworkSample& n, Point probe, const Scenario& s,
                                  BlockageRule rule = BlockageRule::geometric, Rng* rng = nullptr) {
    const double range = s.r_0, rb = s.r_blocker;
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < n.bs.size(); ++i) {
        const double d = distance(probe, n.bs[i]);
        if (d <= range) order.emplace_back(d, i);
    }
    std::sort(order.begin(), order.end());
    NearestLinks out;
    for (const auto& [d, i] : order) {
        if (std::isfinite(out.los) && std::isfinite(out.nlos)) break;
        const bool blocked = rule == BlockageRule::independent && rng
                                 ? uniform01(*rng) < blockage_prob(d, s)
                                 : link_blocked(probe, n.bs[i], n, rb, static_cast<long>(i));
        if (blocked && !std::isfinite(out.nlos)) out.nlos = d;
        if (!blocked && !std::isfinite(out.los)) out.los = d;
    }
    return out;
}

enum class Association { none, los, nlos };

/// Nearest-qualifying-BS rule: a BS of kind k at distance l serves when
/// A_k g >= eta and the nearer BS of the other kind (if any) has A g <= eta.
inline Association associate(const NearestLinks& nl, double g_los, double g_nlos, const Scenario& s) {
    const bool los_ok = std::isfinite(nl.los) && detail::at_least(s.a_los * g_los, s.eta);
    const bool nlos_ok = std::isfinite(nl.nlos) && detail::at_least(s.a_nlos * g_nlos, s.eta);
    const bool los_fails = !std::isfinite(nl.los) || detail::at_most(s.a_los * g_los, s.eta);
    const bool nlos_fails = !std::isfinite(nl.nlos) || detail::at_most(s.a_nlos * g_nlos, s.eta);
    if (los_ok && (nl.nlos >= nl.los || nlos_fails)) return Association::los;
    if (nlos_ok && (nl.los >= nl.nlos || los_fails)) return Association::nlos;
    return Association::none;
}

/// One draw of the gain product with independent MU and BS alignment.
inline std::size_t sample_gain_index(Rng& rng, const GainDistribution& gd) {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        acc += gd.probs[i];
        if (u < acc) return i;
    }
    return 3;
}

inline double sample_gain(Rng& rng, const GainDistribution& gd) { return gd.support[sample_gain_index(rng, gd)]; }

struct ProbeOutcome {
    NearestLinks links;
    Association association = Association::none;
};

struct LinkStats {
    std::vector<ProbeOutcome> outcomes;

    std::size_t size() const { return outcomes.size(); }

    /// Nearest-BS distances of the given kind that fall within `range`.
    std::vector<double> distances(LinkKind k, double range) const {
        std::vector<double> out;
        for (const auto& o : outcomes) {
            const double d = k == LinkKind::los ? o.links.los : o.links.nlos;
            if (d <= range) out.push_back(d);
        }
        return out;
    }

    double frequency(Association a) const {
        if (outcomes.empty()) return 0.0;
        std::size_t c = 0;
        for (const auto& o : outcomes) c += o.association == a;
        return static_cast<double>(c) / static_cast<double>(outcomes.size());
    }

    std::size_t outages() const {
        return static_cast<std::size_t>(std::count_if(outcomes.begin(), outcomes.end(),
                                                      [](const ProbeOutcome& o) { return o.association == Association::none; }));
    }

    /// Share of samples with no BS of kind k within distance l.
    double void_frequency(LinkKind k, double l) const {
        if (outcomes.empty()) return 0.0;
        std::size_t c = 0;
        for (const auto& o : outcomes) c += (k == LinkKind::los ? o.links.los : o.links.nlos) > l;
        return static_cast<double>(c) / static_cast<double>(outcomes.size());
    }
};

inline double binomial_se(double p, std::size_t n) {
    return n == 0 ? 0.0 : std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

namespace detail {

inline ProbeOutcome probe_once(const NetworkSample& n, double probe_r, const Scenario& s, const GainDistribution& gd,
                               std::uint64_t aux_seed, BlockageRule rule) {
    Rng rng(aux_seed);
    const double w = kTwoPi * uniform01(rng);
    const Point probe{probe_r * std::cos(w), probe_r * std::sin(w)};
    ProbeOutcome o;
    Rng thin(splitmix64(aux_seed));
    o.links = nearest_links(n, probe, s, rule, &thin);
    const double g_los = sample_gain(rng, gd), g_nlos = sample_gain(rng, gd);
    o.association = associate(o.links, g_los, g_nlos, s);
    return o;
}

}  // namespace detail

/// Probe MU at distance probe_r (uniform bearing) in each given sample.
inline LinkStats empirical_link_stats(std::span<const NetworkSample> samples, double probe_r, const Scenario& s,
                                      BlockageRule rule = BlockageRule::geometric) {
    if (probe_r < 0.0 || probe_r > s.r_max) throw DomainError("empirical_link_stats: probe_r must lie in [0, r_max]");
    const auto gd = gain_distribution(uniform_alignment(s), s);
    LinkStats st;
    st.outcomes.resize(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
        st.outcomes[i] = detail::probe_once(samples[i], probe_r, s, gd, splitmix64(samples[i].seed ^ 0xA5A5A5A5ull), rule);
    });
    return st;
}

/// Same, generating n independent samples from the master seed on the fly.
inline LinkStats empirical_link_stats(const Scenario& s, double probe_r, std::size_t n, std::uint64_t seed,
                                      BlockageRule rule = BlockageRule::geometric) {
    if (probe_r < 0.0 || probe_r > s.r_max) throw DomainError("empirical_link_stats: probe_r must lie in [0, r_max]");
    const auto gd = gain_distribution(uniform_alignment(s), s);
    LinkStats st;
    st.outcomes.resize(n);
    parallel_for(n, [&](std::size_t i) {
        const auto net = sample_network(s, stream_seed(seed, i));
        st.outcomes[i] = detail::probe_once(net, probe_r, s, gd, splitmix64(net.seed ^ 0xA5A5A5A5ull), rule);
    });
    return st;
}

/// sup_x |F_emp(x) - F(x)|, checking both sides of every jump.
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
    if (sample.empty()) throw DomainError("ks_statistic: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, std::abs(static_cast<double>(i + 1) / n - f), std::abs(f - static_cast<double>(i) / n)});
    }
    return d;
}

/// Share of random placements of a segment of length l (centred in the disk)
/// that the blocker field obstructs.
inline double empirical_blockage(const Scenario& s, double l, std::size_t n, std::uint64_t seed) {
    std::vector<char> hit(n, 0);
    parallel_for(n, [&](std::size_t i) {
        const auto net = sample_network(s, stream_seed(seed, i));
        Rng rng(splitmix64(net.seed ^ 0x5EEDull));
        const double a = kTwoPi * uniform01(rng);
        const Point p{-0.5 * l * std::cos(a), -0.5 * l * std::sin(a)}, q{0.5 * l * std::cos(a), 0.5 * l * std::sin(a)};
        hit[i] = link_blocked(p, q, net, s.r_blocker);
    });
    return static_cast<double>(std::accumulate(hit.begin(), hit.end(), std::size_t{0})) / static_cast<double>(n);
}

struct MeanEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t samples = 0;
};

namespace detail {

inline MeanEstimate mean_estimate(const std::vector<double>& val) {
    MeanEstimate e;
    e.samples = val.size();
    if (val.empty()) return e;
    for (double v : val) e.mean += v;
    e.mean /= static_cast<double>(val.size());
    double var = 0.0;
    for (double v : val) var += (v - e.mean) * (v - e.mean);
    const double n = static_cast<double>(val.size());
    e.se = val.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
    return e;
}

}  // namespace detail

/// Interference per unit transmit power at a BS placed at distance l from a
/// probe MU at distance r, over the MU field with geometric blockage. Each
/// sample averages `placements` stratified bearings of the BS; the antenna
/// gain enters through its mean.
inline MeanEstimate empirical_interference(const Scenario& s, double r, double l, std::size_t n, std::uint64_t seed,
                                           int placements = 16) {
    const double gain = interferer_mean_gain(s);
    std::vector<double> val(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        const auto net = sample_network(s, stream_seed(seed, i));
        Rng rng(splitmix64(net.seed ^ 0x1F1F1F1Full));
        const double w = kTwoPi * uniform01(rng);
        const Point probe{r * std::cos(w), r * std::sin(w)};
        const Point extra[1] = {probe};
        double acc = 0.0;
        for (int k = 0; k < placements; ++k) {
            const double th = w + kTwoPi * (k + uniform01(rng)) / placements;
            const Point bs{probe.x + l * std::cos(th), probe.y + l * std::sin(th)};
            for (std::size_t u = 0; u < net.mu.size(); ++u) {
                const double q = distance(net.mu[u], bs);
                if (q < s.r_blocker) continue;
                const bool blocked = link_blocked(net.mu[u], bs, net, s.r_blocker, -1, static_cast<long>(u), extra);
                acc += path_gain(blocked ? LinkKind::nlos : LinkKind::los, q, s);
            }
        }
        val[i] = gain * acc / placements;
    });
    return detail::mean_estimate(val);
}

/// Average utility at power p with no interference: MU position uniform on the
/// disk and nearest LOS/NLOS BSs from the realized network. The gain draw is
/// averaged exactly over its four-point law. Links shorter than r_B are
/// dropped, as in the analytic integral.
inline MeanEstimate empirical_expected_utility(const Scenario& s, double p, std::size_t n, std::uint64_t seed,
                                               BlockageRule rule = BlockageRule::geometric) {
    if (n == 0) throw DomainError("empirical_expected_utility: need at least one sample");
    const auto gd = gain_distribution(uniform_alignment(s), s);
    const auto sets = gain_threshold_sets(gd, s);
    const double noise = s.noise_power();
    const double users = s.lambda_u * kPi * s.r_max * s.r_max;
    const double fail_nlos = set_probability(gd, sets.nlos), fail_los = set_probability(gd, sets.los_prime);
    auto mixed = [&](LinkKind k, double l, const GainSet& set) {
        double acc = 0.0;
        for (std::size_t g = 0; g < 4; ++g)
            if (set[g]) acc += gd.probs[g] * energy_efficiency(p, LinkBudget{k, l, gd.support[g], 0.0, noise}, s);
        return acc;
    };
    std::vector<double> val(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        const auto net = sample_network(s, stream_seed(seed, i));
        Rng rng(splitmix64(net.seed ^ 0x5EED5EEDull));
        const Point probe = uniform_in_disk(rng, s.r_max);
        const double r = std::hypot(probe.x, probe.y);
        const auto nl = nearest_links(net, probe, s, rule, &rng);
        double v = 0.0;
        if (std::isfinite(nl.los) && nl.los >= s.r_blocker) {
            const double win = nl.nlos >= nl.los ? 1.0 : fail_nlos;
            v += (1.0 - blockage_prob(nl.los, s)) * win * mixed(LinkKind::los, nl.los, sets.los) /
                 nearest_bs_pdf(LinkKind::los, r, s).normalizer();
        }
        if (std::isfinite(nl.nlos) && nl.nlos >= s.r_blocker) {
            const double win = nl.los >= nl.nlos ? 1.0 : fail_los;
            v += blockage_prob(nl.nlos, s) * win * mixed(LinkKind::nlos, nl.nlos, sets.nlos_prime) /
                 nearest_bs_pdf(LinkKind::nlos, r, s).normalizer();
        }
        val[i] = users * v;
    });
    return detail::mean_estimate(val);
}

}  // namespace mmw

#pragma once

// Batch runs behind the command-line tool: solve, validate, tables.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "association.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "interference.hpp"
#include "mfg.hpp"
#include "montecarlo.hpp"

namespace mmw {

enum class Command { solve, validate, tables };

struct RunOptions {
    Command command = Command::solve;
    std::filesystem::path config;  // empty: all defaults
    std::filesystem::path out_dir = ".";
    std::uint64_t seed = 1;
    std::vector<std::string> overrides;
    std::size_t samples = 100000;  // Monte Carlo networks per validate check
};

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2 };

struct CheckResult {
    std::string name;
    double r = 0.0, l = 0.0;
    double statistic = 0.0;  // measured discrepancy
    double bound = 0.0;      // pass when statistic <= bound
    double analytic = 0.0, empirical = 0.0;
    std::size_t samples = 0;
    bool passed = false;
};

/// The Monte Carlo oracle suite: distance CDFs, association frequency,
/// blockage, NLOS void probability and the interference kernel.
inline std::vector<CheckResult> validation_suite(const Scenario& s, std::size_t n, std::uint64_t seed,
                                                 std::ostream* log = nullptr) {
    std::vector<CheckResult> out;
    auto note = [&](const CheckResult& c) {
        if (log)
            *log << (c.passed ? "PASS " : "FAIL ") << c.name << " r=" << c.r << " l=" << c.l
                 << " stat=" << c.statistic << " bound=" << c.bound << '\n';
        out.push_back(c);
    };
    const auto gd = gain_distribution(uniform_alignment(s), s);
    const double radii[3] = {0.0, 0.5 * s.r_max, 0.9 * s.r_max};
    for (int ri = 0; ri < 3; ++ri) {
        const double r = radii[ri];
        const std::uint64_t sd = stream_seed(seed, 100 + static_cast<std::uint64_t>(ri));
        for (auto rule : {BlockageRule::geometric, BlockageRule::independent}) {
            const auto st = empirical_link_stats(s, r, n, sd, rule);
            const std::string tag = rule == BlockageRule::geometric ? "" : "_independent";
            for (LinkKind k : {LinkKind::los, LinkKind::nlos}) {
                const DistancePdf pdf(k, r, s);
                const auto d = st.distances(k, s.r_0);
                CheckResult c{std::string(k == LinkKind::los ? "ks_nearest_los" : "ks_nearest_nlos") + tag, r, s.r_0};
                c.statistic = d.empty() ? 1.0 : ks_statistic(d, [&](double l) { return pdf.cdf(l); });
                c.bound = 0.02;
                c.samples = d.size();
                c.passed = c.statistic <= c.bound;
                note(c);
            }
            if (rule == BlockageRule::geometric) {
                const auto law = association_law(r, gd, s);
                CheckResult c{"association_los", r, 0.0};
                c.analytic = law.rho_los();
                c.empirical = st.frequency(Association::los);
                c.samples = st.size();
                const double se = binomial_se(c.empirical, st.size());
                c.statistic = se > 0.0 ? std::abs(c.analytic - c.empirical) / se : (c.analytic == c.empirical ? 0.0 : INFINITY);
                c.bound = 3.0;
                c.passed = c.statistic <= c.bound;
                note(c);
                CheckResult o{"outage_frequency", r, 0.0};
                o.empirical = static_cast<double>(st.outages()) / static_cast<double>(st.size());
                o.statistic = o.empirical;
                o.bound = 1.0;
                o.samples = st.size();
                o.passed = true;
                note(o);
            }
        }
    }
    {
        const double r = 10.0, l = 8.0;
        const auto st = empirical_link_stats(s, r, n, stream_seed(seed, 200));
        CheckResult c{"void_nlos", r, l};
        c.analytic = DistancePdf(LinkKind::nlos, r, s).void_prob(l);
        c.empirical = st.void_frequency(LinkKind::nlos, l);
        c.samples = st.size();
        const double se = binomial_se(c.empirical, st.size());
        c.statistic = se > 0.0 ? std::abs(c.analytic - c.empirical) / se : 0.0;
        c.bound = 3.0;
        c.passed = c.statistic <= c.bound;
        note(c);
    }
    {
        Scenario sb = s;
        sb.lambda_e = 0.0;
        for (double l : {2.0, 5.0, 10.0}) {
            CheckResult c{"blockage_participants", 0.0, l};
            c.analytic = blockage_prob(l, sb);
            c.empirical = empirical_blockage(sb, l, n, stream_seed(seed, 300 + static_cast<std::uint64_t>(l)));
            c.samples = n;
            const double se = binomial_se(c.empirical, n);
            c.statistic = se > 0.0 ? std::abs(c.analytic - c.empirical) / se : 0.0;
            c.bound = 3.0;
            c.passed = c.statistic <= c.bound;
            note(c);
        }
    }
    const std::size_t ni = std::max<std::size_t>(n / 10, 1);
    for (auto [r, l] : {std::pair{10.0, 5.0}, std::pair{0.8 * s.r_max, 10.0}}) {
        if (r > s.r_max || l > s.r_0) continue;
        CheckResult c{"interference_kernel", r, l};
        c.analytic = coupling_kernel(r, l, s);
        const auto e = empirical_interference(s, r, l, ni, stream_seed(seed, 400 + static_cast<std::uint64_t>(r)));
        c.empirical = e.mean;
        c.samples = ni;
        c.statistic = c.analytic > 0.0 ? std::abs(c.empirical - c.analytic) / c.analytic : std::abs(c.empirical);
        c.bound = 0.02;
        c.passed = c.statistic <= c.bound;
        note(c);
    }
    return out;
}

namespace detail {

/// Files written by a run; removed again unless the run commits.
class OutputGuard {
public:
    explicit OutputGuard(std::filesystem::path dir) : dir_(std::move(dir)) {
        if (!std::filesystem::exists(dir_)) {
            std::filesystem::create_directories(dir_);
            created_dir_ = true;
        }
        if (!std::filesystem::is_directory(dir_)) throw std::runtime_error(dir_.string() + " is not a directory");
    }
    ~OutputGuard() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& f : files_) std::filesystem::remove(f, ec);
        if (created_dir_) std::filesystem::remove(dir_, ec);
    }
    std::filesystem::path file(const std::string& name) {
        files_.push_back(dir_ / name);
        return files_.back();
    }
    void commit() { committed_ = true; }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> files_;
    bool created_dir_ = false;
    bool committed_ = false;
};

inline void write_scenario_echo(OutputGuard& out, const Scenario& s) {
    write_text_file(out.file("scenario.ini"), "# scenario=" + scenario_hash_hex(s) + "\n" + serialize_scenario(s));
}

inline void run_solve(const Scenario& s, const RunOptions& opt, OutputGuard& out, std::ostream& log) {
    const auto res = solve_mfe(s);
    const auto& g = res.grid;
    const auto& d = res.diagnostics;
    const std::string hash = scenario_hash_hex(s);

    CsvTable policy{hash, {"t", "phi", "E", "P_mfe", "P_base"}, {}};
    for (int n = 0; n < g.n_time(); ++n)
        for (int i = 0; i < g.n_phi(); ++i)
            for (int j = 0; j < g.n_energy(); ++j) {
                const auto c = g.index(i, j);
                policy.add({g.time(n), g.phi(i), g.energy(j), res.policy[static_cast<std::size_t>(n)][c],
                            res.policy_baseline[c]});
            }
    write_csv(out.file("policy.csv"), policy);

    CsvTable utility{hash, {"t", "phi", "utility_mfe", "utility_base"}, {}};
    for (int n = 0; n < g.n_time(); ++n)
        for (int i = 0; i < g.n_phi(); ++i)
            utility.add({g.time(n), g.phi(i), res.utility[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)],
                         res.utility_baseline[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)]});
    write_csv(out.file("utility.csv"), utility);

    CsvTable mf{hash, {"t", "phi", "E", "m_mfe", "m_base", "V"}, {}};
    for (int n = 0; n <= g.n_time(); ++n)
        for (int i = 0; i < g.n_phi(); ++i)
            for (int j = 0; j < g.n_energy(); ++j) {
                const auto c = g.index(i, j);
                const auto k = static_cast<std::size_t>(n);
                mf.add({g.time(n), g.phi(i), g.energy(j), res.mean_field[k][c], res.mean_field_baseline[k][c],
                        res.value[k][c]});
            }
    write_csv(out.file("meanfield.csv"), mf);

    CsvTable avg{hash, {"t", "avg_utility_mfe", "avg_utility_base", "mean_power_mfe", "mean_power_base"}, {}};
    for (int n = 0; n < g.n_time(); ++n) {
        const auto k = static_cast<std::size_t>(n);
        avg.add({g.time(n), res.average_utility[k], res.average_utility_baseline[k], res.mean_power[k],
                 res.mean_power_baseline[k]});
    }
    write_csv(out.file("average.csv"), avg);
    write_scenario_echo(out, s);

    nlohmann::ordered_json j;
    j["scenario"] = hash;
    j["seed"] = opt.seed;
    j["converged"] = d.converged;
    j["iterations"] = d.iterations;
    j["final_residual"] = d.final_residual;
    j["residuals"] = d.residuals;
    j["max_mass_error"] = d.max_mass_error;
    j["substeps"] = d.substeps;
    j["dt"] = d.dt;
    j["quadrature_nodes"] = d.quadrature_nodes;
    j["baseline"] = {{"target_w", d.baseline.target},
                     {"raw_power_w", d.baseline.raw_power},
                     {"power_w", d.baseline.power},
                     {"clipped_fraction", d.baseline.clipped_fraction}};
    j["max_relative_improvement"] = d.max_relative_improvement;
    j["min_utility_gap"] = d.min_utility_gap;
    j["seconds"] = d.seconds;
    write_text_file(out.file("diagnostics.json"), j.dump(2) + "\n");

    log << "solve: " << (d.converged ? "converged" : "NOT converged") << " after " << d.iterations
        << " iterations, residual " << d.final_residual << ", " << d.seconds << " s\n";
    log << "max relative improvement over baseline " << d.max_relative_improvement << '\n';
}

inline bool run_validate(const Scenario& s, const RunOptions& opt, OutputGuard& out, std::ostream& log) {
    const auto checks = validation_suite(s, opt.samples, opt.seed, &log);
    const std::string hash = scenario_hash_hex(s);
    std::string text = "# scenario=" + hash + "\ncheck,r,l,statistic,bound,analytic,empirical,samples,passed\n";
    bool all = true;
    for (const auto& c : checks) {
        all = all && c.passed;
        text += c.name + ',' + format_real(c.r) + ',' + format_real(c.l) + ',' + format_real(c.statistic) + ',' +
                format_real(c.bound) + ',' + format_real(c.analytic) + ',' + format_real(c.empirical) + ',' +
                std::to_string(c.samples) + ',' + (c.passed ? "1" : "0") + '\n';
    }
    write_text_file(out.file("checks.csv"), text);

    // empirical vs analytic nearest-BS CDFs for plotting
    CsvTable curves{hash, {"r", "l", "cdf_los", "ecdf_los", "cdf_nlos", "ecdf_nlos"}, {}};
    for (int ri = 0; ri < 3; ++ri) {
        const double r = (ri == 0 ? 0.0 : ri == 1 ? 0.5 : 0.9) * s.r_max;
        const auto st = empirical_link_stats(s, r, std::max<std::size_t>(opt.samples / 10, 1),
                                             stream_seed(opt.seed, 500 + static_cast<std::uint64_t>(ri)));
        auto dl = st.distances(LinkKind::los, s.r_0), dn = st.distances(LinkKind::nlos, s.r_0);
        std::sort(dl.begin(), dl.end());
        std::sort(dn.begin(), dn.end());
        const DistancePdf pl(LinkKind::los, r, s), pn(LinkKind::nlos, r, s);
        auto ecdf = [](const std::vector<double>& v, double l) {
            return v.empty() ? 0.0
                             : static_cast<double>(std::upper_bound(v.begin(), v.end(), l) - v.begin()) /
                                   static_cast<double>(v.size());
        };
        for (int q = 0; q <= 120; ++q) {
            const double l = s.r_0 * q / 120.0;
            curves.add({r, l, pl.cdf(l), ecdf(dl, l), pn.cdf(l), ecdf(dn, l)});
        }
    }
    write_csv(out.file("curves.csv"), curves);
    write_scenario_echo(out, s);
    const auto failed = std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.passed; });
    log << "validate: " << checks.size() - static_cast<std::size_t>(failed) << "/" << checks.size() << " checks passed\n";
    return all;
}

inline void run_tables(const Scenario& s, OutputGuard& out, std::ostream& log) {
    const std::string hash = scenario_hash_hex(s);
    const int nr = 26, nl = 60;
    CsvTable geo{hash, {"r", "l", "f_los", "f_nlos", "B_los", "B_nlos", "p_block"}, {}};
    CsvTable assoc{hash, {"r", "rho_los", "rho_nlos"}, {}};
    CsvTable kernel{hash, {"r", "l", "Z"}, {}};
    const auto gd = gain_distribution(uniform_alignment(s), s);
    const FieldIntegralSpline field(s);
    const double gain = interferer_mean_gain(s);
    for (int a = 0; a < nr; ++a) {
        const double r = s.r_max * a / (nr - 1);
        const DistancePdf pl(LinkKind::los, r, s), pn(LinkKind::nlos, r, s);
        for (int b = 1; b <= nl; ++b) {
            const double l = s.r_0 * b / nl;
            geo.add({r, l, pl.evaluate(l), pn.evaluate(l), pl.normalizer(), pn.normalizer(), blockage_prob(l, s)});
            if (l >= s.r_blocker) kernel.add({r, l, gain * field.geometric_kernel(r, l)});
        }
        const auto law = association_law(r, gd, s);
        assoc.add({r, law.rho_los(), law.rho_nlos()});
    }
    write_csv(out.file("geometry.csv"), geo);
    write_csv(out.file("association.csv"), assoc);
    write_csv(out.file("kernel.csv"), kernel);
    write_scenario_echo(out, s);
    log << "tables: wrote geometry.csv, association.csv, kernel.csv\n";
}

}  // namespace detail

/// Loads the scenario, runs the command and writes its files under out_dir.
/// Returns the process exit code; on failure nothing is left behind.
inline int run_experiment(const RunOptions& opt, std::ostream& log, std::ostream& err) {
    Scenario s;
    try {
        const std::string text = opt.config.empty() ? std::string() : read_text_file(opt.config);
        s = parse_scenario(text, opt.overrides);
    } catch (const ConfigError& e) {
        err << "config error: " << (opt.config.empty() ? std::string("<defaults>") : opt.config.string()) << ": "
            << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    try {
        detail::OutputGuard out(opt.out_dir);
        bool ok = true;
        switch (opt.command) {
            case Command::solve: detail::run_solve(s, opt, out, log); break;
            case Command::validate: ok = detail::run_validate(s, opt, out, log); break;
            case Command::tables: detail::run_tables(s, out, log); break;
        }
        out.commit();
        if (!ok) {
            err << "validate: one or more checks failed (see checks.csv)\n";
            return kExitRuntime;
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace mmw

#pragma once

// Scenario record: every physical, network and discretization parameter in one
// validated value, plus the INI-style text format it is loaded from.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace mmw {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class QModel { sigmoid, exp };        // packet-success curve q(gamma)
enum class AssocMode { clamp, union_ };    // how the association bracket is formed
enum class HMode { uniform, like_f };      // BS-side alignment probability
enum class PsiMode { crowd, uniform, fixed };  // bearing of the serving BS
enum class PhiBoundary { periodic, absorbing };

struct Scenario {
    // [network]
    double lambda_b = 0.08;  // BS density, 1/m^2
    double lambda_u = 0.03;  // MU density, 1/m^2
    double lambda_e = 0.01;  // external blocker density, 1/m^2
    double r_max = 25.0;     // disk radius, m
    double r_0 = 15.0;       // MU communication range, m
    double r_blocker = 0.3;  // blocker radius r_B, m

    // [antenna]
    double beam_bs = kPi / 6.0;
    double beam_mu = kPi / 6.0;
    double sidelobe_bs = 0.1;
    double sidelobe_mu = 0.1;
    HMode h_mode = HMode::uniform;
    PsiMode psi_mode = PsiMode::crowd;
    double psi_ub = kPi / 2.0;  // used when psi_mode = fixed

    // [link]
    double alpha_los = 2.2;
    double alpha_nlos = 3.88;
    double a_los = 1.0;
    double a_nlos = 1.0;
    double eta = 0.0;  // resolved at parse time; default a_los * g_B * G_m
    double noise_psd_dbm = -147.0;
    double noise_psd = 0.0;  // W/Hz, derived from noise_psd_dbm
    double bandwidth = 100e6;
    double rate = 1e9;
    double p_max = 0.1;
    QModel q_model = QModel::sigmoid;
    double q_kappa = 1.0;
    int q_order = 10;
    AssocMode assoc_mode = AssocMode::clamp;
    double baseline_target_sinr_db = 0.0;

    // [dynamics]
    double mu_phi = kPi / 3.0;
    double sigma_phi = kPi / 6.0;
    double e_max = 100.0;
    double horizon = 1.0;
    double phi_mean = kPi / 2.0;
    double phi_var = kPi / 4.0;
    bool ito_convention = false;
    PhiBoundary phi_boundary = PhiBoundary::periodic;

    // [grid]
    int n_phi = 64;
    int n_energy = 32;
    int n_time = 100;
    int n_power = 16;
    double power_decades = 14.0;
    int quad_nodes = 12;  // Gauss-Legendre nodes per integration segment

    // [mfe]
    double damping = 0.5;
    double tol = 1e-6;
    int max_iters = 60;
    bool z_time_varying = false;

    double noise_power() const { return noise_psd * bandwidth; }
    double lambda_total() const { return lambda_b + lambda_u + lambda_e; }
    /// Diffusion coefficient multiplying the second phi derivative.
    double diffusion() const { return ito_convention ? 0.5 * sigma_phi * sigma_phi : sigma_phi; }
};

inline double dbm_per_hz_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double main_lobe_gain_of(double beamwidth) { return 2.0 / (1.0 - std::cos(beamwidth / 2.0)); }

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::optional<double> plain_number(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

/// Accepts a plain number or the forms "pi", "k*pi", "pi/n", "k*pi/n".
inline std::optional<double> parse_real(std::string_view s) {
    s = trim(s);
    if (auto v = plain_number(s)) return v;
    const auto at = s.find("pi");
    if (at == std::string_view::npos) return std::nullopt;
    double coef = 1.0;
    auto head = trim(s.substr(0, at));
    if (!head.empty()) {
        if (head == "-") {
            coef = -1.0;
        } else {
            if (head.back() != '*') return std::nullopt;
            auto c = plain_number(head.substr(0, head.size() - 1));
            if (!c) return std::nullopt;
            coef = *c;
        }
    }
    double div = 1.0;
    auto tail = trim(s.substr(at + 2));
    if (!tail.empty()) {
        if (tail.front() != '/') return std::nullopt;
        auto d = plain_number(tail.substr(1));
        if (!d || *d == 0.0) return std::nullopt;
        div = *d;
    }
    return coef * kPi / div;
}

inline std::string format_real(double v) {
    std::array<char, 64> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), p);
}

struct FieldSpec {
    std::string_view section;
    std::string_view key;
    std::string_view doc;
    std::function<void(Scenario&, std::string_view)> set;  // throws std::invalid_argument text
    std::function<std::string(const Scenario&)> get;
};

inline FieldSpec real_field(std::string_view sec, std::string_view key, double Scenario::*m,
                            std::string_view doc) {
    return {sec, key, doc,
            [m, key](Scenario& s, std::string_view v) {
                auto x = parse_real(v);
                if (!x) throw std::invalid_argument("expected a number for '" + std::string(key) + "'");
                s.*m = *x;
            },
            [m](const Scenario& s) { return format_real(s.*m); }};
}

inline FieldSpec int_field(std::string_view sec, std::string_view key, int Scenario::*m,
                           std::string_view doc) {
    return {sec, key, doc,
            [m, key](Scenario& s, std::string_view v) {
                v = trim(v);
                int x = 0;
                auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
                if (ec != std::errc{} || p != v.data() + v.size())
                    throw std::invalid_argument("expected an integer for '" + std::string(key) + "'");
                s.*m = x;
            },
            [m](const Scenario& s) { return std::to_string(s.*m); }};
}

inline FieldSpec bool_field(std::string_view sec, std::string_view key, bool Scenario::*m,
                            std::string_view doc) {
    return {sec, key, doc,
            [m, key](Scenario& s, std::string_view v) {
                v = trim(v);
                if (v == "true" || v == "1") s.*m = true;
                else if (v == "false" || v == "0") s.*m = false;
                else throw std::invalid_argument("expected true/false for '" + std::string(key) + "'");
            },
            [m](const Scenario& s) { return std::string(s.*m ? "true" : "false"); }};
}

template <class E>
FieldSpec enum_field(std::string_view sec, std::string_view key, E Scenario::*m,
                     std::vector<std::pair<std::string_view, E>> names, std::string_view doc) {
    return {sec, key, doc,
            [m, key, names](Scenario& s, std::string_view v) {
                v = trim(v);
                for (const auto& [n, e] : names)
                    if (n == v) {
                        s.*m = e;
                        return;
                    }
                throw std::invalid_argument("unknown value '" + std::string(v) + "' for '" +
                                            std::string(key) + "'");
            },
            [m, names](const Scenario& s) {
                for (const auto& [n, e] : names)
                    if (e == s.*m) return std::string(n);
                return std::string("?");
            }};
}

}  // namespace detail

/// The documented default table. Order defines serialization order.
inline const std::vector<detail::FieldSpec>& scenario_fields() {
    using namespace detail;
    using S = Scenario;
    static const std::vector<FieldSpec> fields = {
        real_field("network", "lambda_b", &S::lambda_b, "BS density, 1/m^2"),
        real_field("network", "lambda_u", &S::lambda_u, "MU density, 1/m^2"),
        real_field("network", "lambda_e", &S::lambda_e, "external blocker density, 1/m^2"),
        real_field("network", "r_max", &S::r_max, "disk radius, m (default)"),
        real_field("network", "r_0", &S::r_0, "MU communication range, m (default)"),
        real_field("network", "r_blocker", &S::r_blocker, "blocker radius, m (default)"),
        real_field("antenna", "beam_bs", &S::beam_bs, "BS beamwidth, rad (default)"),
        real_field("antenna", "beam_mu", &S::beam_mu, "MU beamwidth, rad (default)"),
        real_field("antenna", "sidelobe_bs", &S::sidelobe_bs, "BS sidelobe gain (default)"),
        real_field("antenna", "sidelobe_mu", &S::sidelobe_mu, "MU sidelobe gain (default)"),
        enum_field<HMode>("antenna", "h_mode", &S::h_mode,
                          {{"uniform", HMode::uniform}, {"like_f", HMode::like_f}},
                          "BS alignment: uniform W/2pi or window mass like F"),
        enum_field<PsiMode>("antenna", "psi_mode", &S::psi_mode,
                            {{"crowd", PsiMode::crowd}, {"uniform", PsiMode::uniform}, {"fixed", PsiMode::fixed}},
                            "serving-BS bearing model"),
        real_field("antenna", "psi_ub", &S::psi_ub, "fixed serving-BS bearing, rad"),
        real_field("link", "alpha_los", &S::alpha_los, "LOS path-loss exponent"),
        real_field("link", "alpha_nlos", &S::alpha_nlos, "NLOS path-loss exponent"),
        real_field("link", "a_los", &S::a_los, "LOS path-loss coefficient"),
        real_field("link", "a_nlos", &S::a_nlos, "NLOS path-loss coefficient"),
        real_field("link", "eta", &S::eta, "association threshold; default a_los*sidelobe_bs*G_m"),
        real_field("link", "noise_psd", &S::noise_psd_dbm, "noise PSD, dBm/Hz"),
        real_field("link", "bandwidth", &S::bandwidth, "bandwidth, Hz (default)"),
        real_field("link", "rate", &S::rate, "transmit rate, bit/s (default)"),
        real_field("link", "p_max", &S::p_max, "maximum transmit power, W"),
        enum_field<QModel>("link", "q_model", &S::q_model,
                           {{"sigmoid", QModel::sigmoid}, {"exp", QModel::exp}},
                           "packet success: (1-exp(-k*g))^M or 1-exp(-k*g)"),
        real_field("link", "q_kappa", &S::q_kappa, "packet-success SINR scale"),
        int_field("link", "q_order", &S::q_order, "packet-success exponent M (sigmoid model)"),
        enum_field<AssocMode>("link", "assoc_mode", &S::assoc_mode,
                              {{"clamp", AssocMode::clamp}, {"union", AssocMode::union_}},
                              "association bracket: additive clamped at 1, or inclusion-exclusion"),
        real_field("link", "baseline_target_sinr_db", &S::baseline_target_sinr_db,
                   "noise-only SINR target of the path-loss compensating baseline, dB"),
        real_field("dynamics", "mu_phi", &S::mu_phi, "orientation drift, rad/s"),
        real_field("dynamics", "sigma_phi", &S::sigma_phi, "orientation diffusion coefficient"),
        real_field("dynamics", "e_max", &S::e_max, "initial battery energy, J (default)"),
        real_field("dynamics", "horizon", &S::horizon, "time horizon T, s"),
        real_field("dynamics", "phi_mean", &S::phi_mean, "initial orientation mean, rad"),
        real_field("dynamics", "phi_var", &S::phi_var, "initial orientation variance, rad^2"),
        bool_field("dynamics", "ito_convention", &S::ito_convention, "use sigma^2/2 diffusion"),
        enum_field<PhiBoundary>("dynamics", "phi_boundary", &S::phi_boundary,
                                {{"periodic", PhiBoundary::periodic}, {"absorbing", PhiBoundary::absorbing}},
                                "orientation boundary condition"),
        int_field("grid", "n_phi", &S::n_phi, "orientation nodes"),
        int_field("grid", "n_energy", &S::n_energy, "energy nodes"),
        int_field("grid", "n_time", &S::n_time, "output time intervals"),
        int_field("grid", "n_power", &S::n_power, "log-spaced power levels (plus zero)"),
        real_field("grid", "power_decades", &S::power_decades, "decades spanned by the power grid below p_max"),
        int_field("grid", "quad_nodes", &S::quad_nodes, "Gauss-Legendre nodes per utility segment"),
        real_field("mfe", "damping", &S::damping, "Picard damping tau in (0,1]"),
        real_field("mfe", "tol", &S::tol, "fixed-point tolerance"),
        int_field("mfe", "max_iters", &S::max_iters, "maximum Picard iterations"),
        bool_field("mfe", "z_time_varying", &S::z_time_varying,
                   "recompute the interferer gain mixture from the mean field each step"),
    };
    return fields;
}

namespace detail {

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
}

}  // namespace detail

/// Throws ValidationError naming the first violated invariant.
inline void validate(const Scenario& s) {
    using detail::require;
    auto positive = [](double v, const char* name) { require(v > 0.0 && std::isfinite(v), std::string(name) + " must be > 0"); };
    auto nonneg = [](double v, const char* name) { require(v >= 0.0 && std::isfinite(v), std::string(name) + " must be >= 0"); };
    positive(s.lambda_b, "lambda_b");
    nonneg(s.lambda_u, "lambda_u");
    nonneg(s.lambda_e, "lambda_e");
    positive(s.r_max, "r_max");
    positive(s.r_0, "r_0");
    positive(s.r_blocker, "r_blocker");
    require(s.r_blocker < s.r_0, "r_blocker must be < r_0");
    require(s.r_0 <= 2.0 * s.r_max, "r_0 must be <= 2*r_max");
    require(s.beam_bs > 0.0 && s.beam_bs <= kTwoPi, "beam_bs must be in (0, 2pi]");
    require(s.beam_mu > 0.0 && s.beam_mu <= kTwoPi, "beam_mu must be in (0, 2pi]");
    require(s.sidelobe_bs > 0.0 && s.sidelobe_bs < main_lobe_gain_of(s.beam_bs),
            "sidelobe_bs must be in (0, main-lobe gain)");
    require(s.sidelobe_mu > 0.0 && s.sidelobe_mu < main_lobe_gain_of(s.beam_mu),
            "sidelobe_mu must be in (0, main-lobe gain)");
    positive(s.alpha_los, "alpha_los");
    positive(s.alpha_nlos, "alpha_nlos");
    positive(s.a_los, "a_los");
    positive(s.a_nlos, "a_nlos");
    positive(s.eta, "eta");
    require(std::isfinite(s.noise_psd_dbm), "noise_psd must be finite");
    positive(s.bandwidth, "bandwidth");
    positive(s.rate, "rate");
    positive(s.p_max, "p_max");
    positive(s.q_kappa, "q_kappa");
    require(s.q_order >= 1, "q_order must be >= 1");
    require(std::isfinite(s.mu_phi), "mu_phi must be finite");
    nonneg(s.sigma_phi, "sigma_phi");
    positive(s.e_max, "e_max");
    positive(s.horizon, "horizon");
    positive(s.phi_var, "phi_var");
    require(s.n_phi >= 4, "n_phi must be >= 4");
    require(s.n_energy >= 4, "n_energy must be >= 4");
    require(s.n_time >= 4, "n_time must be >= 4");
    require(s.n_power >= 4, "n_power must be >= 4");
    positive(s.power_decades, "power_decades");
    require(s.quad_nodes >= 4, "quad_nodes must be >= 4");
    require(s.damping > 0.0 && s.damping <= 1.0, "damping must be in (0, 1]");
    positive(s.tol, "tol");
    require(s.max_iters >= 1, "max_iters must be >= 1");
}

namespace detail {

inline const FieldSpec* find_field(std::string_view key) {
    for (const auto& f : scenario_fields())
        if (f.key == key) return &f;
    return nullptr;
}

inline void apply_assignment(Scenario& s, std::set<std::string>& seen, std::string_view section,
                             std::string_view key, std::string_view value, int line) {
    const FieldSpec* f = find_field(key);
    if (!f) throw ConfigError(line, "unknown key '" + std::string(key) + "'");
    if (!section.empty() && f->section != section)
        throw ConfigError(line, "key '" + std::string(key) + "' belongs in [" + std::string(f->section) +
                                    "], not [" + std::string(section) + "]");
    try {
        f->set(s, value);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(line, e.what());
    }
    seen.insert(std::string(key));
}

inline void finalize(Scenario& s, const std::set<std::string>& seen) {
    if (!seen.count("eta"))
        s.eta = s.a_los * s.sidelobe_bs * main_lobe_gain_of(s.beam_mu);
    s.noise_psd = dbm_per_hz_to_watts(s.noise_psd_dbm);
    validate(s);
}

}  // namespace detail

/// Parses the sectioned key = value text. `overrides` are "key=value" or
/// "section.key=value" strings applied after the document.
inline Scenario parse_scenario(std::string_view text, const std::vector<std::string>& overrides = {}) {
    static const std::set<std::string_view> sections = {"network", "antenna", "link", "dynamics", "grid", "mfe"};
    Scenario s;
    std::set<std::string> seen;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(line_no, "unterminated section header");
            auto name = detail::trim(line.substr(1, line.size() - 2));
            if (!sections.count(name)) throw ConfigError(line_no, "unknown section [" + std::string(name) + "]");
            section = std::string(name);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(line_no, "expected key = value");
        const auto key = detail::trim(line.substr(0, eq));
        if (section.empty()) throw ConfigError(line_no, "key '" + std::string(key) + "' outside any section");
        if (seen.count(std::string(key))) throw ConfigError(line_no, "duplicate key '" + std::string(key) + "'");
        detail::apply_assignment(s, seen, section, key, line.substr(eq + 1), line_no);
    }
    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos) throw ConfigError(0, "override '" + ov + "' is not key=value");
        std::string_view key = detail::trim(std::string_view(ov).substr(0, eq));
        std::string_view sec;
        if (const auto dot = key.find('.'); dot != std::string_view::npos) {
            sec = key.substr(0, dot);
            key = key.substr(dot + 1);
        }
        detail::apply_assignment(s, seen, sec, key, std::string_view(ov).substr(eq + 1), 0);
    }
    detail::finalize(s, seen);
    return s;
}

/// Writes every field (including the resolved eta) so that parsing the
/// result reproduces the same Scenario.
inline std::string serialize_scenario(const Scenario& s) {
    std::ostringstream out;
    std::string_view current;
    for (const auto& f : scenario_fields()) {
        if (f.section != current) {
            if (!current.empty()) out << '\n';
            out << '[' << f.section << "]\n";
            current = f.section;
        }
        out << f.key << " = " << f.get(s) << '\n';
    }
    return out.str();
}

/// FNV-1a over the serialized form; identifies the resolved scenario in outputs.
inline std::uint64_t scenario_hash(const Scenario& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : serialize_scenario(s)) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string scenario_hash_hex(const Scenario& s) {
    std::array<char, 17> buf{};
    auto h = scenario_hash(s);
    for (int i = 15; i >= 0; --i) {
        buf[static_cast<std::size_t>(i)] = "0123456789abcdef"[h & 0xF];
        h >>= 4;
    }
    return std::string(buf.data(), 16);
}

/// Scenario with every key at its documented default.
inline Scenario default_scenario() { return parse_scenario(""); }

inline bool operator==(const Scenario& a, const Scenario& b) {
    return serialize_scenario(a) == serialize_scenario(b);
}

}  // namespace mmw

#pragma once

// Plain CSV with a scenario-hash comment line, a header row and values in
// shortest round-trip form (17 significant digits, C locale).

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"

namespace mmw {

struct CsvTable {
    std::string scenario;  // hex hash of the resolved Scenario
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row) {
        if (row.size() != columns.size()) throw std::invalid_argument("CsvTable: row width does not match header");
        rows.push_back(std::move(row));
    }
};

inline std::string to_csv(const CsvTable& t) {
    std::string out = "# scenario=" + t.scenario + "\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + t.columns[c];
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += detail::format_real(row[c]);
        }
        out += '\n';
    }
    return out;
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto c = line.find(',', pos);
        out.push_back(line.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos));
        if (c == std::string_view::npos) break;
        pos = c + 1;
    }
    return out;
}

}  // namespace detail

inline CsvTable parse_csv(std::string_view text) {
    CsvTable t;
    std::size_t pos = 0;
    int line_no = 0;
    bool header = false;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (line.front() == '#') {
            constexpr std::string_view key = "# scenario=";
            if (line.substr(0, key.size()) == key) t.scenario = std::string(line.substr(key.size()));
            continue;
        }
        const auto cells = detail::split_commas(line);
        if (!header) {
            for (auto c : cells) t.columns.emplace_back(c);
            header = true;
            continue;
        }
        if (cells.size() != t.columns.size())
            throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(t.columns.size()) + " fields");
        std::vector<double> row;
        for (auto c : cells) {
            double v = 0.0;
            auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (ec != std::errc() || p != c.data() + c.size())
                throw std::runtime_error("csv line " + std::to_string(line_no) + ": bad number '" + std::string(c) + "'");
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << content;
    f.close();
    if (!f) throw std::runtime_error("write to " + path.string() + " failed");
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& t) { write_text_file(path, to_csv(t)); }

inline CsvTable read_csv(const std::filesystem::path& path) {
    try {
        return parse_csv(read_text_file(path));
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

}  // namespace mmw

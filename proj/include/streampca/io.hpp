#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "streampca/linalg.hpp"

namespace streampca {

/// Shortest round-trippable decimal (17 significant digits).
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline double parse_double(std::string_view field, const std::string& context) {
    const std::string_view t = trim(field);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw std::runtime_error(context + ": not a number: '" + std::string(field) + "'");
    return v;
}

inline long long parse_integer(std::string_view field, const std::string& context) {
    const std::string_view t = trim(field);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw std::runtime_error(context + ": not an integer: '" + std::string(field) + "'");
    return v;
}

// Row-oriented CSV emitter: snake_case header, floats at full precision.
class CsvWriter {
public:
    void header(const std::vector<std::string>& names) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i) body_ << ',';
            body_ << names[i];
        }
        body_ << '\n';
    }

    class Row {
    public:
        explicit Row(CsvWriter& w) : w_(w) {}
        ~Row() { w_.body_ << '\n'; }
        Row& add(double v) { return raw(format_double(v)); }
        Row& add(long long v) { return raw(std::to_string(v)); }
        Row& add(long v) { return raw(std::to_string(v)); }
        Row& add(int v) { return raw(std::to_string(v)); }
        Row& add(unsigned long long v) { return raw(std::to_string(v)); }
        Row& add(bool v) { return raw(v ? "1" : "0"); }
        Row& add(const std::string& v) { return raw(v); }

    private:
        Row& raw(const std::string& s) {
            if (count_++) w_.body_ << ',';
            w_.body_ << s;
            return *this;
        }
        CsvWriter& w_;
        std::size_t count_ = 0;
    };

    Row row() { return Row(*this); }

    std::string str() const { return body_.str(); }

    void write_file(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open output file: " + path);
        out << body_.str();
    }

private:
    std::ostringstream body_;
};

/// Loads a single CSV row of d numbers (warm-start vectors and the like).
inline Vec load_row_vector(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open vector file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("vector file is empty: " + path);
    Vec out;
    for (auto field : split_fields(line)) out.push_back(parse_double(field, path));
    return out;
}

} // namespace streampca

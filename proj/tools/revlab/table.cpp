#include "table.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace revlab::cli {

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("row width does not match the header of " + name);
    rows.push_back(std::move(row));
}

namespace {

std::string printf_double(const char* fmt, double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

nlohmann::ordered_json to_json(const Cell& c) {
    struct Visitor {
        nlohmann::ordered_json operator()(const std::string& s) const { return s; }
        nlohmann::ordered_json operator()(double v) const { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(); }
        nlohmann::ordered_json operator()(Sci s) const { return (*this)(s.value); }
        nlohmann::ordered_json operator()(long long v) const { return v; }
    };
    return std::visit(Visitor{}, c);
}

}  // namespace

std::string format_cell(const Cell& c) {
    struct Visitor {
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(double v) const { return printf_double("%.6g", v); }
        std::string operator()(Sci s) const { return printf_double("%.5e", s.value); }
        std::string operator()(long long v) const { return std::to_string(v); }
    };
    return std::visit(Visitor{}, c);
}

void write_csv(std::ostream& out, const Table& t) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << quote(t.columns[i]);
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << quote(format_cell(row[i]));
        out << '\n';
    }
}

void write_json(std::ostream& out, const Table& t) {
    auto object = [&](const std::vector<Cell>& row) {
        nlohmann::ordered_json o;
        for (std::size_t i = 0; i < row.size(); ++i) o[t.columns[i]] = to_json(row[i]);
        return o;
    };
    nlohmann::ordered_json doc;
    if (t.record && t.rows.size() == 1) {
        doc = object(t.rows.front());
    } else {
        doc = nlohmann::ordered_json::array();
        for (const auto& row : t.rows) doc.push_back(object(row));
    }
    out << doc.dump(2) << '\n';
}

void write(std::ostream& out, const Table& t, Format f) {
    if (f == Format::Json)
        write_json(out, t);
    else
        write_csv(out, t);
}

}  // namespace revlab::cli

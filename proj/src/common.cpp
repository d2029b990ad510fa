#include "esim/common.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace esim {

std::vector<CsvRow> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    std::vector<CsvRow> rows;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        CsvRow row;
        row.line_no = line_no;
        std::string field;
        std::stringstream ss(line);
        while (std::getline(ss, field, ',')) {
            size_t a = field.find_first_not_of(" \t");
            size_t b = field.find_last_not_of(" \t");
            row.fields.push_back(a == std::string::npos ? "" : field.substr(a, b - a + 1));
        }
        if (!line.empty() && line.back() == ',') row.fields.emplace_back();
        rows.push_back(std::move(row));
    }
    return rows;
}

double parse_double(const std::string& s, const std::string& what, size_t line_no) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ParseError("line " + std::to_string(line_no) + ": bad numeric value for " + what +
                         ": '" + s + "'");
    return v;
}

long parse_long(const std::string& s, const std::string& what, size_t line_no) {
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ParseError("line " + std::to_string(line_no) + ": bad integer value for " + what +
                         ": '" + s + "'");
    return v;
}

}  // namespace esim

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace esim {

// Config/scenario errors map to CLI exit code 1, runtime errors to 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SelectionInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// splitmix64 finalizer, used as a keyed hash so that every stochastic draw
// is a pure function of (seed, key...) and replays are bit-identical.
constexpr uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
constexpr uint64_t mix64(uint64_t a, uint64_t b) { return mix64(a ^ mix64(b)); }
constexpr uint64_t mix64(uint64_t a, uint64_t b, uint64_t c) {
    return mix64(mix64(a, b) ^ mix64(c));
}
constexpr uint64_t mix64(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
    return mix64(mix64(a, b, c) ^ mix64(d));
}

// Uniform draw in [0, 1) from a hash value.
constexpr double unit_draw(uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

struct CsvRow {
    size_t line_no = 0;
    std::vector<std::string> fields;
};

// Reads a comma-separated file. Skips blank lines. No quoting support; none
// of the formats used here need it.
std::vector<CsvRow> read_csv(const std::string& path);

double parse_double(const std::string& s, const std::string& what, size_t line_no);
long parse_long(const std::string& s, const std::string& what, size_t line_no);

}  // namespace esim

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "esim/workload.hpp"

using namespace esim;

namespace {

TraceConfig base_config() {
    TraceConfig c;
    c.kind = TraceKind::Diurnal;
    c.mean_rate = 20.0;
    c.duration_s = 2000.0;
    c.amplitude = 0.0;
    c.num_classes = 10;
    c.constraint_mix = {{{100.0, 0.8, Objective::AccuracyFirst}, 0.6},
                        {{200.0, 0.9, Objective::LatencyFirst}, 0.4}};
    c.seed = 11;
    return c;
}

}  // namespace

TEST_CASE("flat diurnal trace hits the mean rate within 5 percent") {
    TraceConfig c = base_config();
    auto q = generate_trace(c);
    double rate = static_cast<double>(q.size()) / c.duration_s;
    CHECK(rate == doctest::Approx(c.mean_rate).epsilon(0.05));
    // Arrivals are sorted and ids are sequential.
    for (size_t i = 1; i < q.size(); ++i) {
        CHECK(q[i].arrival_s >= q[i - 1].arrival_s);
        CHECK(q[i].query_id == q[i - 1].query_id + 1);
    }
    CHECK(q.front().arrival_s >= 0);
    CHECK(q.back().arrival_s < c.duration_s);
}

TEST_CASE("diurnal modulation concentrates arrivals at the sine peak") {
    TraceConfig c = base_config();
    c.amplitude = 0.8;
    c.period_s = 2000.0;
    auto q = generate_trace(c);
    long first_half = 0;  // sin positive on the first half-period
    for (const auto& query : q)
        if (query.arrival_s < c.period_s / 2) ++first_half;
    double share = static_cast<double>(first_half) / static_cast<double>(q.size());
    // Expected share: (1 + 2 amplitude / pi) / 2 = 0.7546 at amplitude 0.8.
    CHECK(share == doctest::Approx(0.7546).epsilon(0.05));
    CHECK(true_rate(c, 500.0) == doctest::Approx(c.mean_rate * 1.8));
    CHECK(true_rate(c, 1500.0) == doctest::Approx(c.mean_rate * 0.2));
}

TEST_CASE("bursty traces keep the long-run mean but spike during bursts") {
    TraceConfig c = base_config();
    c.kind = TraceKind::Bursty;
    c.duration_s = 20000.0;
    c.burst_multiplier = 6.0;
    c.burst_duration_s = 60.0;
    c.burst_interarrival_s = 540.0;
    auto q = generate_trace(c);
    double rate = static_cast<double>(q.size()) / c.duration_s;
    CHECK(rate == doctest::Approx(c.mean_rate).epsilon(0.10));

    // Max arrivals in any 30 s bucket should reach at least twice the mean.
    std::map<long, long> buckets;
    for (const auto& query : q) buckets[static_cast<long>(query.arrival_s / 30.0)]++;
    long peak = 0;
    for (const auto& [b, n] : buckets) peak = std::max(peak, n);
    CHECK(static_cast<double>(peak) / 30.0 >= 2.0 * c.mean_rate);
    CHECK(true_rate(c, 123.0) == doctest::Approx(c.mean_rate));  // long-run mean
}

TEST_CASE("same seed reproduces the trace exactly, different seed does not") {
    TraceConfig c = base_config();
    auto a = generate_trace(c);
    auto b = generate_trace(c);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].arrival_s == b[i].arrival_s);
        CHECK(a[i].true_class == b[i].true_class);
        CHECK(a[i].constraint.latency_target_ms == b[i].constraint.latency_target_ms);
    }
    c.seed = 12;
    auto d = generate_trace(c);
    bool differs = d.size() != a.size();
    for (size_t i = 0; !differs && i < a.size(); ++i)
        differs = a[i].arrival_s != d[i].arrival_s;
    CHECK(differs);
}

TEST_CASE("constraint mix and class popularity are respected") {
    TraceConfig c = base_config();
    c.duration_s = 4000.0;
    c.num_classes = 3;
    c.class_popularity = {0.6, 0.3, 0.1};
    auto q = generate_trace(c);
    REQUIRE(q.size() > 10000);

    long strict = 0;
    std::map<int, long> cls;
    for (const auto& query : q) {
        if (query.constraint.latency_target_ms == 100.0) ++strict;
        cls[query.true_class]++;
    }
    double n = static_cast<double>(q.size());
    CHECK(strict / n == doctest::Approx(0.6).epsilon(0.035));
    CHECK(cls[0] / n == doctest::Approx(0.6).epsilon(0.035));
    CHECK(cls[1] / n == doctest::Approx(0.3).epsilon(0.05));
    CHECK(cls[2] / n == doctest::Approx(0.1).epsilon(0.10));
}

TEST_CASE("trace validation rejects inconsistent configs") {
    TraceConfig c = base_config();
    c.mean_rate = 0;
    CHECK_THROWS_AS(generate_trace(c), ConfigError);

    c = base_config();
    c.amplitude = 1.0;
    CHECK_THROWS_AS(generate_trace(c), ConfigError);

    c = base_config();
    c.constraint_mix[0].probability = 0.9;  // sum 1.3
    CHECK_THROWS_AS(generate_trace(c), ConfigError);

    c = base_config();
    c.constraint_mix.clear();
    CHECK_THROWS_AS(generate_trace(c), ConfigError);

    c = base_config();
    c.class_popularity = {1.0};  // wrong length
    CHECK_THROWS_AS(generate_trace(c), ConfigError);

    c = base_config();
    c.kind = TraceKind::Bursty;
    c.burst_multiplier = 0.5;
    CHECK_THROWS_AS(generate_trace(c), ConfigError);
}

TEST_CASE("trace CSV round-trips") {
    TraceConfig c = base_config();
    c.duration_s = 100.0;
    auto q = generate_trace(c);
    REQUIRE(!q.empty());

    auto path = (std::filesystem::temp_directory_path() / "esim_trace.csv").string();
    {
        std::ofstream out(path, std::ios::binary);
        write_trace_csv(out, q);
    }
    auto r = load_trace_csv(path);
    REQUIRE(r.size() == q.size());
    for (size_t i = 0; i < q.size(); ++i) {
        CHECK(r[i].arrival_s == doctest::Approx(q[i].arrival_s).epsilon(1e-6));
        CHECK(r[i].true_class == q[i].true_class);
        CHECK(r[i].constraint.latency_target_ms ==
              doctest::Approx(q[i].constraint.latency_target_ms));
        CHECK(r[i].constraint.accuracy_target ==
              doctest::Approx(q[i].constraint.accuracy_target));
        CHECK(r[i].constraint.primary_objective == q[i].constraint.primary_objective);
    }
    std::remove(path.c_str());
}

TEST_CASE("trace CSV loader rejects malformed rows") {
    auto write = [](const std::string& body) {
        auto path = (std::filesystem::temp_directory_path() / "esim_bad_trace.csv").string();
        std::ofstream out(path, std::ios::binary);
        out << "arrival_s,true_class,lat_ms,acc,objective\n" << body;
        return path;
    };
    auto check_throws = [&](const std::string& body) {
        auto path = write(body);
        CHECK_THROWS_AS(load_trace_csv(path), ParseError);
        std::remove(path.c_str());
    };
    check_throws("1.0,0,100,0.8\n");                           // missing field
    check_throws("1.0,0,100,0.8,sideways\n");                  // unknown objective
    check_throws("1.0,-2,100,0.8,accuracy-first\n");           // negative class
    check_throws("1.0,0,100,1.5,accuracy-first\n");            // accuracy out of range
    check_throws("1.0,0,0,0.8,accuracy-first\n");              // non-positive latency
    check_throws("2.0,0,100,0.8,accuracy-first\n"
                 "1.0,0,100,0.8,accuracy-first\n");            // time regression
    check_throws("abc,0,100,0.8,accuracy-first\n");            // unparsable number
}

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "esim/ensemble.hpp"

namespace esim {

struct Query {
    uint64_t query_id = 0;
    double arrival_s = 0;
    int true_class = 0;
    Constraint constraint;
};

enum class TraceKind { Diurnal, Bursty, Csv };

struct ConstraintMixEntry {
    Constraint constraint;
    double probability = 0;
};

struct TraceConfig {
    TraceKind kind = TraceKind::Diurnal;
    double mean_rate = 50.0;  // requests/second
    double duration_s = 3600.0;

    // diurnal: rate(t) = mean_rate * (1 + amplitude * sin(2*pi*t/period))
    double amplitude = 0.4;  // in [0, 1)
    double period_s = 3600.0;

    // bursty: two-state modulated Poisson; ON multiplies the base rate. The
    // base rate is chosen so the long-run average stays at mean_rate.
    double burst_multiplier = 4.0;
    double burst_duration_s = 60.0;      // mean ON sojourn
    double burst_interarrival_s = 540.0; // mean OFF sojourn

    int num_classes = 100;
    std::vector<double> class_popularity;  // empty = uniform over num_classes

    std::vector<ConstraintMixEntry> constraint_mix;
    uint64_t seed = 1;
    std::string csv_path;  // for kind = Csv

    void validate() const;
};

std::vector<Query> generate_trace(const TraceConfig& config);

// Deterministic expected arrival rate at time t (the oracle predictor's
// ground truth). For bursty traces this is the long-run mean.
double true_rate(const TraceConfig& config, double t);

// CSV with header: arrival_s,true_class,lat_ms,acc,objective
std::vector<Query> load_trace_csv(const std::string& path);
void write_trace_csv(std::ostream& out, const std::vector<Query>& queries);

}  // namespace esim

#pragma once

#include <map>
#include <string>

#include "esim/ensemble.hpp"
#include "esim/metrics.hpp"
#include "esim/model_zoo.hpp"
#include "esim/predictor.hpp"
#include "esim/resource.hpp"
#include "esim/spot_market.hpp"
#include "esim/workload.hpp"

namespace esim {

struct LatencyModelConfig {
    double network_min_ms = 200.0;
    double network_max_ms = 300.0;
    double launch_min_s = 60.0;
    double launch_max_s = 100.0;

    void validate() const;
};

struct Scenario {
    std::string name = "unnamed";
    uint64_t seed = 1;

    std::string zoo_csv;
    std::string catalog_csv;
    std::string class_matrix_csv;  // optional; otherwise synthesized
    double difficulty_spread = 0.0;
    WrongLabelMode wrong_label = WrongLabelMode::UniformOverWrong;
    double error_correlation = 0.0;

    TraceConfig trace;
    SelectionPolicyConfig policy;
    PredictorConfig predictor;
    AutoscalerConfig autoscaler;
    SpotMarketConfig market;
    LatencyModelConfig latency;
    MetricsConfig metrics;

    bool warm_start = true;  // provision mean-rate capacity per pool at t = 0

    void validate() const;
    std::map<std::string, std::string> echo() const;
};

// Reads a scenario JSON file. Relative data paths resolve against the
// scenario file's directory.
Scenario load_scenario(const std::string& path);

}  // namespace esim

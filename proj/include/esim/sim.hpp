#pragma once

#include <memory>

#include "esim/metrics.hpp"
#include "esim/scenario.hpp"

namespace esim {

struct SimResult {
    MetricsCollector metrics;
    RunArtifacts artifacts;
    std::vector<ScaleAction> scale_log;
    // Final ensemble size per constraint cache key.
    std::map<std::string, int> final_ensemble_sizes;
    long lost_sub_requests = 0;
};

// Runs one scenario end to end. Pure function of the scenario: two calls
// with equal scenarios produce identical results.
SimResult run_simulation(const Scenario& scenario);

// Writes summary.json, latency.csv, timeseries.csv, cost.csv.
void write_reports(const std::string& out_dir, const SimResult& result);

}  // namespace esim

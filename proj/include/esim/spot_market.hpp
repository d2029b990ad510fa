#pragma once

#include <map>
#include <string>
#include <vector>

#include "esim/resource.hpp"

namespace esim {

struct SpotMarketConfig {
    bool use_spot = false;
    double bid_fraction = 0.4;         // bid = fraction * on-demand price
    double failure_prob = 0.0;         // per-check Bernoulli capacity reclaim
    double check_interval_s = 60.0;
    double notice_s = 120.0;           // advance interruption notice (informational)
    uint64_t seed = 1;
    // Per-type price trace CSV: t_s,price. Types without a trace pay
    // constant_fraction * on-demand.
    std::map<std::string, std::string> price_trace_files;
    double constant_fraction = 0.4;

    void validate() const;
};

// Piecewise-constant spot price history per instance type.
class SpotMarket {
public:
    SpotMarket(SpotMarketConfig cfg, const std::vector<InstanceType>& catalog);

    const SpotMarketConfig& config() const { return cfg_; }

    // Price at time t: the most recent trace point, the first point before
    // the trace starts, or the constant fraction when no trace exists.
    double spot_price(int type_index, double t) const;
    double od_price(int type_index) const;

    bool price_exceeds_bid(int type_index, double t) const;

    // Keyed draw: capacity reclaim event for one instance at one check tick.
    bool random_failure(int instance_id, long check_index) const;

    // Price of one second of runtime under the given mode.
    double accrue_second(int type_index, PricingMode mode, double t) const;

private:
    SpotMarketConfig cfg_;
    std::vector<InstanceType> catalog_;
    std::vector<std::map<double, double>> traces_;  // per type_index; may be empty
};

}  // namespace esim

#include "esim/spot_market.hpp"

namespace esim {

void SpotMarketConfig::validate() const {
    if (bid_fraction <= 0 || bid_fraction > 1)
        throw ConfigError("spot market: bid_fraction out of (0,1]");
    if (failure_prob < 0 || failure_prob > 1)
        throw ConfigError("spot market: failure_prob out of [0,1]");
    if (!(check_interval_s > 0)) throw ConfigError("spot market: check interval <= 0");
    if (constant_fraction <= 0 || constant_fraction > 1)
        throw ConfigError("spot market: constant_fraction out of (0,1]");
    if (notice_s < 0) throw ConfigError("spot market: negative notice");
}

SpotMarket::SpotMarket(SpotMarketConfig cfg, const std::vector<InstanceType>& catalog)
    : cfg_(std::move(cfg)), catalog_(catalog) {
    cfg_.validate();
    traces_.resize(catalog_.size());
    for (size_t i = 0; i < catalog_.size(); ++i) {
        auto it = cfg_.price_trace_files.find(catalog_[i].name);
        if (it == cfg_.price_trace_files.end()) continue;
        auto rows = read_csv(it->second);
        for (size_t r = 1; r < rows.size(); ++r) {
            const auto& row = rows[r];
            if (row.fields.size() != 2)
                throw ParseError(it->second + " line " + std::to_string(row.line_no) +
                                 ": expected t_s,price");
            double t = parse_double(row.fields[0], "t_s", row.line_no);
            double price = parse_double(row.fields[1], "price", row.line_no);
            if (!(price > 0))
                throw ParseError(it->second + " line " + std::to_string(row.line_no) +
                                 ": non-positive price");
            traces_[i][t] = price;
        }
        if (traces_[i].empty())
            throw ConfigError("spot market: empty price trace " + it->second);
    }
}

double SpotMarket::od_price(int type_index) const {
    return catalog_.at(type_index).od_price_per_hour;
}

double SpotMarket::spot_price(int type_index, double t) const {
    const auto& trace = traces_.at(type_index);
    if (trace.empty()) return cfg_.constant_fraction * od_price(type_index);
    auto it = trace.upper_bound(t);
    if (it == trace.begin()) return it->second;  // before the first point
    --it;
    return it->second;
}

bool SpotMarket::price_exceeds_bid(int type_index, double t) const {
    return spot_price(type_index, t) > cfg_.bid_fraction * od_price(type_index);
}

bool SpotMarket::random_failure(int instance_id, long check_index) const {
    if (cfg_.failure_prob <= 0) return false;
    uint64_t h = mix64(cfg_.seed, 0xfa11u, static_cast<uint64_t>(instance_id),
                       static_cast<uint64_t>(check_index));
    return unit_draw(h) < cfg_.failure_prob;
}

double SpotMarket::accrue_second(int type_index, PricingMode mode, double t) const {
    double hourly = mode == PricingMode::Spot ? spot_price(type_index, t) : od_price(type_index);
    return hourly / 3600.0;
}

}  // namespace esim

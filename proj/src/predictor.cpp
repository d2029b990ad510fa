#include "esim/predictor.hpp"

#include <algorithm>
#include <cmath>

namespace esim {

PredictorKind predictor_from_name(const std::string& name) {
    if (name == "moving-window-average") return PredictorKind::MovingWindowAverage;
    if (name == "exponentially-weighted") return PredictorKind::ExponentiallyWeighted;
    if (name == "seasonal-naive") return PredictorKind::SeasonalNaive;
    if (name == "oracle") return PredictorKind::Oracle;
    if (name == "oracle-file") return PredictorKind::OracleFile;
    throw ConfigError("unknown predictor kind: " + name);
}

const char* predictor_name(PredictorKind k) {
    switch (k) {
        case PredictorKind::MovingWindowAverage: return "moving-window-average";
        case PredictorKind::ExponentiallyWeighted: return "exponentially-weighted";
        case PredictorKind::SeasonalNaive: return "seasonal-naive";
        case PredictorKind::Oracle: return "oracle";
        case PredictorKind::OracleFile: return "oracle-file";
    }
    return "?";
}

void PredictorConfig::validate() const {
    if (!(window_s > 0)) throw ConfigError("predictor: window must be > 0");
    if (history_s < window_s) throw ConfigError("predictor: history must be >= window");
    if (!(horizon_s > 0)) throw ConfigError("predictor: horizon must be > 0");
    if (smoothing <= 0 || smoothing > 1) throw ConfigError("predictor: smoothing out of (0,1]");
    if (kind == PredictorKind::SeasonalNaive && !(season_period_s > 0))
        throw ConfigError("predictor: season period must be > 0");
}

LoadPredictor::LoadPredictor(PredictorConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    if (cfg_.kind == PredictorKind::OracleFile) {
        auto rows = read_csv(cfg_.prediction_file);
        for (size_t i = 1; i < rows.size(); ++i) {
            const auto& r = rows[i];
            if (r.fields.size() != 2)
                throw ParseError(cfg_.prediction_file + " line " + std::to_string(r.line_no) +
                                 ": expected t_s,predicted_rate");
            file_predictions_[parse_double(r.fields[0], "t_s", r.line_no)] =
                parse_double(r.fields[1], "predicted_rate", r.line_no);
        }
        if (file_predictions_.empty())
            throw ConfigError("predictor: empty prediction file " + cfg_.prediction_file);
    }
}

void LoadPredictor::set_truth(std::function<double(double)> truth) { truth_ = std::move(truth); }

void LoadPredictor::observe(double t, double arrivals_in_last_window) {
    if (t < last_t_) throw ConfigError("predictor: observation time regressed");
    last_t_ = t;
    double rate = arrivals_in_last_window / cfg_.window_s;
    history_.emplace_back(t, rate);
    while (!history_.empty() && history_.front().first < t - cfg_.history_s)
        history_.pop_front();
    if (!ew_init_) {
        ew_ = rate;
        ew_init_ = true;
    } else {
        ew_ = cfg_.smoothing * rate + (1.0 - cfg_.smoothing) * ew_;
    }
}

double LoadPredictor::history_span() const {
    if (history_.empty()) return 0;
    return history_.back().first - history_.front().first;
}

double LoadPredictor::predict(double t) const {
    if (cfg_.kind == PredictorKind::Oracle) {
        if (!truth_) throw ConfigError("oracle predictor has no truth function");
        return std::max(0.0, truth_(t + cfg_.horizon_s));
    }
    if (cfg_.kind == PredictorKind::OracleFile) {
        double target = t + cfg_.horizon_s;
        auto it = file_predictions_.upper_bound(target);
        if (it != file_predictions_.begin()) --it;
        return std::max(0.0, it->second);
    }
    if (history_.empty()) throw ConfigError("predictor: no observations yet");

    switch (cfg_.kind) {
        case PredictorKind::MovingWindowAverage: {
            double sum = 0;
            for (const auto& [ts, rate] : history_) sum += rate;
            return sum / static_cast<double>(history_.size());
        }
        case PredictorKind::ExponentiallyWeighted:
            return ew_;
        case PredictorKind::SeasonalNaive: {
            double target = t + cfg_.horizon_s - cfg_.season_period_s;
            if (history_.front().first > target) return ew_;  // short history fallback
            // Closest observation to one season before the forecast target.
            double best_gap = 1e300, best_rate = ew_;
            for (const auto& [ts, rate] : history_) {
                double gap = std::abs(ts - target);
                if (gap < best_gap) {
                    best_gap = gap;
                    best_rate = rate;
                }
            }
            return best_rate;
        }
        default:
            break;
    }
    throw ConfigError("predictor: unreachable kind");
}

}  // namespace esim

#pragma once

#include <deque>
#include <functional>
#include <map>
#include <string>

#include "esim/common.hpp"

namespace esim {

enum class PredictorKind {
    MovingWindowAverage,
    ExponentiallyWeighted,
    SeasonalNaive,
    Oracle,
    OracleFile
};

PredictorKind predictor_from_name(const std::string& name);
const char* predictor_name(PredictorKind k);

struct PredictorConfig {
    PredictorKind kind = PredictorKind::MovingWindowAverage;
    double window_s = 10.0;         // W: sampling window
    double history_s = 600.0;       // S: retained history span
    double horizon_s = 600.0;       // T_p: forecast lead time
    double smoothing = 0.3;         // EW smoothing factor
    double season_period_s = 3600.0;
    std::string prediction_file;    // for OracleFile: CSV t_s,predicted_rate

    void validate() const;
};

// Arrival-rate forecaster. observe() feeds measured window rates; predict(t)
// estimates the rate at t + horizon.
class LoadPredictor {
public:
    explicit LoadPredictor(PredictorConfig cfg);

    // Ground-truth rate function for the oracle predictor.
    void set_truth(std::function<double(double)> truth);

    void observe(double t, double arrivals_in_last_window);
    double predict(double t) const;

    size_t history_size() const { return history_.size(); }
    double history_span() const;

private:
    PredictorConfig cfg_;
    std::deque<std::pair<double, double>> history_;  // (t, rate)
    double ew_ = 0;
    bool ew_init_ = false;
    double last_t_ = -1;
    std::function<double(double)> truth_;
    std::map<double, double> file_predictions_;
};

}  // namespace esim

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "esim/predictor.hpp"

using namespace esim;

namespace {

PredictorConfig cfg(PredictorKind kind) {
    PredictorConfig c;
    c.kind = kind;
    c.window_s = 10.0;
    c.history_s = 100.0;
    c.horizon_s = 30.0;
    c.smoothing = 0.5;
    return c;
}

}  // namespace

TEST_CASE("moving-window average is the mean of retained window rates") {
    LoadPredictor p(cfg(PredictorKind::MovingWindowAverage));
    p.observe(10, 100);  // 10 rps
    p.observe(20, 200);  // 20 rps
    p.observe(30, 300);  // 30 rps
    CHECK(p.predict(30) == doctest::Approx(20.0));
    CHECK(p.history_size() == 3);
    CHECK(p.history_span() == doctest::Approx(20.0));
}

TEST_CASE("history older than the retention span falls out") {
    auto c = cfg(PredictorKind::MovingWindowAverage);
    c.history_s = 25.0;
    LoadPredictor p(c);
    p.observe(10, 100);
    p.observe(20, 200);
    p.observe(40, 400);  // t=10 is now older than 40 - 25
    CHECK(p.history_size() == 2);
    CHECK(p.predict(40) == doctest::Approx(30.0));
}

TEST_CASE("exponential smoothing follows the recursive definition") {
    LoadPredictor p(cfg(PredictorKind::ExponentiallyWeighted));
    p.observe(10, 100);  // ew = 10
    CHECK(p.predict(10) == doctest::Approx(10.0));
    p.observe(20, 200);  // ew = 0.5*20 + 0.5*10 = 15
    CHECK(p.predict(20) == doctest::Approx(15.0));
    p.observe(30, 100);  // ew = 0.5*10 + 0.5*15 = 12.5
    CHECK(p.predict(30) == doctest::Approx(12.5));
}

TEST_CASE("seasonal-naive repeats the rate from one period earlier") {
    auto c = cfg(PredictorKind::SeasonalNaive);
    c.season_period_s = 60.0;
    c.history_s = 200.0;
    LoadPredictor p(c);
    for (int t = 10; t <= 120; t += 10) p.observe(t, 10.0 * t);  // rate = t
    // Forecast target 120 + 30; one season earlier is t = 90.
    CHECK(p.predict(120) == doctest::Approx(90.0));
}

TEST_CASE("seasonal-naive falls back to smoothing while history is short") {
    auto c = cfg(PredictorKind::SeasonalNaive);
    c.season_period_s = 500.0;  // much longer than the available history
    LoadPredictor p(c);
    p.observe(10, 100);
    p.observe(20, 300);  // ew = 0.5*30 + 0.5*10 = 20
    CHECK(p.predict(20) == doctest::Approx(20.0));
}

TEST_CASE("oracle predictor evaluates the truth at the forecast lead") {
    LoadPredictor p(cfg(PredictorKind::Oracle));
    CHECK_THROWS_AS(p.predict(0), ConfigError);  // no truth installed
    p.set_truth([](double t) { return 2.0 * t; });
    CHECK(p.predict(100) == doctest::Approx(2.0 * 130.0));
    p.set_truth([](double) { return -5.0; });
    CHECK(p.predict(0) == 0.0);  // clamped at zero
}

TEST_CASE("oracle-file predictor floors to the latest point at or before the target") {
    auto path = (std::filesystem::temp_directory_path() / "esim_pred.csv").string();
    {
        std::ofstream out(path, std::ios::binary);
        out << "t_s,predicted_rate\n0,5\n100,15\n200,25\n";
    }
    auto c = cfg(PredictorKind::OracleFile);
    c.prediction_file = path;
    LoadPredictor p(c);
    CHECK(p.predict(0) == doctest::Approx(5.0));     // target 30 -> point at 0
    CHECK(p.predict(80) == doctest::Approx(15.0));   // target 110 -> point at 100
    CHECK(p.predict(500) == doctest::Approx(25.0));  // past the end -> last point
    CHECK(p.predict(-100) == doctest::Approx(5.0));  // before the first point
    std::remove(path.c_str());

    auto c2 = cfg(PredictorKind::OracleFile);
    c2.prediction_file = path;  // file removed
    CHECK_THROWS(LoadPredictor(c2));
}

TEST_CASE("observation times must be monotone") {
    LoadPredictor p(cfg(PredictorKind::MovingWindowAverage));
    p.observe(10, 100);
    CHECK_THROWS_AS(p.observe(5, 100), ConfigError);
    LoadPredictor fresh(cfg(PredictorKind::MovingWindowAverage));
    CHECK_THROWS_AS(fresh.predict(0), ConfigError);  // no observations yet
}

TEST_CASE("config validation") {
    auto c = cfg(PredictorKind::MovingWindowAverage);
    c.window_s = 0;
    CHECK_THROWS_AS((void)LoadPredictor(c), ConfigError);

    c = cfg(PredictorKind::MovingWindowAverage);
    c.history_s = 5;  // shorter than the window
    CHECK_THROWS_AS((void)LoadPredictor(c), ConfigError);

    c = cfg(PredictorKind::ExponentiallyWeighted);
    c.smoothing = 0;
    CHECK_THROWS_AS((void)LoadPredictor(c), ConfigError);

    c = cfg(PredictorKind::SeasonalNaive);
    c.season_period_s = 0;
    CHECK_THROWS_AS((void)LoadPredictor(c), ConfigError);

    CHECK(predictor_from_name("moving-window-average") == PredictorKind::MovingWindowAverage);
    CHECK(predictor_from_name(predictor_name(PredictorKind::SeasonalNaive)) ==
          PredictorKind::SeasonalNaive);
    CHECK_THROWS_AS(predictor_from_name("psychic"), ConfigError);
}

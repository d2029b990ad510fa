#include "esim/validate.hpp"

#include <cmath>
#include <ostream>
#include <vector>

#include "esim/ensemble.hpp"
#include "esim/sim.hpp"
#include "esim/voting.hpp"

namespace esim {

namespace {

// Exhaustive reference: enumerate all 2^n outcome patterns.
double brute_force_majority(const std::vector<double>& acc) {
    const size_t n = acc.size();
    double total = 0;
    for (uint64_t mask = 0; mask < (1ull << n); ++mask) {
        size_t successes = 0;
        double p = 1;
        for (size_t i = 0; i < n; ++i) {
            if (mask & (1ull << i)) {
                p *= acc[i];
                ++successes;
            } else {
                p *= 1.0 - acc[i];
            }
        }
        if (successes >= n / 2 + 1) total += p;
    }
    return total;
}

Scenario smoke_scenario(const ValidateOptions& options) {
    Scenario s;
    s.name = "validate-smoke";
    s.seed = 7;
    s.zoo_csv = options.data_dir + "/imagenet_zoo.csv";
    s.catalog_csv = options.data_dir + "/instance_catalog.csv";
    s.trace.kind = TraceKind::Diurnal;
    s.trace.mean_rate = 5;
    s.trace.duration_s = 120;
    s.trace.num_classes = 10;
    s.trace.seed = s.seed;
    s.trace.constraint_mix = {{{200.0, 0.78, Objective::AccuracyFirst}, 1.0}};
    s.policy.policy = SelectionPolicy::CocktailDynamic;
    return s;
}

}  // namespace

bool run_validation(const ValidateOptions& options, std::ostream& out) {
    int failures = 0;
    auto check = [&](const std::string& name, bool ok) {
        out << (ok ? "ok   " : "FAIL ") << name << "\n";
        if (!ok) ++failures;
    };

    // Majority estimator against exhaustive enumeration.
    {
        double worst = 0;
        for (int n = 1; n <= 12; ++n) {
            std::vector<double> acc;
            for (int i = 0; i < n; ++i)
                acc.push_back(0.5 + 0.45 * unit_draw(mix64(99, n, i)));
            double est = estimate_ensemble_accuracy(acc);
            if (options.perturb) est += 1e-3;  // negative control
            worst = std::max(worst, std::abs(est - brute_force_majority(acc)));
        }
        check("majority estimator matches exhaustive enumeration (<= 1e-9)", worst <= 1e-9);
    }

    // Closed-form homogeneous case.
    {
        std::vector<double> acc(10, 0.7);
        double est = estimate_ensemble_accuracy(acc);
        check("homogeneous 10 x 0.70 majority probability in [0.82, 0.87]",
              est >= 0.82 && est <= 0.87);
    }

    // Candidate selection on the bundled image-classification zoo.
    try {
        ModelZoo zoo = ModelZoo::from_csv(options.data_dir + "/imagenet_zoo.csv");
        Constraint c{311.0, 0.84, Objective::AccuracyFirst};
        auto members = full_ensemble(zoo, c);
        double max_lat = 0;
        for (int m : members) max_lat = std::max(max_lat, zoo.profile(m).service_latency_ms);
        check("311 ms target admits 10 candidates", members.size() == 10);
        check("311 ms candidate set tops out at ~152.2 ms", std::abs(max_lat - 152.21) <= 1.0);
    } catch (const std::exception& e) {
        out << "FAIL zoo checks: " << e.what() << "\n";
        ++failures;
    }

    // Fresh (flat) class weights must reproduce the uniform majority outcome.
    {
        WeightMatrix w(4, 3);
        std::vector<std::pair<int, int>> votes = {{0, 2}, {1, 2}, {2, 1}};
        bool ok = weighted_vote(votes, w).winning_class == 2 &&
                  uniform_vote(votes, 0.5).winning_class == 2;
        check("flat class weights reduce to plain majority", ok);
    }

    if (!options.quick) {
        try {
            Scenario s = smoke_scenario(options);
            SimResult a = run_simulation(s);
            SimResult b = run_simulation(s);
            bool same = a.metrics.total_queries() == b.metrics.total_queries() &&
                        a.metrics.overall_accuracy() == b.metrics.overall_accuracy() &&
                        a.artifacts.total_cost == b.artifacts.total_cost;
            check("repeated runs are bit-identical", same);

            double lines = 0;
            for (const auto& l : a.artifacts.cost_lines) lines += l.cost;
            check("per-instance billing reconciles with the cost totals",
                  std::abs(lines - (a.artifacts.od_cost + a.artifacts.spot_cost)) < 1e-6 &&
                      std::abs(lines - a.artifacts.total_cost) < 1e-6);
            check("smoke run completes every generated query",
                  a.metrics.total_queries() == a.artifacts.generated_queries);
        } catch (const std::exception& e) {
            out << "FAIL smoke run: " << e.what() << "\n";
            ++failures;
        }
    }

    out << (failures == 0 ? "validation passed" : "validation FAILED") << "\n";
    return failures == 0;
}

}  // namespace esim

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "esim/model_zoo.hpp"

namespace esim {

enum class Objective { AccuracyFirst, LatencyFirst };

struct Constraint {
    double latency_target_ms = 0;  // raw model-execution latency, excluding network
    double accuracy_target = 0;    // in (0, 1)
    Objective primary_objective = Objective::AccuracyFirst;

    void validate() const;
};

enum class SelectionPolicy { SingleBest, FullStatic, DropOne, CocktailDynamic };

const char* policy_name(SelectionPolicy p);
SelectionPolicy policy_from_name(const std::string& name);

struct SelectionPolicyConfig {
    double acc_margin = 0.002;
    double lat_margin_ms = 5.0;
    double sampling_interval_s = 30.0;
    SelectionPolicy policy = SelectionPolicy::CocktailDynamic;
    // Full-static mirrors an averaging-style combiner with no class
    // information; the other policies vote with learned class weights.
    bool uniform_voting = false;
};

// Probability that strictly more than half of independent Bernoulli trials
// succeed, i.e. at least floor(N/2)+1 successes. Exact Poisson-binomial
// dynamic program, O(N^2).
double estimate_ensemble_accuracy(std::span<const double> accuracies);

// All models individually faster than the latency target (the O1 candidate
// set). Throws SelectionInfeasible when no model qualifies.
std::vector<int> full_ensemble(const ModelZoo& zoo, const Constraint& constraint);

struct IntervalStats {
    long total = 0;
    long correct = 0;
    std::map<int, long> max_vote_hist;                  // raw max-vote count -> frequency
    std::map<int, std::pair<long, long>> per_model;     // model -> (correct, attempts)

    void reset();
    // Most frequently occurring max-vote count; frequency ties resolve to the
    // smaller count so downsizing stays conservative.
    int mode_max_vote() const;
};

struct EnsembleState {
    Constraint constraint;
    std::vector<int> members;       // zoo indices
    std::vector<int> dropped_pool;  // latency-feasible models not currently used
    IntervalStats interval;
    bool best_effort = false;  // full candidate set still short of the accuracy target
};

EnsembleState construct_initial_ensemble(const ModelZoo& zoo, const Constraint& constraint,
                                         const SelectionPolicyConfig& policy);

struct ScalingResult {
    bool changed = false;
    int old_n = 0;
    int new_n = 0;
    std::string trigger;  // "drop" or "add"
};

// Interval-driven ensemble resizing (no-op for single-best and full-static).
// Call once per closed sampling interval; resets the interval stats.
ScalingResult dynamic_model_scaling(EnsembleState& state, const ModelZoo& zoo,
                                    const SelectionPolicyConfig& policy);

// Constraint cache key, quantized to the selection margins (5 ms, 0.2%).
struct CacheKey {
    long lat_q = 0;
    long acc_q = 0;
    int objective = 0;
    auto operator<=>(const CacheKey&) const = default;
    std::string str() const;
};

CacheKey cache_key(const Constraint& c);

class ModelCache {
public:
    std::shared_ptr<EnsembleState> lookup(const Constraint& c) const;
    void store(const Constraint& c, std::shared_ptr<EnsembleState> state);
    const std::map<CacheKey, std::shared_ptr<EnsembleState>>& entries() const { return entries_; }

private:
    std::map<CacheKey, std::shared_ptr<EnsembleState>> entries_;
};

}  // namespace esim

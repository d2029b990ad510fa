#include "esim/ensemble.hpp"

#include <algorithm>
#include <cmath>

namespace esim {

void Constraint::validate() const {
    if (!(latency_target_ms > 0.0)) throw ConfigError("constraint: latency target must be > 0");
    if (!(accuracy_target > 0.0 && accuracy_target < 1.0))
        throw ConfigError("constraint: accuracy target must be in (0,1)");
}

const char* policy_name(SelectionPolicy p) {
    switch (p) {
        case SelectionPolicy::SingleBest: return "single-best";
        case SelectionPolicy::FullStatic: return "full-static";
        case SelectionPolicy::DropOne: return "drop-one";
        case SelectionPolicy::CocktailDynamic: return "cocktail-dynamic";
    }
    return "?";
}

SelectionPolicy policy_from_name(const std::string& name) {
    if (name == "single-best") return SelectionPolicy::SingleBest;
    if (name == "full-static") return SelectionPolicy::FullStatic;
    if (name == "drop-one") return SelectionPolicy::DropOne;
    if (name == "cocktail-dynamic") return SelectionPolicy::CocktailDynamic;
    throw ConfigError("unknown selection policy: " + name);
}

double estimate_ensemble_accuracy(std::span<const double> accuracies) {
    if (accuracies.empty()) throw ConfigError("estimate_ensemble_accuracy: empty accuracy list");
    for (double a : accuracies)
        if (!(a > 0.0 && a <= 1.0))
            throw ConfigError("estimate_ensemble_accuracy: accuracy out of range");

    const size_t n = accuracies.size();
    // dp[k] = P(k successes among the models processed so far)
    std::vector<double> dp(n + 1, 0.0);
    dp[0] = 1.0;
    size_t processed = 0;
    for (double p : accuracies) {
        ++processed;
        for (size_t k = processed; k > 0; --k) dp[k] = dp[k] * (1.0 - p) + dp[k - 1] * p;
        dp[0] *= (1.0 - p);
    }
    size_t need = n / 2 + 1;
    double tail = 0.0;
    for (size_t k = n; k >= need; --k) tail += dp[k];
    return tail;
}

std::vector<int> full_ensemble(const ModelZoo& zoo, const Constraint& constraint) {
    constraint.validate();
    if (zoo.size() == 0) throw ConfigError("full_ensemble: empty zoo");
    std::vector<int> out;
    for (size_t i = 0; i < zoo.size(); ++i) {
        // A model exactly at the target (the baseline itself) is excluded;
        // the candidate set is the strictly faster models.
        if (zoo.profile(static_cast<int>(i)).service_latency_ms < constraint.latency_target_ms)
            out.push_back(static_cast<int>(i));
    }
    if (out.empty())
        throw SelectionInfeasible("no model satisfies latency target of " +
                                  std::to_string(constraint.latency_target_ms) + " ms");
    return out;
}

void IntervalStats::reset() {
    total = 0;
    correct = 0;
    max_vote_hist.clear();
    per_model.clear();
}

int IntervalStats::mode_max_vote() const {
    int best_count = 0;
    long best_freq = -1;
    for (const auto& [count, freq] : max_vote_hist) {
        if (freq > best_freq) {  // map is ordered by count ascending
            best_freq = freq;
            best_count = count;
        }
    }
    return best_count;
}

namespace {

// Candidates in descending top-1 accuracy; ties to the faster model.
std::vector<int> sorted_candidates(const ModelZoo& zoo, const Constraint& constraint) {
    auto cand = full_ensemble(zoo, constraint);
    std::sort(cand.begin(), cand.end(), [&](int a, int b) {
        const auto& pa = zoo.profile(a);
        const auto& pb = zoo.profile(b);
        if (pa.top1_accuracy != pb.top1_accuracy) return pa.top1_accuracy > pb.top1_accuracy;
        if (pa.service_latency_ms != pb.service_latency_ms)
            return pa.service_latency_ms < pb.service_latency_ms;
        return a < b;
    });
    return cand;
}

// Lowest cost per unit capacity on the reference instance; ties toward the
// faster, then more accurate model.
int cheapest(const ModelZoo& zoo, const std::vector<int>& models) {
    int best = models.front();
    for (int m : models) {
        const auto& pm = zoo.profile(m);
        const auto& pb = zoo.profile(best);
        if (pm.base_packing_factor != pb.base_packing_factor) {
            if (pm.base_packing_factor > pb.base_packing_factor) best = m;
        } else if (pm.service_latency_ms < pb.service_latency_ms) {
            best = m;
        }
    }
    return best;
}

}  // namespace

EnsembleState construct_initial_ensemble(const ModelZoo& zoo, const Constraint& constraint,
                                         const SelectionPolicyConfig& policy) {
    auto cand = sorted_candidates(zoo, constraint);
    EnsembleState state;
    state.constraint = constraint;

    if (policy.policy == SelectionPolicy::FullStatic) {
        state.members = cand;
        return state;
    }

    const double goal = constraint.accuracy_target - policy.acc_margin;

    // A single model reaching the target beats any ensemble on cost.
    std::vector<int> feasible_singles;
    for (int m : cand)
        if (zoo.profile(m).top1_accuracy >= goal) feasible_singles.push_back(m);
    if (!feasible_singles.empty()) {
        state.members = {cheapest(zoo, feasible_singles)};
        state.dropped_pool = cand;
        std::erase(state.dropped_pool, state.members[0]);
        return state;
    }

    if (policy.policy == SelectionPolicy::SingleBest) {
        state.members = {cand.front()};  // most accurate feasible model, best effort
        state.best_effort = true;
        state.dropped_pool.assign(cand.begin() + 1, cand.end());
        return state;
    }

    // Greedy: keep adding the next most accurate candidate until the joint
    // majority probability reaches the target.
    std::vector<double> accs;
    for (int m : cand) {
        state.members.push_back(m);
        accs.push_back(zoo.profile(m).top1_accuracy);
        if (estimate_ensemble_accuracy(accs) >= goal) break;
    }
    if (estimate_ensemble_accuracy(accs) < goal) state.best_effort = true;
    state.dropped_pool.assign(cand.begin() + state.members.size(), cand.end());
    return state;
}

ScalingResult dynamic_model_scaling(EnsembleState& state, const ModelZoo& zoo,
                                    const SelectionPolicyConfig& policy) {
    ScalingResult result;
    result.old_n = result.new_n = static_cast<int>(state.members.size());

    if (policy.policy == SelectionPolicy::SingleBest ||
        policy.policy == SelectionPolicy::FullStatic || state.interval.total == 0) {
        state.interval.reset();
        return result;
    }

    const double interval_acc =
        static_cast<double>(state.interval.correct) / static_cast<double>(state.interval.total);
    const double threshold = state.constraint.accuracy_target + policy.acc_margin;
    const int n = static_cast<int>(state.members.size());
    const int needed = n / 2 + 1;

    if (interval_acc >= threshold) {
        int mode = state.interval.mode_max_vote();
        if (mode > needed) {
            int to_drop = policy.policy == SelectionPolicy::DropOne ? 1 : mode - needed;
            to_drop = std::min(to_drop, n - 1);  // never shrink below one member
            for (int i = 0; i < to_drop; ++i) {
                // Drop the member with the worst interval accuracy; break ties
                // toward the least packing factor. Members with no interval
                // attempts carry no evidence and are dropped last.
                auto acc_of = [&](int m) {
                    auto it = state.interval.per_model.find(m);
                    if (it == state.interval.per_model.end() || it->second.second == 0) return 2.0;
                    return static_cast<double>(it->second.first) /
                           static_cast<double>(it->second.second);
                };
                auto victim = std::min_element(
                    state.members.begin(), state.members.end(), [&](int a, int b) {
                        double aa = acc_of(a), ab = acc_of(b);
                        if (aa != ab) return aa < ab;
                        return zoo.profile(a).base_packing_factor <
                               zoo.profile(b).base_packing_factor;
                    });
                state.dropped_pool.push_back(*victim);
                state.members.erase(victim);
            }
            result.changed = to_drop > 0;
            result.trigger = "drop";
        }
    } else if (!state.dropped_pool.empty()) {
        // Upscale one model at a time: most accurate unused model first.
        auto best = std::max_element(
            state.dropped_pool.begin(), state.dropped_pool.end(), [&](int a, int b) {
                return zoo.profile(a).top1_accuracy < zoo.profile(b).top1_accuracy;
            });
        state.members.push_back(*best);
        state.dropped_pool.erase(best);
        result.changed = true;
        result.trigger = "add";
    }

    result.new_n = static_cast<int>(state.members.size());
    state.interval.reset();
    return result;
}

std::string CacheKey::str() const {
    return std::to_string(lat_q * 5) + "ms/" + std::to_string(acc_q * 2) + "e-3/" +
           (objective == 0 ? "acc" : "lat");
}

CacheKey cache_key(const Constraint& c) {
    CacheKey k;
    k.lat_q = std::lround(c.latency_target_ms / 5.0);
    k.acc_q = std::lround(c.accuracy_target / 0.002);
    k.objective = c.primary_objective == Objective::AccuracyFirst ? 0 : 1;
    return k;
}

std::shared_ptr<EnsembleState> ModelCache::lookup(const Constraint& c) const {
    auto it = entries_.find(cache_key(c));
    return it == entries_.end() ? nullptr : it->second;
}

void ModelCache::store(const Constraint& c, std::shared_ptr<EnsembleState> state) {
    entries_[cache_key(c)] = std::move(state);
}

}  // namespace esim

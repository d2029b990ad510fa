#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <vector>

#include "esim/ensemble.hpp"

using namespace esim;

namespace {

// Independent reference: enumerate all 2^n success/failure outcomes.
double brute_force_majority(const std::vector<double>& accs) {
    const size_t n = accs.size();
    const size_t need = n / 2 + 1;
    double total = 0;
    for (uint64_t mask = 0; mask < (1ULL << n); ++mask) {
        size_t successes = 0;
        double p = 1.0;
        for (size_t i = 0; i < n; ++i) {
            if (mask & (1ULL << i)) {
                p *= accs[i];
                ++successes;
            } else {
                p *= 1.0 - accs[i];
            }
        }
        if (successes >= need) total += p;
    }
    return total;
}

ModelZoo image_zoo() {
    return ModelZoo::from_csv(std::string(ESIM_DATA_DIR) + "/imagenet_zoo.csv");
}

}  // namespace

TEST_CASE("majority estimator matches exhaustive enumeration") {
    for (size_t n = 1; n <= 12; ++n) {
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<double> accs(n);
            for (size_t i = 0; i < n; ++i)
                accs[i] = 0.02 + 0.96 * unit_draw(mix64(n, rep, i));
            double got = estimate_ensemble_accuracy(accs);
            double want = brute_force_majority(accs);
            CHECK(std::abs(got - want) <= 1e-9);
        }
    }
}

TEST_CASE("pinned homogeneous ensemble values") {
    std::vector<double> ten(10, 0.7);
    CHECK(estimate_ensemble_accuracy(ten) == doctest::Approx(0.849732).epsilon(1e-5));
    std::vector<double> five(5, 0.8);
    // Binomial(5, 0.8), P(X >= 3) = 0.94208 exactly.
    CHECK(estimate_ensemble_accuracy(five) == doctest::Approx(0.94208).epsilon(1e-9));
    std::vector<double> one{0.73};
    CHECK(estimate_ensemble_accuracy(one) == doctest::Approx(0.73));
}

TEST_CASE("adding two members to a homogeneous majority never hurts when p > 0.5") {
    for (double p : {0.55, 0.7, 0.9}) {
        double prev = estimate_ensemble_accuracy(std::vector<double>(1, p));
        for (size_t n = 3; n <= 11; n += 2) {
            double cur = estimate_ensemble_accuracy(std::vector<double>(n, p));
            CHECK(cur >= prev - 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("estimator rejects empty and out-of-range inputs") {
    CHECK_THROWS_AS(estimate_ensemble_accuracy({}), ConfigError);
    std::vector<double> bad{0.5, 0.0};
    CHECK_THROWS_AS(estimate_ensemble_accuracy(bad), ConfigError);
    std::vector<double> bad2{1.5};
    CHECK_THROWS_AS(estimate_ensemble_accuracy(bad2), ConfigError);
}

TEST_CASE("latency-feasible candidate set sizes on the bundled zoo") {
    ModelZoo zoo = image_zoo();
    Constraint c311{311.0, 0.8, Objective::AccuracyFirst};
    auto all = full_ensemble(zoo, c311);
    CHECK(all.size() == 10);  // everything strictly faster than the 311 ms baseline

    Constraint c152{151.96, 0.8, Objective::AccuracyFirst};
    CHECK(full_ensemble(zoo, c152).size() == 8);

    Constraint tight{10.0, 0.8, Objective::AccuracyFirst};
    CHECK_THROWS_AS(full_ensemble(zoo, tight), SelectionInfeasible);
}

TEST_CASE("full-static uses every latency-feasible model") {
    ModelZoo zoo = image_zoo();
    SelectionPolicyConfig pol;
    pol.policy = SelectionPolicy::FullStatic;
    auto st = construct_initial_ensemble(zoo, {311.0, 0.9, Objective::AccuracyFirst}, pol);
    CHECK(st.members.size() == 10);
    CHECK(st.dropped_pool.empty());
    CHECK_FALSE(st.best_effort);
}

TEST_CASE("a single model reaching the target wins over any ensemble") {
    ModelZoo zoo = image_zoo();
    SelectionPolicyConfig pol;
    pol.policy = SelectionPolicy::CocktailDynamic;
    auto st = construct_initial_ensemble(zoo, {200.0, 0.80, Objective::AccuracyFirst}, pol);
    REQUIRE(st.members.size() == 1);
    CHECK(zoo.profile(st.members[0]).model_id == "inception_resnet_v2");
    CHECK_FALSE(st.best_effort);
    // Everything else stays available for upscaling.
    CHECK(st.dropped_pool.size() + 1 == full_ensemble(zoo, st.constraint).size());
}

TEST_CASE("single-best falls back to the most accurate feasible model") {
    ModelZoo zoo = image_zoo();
    SelectionPolicyConfig pol;
    pol.policy = SelectionPolicy::SingleBest;
    auto st = construct_initial_ensemble(zoo, {100.0, 0.90, Objective::AccuracyFirst}, pol);
    REQUIRE(st.members.size() == 1);
    CHECK(zoo.profile(st.members[0]).model_id == "inception_v3");
    CHECK(st.best_effort);
}

TEST_CASE("greedy construction stops at the smallest prefix that reaches the goal") {
    ModelZoo zoo = image_zoo();
    SelectionPolicyConfig pol;
    pol.policy = SelectionPolicy::CocktailDynamic;
    Constraint c{100.0, 0.875, Objective::AccuracyFirst};
    auto st = construct_initial_ensemble(zoo, c, pol);
    REQUIRE(st.members.size() >= 2);

    std::vector<double> accs;
    for (int m : st.members) accs.push_back(zoo.profile(m).top1_accuracy);
    // Members are the most accurate candidates, in descending accuracy.
    CHECK(std::is_sorted(accs.rbegin(), accs.rend()));
    double goal = c.accuracy_target - pol.acc_margin;
    if (!st.best_effort) {
        CHECK(estimate_ensemble_accuracy(accs) >= goal);
        accs.pop_back();
        if (!accs.empty()) CHECK(estimate_ensemble_accuracy(accs) < goal);
    }
}

namespace {

EnsembleState ten_member_state() {
    EnsembleState st;
    st.constraint = {311.0, 0.80, Objective::AccuracyFirst};
    for (int i = 0; i < 10; ++i) st.members.push_back(i);
    return st;
}

void fill_interval(EnsembleState& st, long total, long correct, int mode_votes) {
    st.interval.total = total;
    st.interval.correct = correct;
    st.interval.max_vote_hist[mode_votes] = total;
}

}  // namespace

TEST_CASE("downscale drops mode minus majority-need members") {
    ModelZoo zoo = image_zoo();
    SelectionPolicyConfig pol;
    pol.policy = SelectionPolicy::CocktailDynamic;

    auto st = ten_member_state();
    fill_interval(st, 100, 90, 8);  // interval accuracy 0.90 >= 0.80 + margin, mode 8
    auto r = dynamic_model_scaling(st, zoo, pol);
    CHECK(r.changed);
    CHECK(r.trigger == "drop");
    CHECK(r.old_n == 10);
    CHECK(r.new_n == 8);  // need = 6, drop mode - need = 2
    CHECK(st.members.size() == 8);
    CHECK(st.dropped_pool.size() == 2);
    CHECK(st.interval.total == 0);  // stats reset after the decision
}

TEST_CASE("drop-one policy removes exactly one member per interval") {
    ModelZoo zoo = image_zoo();
    SelectionPolicyConfig pol;
    pol.policy = SelectionPolicy::DropOne;
    auto st = ten_member_state();
    fill_interval(st, 100, 90, 8);
    auto r = dynamic_model_scaling(st, zoo, pol);
    CHECK(r.new_n == 9);
}

TEST_CASE("victims are the members with the worst interval accuracy") {
    ModelZoo zoo = image_zoo();
    SelectionPolicyConfig pol;
    pol.policy = SelectionPolicy::CocktailDynamic;
    auto st = ten_member_state();
    fill_interval(st, 100, 90, 7);  // drop 1
    for (int m = 0; m < 10; ++m) st.interval.per_model[m] = {90, 100};
    st.interval.per_model[4] = {10, 100};  // clearly the worst
    dynamic_model_scaling(st, zoo, pol);
    CHECK(std::find(st.members.begin(), st.members.end(), 4) == st.members.end());
    REQUIRE(st.dropped_pool.size() == 1);
    CHECK(st.dropped_pool[0] == 4);
}

TEST_CASE("members with no interval evidence are dropped last") {
    ModelZoo zoo = image_zoo();
    SelectionPolicyConfig pol;
    pol.policy = SelectionPolicy::CocktailDynamic;
    auto st = ten_member_state();
    fill_interval(st, 100, 90, 7);
    for (int m = 0; m < 10; ++m)
        if (m != 3) st.interval.per_model[m] = {95, 100};
    // Model 3 has no attempts; any measured model scores below the no-data 2.0.
    dynamic_model_scaling(st, zoo, pol);
    CHECK(std::find(st.members.begin(), st.members.end(), 3) != st.members.end());
}

TEST_CASE("upscale re-adds the most accurate unused model") {
    ModelZoo zoo = image_zoo();
    SelectionPolicyConfig pol;
    pol.policy = SelectionPolicy::CocktailDynamic;
    EnsembleState st;
    st.constraint = {311.0, 0.80, Objective::AccuracyFirst};
    st.members = {0, 1, 2};
    st.dropped_pool = {zoo.index_of("resnet50"), zoo.index_of("nasnet_large")};
    fill_interval(st, 100, 60, 3);  // interval accuracy 0.60 < target
    auto r = dynamic_model_scaling(st, zoo, pol);
    CHECK(r.changed);
    CHECK(r.trigger == "add");
    CHECK(r.new_n == 4);
    CHECK(st.members.back() == zoo.index_of("nasnet_large"));  // top1 0.82 beats 0.749
}

TEST_CASE("scaling never shrinks below one member and is a no-op for static policies") {
    ModelZoo zoo = image_zoo();
    SelectionPolicyConfig pol;
    pol.policy = SelectionPolicy::CocktailDynamic;
    EnsembleState st;
    st.constraint = {311.0, 0.70, Objective::AccuracyFirst};
    st.members = {0, 1};
    fill_interval(st, 100, 99, 2);  // mode 2 > need 2? need = 2, mode == need -> no drop
    auto r = dynamic_model_scaling(st, zoo, pol);
    CHECK(r.new_n == 2);

    st.members = {0, 1, 2};
    st.interval.reset();
    fill_interval(st, 100, 99, 3);  // need 2, mode 3 -> wants to drop 1, floor at 1 not hit
    r = dynamic_model_scaling(st, zoo, pol);
    CHECK(r.new_n == 2);

    for (auto p : {SelectionPolicy::SingleBest, SelectionPolicy::FullStatic}) {
        SelectionPolicyConfig sp;
        sp.policy = p;
        EnsembleState s2;
        s2.constraint = {311.0, 0.70, Objective::AccuracyFirst};
        s2.members = {0, 1, 2, 3, 4};
        fill_interval(s2, 100, 99, 5);
        auto r2 = dynamic_model_scaling(s2, zoo, sp);
        CHECK_FALSE(r2.changed);
        CHECK(r2.new_n == 5);
    }
}

TEST_CASE("mode of the max-vote histogram breaks frequency ties to the smaller count") {
    IntervalStats s;
    s.max_vote_hist[3] = 5;
    s.max_vote_hist[5] = 5;
    s.max_vote_hist[4] = 2;
    CHECK(s.mode_max_vote() == 3);
    s.max_vote_hist[5] = 6;
    CHECK(s.mode_max_vote() == 5);
}

TEST_CASE("constraint cache quantizes to the selection margins") {
    CacheKey k = cache_key({150.0, 0.78, Objective::AccuracyFirst});
    CHECK(k.str() == "150ms/780e-3/acc");

    ModelCache cache;
    auto st = std::make_shared<EnsembleState>();
    cache.store({150.0, 0.78, Objective::AccuracyFirst}, st);
    // 151 ms / 0.7795 round to the same 5 ms / 0.002 buckets.
    CHECK(cache.lookup({151.0, 0.7795, Objective::AccuracyFirst}) == st);
    CHECK(cache.lookup({160.0, 0.78, Objective::AccuracyFirst}) == nullptr);
    CHECK(cache.lookup({150.0, 0.78, Objective::LatencyFirst}) == nullptr);
}

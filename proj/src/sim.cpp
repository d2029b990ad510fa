#include "esim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "esim/voting.hpp"

namespace esim {

namespace {

enum class EvKind {
    Arrival,
    SubComplete,
    VMReady,
    MarketCheck,
    PredictorTick,
    ScalingTick,
    ReactiveTick,
    SamplingTick,
    StatsTick
};

struct Ev {
    double t = 0;
    uint64_t seq = 0;  // insertion order breaks time ties deterministically
    EvKind kind = EvKind::Arrival;
    uint64_t payload = 0;
};

struct EvLater {
    bool operator()(const Ev& a, const Ev& b) const {
        if (a.t != b.t) return a.t > b.t;
        return a.seq > b.seq;
    }
};

struct SubRequest {
    uint64_t sub_id = 0;
    uint64_t query_id = 0;
    int model = -1;
    int instance_id = -1;
    bool lost = false;
    bool done = false;
};

struct ActiveQuery {
    Query q;
    std::shared_ptr<EnsembleState> ens;
    int expected = 0;
    int resolved = 0;
    int lost = 0;
    std::vector<std::pair<int, int>> votes;  // (model, predicted class)
    bool finalized = false;
};

class Simulation {
public:
    explicit Simulation(const Scenario& s)
        : s_(s),
          zoo_(ModelZoo::from_csv(s.zoo_csv)),
          queries_(generate_trace(s.trace)),
          rm_(zoo_, load_catalog_csv(s.catalog_csv), s.autoscaler),
          market_(make_market(s), rm_.catalog()),
          predictor_(s.predictor),
          metrics_(s.metrics) {
        int num_classes = s.trace.num_classes;
        for (const Query& q : queries_) num_classes = std::max(num_classes, q.true_class + 1);
        matrix_ = s.class_matrix_csv.empty()
                      ? (s.difficulty_spread > 0
                             ? synthesize_class_matrix(zoo_, num_classes, s.difficulty_spread,
                                                       mix64(s.seed, 11))
                             : ClassAccuracyMatrix::flat(zoo_, num_classes))
                      : load_class_matrix_csv(s.class_matrix_csv, zoo_, num_classes);
        PredictionOracleConfig ocfg;
        ocfg.rng_seed = mix64(s.seed, 1);
        ocfg.wrong_label_distribution = s.wrong_label;
        ocfg.error_correlation = s.error_correlation;
        oracle_ = std::make_unique<PredictionOracle>(zoo_, matrix_, ocfg);
        weights_ = std::make_unique<WeightMatrix>(num_classes, static_cast<int>(zoo_.size()));
        predictor_.set_truth([cfg = s.trace](double t) { return true_rate(cfg, t); });
    }

    SimResult run();

private:
    static SpotMarketConfig make_market(const Scenario& s) {
        SpotMarketConfig m = s.market;
        m.seed = mix64(s.seed, 5);
        return m;
    }

    void push(double t, EvKind kind, uint64_t payload = 0) {
        pq_.push({t, seq_++, kind, payload});
    }

    double network_ms(uint64_t qid) const {
        double u = unit_draw(mix64(mix64(s_.seed, 3), qid));
        return s_.latency.network_min_ms +
               u * (s_.latency.network_max_ms - s_.latency.network_min_ms);
    }

    double tie_draw(uint64_t qid) const { return unit_draw(mix64(mix64(s_.seed, 6), qid)); }

    int schedule_launch(int pool, int type_index, PricingMode mode, double t,
                        const std::string& reason, bool instant) {
        double delay = 0;
        if (!instant) {
            double u = unit_draw(mix64(mix64(s_.seed, 4), launch_counter_++));
            delay = s_.latency.launch_min_s + u * (s_.latency.launch_max_s - s_.latency.launch_min_s);
        }
        int id = rm_.launch(pool, type_index, mode, t, t + delay, reason);
        if (static_cast<size_t>(id) >= instance_subs_.size()) instance_subs_.resize(id + 1);
        if (instant)
            rm_.mark_ready(id, t);
        else
            push(t + delay, EvKind::VMReady, static_cast<uint64_t>(id));
        return id;
    }

    PricingMode default_mode() const {
        return s_.market.use_spot ? PricingMode::Spot : PricingMode::OnDemand;
    }

    std::shared_ptr<EnsembleState> ensemble_for(const Constraint& c) {
        if (auto hit = cache_.lookup(c)) return hit;
        auto state = std::make_shared<EnsembleState>(
            construct_initial_ensemble(zoo_, c, s_.policy));
        cache_.store(c, state);
        return state;
    }

    void schedule_sub_completion(uint64_t sub_id, double t) {
        const SubRequest& sub = subs_[sub_id];
        double service_s = zoo_.profile(sub.model).service_latency_ms / 1000.0;
        push(t + service_s, EvKind::SubComplete, sub_id);
    }

    void assign_sub(uint64_t sub_id, int instance_id, double t) {
        subs_[sub_id].instance_id = instance_id;
        instance_subs_[instance_id].push_back(sub_id);
        schedule_sub_completion(sub_id, t);
    }

    void handle_arrival(uint64_t trace_index, double t) {
        const Query& q = queries_[trace_index];
        ++arrivals_since_obs_;
        auto ens = ensemble_for(q.constraint);
        ActiveQuery aq;
        aq.q = q;
        aq.ens = ens;
        aq.expected = static_cast<int>(ens->members.size());
        uint64_t qid = q.query_id;
        active_.emplace(qid, std::move(aq));
        for (int m : ens->members) {
            uint64_t sub_id = subs_.size();
            subs_.push_back({sub_id, qid, m, -1, false, false});
            DispatchResult r = rm_.dispatch(m, sub_id, t);
            ActiveQuery& cur = active_.at(qid);
            switch (r.status) {
                case DispatchStatus::Assigned:
                    assign_sub(sub_id, r.instance_id, t);
                    break;
                case DispatchStatus::Queued:
                    break;  // resolved when the pool drains
                case DispatchStatus::Lost:
                    subs_[sub_id].lost = true;
                    cur.resolved++;
                    cur.lost++;
                    lost_subs_++;
                    break;
            }
        }
        maybe_finalize(qid, t);
    }

    void handle_sub_complete(uint64_t sub_id, double t) {
        SubRequest& sub = subs_[sub_id];
        if (sub.lost || sub.done) return;  // preempted before finishing
        sub.done = true;
        if (sub.instance_id >= 0) {
            auto& list = instance_subs_[sub.instance_id];
            std::erase(list, sub_id);
            rm_.release_slot(sub.instance_id, t);
            for (auto [queued_sub, inst] : rm_.drain_queue(sub.model, t))
                assign_sub(queued_sub, inst, t);
        }
        auto it = active_.find(sub.query_id);
        if (it == active_.end()) return;
        ActiveQuery& aq = it->second;
        int predicted = oracle_->predict(sub.model, aq.q.true_class, aq.q.query_id);
        aq.votes.emplace_back(sub.model, predicted);
        aq.resolved++;
        maybe_finalize(sub.query_id, t);
    }

    void maybe_finalize(uint64_t qid, double t) {
        auto it = active_.find(qid);
        if (it == active_.end()) return;
        ActiveQuery& aq = it->second;
        if (aq.finalized || aq.resolved < aq.expected) return;
        aq.finalized = true;

        CompletionRecord rec;
        rec.query_id = qid;
        rec.arrival_s = aq.q.arrival_s;
        rec.completion_s = t;
        rec.true_class = aq.q.true_class;
        rec.ensemble_size = aq.expected;
        rec.votes_cast = static_cast<int>(aq.votes.size());
        rec.constraint_key = cache_key(aq.q.constraint).str();
        rec.accuracy_target = aq.q.constraint.accuracy_target;

        if (aq.votes.empty()) {
            rec.failed = true;
            rec.latency_ms = (t - aq.q.arrival_s) * 1000.0;
        } else {
            std::sort(aq.votes.begin(), aq.votes.end());  // deterministic vote order
            VoteOutcome outcome =
                s_.policy.uniform_voting
                    ? uniform_vote(aq.votes, tie_draw(qid))
                    : weighted_vote(aq.votes, *weights_);
            rec.predicted_class = outcome.winning_class;
            rec.correct = outcome.winning_class == aq.q.true_class;
            rec.latency_ms = (t - aq.q.arrival_s) * 1000.0 + network_ms(qid);

            IntervalStats& stats = aq.ens->interval;
            stats.total++;
            if (rec.correct) stats.correct++;
            stats.max_vote_hist[outcome.max_vote_count]++;
            for (auto [model, cls] : aq.votes) {
                auto& pm = stats.per_model[model];
                pm.second++;
                if (cls == aq.q.true_class) pm.first++;
                weights_->update(model, cls, aq.q.true_class);
            }
        }
        metrics_.record_completion(rec);
        active_.erase(it);
    }

    void handle_vm_ready(int instance_id, double t) {
        rm_.mark_ready(instance_id, t);
        int pool = rm_.instance(instance_id).pool;
        for (auto [queued_sub, inst] : rm_.drain_queue(pool, t)) assign_sub(queued_sub, inst, t);
    }

    void handle_market_check(double t, long tick) {
        struct Victim {
            int id;
            bool price_triggered;
        };
        std::vector<Victim> victims;
        for (const Instance& inst : rm_.instances()) {
            if (inst.pricing_mode != PricingMode::Spot) continue;
            if (inst.state != InstanceState::Running && inst.state != InstanceState::Launching)
                continue;
            if (market_.price_exceeds_bid(inst.type_index, t))
                victims.push_back({inst.instance_id, true});
            else if (market_.random_failure(inst.instance_id, tick))
                victims.push_back({inst.instance_id, false});
        }
        for (const Victim& v : victims) {
            const Instance snapshot = rm_.instance(v.id);
            for (uint64_t sub_id : instance_subs_[v.id]) {
                SubRequest& sub = subs_[sub_id];
                if (sub.done || sub.lost) continue;
                sub.lost = true;
                lost_subs_++;
                auto it = active_.find(sub.query_id);
                if (it != active_.end()) {
                    it->second.resolved++;
                    it->second.lost++;
                    maybe_finalize(sub.query_id, t);
                }
            }
            instance_subs_[v.id].clear();
            rm_.preempt(v.id, t);
            rm_.note_scale_action({t, snapshot.pool, "terminate", snapshot.type_index, 1,
                                   v.price_triggered ? "preemption-price" : "preemption-failure"});
            // Replace one-for-one; a price-driven loss falls back to on-demand.
            schedule_launch(snapshot.pool, snapshot.type_index,
                            v.price_triggered ? PricingMode::OnDemand : PricingMode::Spot, t,
                            "replacement", false);
        }
    }

    void handle_predictor_tick(double t) {
        predictor_.observe(t, static_cast<double>(arrivals_since_obs_));
        arrivals_since_obs_ = 0;
    }

    double live_capacity() const {
        double cap = 0;
        for (const Instance& inst : rm_.instances())
            if (inst.state == InstanceState::Running || inst.state == InstanceState::Launching)
                cap += inst.slots_total;
        return cap;
    }

    void handle_scaling_tick(double t) {
        double predicted;
        try {
            predicted = predictor_.predict(t);
        } catch (const ConfigError&) {
            return;  // no observations yet
        }
        for (const auto& item : rm_.weighted_autoscale(t, predicted, live_capacity()))
            for (int i = 0; i < item.count; ++i)
                schedule_launch(item.pool, item.type_index, default_mode(), t, "predictive",
                                false);
    }

    std::vector<int> keep_alive_pools() const {
        std::vector<int> pools;
        for (const auto& [key, state] : cache_.entries())
            for (int m : state->members)
                if (std::find(pools.begin(), pools.end(), m) == pools.end()) pools.push_back(m);
        return pools;
    }

    void handle_reactive_tick(double t) {
        double viol = metrics_.slo_violation_fraction_since(t - s_.autoscaler.reactive_interval_s);
        double util = rm_.aggregate_utilization();
        for (const auto& item : rm_.reactive_check(t, viol, util))
            for (int i = 0; i < item.count; ++i)
                schedule_launch(item.pool, item.type_index, default_mode(), t, "reactive", false);

        for (int id : rm_.recycle_idle(t, keep_alive_pools())) {
            const Instance snapshot = rm_.instance(id);
            rm_.terminate(id, t);
            rm_.note_scale_action({t, snapshot.pool, "terminate", snapshot.type_index, 1, "idle"});
        }
    }

    void handle_sampling_tick(double t) {
        for (const auto& [key, state] : cache_.entries()) {
            ScalingResult r = dynamic_model_scaling(*state, zoo_, s_.policy);
            if (r.changed) {
                metrics_.record_point(t, "ensemble_scaling", key.str() + ":" + r.trigger,
                                      static_cast<double>(r.new_n));
                // A re-added model may have had its pool recycled away.
                for (int m : state->members)
                    if (rm_.live_count(m) == 0)
                        for (const auto& item : procure(1.0, rm_.catalog(), zoo_.profile(m)))
                            schedule_launch(m, item.type_index, default_mode(), t, "predictive",
                                            false);
            }
            metrics_.record_point(t, "ensemble_size", key.str(),
                                  static_cast<double>(state->members.size()));
        }
    }

    void handle_stats_tick(double t) {
        metrics_.record_point(t, "utilization", "all", rm_.aggregate_utilization());
        double running = 0, queued = 0;
        for (const Instance& inst : rm_.instances())
            if (inst.state == InstanceState::Running) running += 1;
        for (size_t m = 0; m < rm_.pool_count(); ++m)
            queued += static_cast<double>(rm_.pool(static_cast<int>(m)).queue.size());
        metrics_.record_point(t, "running_instances", "all", running);
        metrics_.record_point(t, "queued_sub_requests", "all", queued);
    }

    void warm_start() {
        for (size_t m = 0; m < zoo_.size(); ++m)
            for (const auto& item : procure(s_.trace.mean_rate, rm_.catalog(),
                                            zoo_.profile(static_cast<int>(m))))
                for (int i = 0; i < item.count; ++i)
                    schedule_launch(static_cast<int>(m), item.type_index, default_mode(), 0.0,
                                    "warm-start", true);
    }

    void settle_billing(double end_t, RunArtifacts& artifacts) {
        for (const Instance& inst : rm_.instances()) {
            double stop = inst.terminated_at >= 0 ? inst.terminated_at : end_t;
            long seconds = static_cast<long>(std::ceil(std::max(0.0, stop - inst.launched_at)));
            double cost = 0;
            for (long sec = 0; sec < seconds; ++sec)
                cost += market_.accrue_second(inst.type_index, inst.pricing_mode,
                                              inst.launched_at + static_cast<double>(sec));
            CostLine line;
            line.instance_id = inst.instance_id;
            line.type_name = rm_.catalog()[inst.type_index].name;
            line.pool = inst.pool;
            line.pricing_mode = inst.pricing_mode == PricingMode::Spot ? "spot" : "on-demand";
            line.launched_at = inst.launched_at;
            line.terminated_at = stop;
            line.billed_seconds = seconds;
            line.cost = cost;
            artifacts.cost_lines.push_back(line);
            artifacts.total_cost += cost;
            if (inst.pricing_mode == PricingMode::Spot)
                artifacts.spot_cost += cost;
            else
                artifacts.od_cost += cost;
        }
    }

    const Scenario& s_;
    ModelZoo zoo_;
    ClassAccuracyMatrix matrix_;
    std::unique_ptr<PredictionOracle> oracle_;
    std::vector<Query> queries_;
    ResourceManager rm_;
    SpotMarket market_;
    LoadPredictor predictor_;
    MetricsCollector metrics_;
    ModelCache cache_;
    std::unique_ptr<WeightMatrix> weights_;

    std::priority_queue<Ev, std::vector<Ev>, EvLater> pq_;
    uint64_t seq_ = 0;
    std::vector<SubRequest> subs_;
    std::vector<std::vector<uint64_t>> instance_subs_;
    std::map<uint64_t, ActiveQuery> active_;
    long arrivals_since_obs_ = 0;
    uint64_t launch_counter_ = 0;
    long lost_subs_ = 0;
};

SimResult Simulation::run() {
    const double horizon = s_.trace.kind == TraceKind::Csv && !queries_.empty()
                               ? std::max(s_.trace.duration_s, queries_.back().arrival_s)
                               : s_.trace.duration_s;
    if (s_.warm_start) warm_start();
    for (size_t i = 0; i < queries_.size(); ++i)
        push(queries_[i].arrival_s, EvKind::Arrival, i);
    push(s_.predictor.window_s, EvKind::PredictorTick);
    push(s_.autoscaler.scheduling_interval_s, EvKind::ScalingTick);
    push(s_.autoscaler.reactive_interval_s, EvKind::ReactiveTick);
    push(s_.policy.sampling_interval_s, EvKind::SamplingTick);
    push(s_.metrics.timeseries_interval_s, EvKind::StatsTick);
    bool market_active = s_.market.use_spot;
    long market_tick = 0;
    if (market_active) push(s_.market.check_interval_s, EvKind::MarketCheck);

    double now = 0;
    while (!pq_.empty()) {
        Ev ev = pq_.top();
        pq_.pop();
        now = ev.t;
        switch (ev.kind) {
            case EvKind::Arrival:
                handle_arrival(ev.payload, now);
                break;
            case EvKind::SubComplete:
                handle_sub_complete(ev.payload, now);
                break;
            case EvKind::VMReady:
                handle_vm_ready(static_cast<int>(ev.payload), now);
                break;
            case EvKind::MarketCheck:
                handle_market_check(now, ++market_tick);
                if (now + s_.market.check_interval_s <= horizon)
                    push(now + s_.market.check_interval_s, EvKind::MarketCheck);
                break;
            case EvKind::PredictorTick:
                handle_predictor_tick(now);
                if (now + s_.predictor.window_s <= horizon)
                    push(now + s_.predictor.window_s, EvKind::PredictorTick);
                break;
            case EvKind::ScalingTick:
                handle_scaling_tick(now);
                if (now + s_.autoscaler.scheduling_interval_s <= horizon)
                    push(now + s_.autoscaler.scheduling_interval_s, EvKind::ScalingTick);
                break;
            case EvKind::ReactiveTick:
                handle_reactive_tick(now);
                if (now + s_.autoscaler.reactive_interval_s <= horizon)
                    push(now + s_.autoscaler.reactive_interval_s, EvKind::ReactiveTick);
                break;
            case EvKind::SamplingTick:
                handle_sampling_tick(now);
                if (now + s_.policy.sampling_interval_s <= horizon)
                    push(now + s_.policy.sampling_interval_s, EvKind::SamplingTick);
                break;
            case EvKind::StatsTick:
                handle_stats_tick(now);
                if (now + s_.metrics.timeseries_interval_s <= horizon)
                    push(now + s_.metrics.timeseries_interval_s, EvKind::StatsTick);
                break;
        }
    }

    SimResult result;
    result.artifacts.config_echo = s_.echo();
    result.artifacts.duration_s = std::max(horizon, now);
    result.artifacts.generated_queries = static_cast<long>(queries_.size());
    settle_billing(result.artifacts.duration_s, result.artifacts);
    result.scale_log = rm_.scale_log();
    for (const ScaleAction& a : result.scale_log)
        metrics_.record_scale_action(a, rm_.catalog()[a.type_index].name);
    for (const auto& [key, state] : cache_.entries())
        result.final_ensemble_sizes[key.str()] = static_cast<int>(state->members.size());
    result.lost_sub_requests = lost_subs_;
    result.metrics = std::move(metrics_);
    return result;
}

}  // namespace

SimResult run_simulation(const Scenario& scenario) {
    scenario.validate();
    Simulation sim(scenario);
    return sim.run();
}

void write_reports(const std::string& out_dir, const SimResult& result) {
    emit_reports(out_dir, result.metrics, result.artifacts);
}

}  // namespace esim

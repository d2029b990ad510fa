#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "esim/model_zoo.hpp"

namespace esim {

struct InstanceType {
    std::string name;
    int vcpus = 0;
    int size_multiplier = 1;  // relative to the reference (xlarge) size
    double od_price_per_hour = 0;
    bool is_gpu = false;
};

// CSV with header: name,vcpus,size_mult,od_price,is_gpu
std::vector<InstanceType> load_catalog_csv(const std::string& path);

enum class PricingMode { OnDemand, Spot };
enum class InstanceState { Launching, Running, Draining, Terminated, Preempted };

struct Instance {
    int instance_id = -1;
    int type_index = -1;
    PricingMode pricing_mode = PricingMode::OnDemand;
    int pool = -1;  // model index
    InstanceState state = InstanceState::Launching;
    int slots_total = 0;
    int slots_busy = 0;
    double launched_at = 0;
    double ready_at = 0;
    double terminated_at = -1;
    double idle_since = 0;  // last time slots_busy reached 0
    double accumulated_cost = 0;
};

// P_f scales linearly with the instance size.
int packing_factor(const ModelProfile& model, const InstanceType& type);

struct ProcureItem {
    int type_index = -1;
    int count = 0;
};

// Cost-aware greedy choice: the type minimizing price per unit of packing
// capacity, ties toward smaller instances. GPU types are eligible only when
// the demand matches their packing factor.
std::vector<ProcureItem> procure(double delta_capacity, const std::vector<InstanceType>& catalog,
                                 const ModelProfile& model);

struct AutoscalerConfig {
    double scheduling_interval_s = 60.0;  // T_s
    double reactive_interval_s = 10.0;
    double idle_timeout_s = 600.0;
    double utilization_trigger = 0.8;
    double slo_violation_trigger = 0.01;
    double importance_window_s = 300.0;
    bool uniform_weights = false;  // force the uniform-scaling baseline

    void validate() const;
};

struct PoolState {
    int model_index = -1;
    std::vector<int> instances;        // instance ids, launch order
    std::deque<uint64_t> queue;        // pending sub-request ids, FIFO
    std::deque<double> served;         // dispatch timestamps, trailing window
};

enum class DispatchStatus { Assigned, Queued, Lost };

struct DispatchResult {
    DispatchStatus status = DispatchStatus::Lost;
    int instance_id = -1;
};

struct ScaleAction {
    double t = 0;
    int pool = -1;
    std::string action;  // "launch" or "terminate"
    int type_index = -1;
    int count = 0;
    std::string reason;  // predictive | reactive | idle | replacement | warm-start
};

// Per-model instance pools with best-fit dispatch, importance-weighted
// predictive scaling, a reactive safety net, and idle recycling. All methods
// run on the simulation thread.
class ResourceManager {
public:
    ResourceManager(const ModelZoo& zoo, std::vector<InstanceType> catalog,
                    AutoscalerConfig cfg);

    const std::vector<InstanceType>& catalog() const { return catalog_; }
    const AutoscalerConfig& config() const { return cfg_; }
    const std::vector<Instance>& instances() const { return instances_; }
    Instance& instance(int id) { return instances_.at(id); }
    const PoolState& pool(int model_index) const { return pools_.at(model_index); }
    size_t pool_count() const { return pools_.size(); }
    const std::vector<ScaleAction>& scale_log() const { return scale_log_; }

    // Creates the Instance record in Launching state; the caller schedules
    // the VMReady event for ready_at.
    int launch(int pool, int type_index, PricingMode mode, double t, double ready_at,
               const std::string& reason);
    void mark_ready(int instance_id, double t);
    void terminate(int instance_id, double t);
    void preempt(int instance_id, double t);

    // Best-fit: the running instance with the fewest free slots that still
    // has one. Lost when the pool has no running instance at all.
    DispatchResult dispatch(int pool, uint64_t subreq_id, double t);
    void release_slot(int instance_id, double t);
    // Assigns queued sub-requests to freed capacity; returns assignments.
    std::vector<std::pair<uint64_t, int>> drain_queue(int pool, double t);

    // Importance weights: share of sub-requests served per pool in the
    // trailing window; uniform when the window is empty or when forced.
    std::vector<double> model_weights(double t) const;

    struct PlanItem {
        int pool = -1;
        int type_index = -1;
        int count = 0;
    };
    std::vector<PlanItem> weighted_autoscale(double t, double predicted_load,
                                             double current_load) const;
    std::vector<PlanItem> reactive_check(double t, double violation_fraction,
                                         double utilization) const;
    // Instance ids to terminate; pools in keep_alive never lose their last
    // running instance.
    std::vector<int> recycle_idle(double t, const std::vector<int>& keep_alive_pools) const;

    double aggregate_utilization() const;
    int running_count(int pool) const;
    int live_count(int pool) const;  // running + launching
    void note_scale_action(const ScaleAction& a) { scale_log_.push_back(a); }

private:
    void prune_served(int pool, double t);

    const ModelZoo* zoo_;
    std::vector<InstanceType> catalog_;
    AutoscalerConfig cfg_;
    std::vector<Instance> instances_;
    std::vector<PoolState> pools_;  // one per zoo model
    std::vector<ScaleAction> scale_log_;
};

}  // namespace esim

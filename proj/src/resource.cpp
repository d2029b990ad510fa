#include "esim/resource.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace esim {

std::vector<InstanceType> load_catalog_csv(const std::string& path) {
    auto rows = read_csv(path);
    if (rows.size() < 2) throw ParseError(path + ": empty instance catalog");
    std::vector<InstanceType> catalog;
    for (size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.fields.size() != 5)
            throw ParseError(path + " line " + std::to_string(r.line_no) +
                             ": expected name,vcpus,size_mult,od_price,is_gpu");
        InstanceType t;
        t.name = r.fields[0];
        t.vcpus = static_cast<int>(parse_long(r.fields[1], "vcpus", r.line_no));
        t.size_multiplier = static_cast<int>(parse_long(r.fields[2], "size_mult", r.line_no));
        t.od_price_per_hour = parse_double(r.fields[3], "od_price", r.line_no);
        t.is_gpu = parse_long(r.fields[4], "is_gpu", r.line_no) != 0;
        if (t.vcpus < 1 || t.size_multiplier < 1 || !(t.od_price_per_hour > 0))
            throw ParseError(path + " line " + std::to_string(r.line_no) +
                             ": non-positive catalog field");
        for (const auto& prev : catalog)
            if (prev.name == t.name)
                throw ParseError(path + " line " + std::to_string(r.line_no) +
                                 ": duplicate type " + t.name);
        catalog.push_back(std::move(t));
    }
    return catalog;
}

int packing_factor(const ModelProfile& model, const InstanceType& type) {
    return model.base_packing_factor * type.size_multiplier;
}

std::vector<ProcureItem> procure(double delta_capacity, const std::vector<InstanceType>& catalog,
                                 const ModelProfile& model) {
    std::vector<ProcureItem> plan;
    if (delta_capacity <= 0) return plan;
    if (catalog.empty()) throw ConfigError("procure: empty instance catalog");

    int best = -1;
    double best_unit_cost = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < catalog.size(); ++i) {
        const auto& type = catalog[i];
        int pf = packing_factor(model, type);
        // GPU capacity is coarse-grained; only use it when the demand fills
        // a whole GPU instance.
        if (type.is_gpu && delta_capacity < pf) continue;
        double unit_cost = type.od_price_per_hour / pf;
        bool better = unit_cost < best_unit_cost - 1e-12;
        bool tie = std::abs(unit_cost - best_unit_cost) <= 1e-12;
        if (better ||
            (tie && type.size_multiplier < catalog[best].size_multiplier)) {
            best = static_cast<int>(i);
            best_unit_cost = unit_cost;
        }
    }
    if (best < 0) throw ConfigError("procure: no eligible instance type");
    int pf = packing_factor(model, catalog[best]);
    plan.push_back({best, static_cast<int>(std::ceil(delta_capacity / pf))});
    return plan;
}

void AutoscalerConfig::validate() const {
    if (!(scheduling_interval_s > 0)) throw ConfigError("autoscaler: scheduling interval <= 0");
    if (!(reactive_interval_s > 0)) throw ConfigError("autoscaler: reactive interval <= 0");
    if (idle_timeout_s < 0) throw ConfigError("autoscaler: negative idle timeout");
    if (utilization_trigger < 0 || utilization_trigger > 1)
        throw ConfigError("autoscaler: utilization trigger out of [0,1]");
    if (slo_violation_trigger < 0 || slo_violation_trigger > 1)
        throw ConfigError("autoscaler: violation trigger out of [0,1]");
    if (!(importance_window_s > 0)) throw ConfigError("autoscaler: importance window <= 0");
}

ResourceManager::ResourceManager(const ModelZoo& zoo, std::vector<InstanceType> catalog,
                                 AutoscalerConfig cfg)
    : zoo_(&zoo), catalog_(std::move(catalog)), cfg_(cfg) {
    cfg_.validate();
    if (catalog_.empty()) throw ConfigError("resource manager: empty instance catalog");
    pools_.resize(zoo.size());
    for (size_t m = 0; m < zoo.size(); ++m) pools_[m].model_index = static_cast<int>(m);
}

int ResourceManager::launch(int pool, int type_index, PricingMode mode, double t,
                            double ready_at, const std::string& reason) {
    Instance inst;
    inst.instance_id = static_cast<int>(instances_.size());
    inst.type_index = type_index;
    inst.pricing_mode = mode;
    inst.pool = pool;
    inst.state = InstanceState::Launching;
    inst.slots_total = packing_factor(zoo_->profile(pool), catalog_.at(type_index));
    inst.launched_at = t;
    inst.ready_at = ready_at;
    inst.idle_since = ready_at;
    instances_.push_back(inst);
    pools_.at(pool).instances.push_back(inst.instance_id);
    scale_log_.push_back({t, pool, "launch", type_index, 1, reason});
    return inst.instance_id;
}

void ResourceManager::mark_ready(int instance_id, double t) {
    Instance& inst = instances_.at(instance_id);
    if (inst.state != InstanceState::Launching) return;  // preempted while booting
    inst.state = InstanceState::Running;
    inst.ready_at = t;
    inst.idle_since = t;
}

void ResourceManager::terminate(int instance_id, double t) {
    Instance& inst = instances_.at(instance_id);
    if (inst.state == InstanceState::Terminated || inst.state == InstanceState::Preempted) return;
    inst.state = InstanceState::Terminated;
    inst.terminated_at = t;
}

void ResourceManager::preempt(int instance_id, double t) {
    Instance& inst = instances_.at(instance_id);
    if (inst.state == InstanceState::Terminated || inst.state == InstanceState::Preempted) return;
    inst.state = InstanceState::Preempted;
    inst.terminated_at = t;
    inst.slots_busy = 0;
}

DispatchResult ResourceManager::dispatch(int pool, uint64_t subreq_id, double t) {
    PoolState& p = pools_.at(pool);
    prune_served(pool, t);
    if (running_count(pool) == 0) return {DispatchStatus::Lost, -1};

    int best = -1, best_free = std::numeric_limits<int>::max();
    for (int id : p.instances) {
        const Instance& inst = instances_[id];
        if (inst.state != InstanceState::Running) continue;
        int free = inst.slots_total - inst.slots_busy;
        if (free >= 1 && free < best_free) {
            best = id;
            best_free = free;
        }
    }
    if (best < 0) {
        p.queue.push_back(subreq_id);
        return {DispatchStatus::Queued, -1};
    }
    instances_[best].slots_busy++;
    p.served.push_back(t);
    return {DispatchStatus::Assigned, best};
}

void ResourceManager::release_slot(int instance_id, double t) {
    Instance& inst = instances_.at(instance_id);
    if (inst.state != InstanceState::Running && inst.state != InstanceState::Draining) return;
    if (inst.slots_busy > 0) inst.slots_busy--;
    if (inst.slots_busy == 0) inst.idle_since = t;
}

std::vector<std::pair<uint64_t, int>> ResourceManager::drain_queue(int pool, double t) {
    PoolState& p = pools_.at(pool);
    std::vector<std::pair<uint64_t, int>> assigned;
    while (!p.queue.empty()) {
        int best = -1, best_free = std::numeric_limits<int>::max();
        for (int id : p.instances) {
            const Instance& inst = instances_[id];
            if (inst.state != InstanceState::Running) continue;
            int free = inst.slots_total - inst.slots_busy;
            if (free >= 1 && free < best_free) {
                best = id;
                best_free = free;
            }
        }
        if (best < 0) break;
        instances_[best].slots_busy++;
        p.served.push_back(t);
        assigned.emplace_back(p.queue.front(), best);
        p.queue.pop_front();
    }
    if (!assigned.empty()) prune_served(pool, t);
    return assigned;
}

void ResourceManager::prune_served(int pool, double t) {
    auto& served = pools_.at(pool).served;
    while (!served.empty() && served.front() < t - cfg_.importance_window_s) served.pop_front();
}

std::vector<double> ResourceManager::model_weights(double t) const {
    size_t n = pools_.size();
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    if (cfg_.uniform_weights) return w;
    double total = 0;
    std::vector<double> counts(n, 0);
    for (size_t m = 0; m < n; ++m) {
        for (double ts : pools_[m].served)
            if (ts >= t - cfg_.importance_window_s) counts[m] += 1;
        total += counts[m];
    }
    if (total <= 0) return w;  // cold start: uniform
    for (size_t m = 0; m < n; ++m) w[m] = counts[m] / total;
    return w;
}

std::vector<ResourceManager::PlanItem> ResourceManager::weighted_autoscale(
    double t, double predicted_load, double current_load) const {
    std::vector<PlanItem> plan;
    double delta = predicted_load - current_load;
    if (delta <= 0) return plan;
    std::vector<double> w = model_weights(t);
    for (size_t m = 0; m < pools_.size(); ++m) {
        double need = delta * w[m];
        if (need <= 0) continue;
        for (const auto& item : procure(need, catalog_, zoo_->profile(static_cast<int>(m))))
            plan.push_back({static_cast<int>(m), item.type_index, item.count});
    }
    return plan;
}

std::vector<ResourceManager::PlanItem> ResourceManager::reactive_check(
    double t, double violation_fraction, double utilization) const {
    (void)t;
    std::vector<PlanItem> plan;
    if (violation_fraction <= cfg_.slo_violation_trigger || utilization <= cfg_.utilization_trigger)
        return plan;
    for (size_t m = 0; m < pools_.size(); ++m) {
        size_t backlog = pools_[m].queue.size();
        if (backlog == 0) continue;
        for (const auto& item :
             procure(static_cast<double>(backlog), catalog_, zoo_->profile(static_cast<int>(m))))
            plan.push_back({static_cast<int>(m), item.type_index, item.count});
    }
    return plan;
}

std::vector<int> ResourceManager::recycle_idle(double t,
                                               const std::vector<int>& keep_alive_pools) const {
    std::vector<int> victims;
    for (size_t m = 0; m < pools_.size(); ++m) {
        const PoolState& p = pools_[m];
        if (!p.queue.empty()) continue;
        bool keep_one = std::find(keep_alive_pools.begin(), keep_alive_pools.end(),
                                  static_cast<int>(m)) != keep_alive_pools.end();
        int running = running_count(static_cast<int>(m));
        for (int id : p.instances) {
            const Instance& inst = instances_[id];
            if (inst.state != InstanceState::Running) continue;
            if (inst.slots_busy > 0) continue;
            if (t - inst.idle_since < cfg_.idle_timeout_s) continue;
            if (keep_one && running <= 1) break;  // never orphan a live ensemble's pool
            victims.push_back(id);
            running--;
        }
    }
    return victims;
}

double ResourceManager::aggregate_utilization() const {
    long busy = 0, total = 0;
    for (const Instance& inst : instances_) {
        if (inst.state != InstanceState::Running) continue;
        busy += inst.slots_busy;
        total += inst.slots_total;
    }
    if (total == 0) return 0;
    return static_cast<double>(busy) / static_cast<double>(total);
}

int ResourceManager::running_count(int pool) const {
    int n = 0;
    for (int id : pools_.at(pool).instances)
        if (instances_[id].state == InstanceState::Running) ++n;
    return n;
}

int ResourceManager::live_count(int pool) const {
    int n = 0;
    for (int id : pools_.at(pool).instances) {
        InstanceState s = instances_[id].state;
        if (s == InstanceState::Running || s == InstanceState::Launching) ++n;
    }
    return n;
}

}  // namespace esim

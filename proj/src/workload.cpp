#include "esim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace esim {

namespace {

class Rng {
public:
    explicit Rng(uint64_t seed) : state_(mix64(seed, 0x7ace5u)) {}
    uint64_t next() {
        state_ = mix64(state_);
        return state_;
    }
    double uniform() { return unit_draw(next()); }
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

private:
    uint64_t state_;
};

// Inverse-CDF draw over explicit weights; fully deterministic.
size_t draw_index(const std::vector<double>& cumulative, double u) {
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u * cumulative.back());
    if (it == cumulative.end()) return cumulative.size() - 1;
    return static_cast<size_t>(it - cumulative.begin());
}

std::vector<double> cumulate(const std::vector<double>& w) {
    std::vector<double> c(w.size());
    std::partial_sum(w.begin(), w.end(), c.begin());
    return c;
}

}  // namespace

void TraceConfig::validate() const {
    if (kind == TraceKind::Csv) return;
    if (!(mean_rate > 0)) throw ConfigError("trace: mean_rate must be > 0");
    if (!(duration_s > 0)) throw ConfigError("trace: duration must be > 0");
    if (amplitude < 0 || amplitude >= 1) throw ConfigError("trace: amplitude must be in [0,1)");
    if (kind == TraceKind::Bursty &&
        (burst_multiplier < 1 || burst_duration_s <= 0 || burst_interarrival_s <= 0))
        throw ConfigError("trace: bad burst parameters");
    if (num_classes < 1) throw ConfigError("trace: num_classes must be >= 1");
    if (!class_popularity.empty() &&
        static_cast<int>(class_popularity.size()) != num_classes)
        throw ConfigError("trace: class_popularity size != num_classes");
    if (constraint_mix.empty()) throw ConfigError("trace: empty constraint mix");
    double sum = 0;
    for (const auto& e : constraint_mix) {
        e.constraint.validate();
        if (e.probability < 0) throw ConfigError("trace: negative mix probability");
        sum += e.probability;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw ConfigError("trace: constraint mix probabilities sum to " + std::to_string(sum));
}

double true_rate(const TraceConfig& config, double t) {
    if (config.kind == TraceKind::Diurnal)
        return config.mean_rate *
               (1.0 + config.amplitude * std::sin(2.0 * M_PI * t / config.period_s));
    return config.mean_rate;
}

std::vector<Query> generate_trace(const TraceConfig& config) {
    config.validate();
    if (config.kind == TraceKind::Csv) return load_trace_csv(config.csv_path);

    Rng rng(config.seed);

    // Burst ON/OFF switch times, precomputed for the whole horizon.
    std::vector<double> switches;  // state flips at each time; starts OFF
    double burst_base = config.mean_rate;
    if (config.kind == TraceKind::Bursty) {
        double on_frac = config.burst_duration_s /
                         (config.burst_duration_s + config.burst_interarrival_s);
        burst_base = config.mean_rate /
                     (1.0 - on_frac + on_frac * config.burst_multiplier);
        double t = 0;
        bool on = false;
        while (t < config.duration_s) {
            t += rng.exponential(1.0 / (on ? config.burst_duration_s
                                           : config.burst_interarrival_s));
            switches.push_back(t);
            on = !on;
        }
    }
    auto instantaneous_rate = [&](double t) {
        if (config.kind == TraceKind::Diurnal) return true_rate(config, t);
        size_t flips = static_cast<size_t>(
            std::upper_bound(switches.begin(), switches.end(), t) - switches.begin());
        bool on = flips % 2 == 1;
        return on ? burst_base * config.burst_multiplier : burst_base;
    };
    const double rate_max = config.kind == TraceKind::Diurnal
                                ? config.mean_rate * (1.0 + config.amplitude)
                                : burst_base * config.burst_multiplier;

    std::vector<double> class_cum =
        cumulate(config.class_popularity.empty()
                     ? std::vector<double>(config.num_classes, 1.0)
                     : config.class_popularity);
    std::vector<double> mix_weights;
    for (const auto& e : config.constraint_mix) mix_weights.push_back(e.probability);
    std::vector<double> mix_cum = cumulate(mix_weights);

    // Thinning of a homogeneous Poisson process at rate_max.
    std::vector<Query> queries;
    queries.reserve(static_cast<size_t>(config.mean_rate * config.duration_s * 1.1));
    double t = 0;
    uint64_t qid = 0;
    while (true) {
        t += rng.exponential(rate_max);
        if (t >= config.duration_s) break;
        if (rng.uniform() * rate_max > instantaneous_rate(t)) continue;
        Query q;
        q.query_id = qid++;
        q.arrival_s = t;
        q.true_class = static_cast<int>(draw_index(class_cum, rng.uniform()));
        q.constraint = config.constraint_mix[draw_index(mix_cum, rng.uniform())].constraint;
        queries.push_back(q);
    }
    return queries;
}

std::vector<Query> load_trace_csv(const std::string& path) {
    auto rows = read_csv(path);
    if (rows.empty()) throw ParseError(path + ": empty trace file");
    std::vector<Query> queries;
    double last_t = -1;
    for (size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.fields.size() != 5)
            throw ParseError(path + " line " + std::to_string(r.line_no) +
                             ": expected arrival_s,true_class,lat_ms,acc,objective");
        Query q;
        q.query_id = queries.size();
        q.arrival_s = parse_double(r.fields[0], "arrival_s", r.line_no);
        q.true_class = static_cast<int>(parse_long(r.fields[1], "true_class", r.line_no));
        q.constraint.latency_target_ms = parse_double(r.fields[2], "lat_ms", r.line_no);
        q.constraint.accuracy_target = parse_double(r.fields[3], "acc", r.line_no);
        const std::string& obj = r.fields[4];
        if (obj == "accuracy-first" || obj == "accuracy")
            q.constraint.primary_objective = Objective::AccuracyFirst;
        else if (obj == "latency-first" || obj == "latency")
            q.constraint.primary_objective = Objective::LatencyFirst;
        else
            throw ParseError(path + " line " + std::to_string(r.line_no) +
                             ": unknown objective '" + obj + "'");
        if (q.true_class < 0)
            throw ParseError(path + " line " + std::to_string(r.line_no) + ": negative class");
        if (!(q.constraint.accuracy_target > 0 && q.constraint.accuracy_target < 1))
            throw ParseError(path + " line " + std::to_string(r.line_no) +
                             ": accuracy out of (0,1)");
        if (!(q.constraint.latency_target_ms > 0))
            throw ParseError(path + " line " + std::to_string(r.line_no) +
                             ": non-positive latency target");
        if (q.arrival_s < last_t)
            throw ParseError(path + " line " + std::to_string(r.line_no) +
                             ": arrival time regressed");
        last_t = q.arrival_s;
        queries.push_back(q);
    }
    return queries;
}

void write_trace_csv(std::ostream& out, const std::vector<Query>& queries) {
    out << "arrival_s,true_class,lat_ms,acc,objective\n";
    char buf[160];
    for (const auto& q : queries) {
        std::snprintf(buf, sizeof(buf), "%.6f,%d,%.3f,%.4f,%s\n", q.arrival_s, q.true_class,
                      q.constraint.latency_target_ms, q.constraint.accuracy_target,
                      q.constraint.primary_objective == Objective::AccuracyFirst
                          ? "accuracy-first"
                          : "latency-first");
        out << buf;
    }
}

}  // namespace esim

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "esim/sim.hpp"
#include "esim/validate.hpp"

namespace {

struct Overrides {
    std::optional<uint64_t> seed;
    std::optional<double> duration_s;
    std::optional<std::string> policy;
    std::optional<double> failure_prob;
    std::optional<double> bid_fraction;
    std::optional<double> sampling_interval_s;
};

void apply(esim::Scenario& s, const Overrides& o) {
    if (o.seed) {
        s.seed = *o.seed;
        s.trace.seed = *o.seed;
        s.market.seed = *o.seed;
    }
    if (o.duration_s) s.trace.duration_s = *o.duration_s;
    if (o.policy) {
        s.policy.policy = esim::policy_from_name(*o.policy);
        s.policy.uniform_voting = s.policy.policy == esim::SelectionPolicy::FullStatic;
    }
    if (o.failure_prob) {
        s.market.failure_prob = *o.failure_prob;
        if (*o.failure_prob > 0) s.market.use_spot = true;
    }
    if (o.bid_fraction) s.market.bid_fraction = *o.bid_fraction;
    if (o.sampling_interval_s) s.policy.sampling_interval_s = *o.sampling_interval_s;
    s.validate();
}

void add_override_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "Master RNG seed");
    cmd->add_option("--duration", o.duration_s, "Trace duration in seconds");
    cmd->add_option("--policy", o.policy,
                    "single-best | full-static | drop-one | cocktail-dynamic");
    cmd->add_option("--failure-prob", o.failure_prob,
                    "Per-check spot capacity failure probability");
    cmd->add_option("--bid-fraction", o.bid_fraction, "Spot bid as a fraction of on-demand");
    cmd->add_option("--sampling-interval", o.sampling_interval_s,
                    "Ensemble sampling interval in seconds");
}

void print_run_summary(const esim::SimResult& r, const std::string& name, bool as_json,
                       std::ostream& out) {
    if (as_json) {
        nlohmann::json j;
        j["scenario"] = name;
        j["completed_queries"] = r.metrics.total_queries();
        j["failed_queries"] = r.metrics.failed_queries();
        j["overall_accuracy"] = r.metrics.overall_accuracy();
        j["mean_ensemble_size"] = r.metrics.mean_ensemble_size();
        j["slo_violation_fraction"] = r.metrics.slo_violation_fraction();
        j["p99_latency_ms"] = r.metrics.latency_percentiles().p99;
        j["total_cost_usd"] = r.artifacts.total_cost;
        j["lost_sub_requests"] = r.lost_sub_requests;
        out << j.dump(2) << "\n";
        return;
    }
    auto p = r.metrics.latency_percentiles();
    out << name << ": " << r.metrics.total_queries() << " queries, accuracy "
        << r.metrics.overall_accuracy() << ", p50/p99 latency " << p.p50 << "/" << p.p99
        << " ms, mean ensemble " << r.metrics.mean_ensemble_size() << ", failed "
        << r.metrics.failed_queries() << ", cost $" << r.artifacts.total_cost << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trace-driven simulator for ensemble model serving on transient cloud capacity"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir, trace_out, policies_csv = "single-best,full-static,cocktail-dynamic";
    bool as_json = false;
    Overrides overrides;
    esim::ValidateOptions vopt;
    std::vector<double> est_accs;
    std::string est_zoo;
    double est_latency = 0;

    auto* run = app.add_subcommand("run", "Run one scenario and write reports");
    run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    run->add_option("--out-dir", out_dir, "Report output directory");
    run->add_flag("--json", as_json, "Print the run summary as JSON");
    add_override_flags(run, overrides);

    auto* compare = app.add_subcommand("compare", "Run one scenario under several policies");
    compare->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    compare->add_option("--policies", policies_csv, "Comma-separated policy list");
    compare->add_option("--out-dir", out_dir, "Write per-policy reports under this directory");
    compare->add_flag("--json", as_json, "Print the comparison as JSON");
    add_override_flags(compare, overrides);

    auto* validate = app.add_subcommand("validate", "Run the built-in consistency checks");
    validate->add_flag("--quick", vopt.quick, "Skip the end-to-end smoke checks");
    validate->add_flag("--perturb", vopt.perturb,
                       "Negative control: inject an error, checks must fail");
    validate->add_option("--data-dir", vopt.data_dir, "Directory with the bundled CSV data");

    auto* estimate = app.add_subcommand("estimate", "Majority-accuracy estimate for an ensemble");
    estimate->add_option("--acc", est_accs, "Member accuracies in (0,1]");
    estimate->add_option("--zoo", est_zoo, "Model zoo CSV; selects all models under the target");
    estimate->add_option("--latency-target", est_latency, "Latency target in ms (with --zoo)");
    estimate->add_flag("--json", as_json, "Print as JSON");

    auto* emit = app.add_subcommand("emit-trace", "Generate and write the scenario's query trace");
    emit->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    emit->add_option("--out", trace_out, "Output CSV path")->required();
    emit->add_option("--seed", overrides.seed, "Master RNG seed");
    emit->add_option("--duration", overrides.duration_s, "Trace duration in seconds");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            esim::Scenario s = esim::load_scenario(scenario_path);
            apply(s, overrides);
            esim::SimResult r = esim::run_simulation(s);
            if (!out_dir.empty()) esim::write_reports(out_dir, r);
            print_run_summary(r, s.name, as_json, std::cout);
        } else if (compare->parsed()) {
            esim::Scenario base = esim::load_scenario(scenario_path);
            apply(base, overrides);
            std::stringstream names(policies_csv);
            std::string token;
            nlohmann::json rows = nlohmann::json::array();
            while (std::getline(names, token, ',')) {
                esim::Scenario s = base;
                s.policy.policy = esim::policy_from_name(token);
                s.policy.uniform_voting =
                    s.policy.policy == esim::SelectionPolicy::FullStatic;
                esim::SimResult r = esim::run_simulation(s);
                if (!out_dir.empty()) esim::write_reports(out_dir + "/" + token, r);
                if (as_json) {
                    nlohmann::json j;
                    j["policy"] = token;
                    j["overall_accuracy"] = r.metrics.overall_accuracy();
                    j["mean_ensemble_size"] = r.metrics.mean_ensemble_size();
                    j["failed_queries"] = r.metrics.failed_queries();
                    j["total_cost_usd"] = r.artifacts.total_cost;
                    rows.push_back(j);
                } else {
                    print_run_summary(r, base.name + "/" + token, false, std::cout);
                }
            }
            if (as_json) std::cout << rows.dump(2) << "\n";
        } else if (validate->parsed()) {
            bool ok = esim::run_validation(vopt, std::cout);
            if (vopt.perturb) return ok ? 3 : 0;  // checks must be able to fail
            return ok ? 0 : 3;
        } else if (estimate->parsed()) {
            std::vector<double> accs = est_accs;
            if (!est_zoo.empty()) {
                esim::ModelZoo zoo = esim::ModelZoo::from_csv(est_zoo);
                esim::Constraint c{est_latency, 0.5, esim::Objective::AccuracyFirst};
                for (int m : esim::full_ensemble(zoo, c))
                    accs.push_back(zoo.profile(m).top1_accuracy);
            }
            double est = esim::estimate_ensemble_accuracy(accs);
            if (as_json) {
                nlohmann::json j;
                j["members"] = accs.size();
                j["majority_accuracy"] = est;
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << "members=" << accs.size() << " majority_accuracy=" << est << "\n";
            }
        } else if (emit->parsed()) {
            esim::Scenario s = esim::load_scenario(scenario_path);
            apply(s, overrides);
            auto queries = esim::generate_trace(s.trace);
            std::ofstream out(trace_out, std::ios::binary);
            if (!out) throw esim::ConfigError("cannot open output file: " + trace_out);
            esim::write_trace_csv(out, queries);
            std::cout << "wrote " << queries.size() << " queries to " << trace_out << "\n";
        }
    } catch (const esim::SelectionInfeasible& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const esim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const esim::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

// procache: validate scenarios, solve placements, run sweeps, plot results.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "procache/delay.hpp"
#include "procache/errors.hpp"
#include "procache/experiment.hpp"
#include "procache/solvers.hpp"

namespace {

using namespace procache;

enum Exit { ok = 0, invalid = 1, all_skipped = 2, io_failure = 3 };

Scenario scenario_for(const ScenarioConfig& config, const std::optional<std::uint64_t>& seed) {
    return seed ? config.realize(*seed) : config.scenario;
}

int cmd_validate(const std::string& scenario_path, const std::optional<std::uint64_t>& seed) {
    const auto config = load_scenario_config(scenario_path);
    const auto sc = scenario_for(config, seed);
    const auto bad = validate_scenario(sc);
    if (!bad.empty()) throw ValidationError(bad);
    std::cout << "ok: " << (config.name.empty() ? scenario_path : config.name) << ", " << sc.rsus.size()
              << " RSUs, " << sc.vehicles.size() << " vehicles, " << sc.library.item_count << " items\n";
    return ok;
}

int cmd_solve(const std::string& scenario_path, const std::string& scheme_name,
              const std::optional<double>& gamma, const std::optional<std::uint64_t>& seed,
              const std::string& out_path) {
    const auto config = load_scenario_config(scenario_path);
    auto sc = scenario_for(config, seed);
    if (gamma) sc.cost_factor = *gamma;
    const Scheme scheme = parse_scheme(scheme_name);

    SolveResult result;
    switch (scheme) {
        case Scheme::reactive:
            result.policies.assign(sc.rsus.size(), CachePolicy(sc.library.item_count));
            result.objective_value = chain_objective(sc, result.policies);
            break;
        case Scheme::noncoop_greedy: result = greedy_noncoop(sc); break;
        case Scheme::noncoop_optimal: result = solve_exhaustive_noncoop(sc); break;
        case Scheme::coop_greedy: result = greedy_coop(sc); break;
        case Scheme::coop_optimal: result = solve_exhaustive_coop(sc); break;
    }

    const auto visitors = cooperative_visitors(sc, result.policies);
    nlohmann::ordered_json doc;
    doc["scheme"] = std::string(to_string(scheme));
    doc["gamma"] = sc.cost_factor;
    doc["objective"] = result.objective_value;
    doc["evaluations"] = result.evaluations;
    auto rsus = nlohmann::ordered_json::array();
    for (std::size_t s = 0; s < sc.rsus.size(); ++s) {
        const auto report = evaluate_delays(sc.rsus[s], sc.library, result.policies[s], visitors[s]);
        nlohmann::ordered_json r;
        r["id"] = sc.rsus[s].id;
        r["cached_items"] = result.policies[s].cached_items();
        r["reactive_per_file_delay"] = per_file_delay(report.reactive_delay, report.reactive_file_cap_sum);
        r["proactive_per_file_delay"] = per_file_delay(report.proactive_delay, report.proactive_file_cap_sum);
        if (report.caching_gain) r["caching_gain"] = *report.caching_gain;
        rsus.push_back(std::move(r));
    }
    doc["rsus"] = std::move(rsus);
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path);
        if (!(out << text)) throw IoError("cannot write '" + out_path + "'");
    }
    return ok;
}

Metric parse_metric(const std::string& name) {
    if (name == "per_file_delay") return Metric::per_file_delay;
    if (name == "objective") return Metric::objective;
    throw ConfigError("unknown metric '" + name + "' (expected per_file_delay or objective)");
}

int cmd_sweep(const std::string& scenario_path, const std::string& spec_path, const std::string& out_path,
              const std::string& plot_path, const std::string& metric_name,
              const std::optional<std::uint64_t>& seed, unsigned threads) {
    const auto config = load_scenario_config(scenario_path);
    auto spec = load_sweep_spec(spec_path);
    if (seed) spec.base_seed = *seed;
    const Metric metric = parse_metric(metric_name);

    const auto result = run_sweep(config, spec, threads);
    for (const auto& c : result.skipped) {
        std::cerr << "skipped " << to_string(c.scheme) << " size=" << c.cache_size << " gamma=" << c.gamma
                  << " rep=" << c.replication << ": " << c.reason << '\n';
    }
    if (result.rows.empty()) {
        std::cerr << "every cell was skipped\n";
        return all_skipped;
    }
    emit_csv(result.rows, out_path);
    {
        const std::string meta_path = out_path + ".meta.json";
        std::ofstream meta(meta_path);
        if (!(meta << sweep_metadata(config, spec, result))) throw IoError("cannot write '" + meta_path + "'");
    }
    if (!plot_path.empty()) emit_plot(result.rows, plot_path, metric, config.name);
    std::cout << result.rows.size() << " rows written to " << out_path;
    if (!result.skipped.empty()) std::cout << " (" << result.skipped.size() << " cells skipped)";
    std::cout << '\n';
    return ok;
}

int cmd_plot(const std::string& in_path, const std::string& out_path, const std::string& metric_name,
             const std::string& title) {
    const auto rows = read_csv(in_path);
    emit_plot(rows, out_path, parse_metric(metric_name), title);
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Proactive RSU caching: scenario checks, placement solvers and sweeps"};
    app.require_subcommand(1);

    std::string scenario_path, spec_path, out_path, plot_path, in_path, title;
    std::string scheme_name = "coop_greedy", metric_name = "per_file_delay";
    std::optional<std::uint64_t> seed;
    std::optional<double> gamma;
    unsigned threads = 0;

    auto* validate = app.add_subcommand("validate", "Check a scenario file");
    validate->add_option("-s,--scenario", scenario_path, "Scenario JSON")->required();
    validate->add_option("--seed", seed, "Redraw vehicles with this seed");

    auto* solve = app.add_subcommand("solve", "Compute a placement for one scenario");
    solve->add_option("-s,--scenario", scenario_path, "Scenario JSON")->required();
    solve->add_option("--scheme", scheme_name,
                      "reactive, noncoop_greedy, noncoop_optimal, coop_greedy or coop_optimal")
        ->capture_default_str();
    solve->add_option("--gamma", gamma, "Cost per cached item (overrides the scenario)");
    solve->add_option("--seed", seed, "Redraw vehicles with this seed");
    solve->add_option("-o,--out", out_path, "Write the result JSON here instead of stdout");

    auto* sweep = app.add_subcommand("sweep", "Run a cache-size / gamma sweep");
    sweep->add_option("-s,--scenario", scenario_path, "Scenario JSON")->required();
    sweep->add_option("-x,--spec", spec_path, "Sweep spec JSON")->required();
    sweep->add_option("-o,--out", out_path, "Output CSV")->required();
    sweep->add_option("--plot", plot_path, "Also write an SVG plot");
    sweep->add_option("--metric", metric_name, "Plotted metric: per_file_delay or objective")
        ->capture_default_str();
    sweep->add_option("--seed", seed, "Override the spec's base seed");
    sweep->add_option("-j,--threads", threads, "Worker threads (0 = all cores)");

    auto* plot = app.add_subcommand("plot", "Render a sweep CSV as SVG");
    plot->add_option("-i,--in", in_path, "Sweep CSV")->required();
    plot->add_option("-o,--out", out_path, "Output SVG")->required();
    plot->add_option("--metric", metric_name, "per_file_delay or objective")->capture_default_str();
    plot->add_option("--title", title, "Plot title");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) return cmd_validate(scenario_path, seed);
        if (*solve) return cmd_solve(scenario_path, scheme_name, gamma, seed, out_path);
        if (*sweep) return cmd_sweep(scenario_path, spec_path, out_path, plot_path, metric_name, seed, threads);
        if (*plot) return cmd_plot(in_path, out_path, metric_name, title);
    } catch (const ValidationError& e) {
        std::cerr << "invalid: " << e.what() << '\n';
        for (const auto& v : e.violations()) std::cerr << "  - " << v << '\n';
        return invalid;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return io_failure;
    } catch (const CapacityError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return all_skipped;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return invalid;
    }
    return ok;
}

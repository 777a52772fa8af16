#include <algorithm>
#include <future>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include "procache/delay.hpp"
#include "procache/errors.hpp"
#include "procache/experiment.hpp"
#include "procache/solvers.hpp"
#include "procache/summation.hpp"

namespace procache {

double percentage_gain(double reactive_per_file, double proactive_per_file) {
    if (!(reactive_per_file > 0.0)) {
        throw UndefinedGainError("percentage gain needs a positive reactive per-file delay");
    }
    return (reactive_per_file - proactive_per_file) / reactive_per_file * 100.0;
}

namespace {

struct CellKey {
    std::size_t scheme;
    std::size_t gamma_index;
    std::size_t size_index;
    std::size_t replication;
    auto operator<=>(const CellKey&) const = default;
};

// Per-RSU per-file delays of a placement under the cooperative information model.
std::vector<double> chain_per_file(const Scenario& sc, std::span<const CachePolicy> policies,
                                   bool reactive) {
    const auto visitors = cooperative_visitors(sc, policies);
    std::vector<double> out(sc.rsus.size());
    for (std::size_t s = 0; s < sc.rsus.size(); ++s) {
        const auto& rsu = sc.rsus[s];
        if (reactive) {
            out[s] = per_file_delay(reactive_delay(rsu, sc.library, visitors[s]),
                                    reactive_cap_sum(rsu, sc.library, visitors[s]));
        } else {
            out[s] = per_file_delay(proactive_delay(rsu, sc.library, policies[s], visitors[s]),
                                    proactive_cap_sum(rsu, sc.library, policies[s], visitors[s]));
        }
    }
    return out;
}

double mean(std::span<const double> xs) {
    CompensatedSum s;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s.value() / static_cast<double>(xs.size());
}

struct Evaluated {
    double per_file = 0.0;
    double gain = 0.0;
};

Evaluated evaluate_policies(const Scenario& sc, std::span<const CachePolicy> policies,
                            std::span<const double> reactive_per_file) {
    const auto per_file = chain_per_file(sc, policies, false);
    std::vector<double> gains(per_file.size());
    for (std::size_t s = 0; s < per_file.size(); ++s) gains[s] = reactive_per_file[s] - per_file[s];
    return {mean(per_file), mean(gains)};
}

std::size_t total_cached(std::span<const CachePolicy> policies) {
    std::size_t n = 0;
    for (const auto& p : policies) n += p.cached_count();
    return n;
}

Scenario with_capacity(Scenario sc, std::size_t files) {
    for (auto& rsu : sc.rsus) rsu.cache_capacity = static_cast<double>(files) * sc.library.item_size;
    return sc;
}

struct ReplicationOutput {
    std::vector<std::pair<CellKey, SweepRow>> rows;
    std::vector<std::pair<CellKey, SkippedCell>> skipped;
};

ReplicationOutput run_replication(const ScenarioConfig& config, const SweepSpec& spec, std::size_t r) {
    ReplicationOutput out;
    const Scenario base = config.realize(spec.base_seed + r);
    const auto& lib = base.library;
    const std::size_t S = base.rsus.size();
    const std::size_t max_size = *std::max_element(spec.cache_sizes.begin(), spec.cache_sizes.end());

    const std::vector<CachePolicy> empty(S, CachePolicy(lib.item_count));
    const auto reactive_pf = chain_per_file(base, empty, true);

    auto has = [&](Scheme s) {
        return std::find(spec.schemes.begin(), spec.schemes.end(), s) != spec.schemes.end();
    };

    // Exhaustive tables do not depend on capacity or gamma; build once per replication.
    std::vector<NoncoopSearchTable> noncoop_tables;
    std::string noncoop_skip;
    if (has(Scheme::noncoop_optimal)) {
        if (lib.item_count > kEnumerationGuard) {
            std::ostringstream msg;
            msg << "library of " << lib.item_count << " items exceeds the exhaustive guard of "
                << kEnumerationGuard;
            noncoop_skip = msg.str();
        } else {
            for (std::size_t s = 0; s < S; ++s) {
                noncoop_tables.emplace_back(base.rsus[s], lib, visitors_at(base, s), max_size);
            }
        }
    }
    std::unique_ptr<CoopSearchTable> coop_table;
    std::string coop_optimal_skip;
    if (has(Scheme::coop_optimal)) {
        if (S != 2) {
            coop_optimal_skip = "joint cooperative search needs exactly two RSUs";
        } else if (lib.item_count > kJointEnumerationGuard) {
            std::ostringstream msg;
            msg << "library of " << lib.item_count << " items exceeds the joint-search guard of "
                << kJointEnumerationGuard;
            coop_optimal_skip = msg.str();
        } else {
            coop_table = std::make_unique<CoopSearchTable>(with_capacity(base, max_size), max_size);
        }
    }
    const std::string coop_greedy_skip = S < 2 ? "cooperative greedy needs at least two RSUs" : "";

    for (std::size_t si = 0; si < spec.cache_sizes.size(); ++si) {
        const std::size_t size = spec.cache_sizes[si];
        Scenario sc = with_capacity(base, size);

        // Greedy placements do not depend on gamma.
        std::vector<CachePolicy> noncoop_greedy_policies;
        std::vector<CachePolicy> coop_greedy_policies;
        if (has(Scheme::noncoop_greedy)) noncoop_greedy_policies = greedy_noncoop(sc).policies;
        if (has(Scheme::coop_greedy) && coop_greedy_skip.empty()) {
            coop_greedy_policies = greedy_coop(sc).policies;
        }

        for (std::size_t gi = 0; gi < spec.gammas.size(); ++gi) {
            sc.cost_factor = spec.gammas[gi];

            for (Scheme scheme : spec.schemes) {
                const CellKey key{static_cast<std::size_t>(scheme), gi, si, r};
                SweepRow row;
                row.scheme = scheme;
                row.cache_size = size;
                row.gamma = sc.cost_factor;
                row.replication = r;

                auto skip = [&](const std::string& reason) {
                    out.skipped.push_back({key, {scheme, size, sc.cost_factor, r, reason}});
                };

                std::vector<CachePolicy> policies;
                switch (scheme) {
                    case Scheme::reactive:
                        row.per_file_delay = mean(reactive_pf);
                        row.caching_gain = 0.0;
                        {
                            CompensatedSum total;
                            for (double x : reactive_pf) total += x;
                            row.objective = total.value();
                        }
                        row.cached_count = 0;
                        out.rows.push_back({key, row});
                        continue;
                    case Scheme::noncoop_greedy:
                        policies = noncoop_greedy_policies;
                        break;
                    case Scheme::noncoop_optimal:
                        if (!noncoop_skip.empty()) {
                            skip(noncoop_skip);
                            continue;
                        }
                        for (std::size_t s = 0; s < S; ++s) {
                            const auto choice = noncoop_tables[s].select(size, sc.cost_factor);
                            policies.push_back(CachePolicy::from_mask(lib.item_count, choice.mask));
                        }
                        break;
                    case Scheme::coop_greedy:
                        if (!coop_greedy_skip.empty()) {
                            skip(coop_greedy_skip);
                            continue;
                        }
                        policies = coop_greedy_policies;
                        break;
                    case Scheme::coop_optimal: {
                        if (!coop_optimal_skip.empty()) {
                            skip(coop_optimal_skip);
                            continue;
                        }
                        const auto choice = coop_table->select(size, size, sc.cost_factor);
                        policies.push_back(CachePolicy::from_mask(lib.item_count, choice.upstream_mask));
                        policies.push_back(CachePolicy::from_mask(lib.item_count, choice.downstream_mask));
                        break;
                    }
                }

                const bool cooperative = scheme == Scheme::coop_greedy || scheme == Scheme::coop_optimal;
                if (cooperative) {
                    row.objective = chain_objective(sc, policies);
                } else {
                    CompensatedSum total;
                    for (std::size_t s = 0; s < S; ++s) total += objective_noncoop(sc, s, policies[s]);
                    row.objective = total.value();
                }
                const auto ev = evaluate_policies(sc, policies, reactive_pf);
                row.per_file_delay = ev.per_file;
                row.caching_gain = ev.gain;
                row.cached_count = total_cached(policies);
                out.rows.push_back({key, row});
            }
        }
    }
    return out;
}

}  // namespace

SweepResult run_sweep(const ScenarioConfig& config, const SweepSpec& spec, unsigned threads) {
    auto bad = spec.violations();
    if (!bad.empty()) throw ValidationError(std::move(bad));
    auto scenario_bad = validate_scenario(config.scenario);
    if (!scenario_bad.empty()) throw ValidationError(std::move(scenario_bad));

    if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
    const std::size_t R = spec.replications;

    std::vector<ReplicationOutput> outputs(R);
    if (threads <= 1 || R == 1) {
        for (std::size_t r = 0; r < R; ++r) outputs[r] = run_replication(config, spec, r);
    } else {
        // Replications are independent; each draws from its own seed.
        std::size_t next = 0;
        while (next < R) {
            std::vector<std::future<ReplicationOutput>> batch;
            const std::size_t stop = std::min(R, next + threads);
            for (std::size_t r = next; r < stop; ++r) {
                batch.push_back(std::async(std::launch::async,
                                           [&config, &spec, r] { return run_replication(config, spec, r); }));
            }
            for (std::size_t r = next; r < stop; ++r) outputs[r] = batch[r - next].get();
            next = stop;
        }
    }

    std::vector<std::pair<CellKey, SweepRow>> rows;
    std::vector<std::pair<CellKey, SkippedCell>> skipped;
    for (auto& o : outputs) {
        rows.insert(rows.end(), std::make_move_iterator(o.rows.begin()), std::make_move_iterator(o.rows.end()));
        skipped.insert(skipped.end(), std::make_move_iterator(o.skipped.begin()),
                       std::make_move_iterator(o.skipped.end()));
    }
    // Canonical order: scheme, gamma, cache size (both in spec order), replication.
    auto by_key = [](const auto& a, const auto& b) { return a.first < b.first; };
    std::stable_sort(rows.begin(), rows.end(), by_key);
    std::stable_sort(skipped.begin(), skipped.end(), by_key);

    SweepResult result;
    for (auto& [_, row] : rows) result.rows.push_back(std::move(row));
    for (auto& [_, cell] : skipped) result.skipped.push_back(std::move(cell));
    return result;
}

}  // namespace procache

#include "procache/solvers.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>
#include <sstream>

#include "procache/errors.hpp"
#include "procache/summation.hpp"

namespace procache {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_rsu_index(const Scenario& scenario, std::size_t rsu_index) {
    if (rsu_index >= scenario.rsus.size()) {
        std::ostringstream msg;
        msg << "RSU index " << rsu_index << " out of range (scenario has " << scenario.rsus.size()
            << " RSUs)";
        throw ParameterError(msg.str());
    }
}

std::uint64_t mask_end(std::size_t items) { return std::uint64_t{1} << items; }

}  // namespace

std::string to_string(Mode mode) {
    return mode == Mode::cooperative ? "cooperative" : "non_cooperative";
}

// ---------------------------------------------------------------------------
// Greedy scoring

std::vector<double> contact_weights(std::span<const Visitor> visitors) {
    CompensatedSum total;
    for (const auto& v : visitors) total += v.contact_time;
    const double sum = total.value();
    std::vector<double> lambda(visitors.size(), 0.0);
    if (sum <= 0.0) return lambda;
    for (std::size_t i = 0; i < visitors.size(); ++i) lambda[i] = visitors[i].contact_time / sum;
    return lambda;
}

std::vector<ItemScore> item_scores(std::span<const Visitor> visitors, std::size_t item_count) {
    const auto lambda = contact_weights(visitors);
    std::vector<ItemScore> scores(item_count);
    for (std::size_t m = 0; m < item_count; ++m) {
        double pi = 0.0;
        for (std::size_t i = 0; i < visitors.size(); ++i) {
            pi += visitors[i].presence * visitors[i].demand.at(m) * lambda[i];
        }
        scores[m] = {m, pi};
    }
    std::stable_sort(scores.begin(), scores.end(),
                     [](const ItemScore& a, const ItemScore& b) { return a.score > b.score; });
    return scores;
}

std::size_t greedy_item_limit(const RsuConfig& rsu, const Library& library,
                              std::span<const Visitor> visitors) {
    if (visitors.empty()) return 0;
    CompensatedSum total;
    for (const auto& v : visitors) total += v.contact_time;
    const double mean_contact = total.value() / static_cast<double>(visitors.size());
    const long throughput = floor_count(rsu.service_rate * mean_contact / library.item_size);
    const std::size_t by_throughput = throughput > 0 ? static_cast<std::size_t>(throughput) : 0;
    return std::min({rsu.capacity_items(library), by_throughput, library.item_count});
}

CachePolicy greedy_placement(const RsuConfig& rsu, const Library& library,
                             std::span<const Visitor> visitors) {
    CachePolicy policy(library.item_count);
    const std::size_t limit = greedy_item_limit(rsu, library, visitors);
    const auto order = item_scores(visitors, library.item_count);
    for (std::size_t i = 0; i < limit; ++i) policy.set(order[i].item);
    return policy;
}

// ---------------------------------------------------------------------------
// Non-cooperative

double objective_value(const RsuConfig& rsu, const Library& library, std::span<const Visitor> visitors,
                       const CachePolicy& policy, double cost_factor) {
    const double delay = proactive_delay(rsu, library, policy, visitors);
    const long caps = proactive_cap_sum(rsu, library, policy, visitors);
    return per_file_delay(delay, caps) + cost_factor * static_cast<double>(policy.cached_count());
}

double objective_noncoop(const Scenario& scenario, std::size_t rsu_index, const CachePolicy& policy) {
    check_rsu_index(scenario, rsu_index);
    const auto visitors = visitors_at(scenario, rsu_index);
    return objective_value(scenario.rsus[rsu_index], scenario.library, visitors, policy,
                           scenario.cost_factor);
}

NoncoopSearchTable::NoncoopSearchTable(const RsuConfig& rsu, const Library& library,
                                       std::span<const Visitor> visitors, std::size_t max_cached) {
    const std::size_t M = library.item_count;
    if (M > kEnumerationGuard) {
        std::ostringstream msg;
        msg << "exhaustive placement search is limited to " << kEnumerationGuard
            << " items (library has " << M << ")";
        throw CapacityError(msg.str());
    }
    max_cached = std::min(max_cached, M);
    const PlacementEvaluator evaluator(rsu, library, visitors, max_cached);

    best_value_.assign(max_cached + 1, kInf);
    best_mask_.assign(max_cached + 1, 0);
    const std::uint64_t end = mask_end(M);
    for (std::uint64_t mask = 0; mask < end; ++mask) {
        const auto n = static_cast<std::size_t>(std::popcount(mask));
        if (n > max_cached) continue;
        ++evaluations_;
        const double value = evaluator.per_file(mask);
        // Masks arrive in increasing order, so strict < keeps the first minimizer.
        if (value < best_value_[n]) {
            best_value_[n] = value;
            best_mask_[n] = mask;
        }
    }
}

NoncoopSearchTable::Choice NoncoopSearchTable::select(std::size_t capacity_items, double cost_factor) const {
    Choice best{0, kInf};
    const std::size_t top = std::min(capacity_items, max_cached());
    for (std::size_t n = 0; n <= top; ++n) {
        const double value = best_value_[n] + cost_factor * static_cast<double>(n);
        if (value < best.objective || (value == best.objective && best_mask_[n] < best.mask)) {
            best = {best_mask_[n], value};
        }
    }
    return best;
}

SolveResult solve_exhaustive_noncoop(const Scenario& scenario, std::size_t rsu_index) {
    check_rsu_index(scenario, rsu_index);
    const auto& rsu = scenario.rsus[rsu_index];
    const auto visitors = visitors_at(scenario, rsu_index);
    const std::size_t capacity = rsu.capacity_items(scenario.library);
    const NoncoopSearchTable table(rsu, scenario.library, visitors, capacity);
    const auto choice = table.select(capacity, scenario.cost_factor);

    SolveResult result;
    result.policies.push_back(CachePolicy::from_mask(scenario.library.item_count, choice.mask));
    result.objective_value = objective_noncoop(scenario, rsu_index, result.policies.front());
    result.evaluations = table.evaluations();
    return result;
}

SolveResult greedy_noncoop(const Scenario& scenario, std::size_t rsu_index) {
    check_rsu_index(scenario, rsu_index);
    const auto visitors = visitors_at(scenario, rsu_index);
    SolveResult result;
    result.policies.push_back(greedy_placement(scenario.rsus[rsu_index], scenario.library, visitors));
    result.objective_value = objective_noncoop(scenario, rsu_index, result.policies.front());
    result.evaluations = 1;
    return result;
}

namespace {

template <typename Solve>
SolveResult solve_each(const Scenario& scenario, Solve solve) {
    SolveResult all;
    CompensatedSum objective;
    for (std::size_t s = 0; s < scenario.rsus.size(); ++s) {
        auto one = solve(scenario, s);
        all.policies.push_back(std::move(one.policies.front()));
        objective += one.objective_value;
        all.evaluations += one.evaluations;
    }
    all.objective_value = objective.value();
    return all;
}

}  // namespace

SolveResult solve_exhaustive_noncoop(const Scenario& scenario) {
    return solve_each(scenario, [](const Scenario& sc, std::size_t s) {
        return solve_exhaustive_noncoop(sc, s);
    });
}

SolveResult greedy_noncoop(const Scenario& scenario) {
    return solve_each(scenario, [](const Scenario& sc, std::size_t s) { return greedy_noncoop(sc, s); });
}

// ---------------------------------------------------------------------------
// Cooperative

DeliveredSet simulate_delivery(const RsuConfig& rsu, const Library& library, const CachePolicy& policy,
                               std::span<const double> demand, double contact_time,
                               const DeliveredSet& already_held) {
    const FileCaps caps = proactive_caps(rsu, library, policy, contact_time);

    std::vector<std::size_t> order(library.item_count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return demand[a] > demand[b]; });

    DeliveredSet delivered;
    long from_cache = 0;
    long from_backhaul = 0;
    for (std::size_t m : order) {
        if (already_held.contains(m)) continue;
        if (policy.contains(m)) {
            if (from_cache < caps.cached_cap) {
                delivered.insert(m);
                ++from_cache;
            }
        } else if (from_backhaul < caps.backhaul_cap) {
            delivered.insert(m);
            ++from_backhaul;
        }
    }
    return delivered;
}

namespace {

// Visitors of RSU `downstream` given what every vehicle holds after the
// upstream RSUs.
std::vector<Visitor> updated_visitors(const Scenario& scenario, std::size_t downstream,
                                      std::span<const DeliveredSet> held) {
    const auto& rsu = scenario.rsus[downstream];
    std::vector<Visitor> out;
    out.reserve(scenario.vehicles.size());
    for (std::size_t v = 0; v < scenario.vehicles.size(); ++v) {
        const auto& veh = scenario.vehicles[v];
        Visitor vis;
        vis.presence = update_presence(veh, downstream - 1);
        vis.demand = update_demand(veh.demand, held[v]).demand;
        vis.contact_time = contact_time(rsu, veh);
        out.push_back(std::move(vis));
    }
    return out;
}

void accumulate_deliveries(const RsuConfig& rsu, const Library& library, const CachePolicy& policy,
                           std::span<const Visitor> visitors, std::vector<DeliveredSet>& held) {
    for (std::size_t v = 0; v < visitors.size(); ++v) {
        if (!(visitors[v].presence > 0.0)) continue;
        held[v].merge(simulate_delivery(rsu, library, policy, visitors[v].demand,
                                        visitors[v].contact_time, held[v]));
    }
}

}  // namespace

std::vector<std::vector<Visitor>> cooperative_visitors(const Scenario& scenario,
                                                       std::span<const CachePolicy> policies) {
    const std::size_t S = scenario.rsus.size();
    if (S == 0) return {};
    if (policies.size() + 1 < S) {
        throw ParameterError("cooperative_visitors needs a policy for every upstream RSU");
    }
    std::vector<std::vector<Visitor>> out;
    out.reserve(S);
    out.push_back(visitors_at(scenario, 0));
    std::vector<DeliveredSet> held(scenario.vehicles.size());
    for (std::size_t s = 1; s < S; ++s) {
        accumulate_deliveries(scenario.rsus[s - 1], scenario.library, policies[s - 1], out[s - 1], held);
        out.push_back(updated_visitors(scenario, s, held));
    }
    return out;
}

double objective_coop(const Scenario& scenario, std::size_t downstream, const CachePolicy& upstream,
                      const CachePolicy& downstream_policy) {
    if (downstream == 0) throw ParameterError("objective_coop needs an upstream RSU");
    check_rsu_index(scenario, downstream);
    const auto& lib = scenario.library;
    const auto up_visitors = visitors_at(scenario, downstream - 1);
    std::vector<DeliveredSet> held(scenario.vehicles.size());
    accumulate_deliveries(scenario.rsus[downstream - 1], lib, upstream, up_visitors, held);
    const auto down_visitors = updated_visitors(scenario, downstream, held);

    const double gamma = scenario.cost_factor;
    return objective_value(scenario.rsus[downstream - 1], lib, up_visitors, upstream, gamma) +
           objective_value(scenario.rsus[downstream], lib, down_visitors, downstream_policy, gamma);
}

double chain_objective(const Scenario& scenario, std::span<const CachePolicy> policies) {
    if (policies.size() != scenario.rsus.size()) {
        throw ParameterError("chain_objective needs one policy per RSU");
    }
    const auto visitors = cooperative_visitors(scenario, policies);
    CompensatedSum total;
    for (std::size_t s = 0; s < scenario.rsus.size(); ++s) {
        total += objective_value(scenario.rsus[s], scenario.library, visitors[s], policies[s],
                                 scenario.cost_factor);
    }
    return total.value();
}

SolveResult greedy_coop(const Scenario& scenario) {
    const std::size_t S = scenario.rsus.size();
    if (S < 2) throw ParameterError("greedy_coop needs at least two RSUs");
    const auto& lib = scenario.library;

    SolveResult result;
    auto visitors = visitors_at(scenario, 0);
    std::vector<DeliveredSet> held(scenario.vehicles.size());
    for (std::size_t s = 0; s < S; ++s) {
        if (s > 0) {
            accumulate_deliveries(scenario.rsus[s - 1], lib, result.policies[s - 1], visitors, held);
            visitors = updated_visitors(scenario, s, held);
        }
        result.policies.push_back(greedy_placement(scenario.rsus[s], lib, visitors));
    }
    result.objective_value = chain_objective(scenario, result.policies);
    result.evaluations = 1;
    return result;
}

CoopSearchTable::CoopSearchTable(const Scenario& scenario, std::size_t max_cached) {
    if (scenario.rsus.size() != 2) {
        throw ParameterError("joint cooperative search needs exactly two RSUs");
    }
    const auto& lib = scenario.library;
    const std::size_t M = lib.item_count;
    if (M > kJointEnumerationGuard) {
        std::ostringstream msg;
        msg << "joint cooperative search is limited to " << kJointEnumerationGuard
            << " items (library has " << M << ")";
        throw CapacityError(msg.str());
    }
    max_cached_ = std::min(max_cached, M);
    const std::size_t width = max_cached_ + 1;
    const std::uint64_t end = mask_end(M);

    const auto up_visitors = visitors_at(scenario, 0);
    const PlacementEvaluator up_eval(scenario.rsus[0], lib, up_visitors, max_cached_);

    upstream_value_.assign(end, kInf);
    downstream_value_.assign(end * width, kInf);
    downstream_mask_.assign(end * width, 0);

    for (std::uint64_t up = 0; up < end; ++up) {
        if (static_cast<std::size_t>(std::popcount(up)) > max_cached_) continue;
        upstream_value_[up] = up_eval.per_file(up);

        std::vector<DeliveredSet> held(scenario.vehicles.size());
        accumulate_deliveries(scenario.rsus[0], lib, CachePolicy::from_mask(M, up), up_visitors, held);
        const auto down_visitors = updated_visitors(scenario, 1, held);
        const PlacementEvaluator down_eval(scenario.rsus[1], lib, down_visitors, max_cached_);

        double* value = &downstream_value_[up * width];
        std::uint64_t* best = &downstream_mask_[up * width];
        for (std::uint64_t down = 0; down < end; ++down) {
            const auto n = static_cast<std::size_t>(std::popcount(down));
            if (n > max_cached_) continue;
            ++evaluations_;
            const double v = down_eval.per_file(down);
            if (v < value[n]) {
                value[n] = v;
                best[n] = down;
            }
        }
    }
}

CoopSearchTable::Choice CoopSearchTable::select(std::size_t upstream_capacity,
                                                std::size_t downstream_capacity,
                                                double cost_factor) const {
    const std::size_t width = max_cached_ + 1;
    const std::size_t up_top = std::min(upstream_capacity, max_cached_);
    const std::size_t down_top = std::min(downstream_capacity, max_cached_);
    Choice best{0, 0, kInf};
    for (std::uint64_t up = 0; up < upstream_value_.size(); ++up) {
        const auto n_up = static_cast<std::size_t>(std::popcount(up));
        if (n_up > up_top) continue;
        const double head = upstream_value_[up] + cost_factor * static_cast<double>(n_up);
        for (std::size_t n = 0; n <= down_top; ++n) {
            const double value = head + downstream_value_[up * width + n] +
                                 cost_factor * static_cast<double>(n);
            const std::uint64_t down = downstream_mask_[up * width + n];
            // Upstream masks arrive in increasing order; within one, prefer the smaller downstream mask.
            if (value < best.objective ||
                (value == best.objective && up == best.upstream_mask && down < best.downstream_mask)) {
                best = {up, down, value};
            }
        }
    }
    return best;
}

SolveResult solve_exhaustive_coop(const Scenario& scenario) {
    if (scenario.rsus.size() != 2) {
        throw ParameterError("solve_exhaustive_coop needs exactly two RSUs");
    }
    const auto& lib = scenario.library;
    const std::size_t cap_up = scenario.rsus[0].capacity_items(lib);
    const std::size_t cap_down = scenario.rsus[1].capacity_items(lib);
    const CoopSearchTable table(scenario, std::max(cap_up, cap_down));
    const auto choice = table.select(cap_up, cap_down, scenario.cost_factor);

    SolveResult result;
    result.policies.push_back(CachePolicy::from_mask(lib.item_count, choice.upstream_mask));
    result.policies.push_back(CachePolicy::from_mask(lib.item_count, choice.downstream_mask));
    result.objective_value = objective_coop(scenario, 1, result.policies[0], result.policies[1]);
    result.evaluations = table.evaluations();
    return result;
}

}  // namespace procache

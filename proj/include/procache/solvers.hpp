#pragma once

// Cache-placement decisions.
//
// Non-cooperative: each RSU minimizes its own
//     W^P / sum_v Mbar_v + gamma * sum_m x_m
// either exhaustively or with the score-sorted greedy fill.
//
// Cooperative: RSU s sees each vehicle after the upstream RSUs served it.
// Presence becomes certain (1 if the vehicle passed RSU s-1) and demand is
// renormalized over the items the vehicle has not downloaded yet. Which items
// were downloaded is decided by simulate_delivery.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "procache/delay.hpp"
#include "procache/mobility.hpp"
#include "procache/model.hpp"

namespace procache {

enum class Mode { non_cooperative, cooperative };

struct Objective {
    Mode mode = Mode::non_cooperative;
    double cost_factor = 0.0;  // gamma
};

struct ItemScore {
    std::size_t item = 0;
    double score = 0.0;  // pi_s^m
};

struct SolveResult {
    std::vector<CachePolicy> policies;  // one per RSU solved, in road order
    double objective_value = 0.0;
    std::size_t evaluations = 0;
};

// Joint search over two placements is limited to this many items.
inline constexpr std::size_t kJointEnumerationGuard = 12;

// lambda_v = h_v / sum_v h_v. All zeros when the contact times sum to zero.
std::vector<double> contact_weights(std::span<const Visitor> visitors);

// pi_m = sum_v theta_v p_v^m lambda_v, sorted by descending score with the
// lower item index first among equal scores.
std::vector<ItemScore> item_scores(std::span<const Visitor> visitors, std::size_t item_count);

// min(floor(Z_s / C), floor(alpha_s * mean(h) / C)): the greedy fill never
// caches more items than this.
std::size_t greedy_item_limit(const RsuConfig& rsu, const Library& library,
                              std::span<const Visitor> visitors);

// Score-sorted fill up to greedy_item_limit.
CachePolicy greedy_placement(const RsuConfig& rsu, const Library& library,
                             std::span<const Visitor> visitors);

// Per-file proactive delay plus gamma per cached item, for one RSU.
double objective_value(const RsuConfig& rsu, const Library& library, std::span<const Visitor> visitors,
                       const CachePolicy& policy, double cost_factor);

double objective_noncoop(const Scenario& scenario, std::size_t rsu_index, const CachePolicy& policy);

SolveResult solve_exhaustive_noncoop(const Scenario& scenario, std::size_t rsu_index);
SolveResult greedy_noncoop(const Scenario& scenario, std::size_t rsu_index);

// Apply the single-RSU solver at every RSU independently. The reported
// objective is the sum of the per-RSU objectives.
SolveResult solve_exhaustive_noncoop(const Scenario& scenario);
SolveResult greedy_noncoop(const Scenario& scenario);

// Items a vehicle downloads while crossing `rsu`: in descending demand order
// (lower index first on ties), up to Mhat items from the cache and then up to
// Mtilde items over the backhaul. Items in `already_held` are skipped.
DeliveredSet simulate_delivery(const RsuConfig& rsu, const Library& library, const CachePolicy& policy,
                               std::span<const double> demand, double contact_time,
                               const DeliveredSet& already_held = {});

// Visitors of every RSU under the cooperative information model: RSU 0 sees
// the scenario's presence and demand, every later RSU sees the updates
// induced by the deliveries at all RSUs before it. `policies` needs an entry
// for every RSU except possibly the last.
std::vector<std::vector<Visitor>> cooperative_visitors(const Scenario& scenario,
                                                       std::span<const CachePolicy> policies);

// Two-RSU cooperative objective: per-file delay of RSU downstream-1 (with its
// own presence and demand) plus per-file delay of RSU `downstream` after the
// upstream deliveries, plus gamma times the items cached at both.
double objective_coop(const Scenario& scenario, std::size_t downstream, const CachePolicy& upstream,
                      const CachePolicy& downstream_policy);

// Sum over all RSUs of the cooperative-model per-file delays plus gamma per
// cached item. Equals objective_coop for a two-RSU scenario.
double chain_objective(const Scenario& scenario, std::span<const CachePolicy> policies);

SolveResult greedy_coop(const Scenario& scenario);
// Joint exhaustive search; exactly two RSUs and at most kJointEnumerationGuard items.
SolveResult solve_exhaustive_coop(const Scenario& scenario);

// Every placement of up to `max_cached` items for one RSU, scored once.
// select() answers "best placement with at most c items at cost factor
// gamma" for any c and gamma without re-enumerating. Among equal objective
// values the smaller mask wins (bit m set = item m cached).
class NoncoopSearchTable {
public:
    NoncoopSearchTable(const RsuConfig& rsu, const Library& library, std::span<const Visitor> visitors,
                       std::size_t max_cached);

    struct Choice {
        std::uint64_t mask = 0;
        double objective = 0.0;
    };

    Choice select(std::size_t capacity_items, double cost_factor) const;
    std::size_t evaluations() const noexcept { return evaluations_; }
    std::size_t max_cached() const noexcept { return best_value_.size() - 1; }

private:
    std::vector<double> best_value_;        // per cached count: lowest per-file delay
    std::vector<std::uint64_t> best_mask_;  // smallest mask reaching it
    std::size_t evaluations_ = 0;
};

// Joint two-RSU search table, same idea as NoncoopSearchTable. The joint
// order used for ties is (upstream mask, downstream mask) lexicographically.
class CoopSearchTable {
public:
    CoopSearchTable(const Scenario& scenario, std::size_t max_cached);

    struct Choice {
        std::uint64_t upstream_mask = 0;
        std::uint64_t downstream_mask = 0;
        double objective = 0.0;
    };

    Choice select(std::size_t upstream_capacity, std::size_t downstream_capacity, double cost_factor) const;
    std::size_t evaluations() const noexcept { return evaluations_; }

private:
    std::size_t max_cached_ = 0;
    std::vector<double> upstream_value_;        // [upstream mask]
    std::vector<double> downstream_value_;      // [upstream mask * (max_cached+1) + n]
    std::vector<std::uint64_t> downstream_mask_;
    std::size_t evaluations_ = 0;
};

std::string to_string(Mode mode);

}  // namespace procache

#pragma once

// Expected delivery delay at one RSU for the reactive baseline (every item
// over the backhaul) and for a proactive cache placement.
//
// Each vehicle requests item m independently with probability p_v^m. For a
// request set S with |S| = k the transmission time is
//     t(S) = k (C/alpha + tau) - tau * |S intersect cache|,
// and a vehicle only contributes request sets no larger than its file cap.
// The *_bruteforce functions enumerate request sets literally; the default
// functions run a dynamic program over (items seen, request count) and are
// exact as well.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "procache/model.hpp"

namespace procache {

// One vehicle as seen by one RSU.
struct Visitor {
    double presence = 1.0;       // theta_v^s (or its cooperative update)
    std::vector<double> demand;  // p_v^m (or its cooperative update)
    double contact_time = 0.0;   // h_v^s, seconds
};

// Visitors of RSU `rsu_index` using the scenario's own presence and demand.
std::vector<Visitor> visitors_at(const Scenario& scenario, std::size_t rsu_index);

struct FileCaps {
    long reactive_cap = 0;  // M_v^s: items over the backhaul alone
    long cached_cap = 0;    // Mhat_v^s: items from the local cache
    long backhaul_cap = 0;  // Mtilde_v^s: further items over the backhaul
    long total_cap = 0;     // Mbar_v^s = min(cached + backhaul, M)

    bool operator==(const FileCaps&) const = default;
};

// Largest request set the brute-force enumerators accept.
inline constexpr std::size_t kEnumerationGuard = 22;

long reactive_cap(const RsuConfig& rsu, const Library& library, double contact_time);
FileCaps proactive_caps(const RsuConfig& rsu, const Library& library, std::size_t cached_count,
                        double contact_time);
FileCaps proactive_caps(const RsuConfig& rsu, const Library& library, const CachePolicy& policy,
                        double contact_time);

// prod_{l in subset} p_l * prod_{r not in subset} (1 - p_r)
double combination_probability(std::span<const double> demand, std::span<const std::size_t> subset);
double combination_probability(std::span<const double> demand, std::uint64_t subset_mask);

double transmission_time(const RsuConfig& rsu, const Library& library, const CachePolicy& policy,
                         std::span<const std::size_t> subset);

// Literal enumeration over all request sets of size <= cap. Throws
// CapacityError when the library exceeds kEnumerationGuard items.
double reactive_delay_bruteforce(const RsuConfig& rsu, const Library& library,
                                 std::span<const Visitor> visitors);
double proactive_delay_bruteforce(const RsuConfig& rsu, const Library& library,
                                  const CachePolicy& policy, std::span<const Visitor> visitors);

// Truncated-count dynamic program, O(M * cap) per vehicle.
double reactive_delay(const RsuConfig& rsu, const Library& library, std::span<const Visitor> visitors);
double proactive_delay(const RsuConfig& rsu, const Library& library, const CachePolicy& policy,
                       std::span<const Visitor> visitors);

long reactive_cap_sum(const RsuConfig& rsu, const Library& library, std::span<const Visitor> visitors);
long proactive_cap_sum(const RsuConfig& rsu, const Library& library, const CachePolicy& policy,
                       std::span<const Visitor> visitors);

// Delay per deliverable file; zero when no vehicle can receive anything.
double per_file_delay(double delay, long cap_sum);

// W^R / sum M - W^P / sum Mbar. Throws UndefinedGainError if a sum is zero.
double caching_gain(double reactive_delay, long reactive_cap_sum, double proactive_delay,
                    long proactive_cap_sum);

DelayReport evaluate_delays(const RsuConfig& rsu, const Library& library, const CachePolicy& policy,
                            std::span<const Visitor> visitors);

// Proactive delay as a function of the placement, with everything that does
// not depend on *which* items are cached precomputed.
//
// For a placement of n items every vehicle's cap Mbar_v depends on n only, and
// the cached-hit term is linear in x:
//     W^P(x) = base(n) - sum_{m in x} weight(n, m)
// where weight(n, m) = tau * sum_v theta_v P_v(m requested, |S| <= Mbar_v(n)).
// Evaluating a placement then costs O(n) instead of a dynamic program.
class PlacementEvaluator {
public:
    PlacementEvaluator(const RsuConfig& rsu, const Library& library, std::span<const Visitor> visitors,
                       std::size_t max_cached);

    std::size_t item_count() const noexcept { return item_count_; }
    std::size_t max_cached() const noexcept { return base_.size() - 1; }

    double base(std::size_t cached_count) const { return base_.at(cached_count); }
    std::span<const double> weights(std::size_t cached_count) const;
    long cap_sum(std::size_t cached_count) const { return cap_sum_.at(cached_count); }

    double delay(std::uint64_t mask) const;
    double per_file(std::uint64_t mask) const;

private:
    std::size_t item_count_;
    std::vector<double> base_;      // [n]
    std::vector<double> weights_;   // [n * item_count + m]
    std::vector<long> cap_sum_;     // [n]
};

}  // namespace procache

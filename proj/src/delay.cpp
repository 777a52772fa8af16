#include "procache/delay.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

#include "procache/errors.hpp"
#include "procache/mobility.hpp"
#include "procache/summation.hpp"

namespace procache {

std::vector<Visitor> visitors_at(const Scenario& scenario, std::size_t rsu_index) {
    const auto& rsu = scenario.rsus.at(rsu_index);
    std::vector<Visitor> out;
    out.reserve(scenario.vehicles.size());
    for (const auto& veh : scenario.vehicles) {
        out.push_back({veh.presence.at(rsu_index), veh.demand, contact_time(rsu, veh)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// File caps

long reactive_cap(const RsuConfig& rsu, const Library& library, double contact_time) {
    const long n = floor_count(contact_time / rsu.backhaul_service_time(library));
    return std::clamp(n, 0L, static_cast<long>(library.item_count));
}

FileCaps proactive_caps(const RsuConfig& rsu, const Library& library, std::size_t cached_count,
                        double contact_time) {
    const double cache_time = rsu.item_service_time(library);
    const double backhaul_time = rsu.backhaul_service_time(library);
    const long items = static_cast<long>(library.item_count);

    FileCaps caps;
    caps.reactive_cap = reactive_cap(rsu, library, contact_time);
    caps.cached_cap = std::min(std::max(floor_count(contact_time / cache_time), 0L),
                               static_cast<long>(cached_count));
    const double leftover = contact_time - static_cast<double>(caps.cached_cap) * cache_time;
    caps.backhaul_cap = leftover > 0.0 ? std::max(floor_count(leftover / backhaul_time), 0L) : 0L;
    caps.total_cap = std::min(caps.cached_cap + caps.backhaul_cap, items);
    return caps;
}

FileCaps proactive_caps(const RsuConfig& rsu, const Library& library, const CachePolicy& policy,
                        double contact_time) {
    return proactive_caps(rsu, library, policy.cached_count(), contact_time);
}

// ---------------------------------------------------------------------------
// Enumeration primitives

double combination_probability(std::span<const double> demand, std::span<const std::size_t> subset) {
    std::vector<bool> in(demand.size(), false);
    for (std::size_t m : subset) {
        if (m >= demand.size()) throw ParameterError("subset item outside the library");
        in[m] = true;
    }
    double q = 1.0;
    for (std::size_t m = 0; m < demand.size(); ++m) q *= in[m] ? demand[m] : 1.0 - demand[m];
    return q;
}

double combination_probability(std::span<const double> demand, std::uint64_t subset_mask) {
    double q = 1.0;
    for (std::size_t m = 0; m < demand.size(); ++m) {
        q *= ((subset_mask >> m) & 1U) ? demand[m] : 1.0 - demand[m];
    }
    return q;
}

double transmission_time(const RsuConfig& rsu, const Library& library, const CachePolicy& policy,
                         std::span<const std::size_t> subset) {
    std::size_t hits = 0;
    for (std::size_t m : subset) hits += policy.contains(m) ? 1 : 0;
    return static_cast<double>(subset.size()) * rsu.backhaul_service_time(library) -
           rsu.backhaul_latency * static_cast<double>(hits);
}

namespace {

void check_enumerable(const Library& library) {
    if (library.item_count > kEnumerationGuard) {
        std::ostringstream msg;
        msg << "brute-force enumeration is limited to " << kEnumerationGuard << " items (library has "
            << library.item_count << "); use the dynamic-program evaluators instead";
        throw CapacityError(msg.str());
    }
}

void check_visitor(const Library& library, const Visitor& v) {
    if (v.demand.size() != library.item_count) {
        throw ParameterError("visitor demand vector length differs from the library size");
    }
}

// Sum over request sets S with |S| <= cap of q(S) * t(S) for one vehicle.
double enumerate_vehicle(const Visitor& v, long cap, double per_item, double latency,
                         std::uint64_t cached_mask) {
    const std::size_t items = v.demand.size();
    const std::uint64_t end = std::uint64_t{1} << items;
    CompensatedSum total;
    for (std::uint64_t subset = 0; subset < end; ++subset) {
        const int k = std::popcount(subset);
        if (k == 0 || k > cap) continue;
        const int hits = std::popcount(subset & cached_mask);
        const double t = k * per_item - latency * hits;
        total += combination_probability(v.demand, subset) * t;
    }
    return total.value();
}

// Truncated request-count distribution of one vehicle.
//   mass[k]  = P(|S| = k)
//   hits[k]  = E[|S intersect cache| ; |S| = k]
// for k <= cap. Request sets larger than cap are dropped.
double dynamic_program_vehicle(const Visitor& v, long cap, double per_item, double latency,
                               const std::vector<std::uint8_t>* cached) {
    const auto K = static_cast<std::size_t>(std::max(cap, 0L));
    std::vector<double> mass(K + 1, 0.0);
    std::vector<double> hits(K + 1, 0.0);
    mass[0] = 1.0;
    for (std::size_t m = 0; m < v.demand.size(); ++m) {
        const double p = v.demand[m];
        const double q = 1.0 - p;
        const bool is_cached = cached != nullptr && (*cached)[m] != 0;
        for (std::size_t k = K; k >= 1; --k) {
            hits[k] = hits[k] * q + (hits[k - 1] + (is_cached ? mass[k - 1] : 0.0)) * p;
            mass[k] = mass[k] * q + mass[k - 1] * p;
        }
        mass[0] *= q;
    }
    CompensatedSum total;
    for (std::size_t k = 1; k <= K; ++k) {
        total += static_cast<double>(k) * per_item * mass[k];
        if (cached != nullptr) total += -latency * hits[k];
    }
    return total.value();
}

}  // namespace

double reactive_delay_bruteforce(const RsuConfig& rsu, const Library& library,
                                 std::span<const Visitor> visitors) {
    check_enumerable(library);
    const double per_item = rsu.backhaul_service_time(library);
    CompensatedSum total;
    for (const auto& v : visitors) {
        check_visitor(library, v);
        const long cap = reactive_cap(rsu, library, v.contact_time);
        total += v.presence * enumerate_vehicle(v, cap, per_item, rsu.backhaul_latency, 0);
    }
    return total.value();
}

double proactive_delay_bruteforce(const RsuConfig& rsu, const Library& library,
                                  const CachePolicy& policy, std::span<const Visitor> visitors) {
    check_enumerable(library);
    const double per_item = rsu.backhaul_service_time(library);
    const std::uint64_t cached_mask = policy.mask();
    CompensatedSum total;
    for (const auto& v : visitors) {
        check_visitor(library, v);
        const long cap = proactive_caps(rsu, library, policy, v.contact_time).total_cap;
        total += v.presence * enumerate_vehicle(v, cap, per_item, rsu.backhaul_latency, cached_mask);
    }
    return total.value();
}

double reactive_delay(const RsuConfig& rsu, const Library& library, std::span<const Visitor> visitors) {
    const double per_item = rsu.backhaul_service_time(library);
    CompensatedSum total;
    for (const auto& v : visitors) {
        check_visitor(library, v);
        const long cap = reactive_cap(rsu, library, v.contact_time);
        total += v.presence * dynamic_program_vehicle(v, cap, per_item, rsu.backhaul_latency, nullptr);
    }
    return total.value();
}

double proactive_delay(const RsuConfig& rsu, const Library& library, const CachePolicy& policy,
                       std::span<const Visitor> visitors) {
    if (policy.item_count() != library.item_count) {
        throw ParameterError("cache policy length differs from the library size");
    }
    const double per_item = rsu.backhaul_service_time(library);
    const bool any_cached = policy.cached_count() > 0;
    CompensatedSum total;
    for (const auto& v : visitors) {
        check_visitor(library, v);
        const long cap = proactive_caps(rsu, library, policy, v.contact_time).total_cap;
        total += v.presence * dynamic_program_vehicle(v, cap, per_item, rsu.backhaul_latency,
                                                      any_cached ? &policy.placements() : nullptr);
    }
    return total.value();
}

long reactive_cap_sum(const RsuConfig& rsu, const Library& library, std::span<const Visitor> visitors) {
    long sum = 0;
    for (const auto& v : visitors) sum += reactive_cap(rsu, library, v.contact_time);
    return sum;
}

long proactive_cap_sum(const RsuConfig& rsu, const Library& library, const CachePolicy& policy,
                       std::span<const Visitor> visitors) {
    long sum = 0;
    for (const auto& v : visitors) sum += proactive_caps(rsu, library, policy, v.contact_time).total_cap;
    return sum;
}

double per_file_delay(double delay, long cap_sum) {
    return cap_sum > 0 ? delay / static_cast<double>(cap_sum) : 0.0;
}

double caching_gain(double reactive_delay, long reactive_cap_sum, double proactive_delay,
                    long proactive_cap_sum) {
    if (reactive_cap_sum <= 0 || proactive_cap_sum <= 0) {
        throw UndefinedGainError("caching gain is undefined when a file-cap sum is zero");
    }
    return reactive_delay / static_cast<double>(reactive_cap_sum) -
           proactive_delay / static_cast<double>(proactive_cap_sum);
}

DelayReport evaluate_delays(const RsuConfig& rsu, const Library& library, const CachePolicy& policy,
                            std::span<const Visitor> visitors) {
    DelayReport r;
    r.reactive_delay = reactive_delay(rsu, library, visitors);
    r.proactive_delay = proactive_delay(rsu, library, policy, visitors);
    r.reactive_file_cap_sum = reactive_cap_sum(rsu, library, visitors);
    r.proactive_file_cap_sum = proactive_cap_sum(rsu, library, policy, visitors);
    if (r.reactive_file_cap_sum > 0 && r.proactive_file_cap_sum > 0) {
        r.caching_gain = caching_gain(r.reactive_delay, r.reactive_file_cap_sum, r.proactive_delay,
                                      r.proactive_file_cap_sum);
    }
    return r;
}

// ---------------------------------------------------------------------------
// PlacementEvaluator

namespace {

// Full (untruncated) request-count distribution over the items of `demand`
// except `skip` (pass demand.size() to keep all).
std::vector<double> count_distribution(std::span<const double> demand, std::size_t skip) {
    std::vector<double> mass(demand.size() + 1, 0.0);
    mass[0] = 1.0;
    std::size_t seen = 0;
    for (std::size_t m = 0; m < demand.size(); ++m) {
        if (m == skip) continue;
        const double p = demand[m];
        ++seen;
        for (std::size_t k = seen; k >= 1; --k) mass[k] = mass[k] * (1.0 - p) + mass[k - 1] * p;
        mass[0] *= 1.0 - p;
    }
    return mass;
}

}  // namespace

PlacementEvaluator::PlacementEvaluator(const RsuConfig& rsu, const Library& library,
                                       std::span<const Visitor> visitors, std::size_t max_cached)
    : item_count_(library.item_count) {
    if (item_count_ > 64) throw CapacityError("PlacementEvaluator supports at most 64 items");
    max_cached = std::min(max_cached, item_count_);
    const double per_item = rsu.backhaul_service_time(library);
    const std::size_t M = item_count_;

    base_.assign(max_cached + 1, 0.0);
    weights_.assign((max_cached + 1) * M, 0.0);
    cap_sum_.assign(max_cached + 1, 0);

    for (const auto& v : visitors) {
        check_visitor(library, v);
        // expected_count[K] = E[|S| ; |S| <= K]
        const auto full = count_distribution(v.demand, M);
        std::vector<double> expected_count(M + 1, 0.0);
        for (std::size_t K = 1; K <= M; ++K) {
            expected_count[K] = expected_count[K - 1] + static_cast<double>(K) * full[K];
        }
        // within[m][K] = P(m requested, |S| <= K) = p_m * P(|S without m| <= K - 1)
        std::vector<double> within((M + 1) * M, 0.0);
        for (std::size_t m = 0; m < M; ++m) {
            const double p = v.demand[m];
            if (p == 0.0) continue;
            const auto rest = count_distribution(v.demand, m);
            double cumulative = 0.0;
            for (std::size_t K = 1; K <= M; ++K) {
                cumulative += rest[K - 1];
                within[K * M + m] = p * cumulative;
            }
        }
        for (std::size_t n = 0; n <= max_cached; ++n) {
            const long cap = proactive_caps(rsu, library, n, v.contact_time).total_cap;
            cap_sum_[n] += cap;
            const auto K = static_cast<std::size_t>(cap);
            base_[n] += v.presence * per_item * expected_count[K];
            for (std::size_t m = 0; m < M; ++m) {
                weights_[n * M + m] += v.presence * rsu.backhaul_latency * within[K * M + m];
            }
        }
    }
}

std::span<const double> PlacementEvaluator::weights(std::size_t cached_count) const {
    if (cached_count >= base_.size()) throw ParameterError("cached count above evaluator range");
    return {weights_.data() + cached_count * item_count_, item_count_};
}

double PlacementEvaluator::delay(std::uint64_t mask) const {
    const auto n = static_cast<std::size_t>(std::popcount(mask));
    const auto w = weights(n);
    double d = base_[n];
    for (std::uint64_t rest = mask; rest != 0; rest &= rest - 1) {
        d -= w[static_cast<std::size_t>(std::countr_zero(rest))];
    }
    return d;
}

double PlacementEvaluator::per_file(std::uint64_t mask) const {
    const auto n = static_cast<std::size_t>(std::popcount(mask));
    return per_file_delay(delay(mask), cap_sum(n));
}

}  // namespace procache

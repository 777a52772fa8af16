#include "procache/model.hpp"

#include <cmath>
#include <sstream>

#include "procache/errors.hpp"

namespace procache {

namespace {

std::string join_violations(const std::vector<std::string>& violations) {
    std::ostringstream out;
    out << "scenario failed validation (" << violations.size() << " violation"
        << (violations.size() == 1 ? "" : "s") << ")";
    for (const auto& v : violations) out << "\n  - " << v;
    return out.str();
}

template <typename... Parts>
std::string cat(const Parts&... parts) {
    std::ostringstream out;
    (out << ... << parts);
    return out.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

long floor_count(double value) {
    return static_cast<long>(std::floor(value + 1e-9));
}

std::size_t RsuConfig::capacity_items(const Library& library) const {
    const long n = floor_count(cache_capacity / library.item_size);
    return n > 0 ? static_cast<std::size_t>(n) : 0;
}

CachePolicy::CachePolicy(std::vector<std::uint8_t> placements) : placements_(std::move(placements)) {}

CachePolicy CachePolicy::from_items(std::size_t item_count, std::span<const std::size_t> items) {
    CachePolicy policy(item_count);
    for (std::size_t m : items) policy.set(m);
    return policy;
}

CachePolicy CachePolicy::from_mask(std::size_t item_count, std::uint64_t mask) {
    if (item_count > 64) throw ParameterError("CachePolicy::from_mask supports at most 64 items");
    CachePolicy policy(item_count);
    for (std::size_t m = 0; m < item_count; ++m) {
        if ((mask >> m) & 1U) policy.placements_[m] = 1;
    }
    return policy;
}

std::size_t CachePolicy::cached_count() const noexcept {
    std::size_t n = 0;
    for (auto x : placements_) n += (x != 0);
    return n;
}

std::vector<std::size_t> CachePolicy::cached_items() const {
    std::vector<std::size_t> items;
    for (std::size_t m = 0; m < placements_.size(); ++m) {
        if (placements_[m]) items.push_back(m);
    }
    return items;
}

std::uint64_t CachePolicy::mask() const {
    if (placements_.size() > 64) throw ParameterError("CachePolicy::mask supports at most 64 items");
    std::uint64_t mask = 0;
    for (std::size_t m = 0; m < placements_.size(); ++m) {
        if (placements_[m]) mask |= std::uint64_t{1} << m;
    }
    return mask;
}

std::vector<std::string> validate_policy(const Library& library, const RsuConfig& rsu,
                                         const CachePolicy& policy, std::size_t rsu_index) {
    std::vector<std::string> out;
    const std::string where = cat("rsus[", rsu_index, "].policy");
    if (policy.item_count() != library.item_count) {
        out.push_back(cat(where, ": expected ", library.item_count, " entries, got ",
                          policy.item_count()));
        return out;
    }
    for (std::size_t m = 0; m < policy.item_count(); ++m) {
        const auto x = policy.placements()[m];
        if (x != 0 && x != 1) {
            out.push_back(cat(where, "[", m, "]: placement must be 0 or 1, got ", int{x}));
        }
    }
    const double used = library.item_size * static_cast<double>(policy.cached_count());
    if (used > rsu.cache_capacity * (1.0 + 1e-12)) {
        out.push_back(cat(where, ": cache constraint C*sum(x) <= Z violated (",
                          policy.cached_count(), " items = ", used, " bytes, capacity ",
                          rsu.cache_capacity, " bytes = ", rsu.capacity_items(library), " items)"));
    }
    return out;
}

std::vector<std::string> validate_scenario(const Scenario& scenario) {
    std::vector<std::string> out;
    const auto& lib = scenario.library;
    if (lib.item_count < 1) out.push_back("library.item_count: must be >= 1");
    if (!(lib.item_size > 0.0)) out.push_back(cat("library.item_size: must be > 0, got ", lib.item_size));
    if (scenario.rsus.empty()) out.push_back("rsus: at least one RSU is required");
    if (!(scenario.cost_factor >= 0.0)) {
        out.push_back(cat("cost_factor: must be >= 0, got ", scenario.cost_factor));
    }

    for (std::size_t s = 0; s < scenario.rsus.size(); ++s) {
        const auto& rsu = scenario.rsus[s];
        if (!(rsu.coverage_length > 0.0)) {
            out.push_back(cat("rsus[", s, "].coverage_length: must be > 0, got ", rsu.coverage_length));
        }
        if (!(rsu.cache_capacity >= 0.0)) {
            out.push_back(cat("rsus[", s, "].cache_capacity: must be >= 0, got ", rsu.cache_capacity));
        }
        if (!(rsu.service_rate > 0.0)) {
            out.push_back(cat("rsus[", s, "].service_rate: must be > 0, got ", rsu.service_rate));
        }
        if (!(rsu.backhaul_latency >= 0.0)) {
            out.push_back(cat("rsus[", s, "].backhaul_latency: must be >= 0, got ", rsu.backhaul_latency));
        }
    }

    for (std::size_t v = 0; v < scenario.vehicles.size(); ++v) {
        const auto& veh = scenario.vehicles[v];
        const std::string where = cat("vehicles[", v, "] (id ", veh.id, ")");
        if (!(veh.velocity > 0.0)) out.push_back(cat(where, ".velocity: must be > 0, got ", veh.velocity));

        if (veh.presence.size() != scenario.rsus.size()) {
            out.push_back(cat(where, ".presence: expected ", scenario.rsus.size(), " entries, got ",
                              veh.presence.size()));
        }
        for (std::size_t s = 0; s < veh.presence.size(); ++s) {
            const double t = veh.presence[s];
            if (!(t >= 0.0 && t <= 1.0)) {
                out.push_back(cat(where, ".presence[", s, "]: must lie in [0,1], got ", t));
            }
        }

        if (veh.demand.size() != lib.item_count) {
            out.push_back(cat(where, ".demand: expected ", lib.item_count, " entries, got ",
                              veh.demand.size()));
            continue;
        }
        double sum = 0.0;
        bool entries_ok = true;
        for (std::size_t m = 0; m < veh.demand.size(); ++m) {
            const double p = veh.demand[m];
            if (!(p >= 0.0 && p <= 1.0)) {
                out.push_back(cat(where, ".demand[", m, "]: must lie in [0,1], got ", p));
                entries_ok = false;
            }
            sum += p;
        }
        if (entries_ok && std::abs(sum - 1.0) > kDemandSumTolerance) {
            out.push_back(cat(where, ".demand: entries must sum to 1, got ", sum));
        }
    }
    return out;
}

std::vector<std::string> validate_scenario(const Scenario& scenario,
                                           std::span<const CachePolicy> policies) {
    auto out = validate_scenario(scenario);
    if (policies.size() != scenario.rsus.size()) {
        out.push_back(cat("policies: expected one per RSU (", scenario.rsus.size(), "), got ",
                          policies.size()));
        return out;
    }
    for (std::size_t s = 0; s < policies.size(); ++s) {
        auto more = validate_policy(scenario.library, scenario.rsus[s], policies[s], s);
        out.insert(out.end(), more.begin(), more.end());
    }
    return out;
}

}  // namespace procache

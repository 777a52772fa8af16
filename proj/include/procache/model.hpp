#pragma once

// Domain types shared by every part of the library.
//
// Units are fixed at this layer: meters, seconds, bytes, meters/second.
// Conversions from km/h or "capacity in files" happen in the config loader.
// Item indices are zero-based throughout the C++ API.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace procache {

struct Library {
    std::size_t item_count = 1;  // M
    double item_size = 1.0;      // C, bytes

    bool operator==(const Library&) const = default;
};

struct RsuConfig {
    int id = 0;
    double coverage_length = 0.0;   // L_s, meters
    double cache_capacity = 0.0;    // Z_s, bytes
    double service_rate = 1.0;      // alpha_s, bytes/second
    double backhaul_latency = 0.0;  // tau, seconds

    // Seconds to push one item from the local cache (C / alpha_s).
    double item_service_time(const Library& library) const {
        return library.item_size / service_rate;
    }

    // Seconds to serve one item fetched over the backhaul (C / alpha_s + tau).
    double backhaul_service_time(const Library& library) const {
        return item_service_time(library) + backhaul_latency;
    }

    // Largest number of whole items that fit in the cache, floor(Z_s / C).
    std::size_t capacity_items(const Library& library) const;

    bool operator==(const RsuConfig&) const = default;
};

struct VehicleProfile {
    int id = 0;
    double velocity = 0.0;          // u_v, meters/second
    std::vector<double> presence;   // theta_v^s, one entry per RSU
    std::vector<double> demand;     // p_v^m, one entry per item

    bool operator==(const VehicleProfile&) const = default;
};

// Binary placement vector x_s^m for one RSU.
class CachePolicy {
public:
    CachePolicy() = default;
    explicit CachePolicy(std::size_t item_count) : placements_(item_count, 0) {}
    explicit CachePolicy(std::vector<std::uint8_t> placements);

    static CachePolicy from_items(std::size_t item_count, std::span<const std::size_t> items);
    // Bit m of `mask` set means item m is cached. Requires item_count <= 64.
    static CachePolicy from_mask(std::size_t item_count, std::uint64_t mask);

    std::size_t item_count() const noexcept { return placements_.size(); }
    bool contains(std::size_t item) const { return placements_.at(item) != 0; }
    std::size_t cached_count() const noexcept;
    std::vector<std::size_t> cached_items() const;
    std::uint64_t mask() const;
    const std::vector<std::uint8_t>& placements() const noexcept { return placements_; }

    void set(std::size_t item, bool cached = true) { placements_.at(item) = cached ? 1 : 0; }

    bool operator==(const CachePolicy&) const = default;

private:
    std::vector<std::uint8_t> placements_;
};

struct Scenario {
    Library library;
    std::vector<RsuConfig> rsus;          // ordered along the road
    std::vector<VehicleProfile> vehicles;
    double cost_factor = 0.0;             // gamma
    std::uint64_t rng_seed = 0;

    bool operator==(const Scenario&) const = default;
};

struct DelayReport {
    double reactive_delay = 0.0;          // W_s^R, seconds
    double proactive_delay = 0.0;         // W_s^P, seconds
    long reactive_file_cap_sum = 0;       // sum_v M_v^s
    long proactive_file_cap_sum = 0;      // sum_v Mbar_v^s
    std::optional<double> caching_gain;   // seconds per file; empty when a cap sum is zero
};

// Returns one human-readable entry per broken invariant; empty means valid.
std::vector<std::string> validate_scenario(const Scenario& scenario);

// Same as above, plus placement constraints for one policy per RSU.
std::vector<std::string> validate_scenario(const Scenario& scenario,
                                           std::span<const CachePolicy> policies);

// Placement constraints for a single RSU: binary entries, one per item, and
// C * sum(x) <= Z_s.
std::vector<std::string> validate_policy(const Library& library, const RsuConfig& rsu,
                                         const CachePolicy& policy, std::size_t rsu_index = 0);

// Tolerance for "demand sums to one".
inline constexpr double kDemandSumTolerance = 1e-9;

// floor() that forgives representation error in quotients such as
// 50 m / (10 km/h expressed in m/s), which land a few ulps below an integer.
long floor_count(double value);

}  // namespace procache

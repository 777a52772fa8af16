#pragma once

// Vehicle mobility and demand: truncated-Gaussian velocities, contact times,
// Zipf demand profiles with per-vehicle rank permutations, and the demand and
// presence updates a downstream RSU applies after an upstream one served the
// vehicle.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "procache/model.hpp"

namespace procache {

inline constexpr double kKmhPerMps = 3.6;

inline double kmh_to_mps(double kmh) { return kmh / kKmhPerMps; }
inline double mps_to_kmh(double mps) { return mps * kKmhPerMps; }

// Deterministic random stream. Everything drawn from it goes through
// uniform01() or below(), both defined on raw engine bits, so a given seed
// yields the same values with any standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Independent stream for (seed, stream_id), e.g. one per vehicle.
    static Rng substream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next() { return engine_(); }
    // Uniform on the open interval (0, 1).
    double uniform01();
    // Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

private:
    explicit Rng(std::seed_seq& seq) : engine_(seq) {}
    std::mt19937_64 engine_;
};

// Normal law N(mean, variance) restricted to [lower, upper].
struct TruncatedGaussian {
    double mean = 0.0;
    double variance = 1.0;
    double lower = -1.0;
    double upper = 1.0;

    double stddev() const;
    // Throws ParameterError unless variance > 0 and lower < upper.
    void validate() const;

    bool operator==(const TruncatedGaussian&) const = default;
};

double velocity_pdf(const TruncatedGaussian& dist, double u);
double velocity_cdf(const TruncatedGaussian& dist, double u);
// Inverse of velocity_cdf on (0, 1).
double velocity_quantile(const TruncatedGaussian& dist, double probability);
// Inverse-CDF draw: one uniform from `rng` mapped through velocity_quantile.
double sample_velocity(const TruncatedGaussian& dist, Rng& rng);

// h_v^s = L_s / u_v in seconds. Throws ParameterError for non-positive velocity.
double contact_time(double coverage_length, double velocity);
double contact_time(const RsuConfig& rsu, const VehicleProfile& vehicle);

// p(m) = rank(m)^-e / sum_j j^-e with ranks 1..M. `ranks[m]` is the 1-based
// popularity rank of item m and must be a permutation of 1..M.
std::vector<double> zipf_profile(std::span<const std::size_t> ranks, double exponent);

// Uniformly random rank permutation (Fisher-Yates) for `item_count` items.
std::vector<std::size_t> random_ranks(std::size_t item_count, Rng& rng);

// One Zipf profile per vehicle; vehicle v uses zipf_exponents[v] and a fresh
// rank permutation, drawn from `rng` in vehicle-index order.
std::vector<std::vector<double>> generate_demands(const Library& library, std::size_t vehicle_count,
                                                  std::span<const double> zipf_exponents, Rng& rng);

// Zipf exponents used when a scenario does not list them: 0.6, 0.8, 1.0
// repeating over vehicles.
std::vector<double> default_zipf_exponents(std::size_t vehicle_count);

// Items a vehicle downloaded at an upstream RSU, ascending and unique.
class DeliveredSet {
public:
    DeliveredSet() = default;
    explicit DeliveredSet(std::vector<std::size_t> items);

    bool contains(std::size_t item) const;
    void insert(std::size_t item);
    void merge(const DeliveredSet& other);
    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }
    const std::vector<std::size_t>& items() const noexcept { return items_; }

    bool operator==(const DeliveredSet&) const = default;

private:
    std::vector<std::size_t> items_;
};

struct DemandUpdate {
    std::vector<double> demand;
    // Every unit of demand mass was already delivered; `demand` is all zeros.
    bool fully_served = false;
};

// Zero the delivered items and renormalize the rest by the remaining mass.
DemandUpdate update_demand(std::span<const double> demand, const DeliveredSet& delivered);

// 1 when the vehicle passed RSU `upstream_rsu` (nonzero presence there), else 0.
double update_presence(const VehicleProfile& vehicle, std::size_t upstream_rsu);

// Stochastic description of a vehicle population: velocities drawn from a
// truncated Gaussian given in km/h, demands from permuted Zipf laws.
struct MobilityModel {
    TruncatedGaussian velocity_kmh{55.0, 10.0, 10.0, 120.0};
    std::size_t vehicle_count = 3;
    std::vector<double> zipf_exponents;  // empty: default_zipf_exponents
    std::vector<double> presence;        // per RSU; empty: 1.0 everywhere

    std::vector<double> exponents() const;

    bool operator==(const MobilityModel&) const = default;
};

// Draw a vehicle population. Vehicle v uses its own substream of `seed`:
// first its velocity, then its rank permutation.
std::vector<VehicleProfile> realize_vehicles(const MobilityModel& model, const Library& library,
                                             std::size_t rsu_count, std::uint64_t seed);

}  // namespace procache

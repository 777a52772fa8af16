#include "procache/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

#include "procache/errors.hpp"

namespace procache {

// ---------------------------------------------------------------------------
// Rng

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng Rng::substream(std::uint64_t seed, std::uint64_t stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32), 0x70726f63U};
    return Rng(seq);
}

double Rng::uniform01() {
    // 53 random bits, shifted half a step off zero.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw ParameterError("Rng::below requires n > 0");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

// ---------------------------------------------------------------------------
// Truncated Gaussian

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

double upper_tail(double z) { return 0.5 * std::erfc(z / kSqrt2); }
double lower_tail(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

struct Standardized {
    double a;     // (lower - mean) / sigma
    double b;     // (upper - mean) / sigma
    double mass;  // Phi(b) - Phi(a)
};

Standardized standardize(const TruncatedGaussian& dist) {
    dist.validate();
    const double sigma = dist.stddev();
    Standardized s{(dist.lower - dist.mean) / sigma, (dist.upper - dist.mean) / sigma, 0.0};
    // Difference of whichever tails keeps precision.
    s.mass = s.a >= 0.0 ? upper_tail(s.a) - upper_tail(s.b) : lower_tail(s.b) - lower_tail(s.a);
    if (!(s.mass > 0.0)) {
        throw ParameterError("truncated Gaussian support carries no probability mass");
    }
    return s;
}

}  // namespace

double TruncatedGaussian::stddev() const { return std::sqrt(variance); }

void TruncatedGaussian::validate() const {
    if (!(variance > 0.0) || !std::isfinite(variance)) {
        std::ostringstream msg;
        msg << "truncated Gaussian variance must be positive, got " << variance;
        throw ParameterError(msg.str());
    }
    if (!(lower < upper) || !std::isfinite(lower) || !std::isfinite(upper) || !std::isfinite(mean)) {
        std::ostringstream msg;
        msg << "truncated Gaussian needs finite lower < upper, got [" << lower << ", " << upper << "]";
        throw ParameterError(msg.str());
    }
}

double velocity_pdf(const TruncatedGaussian& dist, double u) {
    const auto s = standardize(dist);
    if (u < dist.lower || u > dist.upper) return 0.0;
    const double sigma = dist.stddev();
    const double z = (u - dist.mean) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi) * s.mass);
}

double velocity_cdf(const TruncatedGaussian& dist, double u) {
    const auto s = standardize(dist);
    if (u <= dist.lower) return 0.0;
    if (u >= dist.upper) return 1.0;
    const double z = (u - dist.mean) / dist.stddev();
    const double num = s.a >= 0.0 ? upper_tail(s.a) - upper_tail(z) : lower_tail(z) - lower_tail(s.a);
    return std::clamp(num / s.mass, 0.0, 1.0);
}

double velocity_quantile(const TruncatedGaussian& dist, double probability) {
    const auto s = standardize(dist);
    if (!(probability > 0.0 && probability < 1.0)) {
        if (probability == 0.0) return dist.lower;
        if (probability == 1.0) return dist.upper;
        throw ParameterError("velocity_quantile needs a probability in [0, 1]");
    }
    double z;
    if (s.a >= 0.0) {
        // Work in the upper tail so supports far right of the mean keep precision.
        const double tail = upper_tail(s.a) - probability * s.mass;
        z = kSqrt2 * boost::math::erfc_inv(2.0 * tail);
    } else {
        const double head = lower_tail(s.a) + probability * s.mass;
        z = -kSqrt2 * boost::math::erfc_inv(2.0 * head);
    }
    return std::clamp(dist.mean + dist.stddev() * z, dist.lower, dist.upper);
}

double sample_velocity(const TruncatedGaussian& dist, Rng& rng) {
    return velocity_quantile(dist, rng.uniform01());
}

// ---------------------------------------------------------------------------
// Contact time

double contact_time(double coverage_length, double velocity) {
    if (!(velocity > 0.0)) {
        std::ostringstream msg;
        msg << "contact time needs a positive velocity, got " << velocity;
        throw ParameterError(msg.str());
    }
    return coverage_length / velocity;
}

double contact_time(const RsuConfig& rsu, const VehicleProfile& vehicle) {
    return contact_time(rsu.coverage_length, vehicle.velocity);
}

// ---------------------------------------------------------------------------
// Demand

std::vector<double> zipf_profile(std::span<const std::size_t> ranks, double exponent) {
    const std::size_t n = ranks.size();
    if (n == 0) throw ParameterError("zipf_profile needs at least one item");
    if (!(exponent > 0.0)) throw ParameterError("Zipf exponent must be positive");

    std::vector<double> weight_of_rank(n);
    double norm = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        weight_of_rank[r] = std::pow(static_cast<double>(r + 1), -exponent);
    }
    // Smallest terms first.
    for (std::size_t r = n; r-- > 0;) norm += weight_of_rank[r];

    std::vector<bool> seen(n, false);
    std::vector<double> p(n);
    for (std::size_t m = 0; m < n; ++m) {
        const std::size_t rank = ranks[m];
        if (rank < 1 || rank > n || seen[rank - 1]) {
            throw ParameterError("zipf_profile ranks must be a permutation of 1..M");
        }
        seen[rank - 1] = true;
        p[m] = weight_of_rank[rank - 1] / norm;
    }
    return p;
}

std::vector<std::size_t> random_ranks(std::size_t item_count, Rng& rng) {
    std::vector<std::size_t> ranks(item_count);
    for (std::size_t m = 0; m < item_count; ++m) ranks[m] = m + 1;
    for (std::size_t i = item_count; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(ranks[i - 1], ranks[j]);
    }
    return ranks;
}

std::vector<std::vector<double>> generate_demands(const Library& library, std::size_t vehicle_count,
                                                  std::span<const double> zipf_exponents, Rng& rng) {
    if (zipf_exponents.size() != vehicle_count) {
        throw ParameterError("generate_demands needs one Zipf exponent per vehicle");
    }
    std::vector<std::vector<double>> out;
    out.reserve(vehicle_count);
    for (std::size_t v = 0; v < vehicle_count; ++v) {
        const auto ranks = random_ranks(library.item_count, rng);
        out.push_back(zipf_profile(ranks, zipf_exponents[v]));
    }
    return out;
}

std::vector<double> default_zipf_exponents(std::size_t vehicle_count) {
    static constexpr double kCycle[] = {0.6, 0.8, 1.0};
    std::vector<double> out(vehicle_count);
    for (std::size_t v = 0; v < vehicle_count; ++v) out[v] = kCycle[v % 3];
    return out;
}

// ---------------------------------------------------------------------------
// Cooperative updates

DeliveredSet::DeliveredSet(std::vector<std::size_t> items) : items_(std::move(items)) {
    std::sort(items_.begin(), items_.end());
    items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
}

bool DeliveredSet::contains(std::size_t item) const {
    return std::binary_search(items_.begin(), items_.end(), item);
}

void DeliveredSet::insert(std::size_t item) {
    auto it = std::lower_bound(items_.begin(), items_.end(), item);
    if (it == items_.end() || *it != item) items_.insert(it, item);
}

void DeliveredSet::merge(const DeliveredSet& other) {
    for (std::size_t m : other.items_) insert(m);
}

DemandUpdate update_demand(std::span<const double> demand, const DeliveredSet& delivered) {
    DemandUpdate out;
    out.demand.assign(demand.begin(), demand.end());
    if (delivered.empty()) return out;

    double removed = 0.0;
    for (std::size_t m : delivered.items()) {
        if (m >= out.demand.size()) throw ParameterError("delivered item index outside the library");
        removed += out.demand[m];
        out.demand[m] = 0.0;
    }
    const double remaining = 1.0 - removed;
    if (remaining <= 1e-12) {
        std::fill(out.demand.begin(), out.demand.end(), 0.0);
        out.fully_served = true;
        return out;
    }
    for (double& p : out.demand) p /= remaining;
    return out;
}

double update_presence(const VehicleProfile& vehicle, std::size_t upstream_rsu) {
    if (upstream_rsu >= vehicle.presence.size()) return 0.0;
    return vehicle.presence[upstream_rsu] > 0.0 ? 1.0 : 0.0;
}

// ---------------------------------------------------------------------------
// Population generation

std::vector<double> MobilityModel::exponents() const {
    if (zipf_exponents.empty()) return default_zipf_exponents(vehicle_count);
    std::vector<double> out(vehicle_count);
    for (std::size_t v = 0; v < vehicle_count; ++v) out[v] = zipf_exponents[v % zipf_exponents.size()];
    return out;
}

std::vector<VehicleProfile> realize_vehicles(const MobilityModel& model, const Library& library,
                                             std::size_t rsu_count, std::uint64_t seed) {
    model.velocity_kmh.validate();
    const auto exps = model.exponents();
    std::vector<double> presence = model.presence;
    if (presence.empty()) presence.assign(rsu_count, 1.0);
    if (presence.size() != rsu_count) {
        throw ParameterError("mobility presence must list one probability per RSU");
    }

    std::vector<VehicleProfile> vehicles;
    vehicles.reserve(model.vehicle_count);
    for (std::size_t v = 0; v < model.vehicle_count; ++v) {
        Rng rng = Rng::substream(seed, v);
        VehicleProfile veh;
        veh.id = static_cast<int>(v);
        veh.velocity = kmh_to_mps(sample_velocity(model.velocity_kmh, rng));
        veh.presence = presence;
        const auto ranks = random_ranks(library.item_count, rng);
        veh.demand = zipf_profile(ranks, exps[v]);
        vehicles.push_back(std::move(veh));
    }
    return vehicles;
}

}  // namespace procache

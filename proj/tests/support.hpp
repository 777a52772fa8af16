#pragma once

// Test-only reference computations, written from the model definitions and
// sharing no code with the library, plus random instance generators.

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "procache/model.hpp"

namespace oracle {

struct Caps {
    long reactive = 0, cached = 0, backhaul = 0, total = 0;
};

inline long fl(double x) { return static_cast<long>(std::floor(x + 1e-9)); }

inline Caps caps(double h, double cs, double tau, long cached_count, long M) {
    Caps c;
    c.reactive = std::min(fl(h / (cs + tau)), M);
    c.cached = std::min(fl(h / cs), cached_count);
    const double rest = h - static_cast<double>(c.cached) * cs;
    c.backhaul = rest < 0 ? 0 : fl(rest / (cs + tau));
    c.total = std::min(c.cached + c.backhaul, M);
    return c;
}

struct Vehicle {
    double theta = 1.0;
    std::vector<double> p;
    double h = 0.0;
};

// sum_v theta_v sum_{S : |S| <= cap_v} q_v(S) t(S), enumerating every subset.
// `cached` empty means the reactive network.
inline double delay(const std::vector<Vehicle>& vs, const std::vector<int>& cached, double cs, double tau,
                    bool proactive) {
    double total = 0.0;
    for (const auto& v : vs) {
        const long M = static_cast<long>(v.p.size());
        long n_cached = 0;
        for (int x : cached) n_cached += x;
        const Caps c = caps(v.h, cs, tau, n_cached, M);
        const long cap = proactive ? c.total : c.reactive;
        double sum = 0.0;
        for (std::uint64_t S = 0; S < (std::uint64_t{1} << M); ++S) {
            const long k = std::popcount(S);
            if (k > cap) continue;
            double q = 1.0;
            long hits = 0;
            for (long m = 0; m < M; ++m) {
                const bool in = (S >> m) & 1U;
                q *= in ? v.p[m] : 1.0 - v.p[m];
                if (in && proactive && cached[m]) ++hits;
            }
            sum += q * (static_cast<double>(k) * (cs + tau) - tau * static_cast<double>(hits));
        }
        total += v.theta * sum;
    }
    return total;
}

inline long cap_sum(const std::vector<Vehicle>& vs, const std::vector<int>& cached, double cs, double tau,
                    bool proactive) {
    long n_cached = 0;
    for (int x : cached) n_cached += x;
    long s = 0;
    for (const auto& v : vs) {
        const Caps c = caps(v.h, cs, tau, n_cached, static_cast<long>(v.p.size()));
        s += proactive ? c.total : c.reactive;
    }
    return s;
}

inline double per_file(double w, long caps) { return caps == 0 ? 0.0 : w / static_cast<double>(caps); }

// Composite Simpson rule with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n = 20000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

inline double gauss(double x, double mu, double var) { return std::exp(-(x - mu) * (x - mu) / (2 * var)); }

inline double truncated_cdf(double u, double mu, double var, double lo, double hi) {
    if (u <= lo) return 0.0;
    if (u >= hi) return 1.0;
    auto f = [&](double x) { return gauss(x, mu, var); };
    return simpson(f, lo, u) / simpson(f, lo, hi);
}

}  // namespace oracle

namespace gen {

// Random normalized demand vector with strictly positive entries.
inline std::vector<double> demand(std::size_t M, std::mt19937_64& rng) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> p(M);
    double s = 0;
    for (auto& x : p) s += (x = e(rng) + 1e-3);
    for (auto& x : p) x /= s;
    return p;
}

struct Options {
    std::size_t min_items = 1, max_items = 10;
    std::size_t min_vehicles = 1, max_vehicles = 4;
    std::size_t rsus = 1;
    bool random_presence = true;
};

// Random scenario: coverage 20-200 m, C/alpha in [0.2, 2] s, tau in [0, 2] s,
// velocities 2-35 m/s, cache capacity 0..M items.
inline procache::Scenario scenario(std::mt19937_64& rng, const Options& o = {}) {
    using namespace procache;
    auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    auto pick = [&](std::size_t a, std::size_t b) { return std::uniform_int_distribution<std::size_t>(a, b)(rng); };

    Scenario sc;
    sc.library.item_count = pick(o.min_items, o.max_items);
    sc.library.item_size = 1e6;
    const std::size_t M = sc.library.item_count;
    for (std::size_t s = 0; s < o.rsus; ++s) {
        RsuConfig r;
        r.id = static_cast<int>(s);
        r.coverage_length = uni(20, 200);
        r.service_rate = sc.library.item_size / uni(0.2, 2.0);
        r.backhaul_latency = uni(0.0, 2.0);
        r.cache_capacity = static_cast<double>(pick(0, M)) * sc.library.item_size;
        sc.rsus.push_back(r);
    }
    const std::size_t V = pick(o.min_vehicles, o.max_vehicles);
    for (std::size_t v = 0; v < V; ++v) {
        VehicleProfile veh;
        veh.id = static_cast<int>(v);
        veh.velocity = uni(2, 35);
        for (std::size_t s = 0; s < o.rsus; ++s) veh.presence.push_back(o.random_presence ? uni(0, 1) : 1.0);
        veh.demand = demand(M, rng);
        sc.vehicles.push_back(veh);
    }
    return sc;
}

}  // namespace gen

#include <algorithm>
#include <bit>
#include <limits>
#include <random>

#include "doctest.h"
#include "procache/errors.hpp"
#include "procache/solvers.hpp"
#include "support.hpp"

using namespace procache;

namespace {

RsuConfig rsu(double coverage, double capacity_items, double cs = 1.0, double tau = 1.0) {
    RsuConfig r;
    r.coverage_length = coverage;
    r.service_rate = 1e6 / cs;
    r.backhaul_latency = tau;
    r.cache_capacity = capacity_items * 1e6;
    return r;
}

// Two RSUs, one vehicle with p = (0.9, 0.1) and 2.5 s of contact at each,
// caches of one item, C/alpha = tau = 1 s.
Scenario hand_traced() {
    Scenario sc;
    sc.library = {2, 1e6};
    sc.rsus = {rsu(25, 1), rsu(25, 1)};
    sc.rsus[1].id = 1;
    sc.vehicles = {{0, 10.0, {1.0, 1.0}, {0.9, 0.1}}};
    return sc;
}

std::vector<oracle::Vehicle> oracle_vehicles(const Scenario& sc, std::size_t s) {
    std::vector<oracle::Vehicle> out;
    for (const auto& v : sc.vehicles) {
        out.push_back({v.presence[s], v.demand, sc.rsus[s].coverage_length / v.velocity});
    }
    return out;
}

std::vector<int> flags(std::size_t M, std::uint64_t mask) {
    std::vector<int> f(M);
    for (std::size_t m = 0; m < M; ++m) f[m] = (mask >> m) & 1U;
    return f;
}

double oracle_per_file(const Scenario& sc, std::size_t s, const std::vector<oracle::Vehicle>& vs,
                       const std::vector<int>& cached) {
    const double cs = sc.rsus[s].item_service_time(sc.library), tau = sc.rsus[s].backhaul_latency;
    return oracle::per_file(oracle::delay(vs, cached, cs, tau, true), oracle::cap_sum(vs, cached, cs, tau, true));
}

// Best single-RSU objective over every placement that fits.
double oracle_noncoop_best(const Scenario& sc, std::size_t s) {
    const std::size_t M = sc.library.item_count, cap = sc.rsus[s].capacity_items(sc.library);
    const auto vs = oracle_vehicles(sc, s);
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < (1ULL << M); ++mask) {
        const auto n = static_cast<std::size_t>(std::popcount(mask));
        if (n > cap) continue;
        best = std::min(best, oracle_per_file(sc, s, vs, flags(M, mask)) + sc.cost_factor * static_cast<double>(n));
    }
    return best;
}

// Downstream visitors after the upstream RSU served everyone: most wanted
// items first, cached ones up to Mhat then uncached ones up to Mtilde.
std::vector<oracle::Vehicle> oracle_downstream(const Scenario& sc, std::uint64_t up_mask) {
    const std::size_t M = sc.library.item_count;
    const auto& up = sc.rsus[0];
    const double cs = up.item_service_time(sc.library), tau = up.backhaul_latency;
    std::vector<oracle::Vehicle> out;
    for (const auto& v : sc.vehicles) {
        std::vector<std::size_t> order(M);
        for (std::size_t m = 0; m < M; ++m) order[m] = m;
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v.demand[a] > v.demand[b]; });
        std::vector<int> got(M, 0);
        if (v.presence[0] > 0) {
            const auto c = oracle::caps(up.coverage_length / v.velocity, cs, tau, std::popcount(up_mask),
                                        static_cast<long>(M));
            long from_cache = c.cached, from_backhaul = c.backhaul;
            for (auto m : order) {
                const bool cached = (up_mask >> m) & 1U;
                if (cached && from_cache > 0) got[m] = 1, --from_cache;
            }
            for (auto m : order) {
                const bool cached = (up_mask >> m) & 1U;
                if (!cached && from_backhaul > 0) got[m] = 1, --from_backhaul;
            }
        }
        double left = 0;
        for (std::size_t m = 0; m < M; ++m) left += got[m] ? 0.0 : v.demand[m];
        std::vector<double> p(M, 0.0);
        if (left > 1e-12) {
            for (std::size_t m = 0; m < M; ++m) p[m] = got[m] ? 0.0 : v.demand[m] / left;
        }
        out.push_back({v.presence[0] > 0 ? 1.0 : 0.0, p, sc.rsus[1].coverage_length / v.velocity});
    }
    return out;
}

double oracle_coop_best(const Scenario& sc) {
    const std::size_t M = sc.library.item_count;
    const std::size_t cap_up = sc.rsus[0].capacity_items(sc.library), cap_down = sc.rsus[1].capacity_items(sc.library);
    const auto up_vs = oracle_vehicles(sc, 0);
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t up = 0; up < (1ULL << M); ++up) {
        const auto nu = static_cast<std::size_t>(std::popcount(up));
        if (nu > cap_up) continue;
        const double head = oracle_per_file(sc, 0, up_vs, flags(M, up)) + sc.cost_factor * static_cast<double>(nu);
        const auto down_vs = oracle_downstream(sc, up);
        for (std::uint64_t down = 0; down < (1ULL << M); ++down) {
            const auto nd = static_cast<std::size_t>(std::popcount(down));
            if (nd > cap_down) continue;
            best = std::min(best, head + oracle_per_file(sc, 1, down_vs, flags(M, down)) +
                                      sc.cost_factor * static_cast<double>(nd));
        }
    }
    return best;
}

bool feasible(const Scenario& sc, const SolveResult& r) {
    return validate_scenario(sc, r.policies).empty();
}

}  // namespace

TEST_CASE("contact weights are normalized") {
    const std::vector<Visitor> vs{{1.0, {1.0}, 1.0}, {1.0, {1.0}, 3.0}};
    const auto w = contact_weights(vs);
    CHECK(w[0] == doctest::Approx(0.25));
    CHECK(w[1] == doctest::Approx(0.75));
    const std::vector<Visitor> still{{1.0, {1.0}, 0.0}};
    CHECK(contact_weights(still) == std::vector<double>{0.0});
}

TEST_CASE("item scores weight demand by presence and contact share") {
    // pi = 0.25 * (0.7, 0.3) + 0.75 * 0.5 * (0.2, 0.8)
    const std::vector<Visitor> vs{{1.0, {0.7, 0.3}, 1.0}, {0.5, {0.2, 0.8}, 3.0}};
    const auto s = item_scores(vs, 2);
    CHECK(s[0].item == 1);
    CHECK(s[0].score == doctest::Approx(0.25 * 0.3 + 0.375 * 0.8));
    CHECK(s[1].score == doctest::Approx(0.25 * 0.7 + 0.375 * 0.2));

    const std::vector<Visitor> tie{{1.0, {0.5, 0.5}, 1.0}};
    CHECK(item_scores(tie, 2)[0].item == 0);
}

TEST_CASE("greedy fill respects capacity and the throughput guard") {
    Scenario sc;
    sc.library = {4, 1e6};
    sc.rsus = {rsu(50, 10)};
    sc.vehicles = {{0, 20.0, {1.0}, {0.1, 0.4, 0.3, 0.2}}};  // h = 2.5 s: floor(alpha h / C) = 2
    const auto vs = visitors_at(sc, 0);
    CHECK(greedy_item_limit(sc.rsus[0], sc.library, vs) == 2);
    CHECK(greedy_placement(sc.rsus[0], sc.library, vs).cached_items() == std::vector<std::size_t>{1, 2});

    sc.rsus[0].cache_capacity = 1e6;
    CHECK(greedy_noncoop(sc).policies[0].cached_items() == std::vector<std::size_t>{1});
    sc.rsus[0].cache_capacity = 0;
    CHECK(greedy_noncoop(sc).policies[0].cached_count() == 0);
}

TEST_CASE("exhaustive search matches an independent brute-force minimum") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 40; ++i) {
        auto sc = gen::scenario(rng, {.min_items = 1, .max_items = 7});
        sc.cost_factor = std::uniform_real_distribution<double>(0, 0.05)(rng);
        const auto r = solve_exhaustive_noncoop(sc, 0);
        CHECK(feasible(sc, r));
        CHECK(r.objective_value == doctest::Approx(oracle_noncoop_best(sc, 0)).epsilon(1e-9));
        CHECK(r.evaluations >= 1);
    }
}

TEST_CASE("exhaustive ties go to the smallest mask") {
    Scenario sc;
    sc.library = {3, 1e6};
    sc.rsus = {rsu(50, 1)};
    sc.vehicles = {{0, 10.0, {1.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3}}};
    CHECK(solve_exhaustive_noncoop(sc).policies[0].mask() == 0b001);
}

TEST_CASE("gamma trades delay against cached items") {
    Scenario sc;
    sc.library = {6, 1e6};
    sc.rsus = {rsu(200, 6)};
    sc.vehicles = {{0, 10.0, {1.0}, {0.3, 0.25, 0.2, 0.1, 0.1, 0.05}}};
    CHECK(solve_exhaustive_noncoop(sc).policies[0].cached_count() == 6);
    sc.cost_factor = 100.0;
    CHECK(solve_exhaustive_noncoop(sc).policies[0].cached_count() == 0);
}

TEST_CASE("exhaustive objective never exceeds greedy") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 60; ++i) {
        auto sc = gen::scenario(rng, {.min_items = 1, .max_items = 10, .rsus = 2});
        sc.cost_factor = i % 3 == 0 ? 0.0 : 0.01;
        const auto g = greedy_noncoop(sc);
        const auto e = solve_exhaustive_noncoop(sc);
        CHECK(feasible(sc, g));
        CHECK(feasible(sc, e));
        CHECK(e.objective_value <= g.objective_value + 1e-12);

        const auto gc = greedy_coop(sc);
        CHECK(feasible(sc, gc));
        if (sc.library.item_count <= 6) {
            const auto ec = solve_exhaustive_coop(sc);
            CHECK(feasible(sc, ec));
            CHECK(ec.objective_value <= gc.objective_value + 1e-12);
        }
    }
}

TEST_CASE("greedy output respects the throughput guard on every instance") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 60; ++i) {
        const auto sc = gen::scenario(rng, {.rsus = 3});
        const auto r = greedy_coop(sc);
        const auto vis = cooperative_visitors(sc, r.policies);
        for (std::size_t s = 0; s < sc.rsus.size(); ++s) {
            CHECK(r.policies[s].cached_count() <= greedy_item_limit(sc.rsus[s], sc.library, vis[s]));
        }
    }
}

TEST_CASE("solvers are deterministic") {
    std::mt19937_64 rng(5);
    const auto sc = gen::scenario(rng, {.min_items = 6, .max_items = 6, .rsus = 2});
    CHECK(solve_exhaustive_coop(sc).policies == solve_exhaustive_coop(sc).policies);
    CHECK(greedy_coop(sc).objective_value == greedy_coop(sc).objective_value);
    CHECK(solve_exhaustive_noncoop(sc).policies == solve_exhaustive_noncoop(sc).policies);
}

TEST_CASE("scaling contact times leaves the greedy order unchanged") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 30; ++i) {
        auto sc = gen::scenario(rng);
        const auto before = item_scores(visitors_at(sc, 0), sc.library.item_count);
        for (auto& v : sc.vehicles) v.velocity /= 3.7;
        const auto after = item_scores(visitors_at(sc, 0), sc.library.item_count);
        for (std::size_t k = 0; k < before.size(); ++k) CHECK(before[k].item == after[k].item);
    }
}

TEST_CASE("delivery takes the most wanted cached items, then uncached ones") {
    const Library lib{6, 1e6};
    const auto r = rsu(50, 6);
    const std::vector<double> p{0.05, 0.1, 0.15, 0.1, 0.2, 0.4};
    const std::array<std::size_t, 2> cached_items{2, 5};
    const auto cached = CachePolicy::from_items(6, cached_items);

    // h = 1.5: Mhat = 1, Mtilde = 0.
    CHECK(simulate_delivery(r, lib, cached, p, 1.5).items() == std::vector<std::size_t>{5});
    // h = 6: Mhat = 2, Mtilde = floor(4 / 2) = 2, ties on 0.1 go to the lower index.
    CHECK(simulate_delivery(r, lib, cached, p, 6.0).items() == std::vector<std::size_t>{1, 2, 4, 5});
    // Too short for anything.
    CHECK(simulate_delivery(r, lib, cached, p, 0.5).empty());
    // Ample contact: everything.
    CHECK(simulate_delivery(r, lib, cached, p, 100.0).size() == 6);
    // Items already held are skipped.
    CHECK(simulate_delivery(r, lib, cached, p, 1.5, DeliveredSet({5})).items() == std::vector<std::size_t>{2});
}

TEST_CASE("hand-traced cooperative greedy") {
    const auto sc = hand_traced();
    const auto r = greedy_coop(sc);
    CHECK(r.policies[0].cached_items() == std::vector<std::size_t>{0});
    CHECK(r.policies[1].cached_items() == std::vector<std::size_t>{1});

    const auto vis = cooperative_visitors(sc, r.policies);
    CHECK(vis[1][0].demand[0] == 0.0);
    CHECK(vis[1][0].demand[1] == doctest::Approx(1.0));
    CHECK(vis[1][0].presence == 1.0);

    // Upstream: {0} with q = 0.81 in 1 s, {1} with q = 0.01 in 2 s. Downstream: {1} surely, 1 s.
    CHECK(r.objective_value == doctest::Approx(0.83 + 1.0));
    const std::vector<CachePolicy> twice{CachePolicy::from_mask(2, 1), CachePolicy::from_mask(2, 1)};
    CHECK(chain_objective(sc, twice) == doctest::Approx(0.83 + 2.0));
    CHECK(objective_coop(sc, 1, twice[0], twice[1]) == doctest::Approx(0.83 + 2.0));
}

TEST_CASE("cooperative model without information change equals the independent objectives") {
    auto sc = hand_traced();
    sc.rsus[0].coverage_length = 5;  // h = 0.5 s upstream: nothing is delivered
    const std::vector<CachePolicy> ps{CachePolicy::from_mask(2, 1), CachePolicy::from_mask(2, 2)};
    CHECK(chain_objective(sc, ps) == doctest::Approx(objective_noncoop(sc, 0, ps[0]) + objective_noncoop(sc, 1, ps[1])));

    // Empty upstream cache and no backhaul budget: downstream greedy is the independent one.
    CHECK(greedy_coop(sc).policies[1] == greedy_noncoop(sc, 1).policies[0]);
}

TEST_CASE("fully served vehicles stop contributing downstream") {
    auto sc = hand_traced();
    sc.rsus[0].cache_capacity = 2e6;
    sc.rsus[0].coverage_length = 1000;  // plenty of contact: both items delivered
    const std::vector<CachePolicy> ps{CachePolicy::from_mask(2, 3), CachePolicy(2)};
    const auto vis = cooperative_visitors(sc, ps);
    CHECK(vis[1][0].demand == std::vector<double>{0.0, 0.0});
    for (const auto& s : item_scores(vis[1], 2)) CHECK(s.score == 0.0);
}

TEST_CASE("joint cooperative search matches an independent brute-force minimum") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 25; ++i) {
        auto sc = gen::scenario(rng, {.min_items = 1, .max_items = 5, .max_vehicles = 3, .rsus = 2});
        sc.cost_factor = i % 2 ? 0.02 : 0.0;
        const auto r = solve_exhaustive_coop(sc);
        CHECK(r.objective_value == doctest::Approx(oracle_coop_best(sc)).epsilon(1e-9));
    }
}

TEST_CASE("joint optimum never loses to independent optima under the cooperative model") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 40; ++i) {
        auto sc = gen::scenario(rng, {.min_items = 2, .max_items = 8, .rsus = 2});
        sc.cost_factor = 0.01;
        const auto joint = solve_exhaustive_coop(sc);
        const auto independent = solve_exhaustive_noncoop(sc);
        CHECK(joint.objective_value <= chain_objective(sc, independent.policies) + 1e-12);
    }
}

TEST_CASE("cooperative greedy beats independent greedy on average") {
    std::mt19937_64 rng(1234);
    double coop = 0, independent = 0;
    int violations = 0;
    const int n = 60;
    for (int i = 0; i < n; ++i) {
        auto sc = gen::scenario(rng, {.min_items = 4, .max_items = 12, .rsus = 2, .random_presence = false});
        const double c = chain_objective(sc, greedy_coop(sc).policies);
        const double g = chain_objective(sc, greedy_noncoop(sc).policies);
        coop += c;
        independent += g;
        violations += c > g + 1e-12;
    }
    MESSAGE("per-instance violations: " << violations << " of " << n);
    CHECK(coop / n <= independent / n);
}

TEST_CASE("search guards") {
    auto sc = hand_traced();
    sc.rsus.pop_back();
    for (auto& v : sc.vehicles) v.presence.pop_back();
    CHECK_THROWS_AS(greedy_coop(sc), ParameterError);
    CHECK_THROWS_AS(solve_exhaustive_coop(sc), ParameterError);
    CHECK_THROWS_AS(objective_noncoop(sc, 3, CachePolicy(2)), ParameterError);

    Scenario big = hand_traced();
    big.library.item_count = 13;
    for (auto& v : big.vehicles) v.demand = std::vector<double>(13, 1.0 / 13);
    CHECK_THROWS_AS(solve_exhaustive_coop(big), CapacityError);
    big.library.item_count = 23;
    for (auto& v : big.vehicles) v.demand = std::vector<double>(23, 1.0 / 23);
    CHECK_THROWS_AS(solve_exhaustive_noncoop(big, 0), CapacityError);
}

TEST_CASE("capacity zero yields empty placements") {
    auto sc = hand_traced();
    for (auto& r : sc.rsus) r.cache_capacity = 0;
    for (const auto& p : solve_exhaustive_coop(sc).policies) CHECK(p.cached_count() == 0);
    for (const auto& p : greedy_coop(sc).policies) CHECK(p.cached_count() == 0);
}

TEST_CASE("mode names") {
    CHECK(to_string(Mode::cooperative) == "cooperative");
    CHECK(to_string(Mode::non_cooperative) == "non_cooperative");
}

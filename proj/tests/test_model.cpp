#include <array>

#include "doctest.h"
#include "procache/errors.hpp"
#include "procache/model.hpp"

using namespace procache;

namespace {

Scenario two_item_scenario() {
    Scenario sc;
    sc.library = {2, 1000.0};
    RsuConfig r;
    r.coverage_length = 50;
    r.cache_capacity = 1000;
    r.service_rate = 1000;
    r.backhaul_latency = 1;
    sc.rsus = {r};
    sc.vehicles = {{7, 10.0, {1.0}, {0.9, 0.1}}};
    return sc;
}

bool mentions(const std::vector<std::string>& v, std::string_view needle) {
    for (const auto& s : v) {
        if (s.find(needle) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("service times follow item size and rate") {
    const Library lib{4, 2e6};
    RsuConfig r;
    r.service_rate = 1e6;
    r.backhaul_latency = 0.5;
    CHECK(r.item_service_time(lib) == doctest::Approx(2.0));
    CHECK(r.backhaul_service_time(lib) == doctest::Approx(2.5));
    r.cache_capacity = 5e6;
    CHECK(r.capacity_items(lib) == 2);
}

TEST_CASE("floor_count absorbs representation error only") {
    CHECK(floor_count(2.9999999999999996) == 3);
    CHECK(floor_count(2.99) == 2);
    CHECK(floor_count(0.0) == 0);
    CHECK(floor_count(-0.5) == -1);
    // 50 m at 10 km/h lands a hair under 18 s.
    CHECK(floor_count(50.0 / (10.0 / 3.6)) == 18);
}

TEST_CASE("cache policy conversions") {
    const std::array<std::size_t, 2> items{1, 3};
    const auto p = CachePolicy::from_items(5, items);
    CHECK(p.cached_count() == 2);
    CHECK(p.mask() == 0b01010);
    CHECK(p.cached_items() == std::vector<std::size_t>{1, 3});
    CHECK(CachePolicy::from_mask(5, 0b01010) == p);
    CHECK(p.contains(3));
    CHECK_FALSE(p.contains(0));
    CHECK_THROWS_AS(p.contains(5), std::out_of_range);
    CHECK_THROWS_AS(CachePolicy::from_mask(65, 1), ParameterError);
}

TEST_CASE("valid scenario has no violations") {
    CHECK(validate_scenario(two_item_scenario()).empty());
}

TEST_CASE("demand that does not sum to one names the vehicle") {
    auto sc = two_item_scenario();
    sc.vehicles[0].demand = {0.5, 0.4};
    const auto v = validate_scenario(sc);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("vehicles[0] (id 7)") != std::string::npos);
    CHECK(v[0].find("sum to 1") != std::string::npos);
}

TEST_CASE("demand within tolerance of one is accepted") {
    auto sc = two_item_scenario();
    sc.vehicles[0].demand = {0.9 + 5e-10, 0.1};
    CHECK(validate_scenario(sc).empty());
}

TEST_CASE("missing demand and bad fields are all reported") {
    auto sc = two_item_scenario();
    sc.vehicles[0].demand.clear();
    sc.vehicles[0].velocity = 0;
    sc.vehicles[0].presence = {1.5};
    sc.rsus[0].service_rate = 0;
    sc.cost_factor = -1;
    const auto v = validate_scenario(sc);
    CHECK(v.size() == 5);
    CHECK(mentions(v, ".demand: expected 2 entries, got 0"));
    CHECK(mentions(v, ".velocity"));
    CHECK(mentions(v, ".presence[0]"));
    CHECK(mentions(v, "service_rate"));
    CHECK(mentions(v, "cost_factor"));
}

TEST_CASE("presence must list every RSU") {
    auto sc = two_item_scenario();
    sc.rsus.push_back(sc.rsus[0]);
    CHECK(mentions(validate_scenario(sc), ".presence: expected 2 entries, got 1"));
}

TEST_CASE("policy over capacity cites the cache constraint") {
    const auto sc = two_item_scenario();
    const std::vector<CachePolicy> policies{CachePolicy::from_mask(2, 0b11)};
    const auto v = validate_scenario(sc, policies);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("C*sum(x) <= Z") != std::string::npos);
}

TEST_CASE("policy entries must be binary and sized to the library") {
    const auto sc = two_item_scenario();
    CHECK(mentions(validate_policy(sc.library, sc.rsus[0], CachePolicy(std::vector<std::uint8_t>{2, 0}), 0),
                   "must be 0 or 1"));
    CHECK(mentions(validate_policy(sc.library, sc.rsus[0], CachePolicy(3), 0), "expected 2 entries"));
    CHECK(mentions(validate_scenario(sc, std::vector<CachePolicy>{}), "one per RSU"));
}

TEST_CASE("ValidationError carries the violation list") {
    const ValidationError e({"a", "b"});
    CHECK(e.violations().size() == 2);
    CHECK(std::string(e.what()).find("2 violations") != std::string::npos);
}

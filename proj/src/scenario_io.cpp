#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "procache/errors.hpp"
#include "procache/experiment.hpp"

namespace procache {

using nlohmann::json;

namespace {

constexpr double kBytesPerKb = 1000.0;

// Field access with the path of the field in every error message.
class Reader {
public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) fail("expected an object");
    }

    void allow(std::initializer_list<std::string_view> keys) const {
        const std::set<std::string_view> known(keys);
        for (const auto& [key, _] : node_.items()) {
            if (!known.count(key)) fail_at(key, "unknown field");
        }
    }

    bool has(std::string_view key) const { return node_.contains(key); }

    double number(std::string_view key) const {
        const auto& v = at(key);
        if (!v.is_number()) fail_at(key, "expected a number");
        return v.get<double>();
    }

    std::optional<double> optional_number(std::string_view key) const {
        if (!has(key)) return std::nullopt;
        return number(key);
    }

    std::uint64_t unsigned_integer(std::string_view key) const {
        const auto& v = at(key);
        if (!v.is_number_unsigned()) fail_at(key, "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    std::string string(std::string_view key) const {
        const auto& v = at(key);
        if (!v.is_string()) fail_at(key, "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(std::string_view key) const {
        const auto& v = at(key);
        if (!v.is_array()) fail_at(key, "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) fail_at(key, "entry " + std::to_string(i) + " is not a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    const json& array(std::string_view key) const {
        const auto& v = at(key);
        if (!v.is_array()) fail_at(key, "expected an array");
        return v;
    }

    Reader child(std::string_view key) const { return Reader(at(key), field(key)); }

    std::string field(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError((path_.empty() ? std::string("document") : path_) + ": " + what);
    }

    [[noreturn]] void fail_at(std::string_view key, const std::string& what) const {
        throw ConfigError(field(key) + ": " + what);
    }

private:
    const json& at(std::string_view key) const {
        auto it = node_.find(key);
        if (it == node_.end()) fail_at(key, "missing required field");
        return *it;
    }

    const json& node_;
    std::string path_;
};

json parse_json(std::string_view text, std::string_view what) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

Library read_library(const Reader& r) {
    r.allow({"item_count", "item_size_bytes", "item_size_kb"});
    Library lib;
    lib.item_count = r.unsigned_integer("item_count");
    if (r.has("item_size_bytes") == r.has("item_size_kb")) {
        r.fail("give exactly one of item_size_bytes, item_size_kb");
    }
    lib.item_size = r.has("item_size_bytes") ? r.number("item_size_bytes")
                                             : r.number("item_size_kb") * kBytesPerKb;
    return lib;
}

RsuConfig read_rsu(const Reader& r, const Library& lib, std::size_t index) {
    r.allow({"id", "coverage_length_m", "cache_capacity_bytes", "cache_capacity_files",
             "service_rate_bytes_per_s", "service_rate_kb_per_s", "backhaul_latency_s"});
    RsuConfig rsu;
    rsu.id = r.has("id") ? static_cast<int>(r.unsigned_integer("id")) : static_cast<int>(index);
    rsu.coverage_length = r.number("coverage_length_m");
    if (r.has("cache_capacity_bytes") == r.has("cache_capacity_files")) {
        r.fail("give exactly one of cache_capacity_bytes, cache_capacity_files");
    }
    rsu.cache_capacity = r.has("cache_capacity_bytes") ? r.number("cache_capacity_bytes")
                                                       : r.number("cache_capacity_files") * lib.item_size;
    if (r.has("service_rate_bytes_per_s") == r.has("service_rate_kb_per_s")) {
        r.fail("give exactly one of service_rate_bytes_per_s, service_rate_kb_per_s");
    }
    rsu.service_rate = r.has("service_rate_bytes_per_s") ? r.number("service_rate_bytes_per_s")
                                                         : r.number("service_rate_kb_per_s") * kBytesPerKb;
    rsu.backhaul_latency = r.number("backhaul_latency_s");
    return rsu;
}

MobilityModel read_mobility(const Reader& r, std::size_t rsu_count) {
    r.allow({"vehicle_count", "velocity_mean_kmh", "velocity_variance_kmh2", "velocity_min_kmh",
             "velocity_max_kmh", "zipf_exponents", "presence"});
    MobilityModel m;
    m.vehicle_count = r.unsigned_integer("vehicle_count");
    m.velocity_kmh.mean = r.number("velocity_mean_kmh");
    m.velocity_kmh.variance = r.number("velocity_variance_kmh2");
    m.velocity_kmh.lower = r.number("velocity_min_kmh");
    m.velocity_kmh.upper = r.number("velocity_max_kmh");
    if (r.has("zipf_exponents")) {
        m.zipf_exponents = r.numbers("zipf_exponents");
        for (double e : m.zipf_exponents) {
            if (!(e > 0.0)) r.fail_at("zipf_exponents", "exponents must be positive");
        }
    }
    if (r.has("presence")) {
        m.presence = r.numbers("presence");
        if (m.presence.size() != rsu_count) r.fail_at("presence", "expected one entry per RSU");
    }
    try {
        m.velocity_kmh.validate();
    } catch (const ParameterError& e) {
        r.fail(e.what());
    }
    return m;
}

VehicleProfile read_vehicle(const Reader& r, std::size_t index, std::size_t rsu_count) {
    r.allow({"id", "velocity_mps", "velocity_kmh", "presence", "demand"});
    VehicleProfile v;
    v.id = r.has("id") ? static_cast<int>(r.unsigned_integer("id")) : static_cast<int>(index);
    if (r.has("velocity_mps") == r.has("velocity_kmh")) {
        r.fail("give exactly one of velocity_mps, velocity_kmh");
    }
    v.velocity = r.has("velocity_mps") ? r.number("velocity_mps") : kmh_to_mps(r.number("velocity_kmh"));
    v.presence = r.has("presence") ? r.numbers("presence") : std::vector<double>(rsu_count, 1.0);
    // A missing demand vector is left empty; validation reports it per vehicle.
    if (r.has("demand")) v.demand = r.numbers("demand");
    return v;
}

}  // namespace

Scenario ScenarioConfig::realize(std::uint64_t seed) const {
    Scenario out = scenario;
    out.rng_seed = seed;
    if (mobility) out.vehicles = realize_vehicles(*mobility, out.library, out.rsus.size(), seed);
    return out;
}

ScenarioConfig parse_scenario_config(std::string_view text) {
    const json doc = parse_json(text, "scenario");
    const Reader root(doc, "");
    root.allow({"name", "library", "rsus", "cost_factor", "rng_seed", "mobility", "vehicles"});

    ScenarioConfig config;
    config.name = root.has("name") ? root.string("name") : std::string();
    Scenario& sc = config.scenario;
    sc.library = read_library(root.child("library"));

    const auto& rsus = root.array("rsus");
    for (std::size_t s = 0; s < rsus.size(); ++s) {
        sc.rsus.push_back(read_rsu(Reader(rsus[s], "rsus[" + std::to_string(s) + "]"), sc.library, s));
    }
    sc.cost_factor = root.optional_number("cost_factor").value_or(0.0);
    sc.rng_seed = root.has("rng_seed") ? root.unsigned_integer("rng_seed") : 0;

    if (root.has("mobility")) config.mobility = read_mobility(root.child("mobility"), sc.rsus.size());

    if (root.has("vehicles")) {
        const auto& vehicles = root.array("vehicles");
        for (std::size_t v = 0; v < vehicles.size(); ++v) {
            sc.vehicles.push_back(
                read_vehicle(Reader(vehicles[v], "vehicles[" + std::to_string(v) + "]"), v, sc.rsus.size()));
        }
    } else if (config.mobility) {
        sc.vehicles = realize_vehicles(*config.mobility, sc.library, sc.rsus.size(), sc.rng_seed);
    } else {
        root.fail("needs either a vehicles list or a mobility model");
    }

    auto violations = validate_scenario(sc);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return config;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return parse_scenario_config(text);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

Scenario load_scenario(const std::filesystem::path& path) { return load_scenario_config(path).scenario; }

std::string dump_scenario_config(const ScenarioConfig& config) {
    const Scenario& sc = config.scenario;
    json doc = json::object();
    if (!config.name.empty()) doc["name"] = config.name;
    doc["library"] = {{"item_count", sc.library.item_count}, {"item_size_bytes", sc.library.item_size}};
    json rsus = json::array();
    for (const auto& r : sc.rsus) {
        rsus.push_back({{"id", r.id},
                        {"coverage_length_m", r.coverage_length},
                        {"cache_capacity_bytes", r.cache_capacity},
                        {"service_rate_bytes_per_s", r.service_rate},
                        {"backhaul_latency_s", r.backhaul_latency}});
    }
    doc["rsus"] = std::move(rsus);
    doc["cost_factor"] = sc.cost_factor;
    doc["rng_seed"] = sc.rng_seed;
    if (config.mobility) {
        const auto& m = *config.mobility;
        json mob = {{"vehicle_count", m.vehicle_count},
                    {"velocity_mean_kmh", m.velocity_kmh.mean},
                    {"velocity_variance_kmh2", m.velocity_kmh.variance},
                    {"velocity_min_kmh", m.velocity_kmh.lower},
                    {"velocity_max_kmh", m.velocity_kmh.upper}};
        if (!m.zipf_exponents.empty()) mob["zipf_exponents"] = m.zipf_exponents;
        if (!m.presence.empty()) mob["presence"] = m.presence;
        doc["mobility"] = std::move(mob);
    }
    json vehicles = json::array();
    for (const auto& v : sc.vehicles) {
        vehicles.push_back({{"id", v.id},
                            {"velocity_mps", v.velocity},
                            {"presence", v.presence},
                            {"demand", v.demand}});
    }
    doc["vehicles"] = std::move(vehicles);
    return doc.dump(2) + "\n";
}

void save_scenario_config(const ScenarioConfig& config, const std::filesystem::path& path) {
    write_file(path, dump_scenario_config(config));
}

// ---------------------------------------------------------------------------
// Sweep spec

std::string_view to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::reactive: return "reactive";
        case Scheme::noncoop_greedy: return "noncoop_greedy";
        case Scheme::noncoop_optimal: return "noncoop_optimal";
        case Scheme::coop_greedy: return "coop_greedy";
        case Scheme::coop_optimal: return "coop_optimal";
    }
    return "unknown";
}

Scheme parse_scheme(std::string_view name) {
    for (Scheme s : {Scheme::reactive, Scheme::noncoop_greedy, Scheme::noncoop_optimal,
                     Scheme::coop_greedy, Scheme::coop_optimal}) {
        if (to_string(s) == name) return s;
    }
    throw ConfigError("unknown scheme '" + std::string(name) +
                      "' (expected reactive, noncoop_greedy, noncoop_optimal, coop_greedy, coop_optimal)");
}

std::vector<std::string> SweepSpec::violations() const {
    std::vector<std::string> out;
    if (cache_sizes.empty()) out.push_back("cache_sizes: must not be empty");
    if (gammas.empty()) out.push_back("gammas: must not be empty");
    for (double g : gammas) {
        if (!(g >= 0.0)) out.push_back("gammas: every cost factor must be >= 0");
    }
    if (schemes.empty()) out.push_back("schemes: must not be empty");
    if (replications < 1) out.push_back("replications: must be >= 1");
    return out;
}

SweepSpec parse_sweep_spec(std::string_view text) {
    const json doc = parse_json(text, "sweep spec");
    const Reader r(doc, "");
    r.allow({"cache_sizes", "gammas", "schemes", "replications", "base_seed"});
    SweepSpec spec;
    const auto& sizes = r.array("cache_sizes");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (!sizes[i].is_number_unsigned()) r.fail_at("cache_sizes", "entries must be non-negative integers");
        spec.cache_sizes.push_back(sizes[i].get<std::size_t>());
    }
    if (r.has("gammas")) spec.gammas = r.numbers("gammas");
    const auto& schemes = r.array("schemes");
    for (const auto& s : schemes) {
        if (!s.is_string()) r.fail_at("schemes", "entries must be strings");
        spec.schemes.push_back(parse_scheme(s.get<std::string>()));
    }
    if (r.has("replications")) spec.replications = r.unsigned_integer("replications");
    if (r.has("base_seed")) spec.base_seed = r.unsigned_integer("base_seed");
    auto bad = spec.violations();
    if (!bad.empty()) throw ValidationError(std::move(bad));
    return spec;
}

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return parse_sweep_spec(text);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace procache

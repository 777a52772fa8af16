#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "procache/delay.hpp"
#include "procache/errors.hpp"
#include "procache/experiment.hpp"
#include "procache/solvers.hpp"

namespace py = pybind11;
using namespace procache;

namespace {

CachePolicy policy_from(const Scenario& sc, const std::vector<std::size_t>& items) {
    return CachePolicy::from_items(sc.library.item_count, items);
}

std::vector<std::size_t> items_of(const CachePolicy& p) { return p.cached_items(); }

py::dict solve_dict(const SolveResult& r) {
    py::list policies;
    for (const auto& p : r.policies) policies.append(items_of(p));
    py::dict d;
    d["policies"] = policies;
    d["objective"] = r.objective_value;
    d["evaluations"] = r.evaluations;
    return d;
}

}  // namespace

PYBIND11_MODULE(_procache, m) {
    m.doc() = "Proactive RSU caching: delay model, placement solvers and sweeps";

    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<CapacityError>(m, "CapacityError", PyExc_OverflowError);
    py::register_exception<UndefinedGainError>(m, "UndefinedGainError", PyExc_ArithmeticError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

    py::class_<Library>(m, "Library")
        .def(py::init<>())
        .def_readwrite("item_count", &Library::item_count)
        .def_readwrite("item_size", &Library::item_size);

    py::class_<RsuConfig>(m, "RsuConfig")
        .def(py::init<>())
        .def_readwrite("id", &RsuConfig::id)
        .def_readwrite("coverage_length", &RsuConfig::coverage_length)
        .def_readwrite("cache_capacity", &RsuConfig::cache_capacity)
        .def_readwrite("service_rate", &RsuConfig::service_rate)
        .def_readwrite("backhaul_latency", &RsuConfig::backhaul_latency);

    py::class_<VehicleProfile>(m, "VehicleProfile")
        .def(py::init<>())
        .def_readwrite("id", &VehicleProfile::id)
        .def_readwrite("velocity", &VehicleProfile::velocity)
        .def_readwrite("presence", &VehicleProfile::presence)
        .def_readwrite("demand", &VehicleProfile::demand);

    py::class_<Scenario>(m, "Scenario")
        .def(py::init<>())
        .def_readwrite("library", &Scenario::library)
        .def_readwrite("rsus", &Scenario::rsus)
        .def_readwrite("vehicles", &Scenario::vehicles)
        .def_readwrite("cost_factor", &Scenario::cost_factor)
        .def_readwrite("rng_seed", &Scenario::rng_seed);

    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def_readwrite("name", &ScenarioConfig::name)
        .def_readwrite("scenario", &ScenarioConfig::scenario)
        .def("realize", &ScenarioConfig::realize, py::arg("seed"));

    m.def("load_scenario_config", &load_scenario_config, py::arg("path"));
    m.def("parse_scenario_config", &parse_scenario_config, py::arg("text"));
    m.def("dump_scenario_config", &dump_scenario_config, py::arg("config"));
    m.def("validate_scenario", py::overload_cast<const Scenario&>(&validate_scenario), py::arg("scenario"));

    m.def("contact_time", py::overload_cast<double, double>(&contact_time), py::arg("coverage_length"),
          py::arg("velocity"));

    m.def(
        "evaluate",
        [](const Scenario& sc, std::size_t rsu_index, const std::vector<std::size_t>& cached) {
            if (rsu_index >= sc.rsus.size()) throw ParameterError("RSU index out of range");
            const auto vs = visitors_at(sc, rsu_index);
            const auto rep = evaluate_delays(sc.rsus[rsu_index], sc.library, policy_from(sc, cached), vs);
            py::dict d;
            d["reactive_delay"] = rep.reactive_delay;
            d["proactive_delay"] = rep.proactive_delay;
            d["reactive_cap_sum"] = rep.reactive_file_cap_sum;
            d["proactive_cap_sum"] = rep.proactive_file_cap_sum;
            d["caching_gain"] = rep.caching_gain ? py::object(py::float_(*rep.caching_gain)) : py::object(py::none());
            return d;
        },
        py::arg("scenario"), py::arg("rsu"), py::arg("cached_items"),
        "Delays at one RSU for a cache holding `cached_items`, with the scenario's own presence and demand.");

    m.def(
        "chain_objective",
        [](const Scenario& sc, const std::vector<std::vector<std::size_t>>& cached) {
            std::vector<CachePolicy> ps;
            for (const auto& c : cached) ps.push_back(policy_from(sc, c));
            return chain_objective(sc, ps);
        },
        py::arg("scenario"), py::arg("cached_items"));

    m.def("greedy_noncoop", [](const Scenario& sc) { return solve_dict(greedy_noncoop(sc)); }, py::arg("scenario"));
    m.def("exhaustive_noncoop", [](const Scenario& sc) { return solve_dict(solve_exhaustive_noncoop(sc)); },
          py::arg("scenario"));
    m.def("greedy_coop", [](const Scenario& sc) { return solve_dict(greedy_coop(sc)); }, py::arg("scenario"));
    m.def("exhaustive_coop", [](const Scenario& sc) { return solve_dict(solve_exhaustive_coop(sc)); },
          py::arg("scenario"));

    m.def(
        "run_sweep",
        [](const ScenarioConfig& config, const std::vector<std::string>& schemes,
           const std::vector<std::size_t>& cache_sizes, const std::vector<double>& gammas, std::size_t replications,
           std::uint64_t base_seed, unsigned threads) {
            SweepSpec spec;
            for (const auto& s : schemes) spec.schemes.push_back(parse_scheme(s));
            spec.cache_sizes = cache_sizes;
            spec.gammas = gammas;
            spec.replications = replications;
            spec.base_seed = base_seed;
            SweepResult result;
            {
                py::gil_scoped_release release;
                result = run_sweep(config, spec, threads);
            }
            return py::make_tuple(format_csv(result.rows), sweep_metadata(config, spec, result));
        },
        py::arg("config"), py::arg("schemes"), py::arg("cache_sizes"), py::arg("gammas") = std::vector<double>{0.0},
        py::arg("replications") = 20, py::arg("base_seed") = 0, py::arg("threads") = 0,
        "Run a sweep; returns (csv_text, metadata_json).");

    m.def(
        "percentage_gain", &percentage_gain, py::arg("reactive_per_file"), py::arg("proactive_per_file"));
}

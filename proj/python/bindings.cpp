#include <map>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lrst/errors.hpp"
#include "lrst/gaussian_oracle.hpp"
#include "lrst/lrst_inference.hpp"
#include "lrst/power_design.hpp"
#include "lrst/rank_engine.hpp"
#include "lrst/sim_engine.hpp"
#include "lrst/trial_data.hpp"
#include "lrst/variance_components.hpp"

namespace py = pybind11;
using namespace lrst;

namespace {

using Cube = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array3 to_array3(const Cube& a) {
    if (a.ndim() != 3) throw Error(ErrorCode::invalid_argument, "expected a 3-D array (subject, visit, outcome)");
    Array3 out(a.shape(0), a.shape(1), a.shape(2));
    std::copy(a.data(), a.data() + a.size(), out.flat().begin());
    return out;
}

Cube to_numpy(const Array3& a) {
    Cube out({a.subjects(), a.visits(), a.outcomes()});
    std::copy(a.flat().begin(), a.flat().end(), out.mutable_data());
    return out;
}

}  // namespace

PYBIND11_MODULE(lrst, m) {
    m.doc() = "Longitudinal rank sum test";
    m.attr("__version__") = LRST_VERSION;

    static py::exception<Error> exc(m, "LrstError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetString(exc.ptr(), (std::string(to_string(e.code())) + ": " + e.what()).c_str());
        }
    });

    py::class_<TrialData>(m, "TrialData")
        .def(py::init([](const Cube& x, const Cube& y) { return make_trial_data(to_array3(x), to_array3(y)); }),
             py::arg("x"), py::arg("y"))
        .def_property_readonly("x", [](const TrialData& d) { return to_numpy(d.x); })
        .def_property_readonly("y", [](const TrialData& d) { return to_numpy(d.y); })
        .def_readonly("visit_labels", &TrialData::visit_labels)
        .def_readonly("outcome_labels", &TrialData::outcome_labels)
        .def_readonly("control_ids", &TrialData::control_ids)
        .def_readonly("treatment_ids", &TrialData::treatment_ids)
        .def_property_readonly("n_x", &TrialData::n_x)
        .def_property_readonly("n_y", &TrialData::n_y)
        .def_property_readonly("visits", &TrialData::visits)
        .def_property_readonly("outcomes", &TrialData::outcomes)
        .def("to_csv", [](const TrialData& d) { return to_csv(d); });

    m.def("read_csv", [](const std::string& path) { return parse_trial_csv_file(path); }, py::arg("path"));
    m.def("prune", [](const TrialData& d) {
        auto [out, report] = validate_and_prune(d);
        return py::make_tuple(out, report.removed_labels);
    });

    py::class_<RankSummary>(m, "RankSummary")
        .def_property_readonly("rank_x", [](const RankSummary& r) { return to_numpy(r.rank_x); })
        .def_property_readonly("rank_y", [](const RankSummary& r) { return to_numpy(r.rank_y); })
        .def_readonly("rank_diff", &RankSummary::rank_diff)
        .def_readonly("theta_hat", &RankSummary::theta_hat)
        .def_readonly("theta_bar_hat", &RankSummary::theta_bar_hat);
    m.def("rank_summary", &rank_summary);
    m.def("midranks", [](const std::vector<double>& v) { return midranks(v); });

    py::class_<VarianceComponents>(m, "VarianceComponents")
        .def_readonly("c4", &VarianceComponents::c4)
        .def_readonly("d4", &VarianceComponents::d4)
        .def_readonly("C", &VarianceComponents::C)
        .def_readonly("D", &VarianceComponents::D)
        .def_readonly("Sigma", &VarianceComponents::Sigma)
        .def_readonly("lambda_", &VarianceComponents::lambda)
        .def("quad_form", &VarianceComponents::quad_form);
    m.def("variance_components", py::overload_cast<const TrialData&>(&variance_components));

    py::class_<LrstResult>(m, "LrstResult")
        .def_readonly("rank_diff", &LrstResult::rank_diff)
        .def_readonly("se", &LrstResult::se)
        .def_readonly("z", &LrstResult::z)
        .def_readonly("p_value", &LrstResult::p_value)
        .def_readonly("reject", &LrstResult::reject)
        .def_readonly("alpha", &LrstResult::alpha)
        .def_readonly("theta_bar_hat", &LrstResult::theta_bar_hat)
        .def_readonly("quad_form", &LrstResult::quad_form);
    m.def("lrst_test", py::overload_cast<const TrialData&, double>(&lrst_test), py::arg("data"),
          py::arg("alpha") = 0.05);

    py::class_<PowerResult>(m, "PowerResult")
        .def_readonly("power", &PowerResult::power)
        .def_readonly("noncentrality", &PowerResult::noncentrality)
        .def_readonly("theta_bar", &PowerResult::theta_bar)
        .def_readonly("quad_form", &PowerResult::quad_form)
        .def_readonly("N", &PowerResult::N)
        .def_readonly("variance", &PowerResult::variance)
        .def_readonly("se", &PowerResult::se);
    m.def("theoretical_power", &theoretical_power, py::arg("theta_bar"), py::arg("C"), py::arg("D"),
          py::arg("lambda_"), py::arg("N"), py::arg("visits"), py::arg("alpha") = 0.05);
    m.def("estimated_power", py::overload_cast<const TrialData&, double, std::optional<double>>(&estimated_power),
          py::arg("data"), py::arg("alpha") = 0.05, py::arg("at_n") = py::none());

    py::class_<SampleSizeResult>(m, "SampleSizeResult")
        .def_readonly("n_raw", &SampleSizeResult::n_raw)
        .def_readonly("n", &SampleSizeResult::n)
        .def_readonly("n_x", &SampleSizeResult::n_x)
        .def_readonly("n_y", &SampleSizeResult::n_y)
        .def_readonly("achieved_power", &SampleSizeResult::achieved_power);
    m.def("required_sample_size", &required_sample_size, py::arg("theta_bar"), py::arg("C"), py::arg("D"),
          py::arg("lambda_"), py::arg("visits"), py::arg("alpha") = 0.05, py::arg("power") = 0.8);

    py::class_<GaussianScenario>(m, "GaussianScenario")
        .def_readonly("mu_control", &GaussianScenario::mu_control)
        .def_readonly("mu_treatment", &GaussianScenario::mu_treatment)
        .def_readonly("lambda_", &GaussianScenario::lambda)
        .def("null_version", &GaussianScenario::null_version)
        .def("to_json", [](const GaussianScenario& s) { return scenario_to_json(s); })
        .def_static("from_json", &scenario_from_json);
    m.def("bapi302_scenario", &bapi302_scenario);
    m.def("load_scenario", &load_scenario);

    py::class_<ThetaOracle>(m, "ThetaOracle")
        .def_readonly("theta", &ThetaOracle::theta)
        .def_readonly("theta_bar", &ThetaOracle::theta_bar);
    py::class_<OracleResult>(m, "OracleResult")
        .def_readonly("theta", &OracleResult::theta)
        .def_readonly("C", &OracleResult::C)
        .def_readonly("D", &OracleResult::D)
        .def_readonly("C_se", &OracleResult::C_se)
        .def_readonly("D_se", &OracleResult::D_se)
        .def_readonly("pruned_visits", &OracleResult::pruned_visits)
        .def_property_readonly("visits", &OracleResult::visits);
    m.def(
        "oracle",
        [](const GaussianScenario& s, const std::string& method, std::uint64_t seed, std::size_t samples,
           std::size_t nodes) {
            OracleConfig cfg;
            cfg.method = parse_oracle_method(method);
            cfg.seed = seed;
            cfg.mc_samples = samples;
            cfg.quadrature_nodes = nodes;
            return oracle_cd(s, cfg);
        },
        py::arg("scenario"), py::arg("method") = "quadrature", py::arg("seed") = 1, py::arg("samples") = 1'000'000,
        py::arg("nodes") = 64);

    m.def("generate_trial", &generate_trial, py::arg("scenario"), py::arg("n_x"), py::arg("n_y"), py::arg("seed"),
          py::arg("prune") = true);
    m.def(
        "simulate_power",
        [](const GaussianScenario& s, std::size_t N, std::size_t replicates, std::uint64_t seed, double alpha) {
            SimConfig cfg;
            std::tie(cfg.n_x, cfg.n_y) = split_sample(N, s.lambda);
            cfg.replicates = replicates;
            cfg.seed = seed;
            cfg.alpha = alpha;
            cfg.scenario = s;
            py::gil_scoped_release release;
            const auto r = empirical_power(cfg);
            const auto& p = *r.power;
            return std::map<std::string, double>{{"empirical_power", p.empirical_power},
                                                 {"empirical_power_se", p.empirical_power_se},
                                                 {"mean_estimated_power", p.mean_estimated_power},
                                                 {"sd_estimated_power", p.sd_estimated_power},
                                                 {"mean_theta_bar_hat", p.mean_theta_bar_hat}};
        },
        py::arg("scenario"), py::arg("N"), py::arg("replicates"), py::arg("seed"), py::arg("alpha") = 0.05);
}

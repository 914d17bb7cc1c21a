#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "stimloss/distribution.hpp"
#include "stimloss/errors.hpp"
#include "stimloss/kde.hpp"
#include "stimloss/pipeline.hpp"
#include "stimloss/quantile.hpp"
#include "stimloss/strategy.hpp"

namespace py = pybind11;
using namespace stimloss;

namespace {

DistributionSpec trunc_spec(const std::string& kind, double location, double scale, double lower,
                            double upper) {
    if (kind == "mean_sd") return DistributionSpec::mean_sd(location, scale, lower, upper);
    if (kind == "median_iqr") return DistributionSpec::median_iqr(location, scale, lower, upper);
    throw InvalidArgument("kind must be 'mean_sd' or 'median_iqr'");
}

std::string run_json(const std::string& config, std::uint64_t seed, double yield,
                     std::size_t n_repeats, std::size_t population_size,
                     const std::vector<std::string>& strategies,
                     const std::vector<double>& yield_sweep, unsigned workers) {
    SimulationPlan plan;
    plan.seed = seed;
    plan.yield = yield;
    plan.n_repeats = n_repeats;
    plan.population_size = population_size;
    plan.workers = workers;
    plan.strategies.clear();
    for (const auto& s : strategies) plan.strategies.push_back(parse_strategy(s));
    PipelineOutput out;
    {
        py::gil_scoped_release release;
        out = run_pipeline(config, plan, yield_sweep);
    }
    return to_json(out.bundle).dump();
}

}  // namespace

PYBIND11_MODULE(_stimloss, m) {
    m.doc() = "Power losses of multichannel stimulator output stages under supply strategies";

    // Translators run newest first, so subclasses are registered after the base.
    auto& base = py::register_exception<Error>(m, "StimlossError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<SamplingInfeasible>(m, "SamplingInfeasible", base.ptr());
    py::register_exception<ComplianceViolation>(m, "ComplianceViolation", base.ptr());
    py::register_exception<InsufficientChannels>(m, "InsufficientChannels", base.ptr());
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

    m.def(
        "median_iqr_to_mean_sd",
        [](double median, double iqr) {
            const auto p = stimloss::median_iqr_to_mean_sd(median, iqr);
            return py::make_tuple(p.mean, p.sd);
        },
        py::arg("median"), py::arg("iqr"));
    m.def(
        "quantile", [](const std::vector<double>& v, double q) { return stimloss::quantile(v, q); },
        py::arg("values"), py::arg("q"));
    m.def("make_rails", &make_rails, py::arg("v_fixed"), py::arg("n"));
    m.def("efficiency", &stimloss::efficiency, py::arg("p_load"), py::arg("p_loss"));

    m.def(
        "sample_trunc_normal",
        [](double location, double scale, std::size_t n, std::uint64_t seed,
           std::uint64_t stream_id, double lower, double upper, const std::string& kind) {
            SeededRng rng(seed, stream_id);
            return stimloss::sample_trunc_normal(trunc_spec(kind, location, scale, lower, upper),
                                                 n, rng);
        },
        py::arg("location"), py::arg("scale"), py::arg("n"), py::arg("seed") = 0,
        py::arg("stream_id") = 0, py::arg("lower") = -std::numeric_limits<double>::infinity(),
        py::arg("upper") = std::numeric_limits<double>::infinity(), py::arg("kind") = "mean_sd");

    py::class_<KdeModel>(m, "KdeModel")
        .def_property_readonly("bandwidth", &KdeModel::bandwidth)
        .def("density", &KdeModel::density)
        .def("cdf", &KdeModel::cdf);
    m.def(
        "fit_kde", [](const std::vector<double>& s) { return stimloss::fit_kde(s); },
        py::arg("samples"));
    m.def(
        "sample_kde",
        [](const KdeModel& model, double lower, std::size_t n, std::uint64_t seed,
           std::uint64_t stream_id) {
            SeededRng rng(seed, stream_id);
            return stimloss::sample_kde(model, lower, n, rng);
        },
        py::arg("model"), py::arg("lower_bound"), py::arg("n"), py::arg("seed") = 0,
        py::arg("stream_id") = 0);

    py::class_<ChannelEntry>(m, "ChannelEntry")
        .def(py::init(&make_entry), py::arg("i_th_ua"), py::arg("z_kohm"))
        .def_readonly("i_th", &ChannelEntry::i_th)
        .def_readonly("z", &ChannelEntry::z)
        .def_readonly("v_load", &ChannelEntry::v_load)
        .def_readonly("p_load", &ChannelEntry::p_load);
    py::class_<ChannelLoss>(m, "ChannelLoss")
        .def_readonly("v_supply_used", &ChannelLoss::v_supply_used)
        .def_readonly("p_loss", &ChannelLoss::p_loss)
        .def_readonly("efficiency", &ChannelLoss::efficiency);
    m.def("loss_fixed", &loss_fixed, py::arg("entry"), py::arg("v_fixed"));
    m.def(
        "loss_stepped",
        [](const ChannelEntry& e, const std::vector<double>& rails) {
            return stimloss::loss_stepped(e, rails);
        },
        py::arg("entry"), py::arg("rails"));
    m.def("loss_ideal", &loss_ideal, py::arg("entry"));
    m.def(
        "loss_global",
        [](const std::vector<ChannelEntry>& subset) { return stimloss::loss_global(subset); },
        py::arg("subset"));

    m.def(
        "load_dataset_summary",
        [](const std::filesystem::path& path) {
            const Dataset ds = load_dataset_config(path);
            py::list apps, subjects;
            for (const auto& a : ds.applications)
                apps.append(py::dict(py::arg("name") = a.application,
                                     py::arg("total_channels") = a.total_channels,
                                     py::arg("active_fraction") = a.active_fraction,
                                     py::arg("subset_size") = a.subset_size));
            for (const auto& s : ds.subjects)
                subjects.append(py::dict(py::arg("id") = s.id, py::arg("source") = s.source_label,
                                         py::arg("application") = s.application));
            return py::dict(py::arg("applications") = apps, py::arg("subjects") = subjects);
        },
        py::arg("path"));

    m.def("_run_json", &run_json, py::arg("config"), py::arg("seed"), py::arg("yield_"),
          py::arg("n_repeats"), py::arg("population_size"), py::arg("strategies"),
          py::arg("yield_sweep"), py::arg("workers"));
}

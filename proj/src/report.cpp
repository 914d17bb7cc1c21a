#include "stimloss/report.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <system_error>

#include "stimloss/errors.hpp"
#include "stimloss/quantile.hpp"

namespace stimloss {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

namespace {

constexpr const char* kSummaryHeader =
    "group,strategy,median_ploss_W,iqr_ploss_W,median_eff,iqr_eff,achieved_yield,n_repeats\n";

double round6(double v) {
    if (!std::isfinite(v)) return v;
    return std::strtod(format_number(v).c_str(), nullptr);
}

json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return round6(v);
}

double get_num(const json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_hex64(const std::string& s) { return std::stoull(s, nullptr, 16); }

std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(std::string_view header) : out_(header) {}

    template <typename... Fields>
    void row(const Fields&... fields) {
        bool first = true;
        ((out_ += (first ? "" : ","), out_ += cell(fields), first = false), ...);
        out_ += '\n';
    }

    const std::string& str() const noexcept { return out_; }

private:
    static std::string cell(const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }
    static std::string cell(const char* s) { return cell(std::string(s)); }
    static std::string cell(double v) { return format_number(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(bool v) { return v ? "1" : "0"; }

    std::string out_;
};

std::string_view to_string(Grouping g) { return g == Grouping::Subject ? "subject" : "application"; }

Grouping grouping_from(const std::string& s) {
    if (s == "subject") return Grouping::Subject;
    if (s == "application") return Grouping::Application;
    throw ConfigError("unknown grouping '" + s + "'");
}

}  // namespace

// ---------------------------------------------------------------------------
// Manifest

std::uint64_t RunManifest::parameters_hash() const {
    json j = to_json(*this);
    j.erase("timestamp");
    j.erase("workers");
    j.erase("parameters_hash");
    return fnv1a64(j.dump());
}

RunManifest make_manifest(const std::string& config_path, const Dataset& dataset,
                          const SimulationPlan& plan, std::vector<double> yield_sweep) {
    RunManifest m;
    m.config_path = config_path;
    m.config_hash = dataset.content_hash;
    m.seed = plan.seed;
    m.yield = plan.yield;
    m.n_repeats = plan.n_repeats;
    m.population_size = plan.population_size;
    for (const auto& s : plan.strategies) {
        m.strategies.push_back(s.label());
        if (s.placement == RailPlacement::Explicit) m.explicit_rails = s.explicit_rails;
    }
    for (const auto& p : dataset.applications)
        m.subset_sizes.emplace_back(p.application, effective_profile(p, plan).subset_size);
    m.yield_sweep = std::move(yield_sweep);
    m.strict = plan.strict;
    m.workers = plan.workers;
    m.timestamp = utc_timestamp();
    return m;
}

json to_json(const RunManifest& m) {
    json subsets = json::object();
    for (const auto& [app, size] : m.subset_sizes) subsets[app] = size;
    json j = {
        {"tool", "stimloss"},
        {"tool_version", m.tool_version},
        {"timestamp", m.timestamp},
        {"config", {{"path", m.config_path}, {"fnv1a64", hex64(m.config_hash)}}},
        {"plan",
         {{"seed", m.seed},
          {"yield", m.yield},
          {"n_repeats", m.n_repeats},
          {"population_size", m.population_size},
          {"strategies", m.strategies},
          {"explicit_rails_V", m.explicit_rails},
          {"subset_sizes", subsets},
          {"yield_sweep", m.yield_sweep},
          {"strict", m.strict}}},
        {"workers", m.workers},
    };
    return j;
}

RunManifest manifest_from_json(const json& j) {
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.timestamp = j.at("timestamp").get<std::string>();
    m.config_path = j.at("config").at("path").get<std::string>();
    m.config_hash = parse_hex64(j.at("config").at("fnv1a64").get<std::string>());
    const json& p = j.at("plan");
    m.seed = p.at("seed").get<std::uint64_t>();
    m.yield = p.at("yield").get<double>();
    m.n_repeats = p.at("n_repeats").get<std::size_t>();
    m.population_size = p.at("population_size").get<std::size_t>();
    m.strategies = p.at("strategies").get<std::vector<std::string>>();
    m.explicit_rails = p.at("explicit_rails_V").get<std::vector<double>>();
    for (const auto& [app, size] : p.at("subset_sizes").items())
        m.subset_sizes.emplace_back(app, size.get<std::size_t>());
    m.yield_sweep = p.at("yield_sweep").get<std::vector<double>>();
    m.strict = p.at("strict").get<bool>();
    m.workers = j.at("workers").get<unsigned>();
    return m;
}

// ---------------------------------------------------------------------------
// Bundle construction

ReportBundle build_bundle(RunManifest manifest, std::span<const ChannelPopulation> populations,
                          const YieldRun& main_run, std::span<const YieldRun> sweep) {
    ReportBundle b;
    b.manifest = std::move(manifest);
    b.warnings = main_run.warnings;
    b.normalized = main_run.normalized;

    for (const auto& app : main_run.applications) {
        const std::string& name = app.profile.application;
        b.subject_summaries.insert(b.subject_summaries.end(), app.subject_summaries.begin(),
                                   app.subject_summaries.end());
        b.application_summaries.insert(b.application_summaries.end(), app.summaries.begin(),
                                       app.summaries.end());
        b.supplies.push_back({name, main_run.yield, app.v_fixed, app.achieved_yield,
                              app.profile.subset_size});

        std::size_t first = b.system_losses.size();
        for (const auto& s : app.summaries) {
            const SystemLoss total = total_system_loss(s, app.profile);
            b.system_losses.push_back(
                {name, s.strategy, app.profile.subset_size, total.median_w, total.iqr_w, false});
        }
        auto best = b.system_losses.end();
        for (auto it = b.system_losses.begin() + static_cast<std::ptrdiff_t>(first);
             it != b.system_losses.end(); ++it) {
            if (it->strategy == "ideal") continue;
            if (best == b.system_losses.end() || it->median_w < best->median_w) best = it;
        }
        if (best != b.system_losses.end()) best->best = true;

        // Box summaries over repeat-level means.
        std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
        std::vector<std::string> order;
        for (const auto& r : app.repeats) {
            auto [it, inserted] = series.try_emplace(r.strategy);
            if (inserted) order.push_back(r.strategy);
            it->second.first.push_back(r.mean_p_loss);
            it->second.second.push_back(r.mean_efficiency);
        }
        for (const auto& strategy : order) {
            const auto& [loss, eff] = series.at(strategy);
            const BoxSummary bl = box_summary(loss);
            const BoxSummary be = box_summary(eff);
            b.boxes.push_back({name, strategy, "ploss_W", bl.whisker_low, bl.q1, bl.median, bl.q3,
                               bl.whisker_high});
            b.boxes.push_back({name, strategy, "eff", be.whisker_low, be.q1, be.median, be.q3,
                               be.whisker_high});
        }

        // Load distributions, pooled per application.
        std::vector<double> v, p;
        for (const auto& pop : populations) {
            if (pop.application != name) continue;
            for (const auto& e : pop.entries) {
                v.push_back(e.v_load);
                p.push_back(e.p_load);
            }
        }
        std::sort(v.begin(), v.end());
        std::sort(p.begin(), p.end());
        for (int k = 0; k <= 100; ++k) {
            const double level = k / 100.0;
            b.load_distributions.push_back({name, "v_load_V", level, quantile_sorted(v, level)});
        }
        for (int k = 0; k <= 100; ++k) {
            const double level = k / 100.0;
            b.load_distributions.push_back({name, "p_load_W", level, quantile_sorted(p, level)});
        }
    }

    for (const auto& pop : populations) {
        std::vector<double> v, p;
        v.reserve(pop.entries.size());
        p.reserve(pop.entries.size());
        for (const auto& e : pop.entries) {
            v.push_back(e.v_load);
            p.push_back(e.p_load);
        }
        b.subject_scatter.push_back(
            {pop.subject_id, pop.application, median(v), iqr(v), median(p), iqr(p)});
    }

    for (const auto& run : sweep) {
        for (const auto& app : run.applications) {
            for (const auto& s : app.summaries) {
                b.sweep.push_back({run.yield, app.profile.application, s.strategy, app.v_fixed,
                                   s.median_p_loss, s.iqr_p_loss, s.median_efficiency,
                                   s.iqr_efficiency, app.achieved_yield});
            }
        }
    }
    return b;
}

OutputFormat parse_output_format(std::string_view text) {
    if (text == "csv") return OutputFormat::Csv;
    if (text == "json") return OutputFormat::Json;
    if (text == "both") return OutputFormat::Both;
    throw ValidationError("unknown output format '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Writers

void atomic_write(const fs::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw ConfigError("cannot create directory '" + path.parent_path().string() + "'");
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write '" + path.string() + "'");
        out << content;
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp, ec);
            throw ConfigError("error writing '" + path.string() + "'");
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ConfigError("cannot move '" + tmp.string() + "' into place");
    }
}

std::string summary_csv(std::span<const LossSummary> rows) {
    CsvWriter w(kSummaryHeader);
    for (const auto& s : rows)
        w.row(s.group, s.strategy, s.median_p_loss, s.iqr_p_loss, s.median_efficiency,
              s.iqr_efficiency, s.achieved_yield, s.n_repeats);
    return w.str();
}

std::string normalized_csv(std::span<const NormalizedRow> rows) {
    CsvWriter w("application,strategy,eff_ratio,ploss_ratio\n");
    for (const auto& r : rows) w.row(r.application, r.strategy, r.efficiency_ratio, r.loss_ratio);
    return w.str();
}

namespace {

std::string supplies_csv(std::span<const SupplyRow> rows) {
    CsvWriter w("application,yield,v_fixed_V,achieved_yield,subset_size\n");
    for (const auto& r : rows)
        w.row(r.application, r.yield, r.v_fixed, r.achieved_yield, r.subset_size);
    return w.str();
}

std::string system_loss_csv(std::span<const SystemLossRow> rows) {
    CsvWriter w("application,strategy,subset_size,median_total_ploss_W,iqr_total_ploss_W,best\n");
    for (const auto& r : rows)
        w.row(r.application, r.strategy, r.subset_size, r.median_w, r.iqr_w, r.best);
    return w.str();
}

std::string sweep_csv(std::span<const SweepRow> rows) {
    CsvWriter w(
        "yield,application,strategy,v_fixed_V,median_ploss_W,iqr_ploss_W,median_eff,iqr_eff,"
        "achieved_yield\n");
    for (const auto& r : rows)
        w.row(r.yield, r.application, r.strategy, r.v_fixed, r.median_p_loss, r.iqr_p_loss,
              r.median_efficiency, r.iqr_efficiency, r.achieved_yield);
    return w.str();
}

json summaries_json(std::span<const LossSummary> rows) {
    json arr = json::array();
    for (const auto& s : rows)
        arr.push_back({{"group", s.group},
                       {"grouping", to_string(s.grouping)},
                       {"strategy", s.strategy},
                       {"median_ploss_W", num(s.median_p_loss)},
                       {"iqr_ploss_W", num(s.iqr_p_loss)},
                       {"median_eff", num(s.median_efficiency)},
                       {"iqr_eff", num(s.iqr_efficiency)},
                       {"median_eff_energy_weighted", num(s.median_energy_weighted_efficiency)},
                       {"achieved_yield", num(s.achieved_yield)},
                       {"n_repeats", s.n_repeats}});
    return arr;
}

std::vector<LossSummary> summaries_from(const json& arr) {
    std::vector<LossSummary> out;
    for (const auto& j : arr) {
        LossSummary s;
        s.group = j.at("group").get<std::string>();
        s.grouping = grouping_from(j.at("grouping").get<std::string>());
        s.strategy = j.at("strategy").get<std::string>();
        s.median_p_loss = get_num(j.at("median_ploss_W"));
        s.iqr_p_loss = get_num(j.at("iqr_ploss_W"));
        s.median_efficiency = get_num(j.at("median_eff"));
        s.iqr_efficiency = get_num(j.at("iqr_eff"));
        s.median_energy_weighted_efficiency = get_num(j.at("median_eff_energy_weighted"));
        s.achieved_yield = get_num(j.at("achieved_yield"));
        s.n_repeats = j.at("n_repeats").get<std::size_t>();
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

json to_json(const ReportBundle& b) {
    json j;
    j["units"] = {{"ploss", "W"},          {"total_ploss", "W"}, {"v_fixed", "V"},
                  {"v_load", "V"},         {"p_load", "W"},      {"eff", "1"},
                  {"achieved_yield", "1"}, {"ratios", "1"}};
    j["manifest"] = to_json(b.manifest);
    j["summary_subject"] = summaries_json(b.subject_summaries);
    j["summary_application"] = summaries_json(b.application_summaries);

    j["normalized"] = json::array();
    for (const auto& r : b.normalized)
        j["normalized"].push_back({{"application", r.application},
                                   {"strategy", r.strategy},
                                   {"eff_ratio", num(r.efficiency_ratio)},
                                   {"ploss_ratio", num(r.loss_ratio)}});
    j["v_fixed"] = json::array();
    for (const auto& r : b.supplies)
        j["v_fixed"].push_back({{"application", r.application},
                                {"yield", num(r.yield)},
                                {"v_fixed_V", num(r.v_fixed)},
                                {"achieved_yield", num(r.achieved_yield)},
                                {"subset_size", r.subset_size}});
    j["system_loss"] = json::array();
    for (const auto& r : b.system_losses)
        j["system_loss"].push_back({{"application", r.application},
                                    {"strategy", r.strategy},
                                    {"subset_size", r.subset_size},
                                    {"median_total_ploss_W", num(r.median_w)},
                                    {"iqr_total_ploss_W", num(r.iqr_w)},
                                    {"best", r.best}});
    j["yield_sweep"] = json::array();
    for (const auto& r : b.sweep)
        j["yield_sweep"].push_back({{"yield", num(r.yield)},
                                    {"application", r.application},
                                    {"strategy", r.strategy},
                                    {"v_fixed_V", num(r.v_fixed)},
                                    {"median_ploss_W", num(r.median_p_loss)},
                                    {"iqr_ploss_W", num(r.iqr_p_loss)},
                                    {"median_eff", num(r.median_efficiency)},
                                    {"iqr_eff", num(r.iqr_efficiency)},
                                    {"achieved_yield", num(r.achieved_yield)}});
    j["load_distributions"] = json::array();
    for (const auto& r : b.load_distributions)
        j["load_distributions"].push_back({{"application", r.application},
                                           {"quantity", r.quantity},
                                           {"quantile", num(r.level)},
                                           {"value", num(r.value)}});
    j["subject_scatter"] = json::array();
    for (const auto& r : b.subject_scatter)
        j["subject_scatter"].push_back({{"subject", r.subject},
                                        {"application", r.application},
                                        {"median_v_load_V", num(r.median_v_load)},
                                        {"iqr_v_load_V", num(r.iqr_v_load)},
                                        {"median_p_load_W", num(r.median_p_load)},
                                        {"iqr_p_load_W", num(r.iqr_p_load)}});
    j["boxplots"] = json::array();
    for (const auto& r : b.boxes)
        j["boxplots"].push_back({{"application", r.application},
                                 {"strategy", r.strategy},
                                 {"metric", r.metric},
                                 {"whisker_low", num(r.whisker_low)},
                                 {"q1", num(r.q1)},
                                 {"median", num(r.median)},
                                 {"q3", num(r.q3)},
                                 {"whisker_high", num(r.whisker_high)}});
    j["warnings"] = b.warnings;
    return j;
}

ReportBundle bundle_from_json(const json& j) {
    ReportBundle b;
    b.manifest = manifest_from_json(j.at("manifest"));
    b.subject_summaries = summaries_from(j.at("summary_subject"));
    b.application_summaries = summaries_from(j.at("summary_application"));
    for (const auto& r : j.at("normalized"))
        b.normalized.push_back({r.at("application"), r.at("strategy"), get_num(r.at("eff_ratio")),
                                get_num(r.at("ploss_ratio"))});
    for (const auto& r : j.at("v_fixed"))
        b.supplies.push_back({r.at("application"), get_num(r.at("yield")),
                              get_num(r.at("v_fixed_V")), get_num(r.at("achieved_yield")),
                              r.at("subset_size").get<std::size_t>()});
    for (const auto& r : j.at("system_loss"))
        b.system_losses.push_back({r.at("application"), r.at("strategy"),
                                   r.at("subset_size").get<std::size_t>(),
                                   get_num(r.at("median_total_ploss_W")),
                                   get_num(r.at("iqr_total_ploss_W")), r.at("best").get<bool>()});
    for (const auto& r : j.at("yield_sweep"))
        b.sweep.push_back({get_num(r.at("yield")), r.at("application"), r.at("strategy"),
                           get_num(r.at("v_fixed_V")), get_num(r.at("median_ploss_W")),
                           get_num(r.at("iqr_ploss_W")), get_num(r.at("median_eff")),
                           get_num(r.at("iqr_eff")), get_num(r.at("achieved_yield"))});
    for (const auto& r : j.at("load_distributions"))
        b.load_distributions.push_back({r.at("application"), r.at("quantity"),
                                        get_num(r.at("quantile")), get_num(r.at("value"))});
    for (const auto& r : j.at("subject_scatter"))
        b.subject_scatter.push_back({r.at("subject"), r.at("application"),
                                     get_num(r.at("median_v_load_V")),
                                     get_num(r.at("iqr_v_load_V")),
                                     get_num(r.at("median_p_load_W")),
                                     get_num(r.at("iqr_p_load_W"))});
    for (const auto& r : j.at("boxplots"))
        b.boxes.push_back({r.at("application"), r.at("strategy"), r.at("metric"),
                           get_num(r.at("whisker_low")), get_num(r.at("q1")),
                           get_num(r.at("median")), get_num(r.at("q3")),
                           get_num(r.at("whisker_high"))});
    b.warnings = j.at("warnings").get<std::vector<std::string>>();
    return b;
}

void emit_tables(const ReportBundle& bundle, const fs::path& out_dir, OutputFormat format) {
    if (format != OutputFormat::Json) {
        atomic_write(out_dir / "summary_subject.csv", summary_csv(bundle.subject_summaries));
        atomic_write(out_dir / "summary_application.csv",
                     summary_csv(bundle.application_summaries));
        atomic_write(out_dir / "normalized.csv", normalized_csv(bundle.normalized));
        atomic_write(out_dir / "v_fixed.csv", supplies_csv(bundle.supplies));
        atomic_write(out_dir / "system_loss.csv", system_loss_csv(bundle.system_losses));
        atomic_write(out_dir / "yield_sweep.csv", sweep_csv(bundle.sweep));
    }
    if (format != OutputFormat::Csv)
        atomic_write(out_dir / "report.json", to_json(bundle).dump(2) + "\n");
}

void emit_plot_data(const ReportBundle& bundle, const fs::path& out_dir) {
    const fs::path dir = out_dir / "plotdata";

    CsvWriter dist("application,quantity,quantile,value\n");
    for (const auto& r : bundle.load_distributions)
        dist.row(r.application, r.quantity, r.level, r.value);
    atomic_write(dir / "load_distributions.csv", dist.str());

    CsvWriter scatter(
        "subject,application,median_v_load_V,iqr_v_load_V,median_p_load_W,iqr_p_load_W,"
        "median_ploss_fixed_W,iqr_ploss_fixed_W,median_eff_fixed,iqr_eff_fixed\n");
    for (const auto& r : bundle.subject_scatter) {
        const auto fixed = std::find_if(
            bundle.subject_summaries.begin(), bundle.subject_summaries.end(),
            [&](const LossSummary& s) { return s.group == r.subject && s.strategy == "fixed"; });
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const bool has = fixed != bundle.subject_summaries.end();
        scatter.row(r.subject, r.application, r.median_v_load, r.iqr_v_load, r.median_p_load,
                    r.iqr_p_load, has ? fixed->median_p_loss : nan, has ? fixed->iqr_p_loss : nan,
                    has ? fixed->median_efficiency : nan, has ? fixed->iqr_efficiency : nan);
    }
    atomic_write(dir / "subject_scatter.csv", scatter.str());

    CsvWriter box("application,strategy,metric,whisker_low,q1,median,q3,whisker_high\n");
    for (const auto& r : bundle.boxes)
        box.row(r.application, r.strategy, r.metric, r.whisker_low, r.q1, r.median, r.q3,
                r.whisker_high);
    atomic_write(dir / "strategy_boxplot.csv", box.str());

    CsvWriter curves("yield,application,strategy,v_fixed_V,median_eff,median_ploss_W\n");
    for (const auto& r : bundle.sweep)
        curves.row(r.yield, r.application, r.strategy, r.v_fixed, r.median_efficiency,
                   r.median_p_loss);
    atomic_write(dir / "yield_curves.csv", curves.str());
}

void write_manifest(const RunManifest& manifest, const fs::path& out_dir) {
    json j = to_json(manifest);
    j["parameters_hash"] = hex64(manifest.parameters_hash());
    atomic_write(out_dir / "manifest.json", j.dump(2) + "\n");
}

namespace {

std::string file_stem(const std::string& id) {
    std::string out = id;
    for (char& c : out)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.'))
            c = '_';
    if (out.empty() || out.front() == '.') out.insert(out.begin(), '_');
    return out;
}

}  // namespace

void dump_samples(std::span<const ChannelPopulation> populations, const YieldRun& main_run,
                  const fs::path& out_dir) {
    const fs::path dir = out_dir / "samples";
    for (const auto& pop : populations) {
        std::string text = "i_th_A,z_Ohm,v_load_V,p_load_W\n";
        text.reserve(pop.entries.size() * 48);
        for (const auto& e : pop.entries) {
            text += format_number(e.i_th * 1e-6);
            text += ',';
            text += format_number(e.z * 1e3);
            text += ',';
            text += format_number(e.v_load);
            text += ',';
            text += format_number(e.p_load);
            text += '\n';
        }
        atomic_write(dir / (file_stem(pop.subject_id) + ".csv"), text);
    }
    CsvWriter reps(
        "application,subject,strategy,repeat,mean_ploss_W,mean_eff,energy_weighted_eff,"
        "supply_used_V\n");
    for (const auto& app : main_run.applications)
        for (const auto& r : app.repeats)
            reps.row(app.profile.application, r.subject_id, r.strategy, r.repeat_index,
                     r.mean_p_loss, r.mean_efficiency, r.energy_weighted_efficiency,
                     r.supply_used);
    atomic_write(dir / "repeats.csv", reps.str());
}

}  // namespace stimloss

#include "stimloss/population.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "stimloss/errors.hpp"

namespace stimloss {

using nlohmann::json;

double unit_scale(Quantity quantity, std::string_view unit) {
    if (quantity == Quantity::Current) {
        if (unit == "uA") return 1.0;
        if (unit == "nA") return 1e-3;
        if (unit == "mA") return 1e3;
        if (unit == "A") return 1e6;
        throw ValidationError("unknown current unit '" + std::string(unit) +
                              "' (expected nA, uA, mA or A)");
    }
    if (unit == "kOhm") return 1.0;
    if (unit == "Ohm") return 1e-3;
    if (unit == "MOhm") return 1e3;
    throw ValidationError("unknown impedance unit '" + std::string(unit) +
                          "' (expected Ohm, kOhm or MOhm)");
}

std::size_t derived_subset_size(std::size_t total_channels, double active_fraction) {
    const auto m = static_cast<std::size_t>(
        std::llround(static_cast<double>(total_channels) * active_fraction));
    return std::clamp<std::size_t>(m, 1, std::max<std::size_t>(total_channels, 1));
}

const ApplicationProfile& Dataset::profile(std::string_view application) const {
    for (const auto& p : applications)
        if (p.application == application) return p;
    throw InvalidArgument("no application profile named '" + std::string(application) + "'");
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw ConfigError("error reading '" + path.string() + "'");
    return ss.str();
}

// Field-path aware validation helper.
class Ctx {
public:
    explicit Ctx(std::string where) : where_(std::move(where)) {}

    [[noreturn]] void fail(const std::string& field, const std::string& what) const {
        throw ValidationError(where_ + " field '" + field + "': " + what);
    }

    void only_keys(const json& obj, const std::string& field,
                   std::initializer_list<std::string_view> allowed) const {
        if (!obj.is_object()) fail(field.empty() ? "<root>" : field, "must be an object");
        for (const auto& [key, _] : obj.items()) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
                fail(join(field, key), "unknown field");
        }
    }

    const json& require(const json& obj, const std::string& field, const std::string& key) const {
        auto it = obj.find(key);
        if (it == obj.end()) fail(join(field, key), "missing");
        return *it;
    }

    double number(const json& obj, const std::string& field, const std::string& key) const {
        const json& v = require(obj, field, key);
        if (!v.is_number()) fail(join(field, key), "must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(join(field, key), "must be finite");
        return d;
    }

    std::string string(const json& obj, const std::string& field, const std::string& key) const {
        const json& v = require(obj, field, key);
        if (!v.is_string()) fail(join(field, key), "must be a string");
        return v.get<std::string>();
    }

    std::string optional_string(const json& obj, const std::string& key) const {
        auto it = obj.find(key);
        if (it == obj.end()) return {};
        if (!it->is_string()) fail(key, "must be a string");
        return it->get<std::string>();
    }

    static std::string join(const std::string& a, const std::string& b) {
        return a.empty() ? b : a + "." + b;
    }

private:
    std::string where_;
};

std::size_t count(const Ctx& ctx, const json& obj, const std::string& key) {
    const json& v = ctx.require(obj, "", key);
    if (!v.is_number_integer() || v.get<long long>() < 1) ctx.fail(key, "must be an integer >= 1");
    return v.get<std::size_t>();
}

DistributionSpec parse_quantity(const Ctx& ctx, const json& node, const std::string& field,
                                Quantity quantity, const std::filesystem::path& base_dir,
                                std::uint64_t& hash) {
    ctx.only_keys(node, field,
                  {"kind", "params", "unit", "lower_bound", "upper_bound", "samples_file", "samples"});
    const std::string kind = ctx.string(node, field, "kind");
    if (!node.contains("unit")) ctx.fail(Ctx::join(field, "unit"), "missing (numeric values need a unit)");
    const std::string unit = ctx.string(node, field, "unit");
    double scale = 0.0;
    try {
        scale = unit_scale(quantity, unit);
    } catch (const ValidationError& e) {
        ctx.fail(Ctx::join(field, "unit"), e.what());
    }

    double lower = quantity == Quantity::Current ? kMinCurrentStepUa : kMinImpedanceStepKohm;
    double upper = std::numeric_limits<double>::infinity();
    if (node.contains("lower_bound")) {
        lower = ctx.number(node, field, "lower_bound") * scale;
        if (lower < 0.0) ctx.fail(Ctx::join(field, "lower_bound"), "must be >= 0");
    }
    if (node.contains("upper_bound") && !node["upper_bound"].is_null())
        upper = ctx.number(node, field, "upper_bound") * scale;
    if (!(lower < upper)) ctx.fail(Ctx::join(field, "upper_bound"), "must exceed lower_bound");

    DistributionSpec spec;
    const std::string params_field = Ctx::join(field, "params");
    if (kind == "mean_sd" || kind == "median_iqr") {
        if (node.contains("samples_file") || node.contains("samples"))
            ctx.fail(field, "samples are only allowed for kind 'kde'");
        const json& params = ctx.require(node, field, "params");
        const bool mean_sd = kind == "mean_sd";
        const std::string loc_key = mean_sd ? "mean" : "median";
        const std::string scale_key = mean_sd ? "sd" : "iqr";
        ctx.only_keys(params, params_field, {loc_key, scale_key});
        const double loc = ctx.number(params, params_field, loc_key) * scale;
        const double spread = ctx.number(params, params_field, scale_key) * scale;
        if (spread < 0.0) ctx.fail(Ctx::join(params_field, scale_key), "must be >= 0");
        spec = mean_sd ? DistributionSpec::mean_sd(loc, spread, lower, upper)
                       : DistributionSpec::median_iqr(loc, spread, lower, upper);
    } else if (kind == "kde") {
        if (node.contains("params")) ctx.fail(params_field, "not used by kind 'kde'");
        std::vector<double> samples;
        if (node.contains("samples_file") == node.contains("samples"))
            ctx.fail(field, "kind 'kde' needs exactly one of 'samples_file' or 'samples'");
        if (node.contains("samples_file")) {
            std::filesystem::path p = ctx.string(node, field, "samples_file");
            if (p.is_relative()) p = base_dir / p;
            samples = load_samples_csv(p, quantity);
            hash = fnv1a64(read_file(p), hash);
        } else {
            const json& arr = node["samples"];
            if (!arr.is_array()) ctx.fail(Ctx::join(field, "samples"), "must be an array");
            for (const auto& v : arr) {
                if (!v.is_number()) ctx.fail(Ctx::join(field, "samples"), "must hold numbers only");
                samples.push_back(v.get<double>() * scale);
            }
        }
        spec = DistributionSpec::kde(std::move(samples), lower, upper);
    } else {
        ctx.fail(Ctx::join(field, "kind"), "must be one of mean_sd, median_iqr, kde");
    }
    try {
        validate(spec);
    } catch (const ValidationError& e) {
        ctx.fail(field, e.what());
    }
    return spec;
}

}  // namespace

std::vector<double> load_samples_csv(const std::filesystem::path& path, Quantity quantity) {
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    double scale = 0.0;
    std::vector<double> out;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r,");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        if (scale == 0.0) {
            try {
                scale = unit_scale(quantity, line);
            } catch (const ValidationError& e) {
                throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                                  ": header must be a unit: " + e.what());
            }
            continue;
        }
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(line, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != line.size() || !std::isfinite(v))
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": not a number: '" +
                              line + "'");
        out.push_back(v * scale);
    }
    if (scale == 0.0) throw ConfigError(path.string() + ": missing unit header line");
    return out;
}

Dataset parse_dataset_config(std::string_view text, const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("dataset config parse error: ") + e.what());
    }

    Dataset ds;
    ds.content_hash = fnv1a64(text);
    const Ctx top("dataset config");
    top.only_keys(root, "", {"schema", "description", "applications", "subjects"});
    if (root.contains("schema") && root["schema"] != "stimloss-dataset/1")
        top.fail("schema", "unsupported schema (expected 'stimloss-dataset/1')");

    const json& apps = top.require(root, "", "applications");
    if (!apps.is_array() || apps.empty()) top.fail("applications", "must be a non-empty array");
    std::set<std::string> app_names;
    for (std::size_t i = 0; i < apps.size(); ++i) {
        const Ctx ctx("application #" + std::to_string(i));
        const json& a = apps[i];
        ctx.only_keys(a, "", {"name", "total_channels", "active_fraction", "subset_size", "notes"});
        ApplicationProfile p;
        p.application = ctx.string(a, "", "name");
        if (p.application.empty()) ctx.fail("name", "must be non-empty");
        const Ctx named("application '" + p.application + "'");
        if (!app_names.insert(p.application).second) named.fail("name", "duplicate application");
        p.total_channels = count(named, a, "total_channels");
        if (a.contains("active_fraction")) {
            p.active_fraction = named.number(a, "", "active_fraction");
            if (!(p.active_fraction > 0.0 && p.active_fraction <= 1.0))
                named.fail("active_fraction", "must lie in (0, 1]");
        }
        p.subset_size = a.contains("subset_size")
                            ? count(named, a, "subset_size")
                            : derived_subset_size(p.total_channels, p.active_fraction);
        if (p.subset_size > p.total_channels)
            named.fail("subset_size", "must not exceed total_channels");
        ds.applications.push_back(std::move(p));
    }

    const json& subjects = top.require(root, "", "subjects");
    if (!subjects.is_array() || subjects.empty()) top.fail("subjects", "must be a non-empty array");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < subjects.size(); ++i) {
        const json& s = subjects[i];
        const Ctx idx("subject #" + std::to_string(i));
        idx.only_keys(s, "", {"id", "source", "application", "impedance", "threshold", "notes"});
        SubjectRecord rec;
        rec.id = idx.string(s, "", "id");
        if (rec.id.empty()) idx.fail("id", "must be non-empty");
        const Ctx ctx("subject '" + rec.id + "'");
        if (!ids.insert(rec.id).second) ctx.fail("id", "duplicate subject id");
        rec.source_label = ctx.optional_string(s, "source");
        rec.notes = ctx.optional_string(s, "notes");
        rec.application = ctx.string(s, "", "application");
        if (!app_names.contains(rec.application))
            ctx.fail("application", "'" + rec.application + "' is not declared in applications");
        rec.impedance = parse_quantity(ctx, ctx.require(s, "", "impedance"), "impedance",
                                       Quantity::Impedance, base_dir, ds.content_hash);
        rec.threshold = parse_quantity(ctx, ctx.require(s, "", "threshold"), "threshold",
                                       Quantity::Current, base_dir, ds.content_hash);
        ds.subjects.push_back(std::move(rec));
    }

    for (const auto& p : ds.applications) {
        const bool used = std::any_of(ds.subjects.begin(), ds.subjects.end(),
                                      [&](const auto& r) { return r.application == p.application; });
        if (!used) ds.warnings.push_back("application '" + p.application + "' has no subjects");
    }
    return ds;
}

Dataset load_dataset_config(const std::filesystem::path& path) {
    return parse_dataset_config(read_file(path), path.parent_path());
}

ChannelEntry make_entry(double i_th_ua, double z_kohm) noexcept {
    return {i_th_ua, z_kohm, i_th_ua * z_kohm * 1e-3, i_th_ua * i_th_ua * z_kohm * 1e-9};
}

std::uint64_t subject_stream(std::string_view subject_id, std::string_view purpose) {
    return combine_keys(fnv1a64(subject_id), fnv1a64(purpose));
}

ChannelPopulation synthesize_population(const SubjectRecord& record, std::size_t size,
                                        const SeededRng& rng) {
    if (size == 0) throw InvalidArgument("population size must be >= 1");
    SeededRng current_rng = rng.substream(subject_stream(record.id, "threshold"));
    SeededRng impedance_rng = rng.substream(subject_stream(record.id, "impedance"));
    const std::vector<double> currents = sample(record.threshold, size, current_rng);
    const std::vector<double> impedances = sample(record.impedance, size, impedance_rng);

    ChannelPopulation pop{record.id, record.application, {}};
    pop.entries.reserve(size);
    for (std::size_t k = 0; k < size; ++k) {
        if (!(currents[k] > 0.0) || !(impedances[k] > 0.0))
            throw ValidationError("subject '" + record.id +
                                  "': drew a non-positive value; raise lower_bound above 0");
        pop.entries.push_back(make_entry(currents[k], impedances[k]));
    }
    return pop;
}

PooledEntries pool_by_application(std::span<const ChannelPopulation> populations,
                                  std::span<const ApplicationProfile> profiles,
                                  std::vector<std::string>* warnings) {
    if (populations.empty()) throw InvalidArgument("pool_by_application: no populations");
    PooledEntries pooled;
    for (const auto& pop : populations) {
        auto& dst = pooled[pop.application];
        dst.insert(dst.end(), pop.entries.begin(), pop.entries.end());
    }
    for (const auto& p : profiles) {
        if (!pooled.contains(p.application) && warnings)
            warnings->push_back("application '" + p.application + "' has no subjects; excluded");
    }
    return pooled;
}

}  // namespace stimloss

#pragma once

// Batch front door. Run configurations arrive as JSON documents, commands
// dispatch to the library modules, and results leave as CSV or JSON tables
// with fixed serialization so the same config and seed always produce the
// same bytes. No timestamps, no locale, 17 significant digits for reals.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nlpoint/criticality.hpp"
#include "nlpoint/errors.hpp"
#include "nlpoint/limits.hpp"
#include "nlpoint/macdonald.hpp"
#include "nlpoint/manybody.hpp"
#include "nlpoint/resolvent.hpp"
#include "nlpoint/spectral.hpp"

namespace nlpoint {

inline constexpr const char kVersion[] = "1.0.0";

enum class Command { spectrum, resolvent, merge_scan, critical, form_probe, verify };
enum class TableFormat { csv, json };

inline const char* command_name(Command c) {
    switch (c) {
        case Command::spectrum: return "spectrum";
        case Command::resolvent: return "resolvent";
        case Command::merge_scan: return "merge-scan";
        case Command::critical: return "critical";
        case Command::form_probe: return "form-probe";
        case Command::verify: return "verify";
    }
    return "?";
}

struct SpectrumJob {
    CenterConfig config;
    double lambda_max = 1.0;
};

struct GaussianSource {
    Vec3 center{0.0, 0.0, 0.0};
    double width = 1.0;
    double amplitude = 1.0;
};

struct ResolventJob {
    CenterConfig config;
    double lambda = 1.0;
    GaussianSource source;
    std::vector<Vec3> points;
    QuadratureSpec quad;
};

struct MergeScanJob {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    ThetaProfile profile = ThetaProfile::exponential(1.0);
    std::vector<double> radii;
    double lambda = 1.0;
    QuadratureSpec quad;
};

struct CriticalJob {
    std::vector<int> n_values;
    double eta_lo = 1.0;
    double eta_hi = 10.0;
    int eta_count = 2;
};

struct FormProbeJob {
    std::array<double, 2> alphas{0.0, 0.0};
    double gamma = 1.0;
    MassModel model;
    double lambda = 1.0;
    std::int64_t samples = 10000;
    ThetaProfile profile = ThetaProfile::indicator(1.0);
    std::vector<std::array<GaussianCharge, 2>> pairs;
    int random_pairs = 0;
};

struct VerifyJob {
    std::vector<IdentityParams> geometries;
    QuadratureSpec quad;
};

struct RunConfig {
    Command command = Command::spectrum;
    std::string output_path;
    TableFormat format = TableFormat::csv;
    std::uint64_t seed = 0;
    std::variant<SpectrumJob, ResolventJob, MergeScanJob, CriticalJob, FormProbeJob,
                 VerifyJob>
        job;
};

using TableCell = std::variant<std::int64_t, double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<TableCell>> rows;
};

struct TableMeta {
    std::string command;
    std::uint64_t seed = 0;
};

namespace detail {

using Json = nlohmann::ordered_json;

[[noreturn]] inline void config_fail(const std::string& message) {
    throw ConfigError(message);
}

inline void reject_unknown(const Json& obj, std::initializer_list<std::string_view> allowed,
                           const char* scope) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (std::string_view key : allowed)
            if (it.key() == key) {
                known = true;
                break;
            }
        if (!known)
            config_fail("unknown key \"" + it.key() + "\" in " + scope);
    }
}

inline const Json& need(const Json& obj, const char* key, const char* scope) {
    const auto it = obj.find(key);
    if (it == obj.end())
        config_fail(std::string(scope) + " requires key \"" + key + "\"");
    return *it;
}

inline std::string need_string(const Json& obj, const char* key, const char* scope) {
    const Json& j = need(obj, key, scope);
    if (!j.is_string()) config_fail("\"" + std::string(key) + "\" must be a string");
    return j.get<std::string>();
}

inline double need_number(const Json& obj, const char* key, const char* scope) {
    const Json& j = need(obj, key, scope);
    if (!j.is_number()) config_fail("\"" + std::string(key) + "\" must be a number");
    return j.get<double>();
}

inline double need_positive(const Json& obj, const char* key, const char* scope) {
    const double v = need_number(obj, key, scope);
    if (!(v > 0.0)) config_fail("\"" + std::string(key) + "\" must be positive");
    return v;
}

inline std::int64_t need_integer(const Json& obj, const char* key, const char* scope,
                                 std::int64_t minimum) {
    const Json& j = need(obj, key, scope);
    if (!j.is_number_integer() && !j.is_number_unsigned())
        config_fail("\"" + std::string(key) + "\" must be an integer");
    const auto v = j.get<std::int64_t>();
    if (v < minimum)
        config_fail("\"" + std::string(key) + "\" must be at least "
                    + std::to_string(minimum));
    return v;
}

inline double optional_positive(const Json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const Json& j = obj.at(key);
    if (!j.is_number()) config_fail("\"" + std::string(key) + "\" must be a number");
    const double v = j.get<double>();
    if (!(v > 0.0)) config_fail("\"" + std::string(key) + "\" must be positive");
    return v;
}

inline std::uint64_t optional_seed(const Json& obj) {
    if (!obj.contains("seed")) return 0;
    const Json& j = obj.at("seed");
    if (!j.is_number_unsigned())
        config_fail("\"seed\" must be a nonnegative integer");
    return j.get<std::uint64_t>();
}

inline Vec3 parse_vec3(const Json& j, const char* key) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number()
        || !j[2].is_number())
        config_fail("\"" + std::string(key) + "\" entries must be [x, y, z] number triples");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline ThetaProfile parse_profile(const Json& j) {
    if (!j.is_object()) config_fail("\"profile\" must be an object");
    const std::string kind = need_string(j, "kind", "profile");
    if (kind == "local-zero") {
        reject_unknown(j, {"kind"}, "profile");
        return ThetaProfile::local_zero();
    }
    reject_unknown(j, {"kind", "range"}, "profile");
    const double range = need_positive(j, "range", "profile");
    if (kind == "exponential") return ThetaProfile::exponential(range);
    if (kind == "indicator") return ThetaProfile::indicator(range);
    if (kind == "smooth-bump") return ThetaProfile::smooth_bump(range);
    config_fail("profile kind \"" + kind
                + "\" not recognized (exponential, indicator, smooth-bump, local-zero)");
}

inline Json profile_json(const ThetaProfile& profile) {
    Json j;
    switch (profile.kind) {
        case ThetaKind::Exponential: j["kind"] = "exponential"; break;
        case ThetaKind::Indicator: j["kind"] = "indicator"; break;
        case ThetaKind::SmoothBump: j["kind"] = "smooth-bump"; break;
        case ThetaKind::LocalZero: j["kind"] = "local-zero"; return j;
    }
    j["range"] = profile.b;
    return j;
}

inline CenterConfig parse_center_config(const Json& doc) {
    CenterConfig config;
    const Json& centers = need(doc, "centers", "config");
    if (!centers.is_array())
        config_fail("\"centers\" must be an array of [x, y, z] triples");
    for (const Json& c : centers) config.centers.push_back(parse_vec3(c, "centers"));

    const Json& strengths = need(doc, "strengths", "config");
    if (!strengths.is_array())
        config_fail("\"strengths\" must be an array of numbers");
    for (const Json& a : strengths) {
        if (!a.is_number()) config_fail("\"strengths\" entries must be numbers");
        config.strengths.push_back(a.get<double>());
    }
    if (config.strengths.size() != config.centers.size())
        config_fail("\"strengths\" must match the number of centers");

    config.profile = parse_profile(need(doc, "profile", "config"));
    try {
        validate_config(config);
    } catch (const DomainError& e) {
        config_fail(std::string("\"centers\": ") + e.what());
    }
    return config;
}

inline GaussianCharge parse_charge(const Json& j) {
    if (!j.is_object()) config_fail("charge entries must be objects");
    reject_unknown(j, {"amplitude", "width_p", "width_P"}, "charge");
    GaussianCharge charge;
    charge.amplitude = need_number(j, "amplitude", "charge");
    charge.width_p = need_positive(j, "width_p", "charge");
    charge.width_P = need_positive(j, "width_P", "charge");
    return charge;
}

} // namespace detail

inline Command parse_command_name(const std::string& name) {
    if (name == "spectrum") return Command::spectrum;
    if (name == "resolvent") return Command::resolvent;
    if (name == "merge-scan") return Command::merge_scan;
    if (name == "critical") return Command::critical;
    if (name == "form-probe") return Command::form_probe;
    if (name == "verify") return Command::verify;
    throw ConfigError("unknown command \"" + name + "\"");
}

namespace detail {

inline std::pair<std::string, TableFormat> parse_output(const Json& doc, Command command) {
    const Json& j = need(doc, "output", "config");
    if (!j.is_object()) config_fail("\"output\" must be an object");
    reject_unknown(j, {"path", "format"}, "output");
    const std::string path = need_string(j, "path", "output");
    if (path.empty()) config_fail("\"path\" must not be empty");
    const std::string format = need_string(j, "format", "output");
    TableFormat f;
    if (format == "csv")
        f = TableFormat::csv;
    else if (format == "json")
        f = TableFormat::json;
    else
        config_fail("\"format\" must be \"csv\" or \"json\"");
    if (command == Command::form_probe && f != TableFormat::json)
        config_fail("\"format\" must be \"json\" for form-probe");
    return {path, f};
}

inline SpectrumJob parse_spectrum(const Json& doc) {
    reject_unknown(doc,
                   {"command", "output", "seed", "centers", "strengths", "profile",
                    "lambda_max"},
                   "spectrum config");
    SpectrumJob job;
    job.config = parse_center_config(doc);
    if (job.config.centers.empty())
        config_fail("\"centers\" must contain at least one center");
    job.lambda_max = optional_positive(doc, "lambda_max", 1.0);
    return job;
}

inline ResolventJob parse_resolvent(const Json& doc) {
    reject_unknown(doc,
                   {"command", "output", "seed", "centers", "strengths", "profile",
                    "lambda", "source", "points", "rel_tol"},
                   "resolvent config");
    ResolventJob job;
    job.config = parse_center_config(doc);
    job.lambda = need_positive(doc, "lambda", "resolvent config");

    const Json& src = need(doc, "source", "resolvent config");
    if (!src.is_object()) config_fail("\"source\" must be an object");
    reject_unknown(src, {"center", "width", "amplitude"}, "source");
    if (src.contains("center")) job.source.center = parse_vec3(src.at("center"), "center");
    job.source.width = need_positive(src, "width", "source");
    if (src.contains("amplitude")) {
        if (!src.at("amplitude").is_number())
            config_fail("\"amplitude\" must be a number");
        job.source.amplitude = src.at("amplitude").get<double>();
    }

    const Json& points = need(doc, "points", "resolvent config");
    if (!points.is_array() || points.empty())
        config_fail("\"points\" must be a non-empty array of [x, y, z] triples");
    for (const Json& p : points) job.points.push_back(parse_vec3(p, "points"));

    job.quad.rel_tol = optional_positive(doc, "rel_tol", job.quad.rel_tol);
    return job;
}

inline MergeScanJob parse_merge_scan(const Json& doc) {
    reject_unknown(doc,
                   {"command", "output", "seed", "alpha1", "alpha2", "profile", "radii",
                    "lambda", "rel_tol"},
                   "merge-scan config");
    MergeScanJob job;
    job.alpha1 = need_number(doc, "alpha1", "merge-scan config");
    job.alpha2 = need_number(doc, "alpha2", "merge-scan config");
    job.profile = parse_profile(need(doc, "profile", "merge-scan config"));
    job.lambda = need_positive(doc, "lambda", "merge-scan config");

    const Json& radii = need(doc, "radii", "merge-scan config");
    if (!radii.is_array() || radii.empty())
        config_fail("\"radii\" must be a non-empty array of numbers");
    for (const Json& r : radii) {
        if (!r.is_number() || !(r.get<double>() > 0.0))
            config_fail("\"radii\" entries must be positive numbers");
        job.radii.push_back(r.get<double>());
    }
    for (std::size_t k = 1; k < job.radii.size(); ++k)
        if (!(job.radii[k] < job.radii[k - 1]))
            config_fail("\"radii\" must decrease strictly");

    job.quad.rel_tol = optional_positive(doc, "rel_tol", job.quad.rel_tol);
    return job;
}

inline CriticalJob parse_critical(const Json& doc) {
    reject_unknown(doc, {"command", "output", "seed", "n_values", "eta_grid"},
                   "critical config");
    CriticalJob job;
    const Json& ns = need(doc, "n_values", "critical config");
    if (!ns.is_array() || ns.empty())
        config_fail("\"n_values\" must be a non-empty array of integers");
    for (const Json& n : ns) {
        if (!n.is_number_integer() && !n.is_number_unsigned())
            config_fail("\"n_values\" entries must be integers");
        const auto v = n.get<std::int64_t>();
        if (v < 2) config_fail("\"n_values\" entries must be at least 2");
        job.n_values.push_back(static_cast<int>(v));
    }
    const Json& grid = need(doc, "eta_grid", "critical config");
    if (!grid.is_object()) config_fail("\"eta_grid\" must be an object");
    reject_unknown(grid, {"lo", "hi", "count"}, "eta_grid");
    job.eta_lo = need_positive(grid, "lo", "eta_grid");
    job.eta_hi = need_positive(grid, "hi", "eta_grid");
    if (!(job.eta_hi > job.eta_lo)) config_fail("\"hi\" must exceed \"lo\"");
    job.eta_count = static_cast<int>(need_integer(grid, "count", "eta_grid", 2));
    return job;
}

inline FormProbeJob parse_form_probe(const Json& doc) {
    reject_unknown(doc,
                   {"command", "output", "seed", "alphas", "gamma", "eta", "m_light",
                    "lambda", "samples", "profile", "pairs", "random_pairs"},
                   "form-probe config");
    FormProbeJob job;
    const Json& alphas = need(doc, "alphas", "form-probe config");
    if (!alphas.is_array() || alphas.size() != 2 || !alphas[0].is_number()
        || !alphas[1].is_number())
        config_fail("\"alphas\" must be an array of two numbers");
    job.alphas = {alphas[0].get<double>(), alphas[1].get<double>()};

    const double gamma = need_number(doc, "gamma", "form-probe config");
    if (!(gamma >= 0.0)) config_fail("\"gamma\" must be nonnegative");
    job.gamma = gamma;
    const double eta = need_number(doc, "eta", "form-probe config");
    if (!(eta >= 0.0)) config_fail("\"eta\" must be nonnegative");
    job.model.eta = eta;
    job.model.m_light = need_positive(doc, "m_light", "form-probe config");
    job.lambda = need_positive(doc, "lambda", "form-probe config");
    job.samples = need_integer(doc, "samples", "form-probe config", 10000);
    job.profile = parse_profile(need(doc, "profile", "form-probe config"));

    const bool has_pairs = doc.contains("pairs");
    const bool has_random = doc.contains("random_pairs");
    if (has_pairs == has_random)
        config_fail("form-probe config requires exactly one of \"pairs\" and \"random_pairs\"");
    if (has_random) {
        job.random_pairs = static_cast<int>(need_integer(doc, "random_pairs",
                                                         "form-probe config", 1));
    } else {
        const Json& pairs = doc.at("pairs");
        if (!pairs.is_array() || pairs.empty())
            config_fail("\"pairs\" must be a non-empty array of charge pairs");
        for (const Json& p : pairs) {
            if (!p.is_array() || p.size() != 2)
                config_fail("\"pairs\" entries must be [charge, charge] arrays");
            job.pairs.push_back({parse_charge(p[0]), parse_charge(p[1])});
        }
    }
    return job;
}

inline VerifyJob parse_verify(const Json& doc) {
    reject_unknown(doc, {"command", "output", "seed", "geometries", "rel_tol"},
                   "verify config");
    VerifyJob job;
    if (doc.contains("geometries")) {
        const Json& gs = doc.at("geometries");
        if (!gs.is_array() || gs.empty())
            config_fail("\"geometries\" must be a non-empty array");
        for (const Json& g : gs) {
            if (!g.is_object()) config_fail("\"geometries\" entries must be objects");
            reject_unknown(g, {"k", "k_prime"}, "geometries");
            IdentityParams params;
            params.k = parse_vec3(need(g, "k", "geometries"), "k");
            params.k_prime = parse_vec3(need(g, "k_prime", "geometries"), "k_prime");
            if (!(distance(params.k, params.k_prime) > 0.0))
                config_fail("\"geometries\" entries must have distinct k and k_prime");
            job.geometries.push_back(params);
        }
    } else {
        job.geometries.push_back(IdentityParams{});
    }
    job.quad.rel_tol = optional_positive(doc, "rel_tol", job.quad.rel_tol);
    return job;
}

} // namespace detail

inline RunConfig parse_config(const std::string& text) {
    detail::Json doc;
    try {
        doc = detail::Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config syntax error: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be an object");

    RunConfig cfg;
    cfg.command = parse_command_name(detail::need_string(doc, "command", "config"));
    const auto [path, format] = detail::parse_output(doc, cfg.command);
    cfg.output_path = path;
    cfg.format = format;
    cfg.seed = detail::optional_seed(doc);

    switch (cfg.command) {
        case Command::spectrum: cfg.job = detail::parse_spectrum(doc); break;
        case Command::resolvent: cfg.job = detail::parse_resolvent(doc); break;
        case Command::merge_scan: cfg.job = detail::parse_merge_scan(doc); break;
        case Command::critical: cfg.job = detail::parse_critical(doc); break;
        case Command::form_probe: cfg.job = detail::parse_form_probe(doc); break;
        case Command::verify: cfg.job = detail::parse_verify(doc); break;
    }
    return cfg;
}

namespace detail {

inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_cell(const TableCell& cell) {
    struct Visitor {
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(double v) const { return format_real(v); }
        std::string operator()(const std::string& v) const { return v; }
    };
    return std::visit(Visitor{}, cell);
}

inline std::string csv_text(const Table& table, const TableMeta& meta) {
    std::string out;
    out += "# command: " + meta.command + "\n";
    out += std::string("# version: ") + kVersion + "\n";
    out += "# seed: " + std::to_string(meta.seed) + "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c > 0) out += ',';
        out += table.columns[c];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out += ',';
            out += format_cell(row[c]);
        }
        out += '\n';
    }
    return out;
}

inline Json table_json(const Table& table, const TableMeta& meta) {
    Json doc;
    doc["metadata"] = {{"command", meta.command}, {"version", kVersion}, {"seed", meta.seed}};
    doc["columns"] = table.columns;
    Json rows = Json::array();
    for (const auto& row : table.rows) {
        Json r = Json::array();
        for (const TableCell& cell : row) {
            if (const auto* i = std::get_if<std::int64_t>(&cell))
                r.push_back(*i);
            else if (const auto* d = std::get_if<double>(&cell))
                r.push_back(*d);
            else
                r.push_back(std::get<std::string>(cell));
        }
        rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    return doc;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file \"" + path + "\"");
    out << text;
    out.flush();
    if (!out) throw ConfigError("failed writing output file \"" + path + "\"");
}

} // namespace detail

inline void emit_table(const Table& table, TableFormat format, const std::string& path,
                       const TableMeta& meta) {
    for (const auto& row : table.rows)
        if (row.size() != table.columns.size())
            throw DomainError("emit_table: row width differs from the column count");
    detail::write_text_file(path, format == TableFormat::csv
                                      ? detail::csv_text(table, meta)
                                      : detail::table_json(table, meta).dump(2) + "\n");
}

namespace detail {

inline Table spectrum_table(const SpectrumJob& job) {
    const SpectralResult states = bound_states(job.config, job.lambda_max);
    Table t;
    t.columns = {"index", "energy"};
    for (std::size_t i = 0; i < job.config.centers.size(); ++i)
        t.columns.push_back("q_" + std::to_string(i + 1));
    for (std::size_t k = 0; k < states.energies.size(); ++k) {
        std::vector<TableCell> row;
        row.emplace_back(static_cast<std::int64_t>(k));
        row.emplace_back(states.energies[k]);
        for (double q : states.charge_vectors[k]) row.emplace_back(q);
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table resolvent_table(const ResolventJob& job) {
    const GaussianSource src = job.source;
    auto f = [src](const Vec3& y) {
        return src.amplitude
               * std::exp(-norm_sq(y - src.center) / (2.0 * src.width * src.width));
    };
    const ResolventOutput out = resolvent_apply(job.config, job.lambda, f, job.quad);
    Table t;
    t.columns = {"px", "py", "pz", "free_value", "full_value"};
    for (std::size_t i = 0; i < job.config.centers.size(); ++i)
        t.columns.push_back("q_" + std::to_string(i + 1));
    for (const Vec3& x : job.points) {
        std::vector<TableCell> row{x.x, x.y, x.z, out.smooth_part(x),
                                   field_value(out, job.config, x)};
        for (double q : out.charges) row.emplace_back(q);
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table merge_scan_table(const MergeScanJob& job) {
    const MergeScanResult scan =
        merge_scan(job.alpha1, job.alpha2, job.profile, job.radii, job.lambda, job.quad);
    Table t;
    t.columns = {"R", "E_ground", "q_sum", "predicted_E"};
    for (std::size_t k = 0; k < scan.radii.size(); ++k)
        t.rows.push_back({scan.radii[k], scan.ground_energies[k], scan.charge_sums[k],
                          scan.predicted_energy});
    return t;
}

inline Table critical_table(const CriticalJob& job) {
    const std::vector<double> grid =
        geometric_grid(job.eta_lo, job.eta_hi, job.eta_count);
    Table t;
    t.columns = {"n", "eta", "gamma_hat", "gamma_bosons"};
    for (int n : job.n_values) {
        const double bosons =
            n >= 3 ? gamma_c_bosons(n) : std::numeric_limits<double>::quiet_NaN();
        for (double eta : grid)
            t.rows.push_back({static_cast<std::int64_t>(n), eta, gamma_hat_c(n, eta),
                              bosons});
    }
    return t;
}

inline std::pair<Table, bool> verify_report(const VerifyJob& job) {
    Table t;
    t.columns = {"check", "reference", "computed", "rel_error", "passed"};
    bool all_ok = true;
    auto add = [&](const char* name, const IdentityReport& rep, double tol,
                   bool one_sided = false) {
        const bool ok = one_sided ? rep.rel_error <= tol : std::fabs(rep.rel_error) <= tol;
        all_ok = all_ok && ok;
        t.rows.push_back({std::string(name), rep.reference, rep.computed, rep.rel_error,
                          static_cast<std::int64_t>(ok ? 1 : 0)});
    };
    for (const IdentityParams& g : job.geometries)
        add("MomentumDouble", verify_identity(Identity::momentum_double, g, job.quad),
            1e-3);
    add("LogIntegral", verify_identity(Identity::log_integral, {}, job.quad), 1e-6);
    add("EtaSqrtBound", verify_identity(Identity::eta_sqrt_bound, {}, job.quad), 0.0,
        true);
    const double closed = g_shift_norm(1.0, 1.0);
    const double quadr = g_shift_norm_quadrature(1.0, 1.0, job.quad);
    add("GShiftNorm", {closed, quadr, (quadr - closed) / closed}, 1e-8);
    const double half_ref = std::sqrt(kPi / 4.0) * std::exp(-2.0);
    const double half = macdonald_k(0.5, 2.0);
    add("MacdonaldHalf", {half_ref, half, (half - half_ref) / half_ref}, 1e-12);
    return {std::move(t), all_ok};
}

inline GaussianCharge random_charge(std::uint64_t& state) {
    auto uniform = [&state] {
        return static_cast<double>(splitmix64_next(state) >> 11) * 0x1.0p-53;
    };
    GaussianCharge charge;
    charge.amplitude = 0.5 + uniform();
    charge.width_p = 0.5 + 1.5 * uniform();
    charge.width_P = 0.5 + 1.5 * uniform();
    return charge;
}

inline Json charge_json(const GaussianCharge& charge) {
    Json j;
    j["amplitude"] = charge.amplitude;
    j["width_p"] = charge.width_p;
    j["width_P"] = charge.width_P;
    return j;
}

inline Json form_probe_document(const FormProbeJob& job, const TableMeta& meta) {
    // charge draws and per-pair sampler seeds come from one deterministic
    // stream off the run seed, so the artifact replays byte for byte
    std::uint64_t state = meta.seed;
    std::vector<std::array<GaussianCharge, 2>> pairs = job.pairs;
    std::vector<std::uint64_t> sub_seeds;
    if (job.random_pairs > 0) {
        pairs.clear();
        for (int k = 0; k < job.random_pairs; ++k) {
            const GaussianCharge a = random_charge(state);
            const GaussianCharge b = random_charge(state);
            pairs.push_back({a, b});
            sub_seeds.push_back(splitmix64_next(state));
        }
    } else {
        for (std::size_t k = 0; k < pairs.size(); ++k)
            sub_seeds.push_back(splitmix64_next(state));
    }

    Json doc;
    doc["metadata"] = {{"command", meta.command}, {"version", kVersion}, {"seed", meta.seed}};
    doc["parameters"] = {{"alphas", {job.alphas[0], job.alphas[1]}},
                         {"gamma", job.gamma},
                         {"eta", job.model.eta},
                         {"m_light", job.model.m_light},
                         {"lambda", job.lambda},
                         {"samples", job.samples},
                         {"profile", profile_json(job.profile)}};
    Json estimates = Json::array();
    bool all_positive = true;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const FormEstimate est =
            phi_form_estimate(pairs[k], job.alphas, job.gamma, job.profile, job.model,
                              job.lambda, job.samples, sub_seeds[k]);
        const bool positive = est.value >= -3.0 * est.std_error;
        all_positive = all_positive && positive;
        Json e;
        e["pair"] = k;
        e["charges"] = Json::array({charge_json(pairs[k][0]), charge_json(pairs[k][1])});
        e["value"] = est.value;
        e["stderr"] = est.std_error;
        e["sample_count"] = est.sample_count;
        e["xi_diagonal"] = est.xi_diagonal;
        e["xi_offdiagonal"] = est.xi_offdiagonal;
        e["b_alpha"] = est.b_alpha;
        e["b_theta"] = est.b_theta;
        e["positive_within_3_sigma"] = positive;
        estimates.push_back(std::move(e));
    }
    doc["estimates"] = std::move(estimates);
    doc["all_positive_within_3_sigma"] = all_positive;
    return doc;
}

inline void try_diagnostic(const RunConfig& cfg, const TableMeta& meta, const char* kind,
                           const std::string& what) {
    try {
        Json doc;
        doc["metadata"] = {{"command", meta.command},
                           {"version", kVersion},
                           {"seed", meta.seed}};
        doc["error"] = {{"kind", kind}, {"message", what}};
        write_text_file(cfg.output_path, doc.dump(2) + "\n");
    } catch (...) {
    }
}

} // namespace detail

// Dispatches a parsed configuration and writes the artifact. Returns the
// process exit status: 0 on success, 1 on configuration problems, 2 on
// numerical failure (including verify checks that miss their tolerance);
// failures leave a JSON diagnostic at the output path when possible.
inline int run_command(const RunConfig& cfg, std::string* message = nullptr) {
    const TableMeta meta{command_name(cfg.command), cfg.seed};
    try {
        int code = 0;
        if (const auto* spectrum = std::get_if<SpectrumJob>(&cfg.job)) {
            emit_table(detail::spectrum_table(*spectrum), cfg.format, cfg.output_path, meta);
        } else if (const auto* resolvent = std::get_if<ResolventJob>(&cfg.job)) {
            emit_table(detail::resolvent_table(*resolvent), cfg.format, cfg.output_path,
                       meta);
        } else if (const auto* merge = std::get_if<MergeScanJob>(&cfg.job)) {
            emit_table(detail::merge_scan_table(*merge), cfg.format, cfg.output_path, meta);
        } else if (const auto* critical = std::get_if<CriticalJob>(&cfg.job)) {
            emit_table(detail::critical_table(*critical), cfg.format, cfg.output_path, meta);
        } else if (const auto* probe = std::get_if<FormProbeJob>(&cfg.job)) {
            detail::write_text_file(cfg.output_path,
                                    detail::form_probe_document(*probe, meta).dump(2)
                                        + "\n");
        } else if (const auto* verify = std::get_if<VerifyJob>(&cfg.job)) {
            auto [table, ok] = detail::verify_report(*verify);
            emit_table(table, cfg.format, cfg.output_path, meta);
            if (!ok) {
                if (message) *message = "verify: at least one check missed its tolerance";
                code = 2;
            }
        }
        return code;
    } catch (const ConfigError& e) {
        if (message) *message = e.what();
        detail::try_diagnostic(cfg, meta, "config", e.what());
        return 1;
    } catch (const Error& e) {
        if (message) *message = e.what();
        detail::try_diagnostic(cfg, meta, "numerical", e.what());
        return 2;
    } catch (const std::exception& e) {
        if (message) *message = e.what();
        detail::try_diagnostic(cfg, meta, "internal", e.what());
        return 2;
    }
}

} // namespace nlpoint

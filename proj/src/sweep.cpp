#include "shear/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "shear/pwe.hpp"

namespace shear {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& item : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
        if (!known) throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
}

template <class T>
T get(const json& obj, const char* key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

Material parse_material(const json& j, const std::string& where) {
    if (j.is_string()) {
        try {
            return named_material(j.get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    check_keys(j, {"mu", "rho"}, where);
    try {
        return Material(get<double>(j, "mu", where), get<double>(j, "rho", where));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

GeometryKind parse_kind(const std::string& s) {
    if (s == "homogeneous") return GeometryKind::homogeneous;
    if (s == "nested_squares") return GeometryKind::nested_squares;
    if (s == "nested_circles") return GeometryKind::nested_circles;
    if (s == "laminate") return GeometryKind::laminate;
    if (s == "separable") return GeometryKind::separable;
    throw ConfigError("unknown geometry kind: " + s);
}

Method parse_method(const std::string& s) {
    if (s == "pwe") return Method::pwe;
    if (s == "mm") return Method::mm;
    if (s == "both") return Method::both;
    throw ConfigError("method must be pwe, mm or both, got " + s);
}

OutputFormat parse_format(const std::string& s) {
    if (s == "csv") return OutputFormat::csv;
    if (s == "json") return OutputFormat::json;
    throw ConfigError("output format must be csv or json, got " + s);
}

Period parse_period(const std::string& s) {
    if (s == "auto") return Period::automatic;
    if (s == "full") return Period::full;
    if (s == "half") return Period::half;
    throw ConfigError("mm.period must be auto, full or half, got " + s);
}

GeometrySpec parse_geometry(const json& j) {
    const std::string where = "geometry";
    check_keys(j, {"kind", "matrix", "inclusions", "g_matrix", "g_inclusion", "density"}, where);
    GeometrySpec g;
    g.kind = parse_kind(get<std::string>(j, "kind", where));
    if (j.contains("matrix")) g.matrix = parse_material(j.at("matrix"), where + ".matrix");
    if (j.contains("inclusions")) {
        const json& list = j.at("inclusions");
        if (!list.is_array()) throw ConfigError("geometry.inclusions must be an array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string w = where + ".inclusions[" + std::to_string(i) + "]";
            const json& item = list[i];
            InclusionSpec inc;
            if (item.is_string()) {
                inc.material = parse_material(item, w);
            } else {
                check_keys(item, {"material", "ratio"}, w);
                inc.material = parse_material(item.at("material"), w + ".material");
                if (item.contains("ratio")) inc.ratio = get<double>(item, "ratio", w);
            }
            g.inclusions.push_back(inc);
        }
    }
    if (j.contains("g_matrix")) g.g_matrix = get<double>(j, "g_matrix", where);
    if (j.contains("g_inclusion")) g.g_inclusion = get<double>(j, "g_inclusion", where);
    if (j.contains("density")) g.density = get<double>(j, "density", where);
    return g;
}

std::vector<Material> phase_table(const GeometrySpec& spec) {
    std::vector<Material> phases{spec.matrix};
    for (const InclusionSpec& inc : spec.inclusions) phases.push_back(inc.material);
    return phases;
}

std::string number(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

json json_number(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

struct Task {
    std::size_t f_index;
    double f;
    int N;
    std::string method;
};

std::vector<Task> make_tasks(const SweepConfig& config) {
    std::vector<Task> tasks;
    const std::vector<double> fs = config.f_grid.values();
    std::vector<std::string> methods;
    if (config.method != Method::pwe) methods.push_back("mm");
    if (config.method != Method::mm) methods.push_back("pwe");
    for (std::size_t i = 0; i < fs.size(); ++i)
        for (int N : config.N)
            for (const std::string& m : methods) tasks.push_back({i, fs[i], N, m});
    return tasks;
}

BoundsResult evaluate_point(const SweepConfig& config, const Task& task) {
    BoundsResult r;
    r.f = task.f;
    r.N = task.N;
    r.method = task.method;
    r.mu_lower = r.mu_upper = r.c_lower = r.c_upper = r.rho_avg = r.condition_estimate = kNaN;
    if (task.method == "mm") r.backend = backend_name(config.mm.integrator.backend);
    try {
        const CellField field = build_field(config.geometry, task.f);
        r.rho_avg = cell_averages(field).rho_avg;
        if (task.method == "pwe") {
            PweOptions po;
            po.require_cubic = !config.oracle_mode;
            const PweResult lo = pwe_lower(field, task.N, po);
            const PweResult up = pwe_upper(field, task.N, po);
            r.mu_lower = lo.mu;
            r.mu_upper = up.mu;
            r.condition_estimate = std::max(lo.condition_estimate, up.condition_estimate);
        } else {
            MmOptions mo = config.mm;
            mo.require_cubic = !config.oracle_mode;
            const MmResult lo = mm_lower(field, task.N, mo);
            const MmResult up = mm_upper(field, task.N, mo);
            r.mu_lower = lo.mu;
            r.mu_upper = up.mu;
            r.condition_estimate = std::max(lo.condition_estimate, up.condition_estimate);
            r.circle_steps = std::max(lo.circle_steps, up.circle_steps);
            r.panels = std::max(lo.panels, up.panels);
            // Unconverged disc refinement keeps its last estimate but flags the row.
            if (!lo.converged || !up.converged) {
                r.c_lower = bounds_to_speed(r.mu_lower, r.rho_avg);
                r.c_upper = bounds_to_speed(r.mu_upper, r.rho_avg);
                throw NumericalError("disc profile refinement did not reach the requested tolerance");
            }
        }
        r.c_lower = bounds_to_speed(r.mu_lower, r.rho_avg);
        r.c_upper = bounds_to_speed(r.mu_upper, r.rho_avg);
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    return r;
}

bool row_less(const BoundsResult& a, const BoundsResult& b) {
    return std::tie(a.f, a.N, a.method) < std::tie(b.f, b.N, b.method);
}

bool same_number(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

Material named_material(const std::string& name) {
    if (name == "steel") return Material(80e9, 7800.0);
    if (name == "epoxy") return Material(1.48e9, 1180.0);
    if (name == "silicon") return Material(68e9, 2330.0);
    throw ConfigError("unknown material name: " + name);
}

std::vector<double> FGrid::values() const {
    if (count < 1) throw ConfigError("f grid count must be >= 1");
    if (count == 1) return {start};
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) v[i] = start + (stop - start) * i / (count - 1);
    v.back() = stop;
    return v;
}

SweepConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    const std::string where = "config";
    check_keys(j, {"schema", "geometry", "N", "f_grid", "method", "mm", "output", "oracle_mode"}, where);
    if (!j.contains("schema")) throw ConfigError("config needs a schema field");
    const std::string schema = get<std::string>(j, "schema", where);
    if (schema != kConfigSchema) throw ConfigError("unsupported config schema '" + schema + "'");

    SweepConfig c;
    if (!j.contains("geometry")) throw ConfigError("config needs a geometry object");
    c.geometry = parse_geometry(j.at("geometry"));
    if (j.contains("N")) c.N = get<std::vector<int>>(j, "N", where);
    if (j.contains("f_grid")) {
        const json& g = j.at("f_grid");
        check_keys(g, {"start", "stop", "count"}, "f_grid");
        c.f_grid.start = get<double>(g, "start", "f_grid");
        c.f_grid.stop = get<double>(g, "stop", "f_grid");
        c.f_grid.count = get<int>(g, "count", "f_grid");
    }
    if (j.contains("method")) c.method = parse_method(get<std::string>(j, "method", where));
    if (j.contains("mm")) {
        const json& m = j.at("mm");
        const std::string w = "mm";
        check_keys(m,
                   {"backend", "product_steps", "peano_order", "peano_panel_norm", "circle_steps", "circle_refine",
                    "circle_tol", "circle_max_steps", "period"},
                   w);
        if (m.contains("backend")) {
            try {
                c.mm.integrator.backend = parse_backend(get<std::string>(m, "backend", w));
            } catch (const ConfigError&) {
                throw;
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
        if (m.contains("product_steps")) c.mm.integrator.product_steps = get<int>(m, "product_steps", w);
        if (m.contains("peano_order")) c.mm.integrator.peano_order = get<int>(m, "peano_order", w);
        if (m.contains("peano_panel_norm")) c.mm.integrator.peano_panel_norm = get<double>(m, "peano_panel_norm", w);
        if (m.contains("circle_steps")) c.mm.circle_steps = get<int>(m, "circle_steps", w);
        if (m.contains("circle_refine")) c.mm.circle_refine = get<bool>(m, "circle_refine", w);
        if (m.contains("circle_tol")) c.mm.circle_tol = get<double>(m, "circle_tol", w);
        if (m.contains("circle_max_steps")) c.mm.circle_max_steps = get<int>(m, "circle_max_steps", w);
        if (m.contains("period")) c.mm.period = parse_period(get<std::string>(m, "period", w));
    }
    if (j.contains("output")) {
        const json& o = j.at("output");
        check_keys(o, {"format", "path"}, "output");
        if (o.contains("format")) c.format = parse_format(get<std::string>(o, "format", "output"));
        if (o.contains("path")) c.output_path = get<std::string>(o, "path", "output");
    }
    if (j.contains("oracle_mode")) c.oracle_mode = get<bool>(j, "oracle_mode", where);
    validate_config(c);
    return c;
}

SweepConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate_config(const SweepConfig& c) {
    if (c.N.empty()) throw ConfigError("N list is empty");
    for (int n : c.N)
        if (n < 0) throw ConfigError("N values must be >= 0");
    if (c.f_grid.count < 1) throw ConfigError("f grid count must be >= 1");
    for (double f : {c.f_grid.start, c.f_grid.stop})
        if (!(f > 0.0 && f < 1.0)) throw ConfigError("f grid must lie inside (0, 1)");
    if (c.mm.integrator.product_steps < 1) throw ConfigError("mm.product_steps must be >= 1");
    if (c.mm.integrator.peano_order < 1) throw ConfigError("mm.peano_order must be >= 1");
    if (c.mm.circle_steps < 1 || c.mm.circle_max_steps < c.mm.circle_steps)
        throw ConfigError("mm.circle_steps must be >= 1 and <= mm.circle_max_steps");
    if (!(c.mm.circle_tol > 0.0)) throw ConfigError("mm.circle_tol must be positive");

    const GeometrySpec& g = c.geometry;
    switch (g.kind) {
        case GeometryKind::homogeneous:
            if (!g.inclusions.empty()) throw ConfigError("homogeneous geometry takes no inclusions");
            break;
        case GeometryKind::nested_squares:
        case GeometryKind::nested_circles: {
            if (g.inclusions.empty()) throw ConfigError("nested geometry needs at least one inclusion");
            double prev = std::numeric_limits<double>::infinity();
            for (const InclusionSpec& inc : g.inclusions) {
                if (!(inc.ratio >= 1.0) || !(inc.ratio < prev))
                    throw ConfigError("inclusion ratios must be >= 1 and decrease strictly inwards");
                prev = inc.ratio;
            }
            if (g.inclusions.back().ratio != 1.0) throw ConfigError("the innermost inclusion must have ratio 1");
            break;
        }
        case GeometryKind::laminate:
            if (g.inclusions.size() != 1) throw ConfigError("laminate geometry needs exactly one inclusion");
            if (!c.oracle_mode) throw ConfigError("laminates are not cubic; enable oracle_mode");
            break;
        case GeometryKind::separable:
            if (!(g.g_matrix > 0.0 && g.g_inclusion > 0.0 && g.density > 0.0))
                throw ConfigError("separable g values and density must be positive");
            break;
    }
}

CellField build_field(const GeometrySpec& spec, double f) {
    if (!(f > 0.0 && f < 1.0)) throw std::invalid_argument("filling fraction must lie in (0, 1)");
    switch (spec.kind) {
        case GeometryKind::homogeneous:
            return CellField::homogeneous(spec.matrix);
        case GeometryKind::nested_squares:
        case GeometryKind::nested_circles: {
            const bool circles = spec.kind == GeometryKind::nested_circles;
            const double inner = circles ? std::sqrt(f / std::numbers::pi) : std::sqrt(f);
            const double limit = circles ? 0.5 : 1.0;
            std::vector<Layer> layers;
            for (std::size_t i = 0; i < spec.inclusions.size(); ++i) {
                const double size = spec.inclusions[i].ratio * inner;
                if (size > limit) throw std::invalid_argument("filling fraction too large for the nesting ratios");
                layers.push_back({size, static_cast<int>(i) + 1});
            }
            if (circles) return CellField(NestedCircles{0, layers}, phase_table(spec));
            return CellField(NestedSquares{0, layers}, phase_table(spec));
        }
        case GeometryKind::laminate:
            return CellField(Laminate{{0.5 - 0.5 * f, 0.5 + 0.5 * f}, {0, 1, 0}}, phase_table(spec));
        case GeometryKind::separable:
            return CellField(SeparableProduct{{0.5 - 0.5 * f, 0.5 + 0.5 * f},
                                              {spec.g_matrix, spec.g_inclusion, spec.g_matrix},
                                              spec.density},
                             {});
    }
    throw std::invalid_argument("unknown geometry kind");
}

bool operator==(const BoundsResult& a, const BoundsResult& b) {
    return a.f == b.f && a.N == b.N && a.method == b.method && same_number(a.mu_lower, b.mu_lower) &&
           same_number(a.mu_upper, b.mu_upper) && same_number(a.c_lower, b.c_lower) &&
           same_number(a.c_upper, b.c_upper) && same_number(a.rho_avg, b.rho_avg) && a.backend == b.backend &&
           same_number(a.condition_estimate, b.condition_estimate) && a.error == b.error;
}

double bounds_to_speed(double mu_bound, double rho_avg) {
    if (!(mu_bound > 0.0) || !(rho_avg > 0.0))
        throw std::invalid_argument("speed needs a positive modulus and density");
    return std::sqrt(mu_bound / rho_avg);
}

std::vector<BoundsResult> run_sweep(const SweepConfig& config) {
    validate_config(config);
    const std::vector<Task> tasks = make_tasks(config);
    std::vector<BoundsResult> out(tasks.size());
    const long n = static_cast<long>(tasks.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) out[i] = evaluate_point(config, tasks[i]);
    std::stable_sort(out.begin(), out.end(), row_less);
    return out;
}

std::vector<BoundsResult> run_sweep_serial(const SweepConfig& config) {
    validate_config(config);
    const std::vector<Task> tasks = make_tasks(config);
    std::vector<BoundsResult> out;
    out.reserve(tasks.size());
    for (const Task& t : tasks) out.push_back(evaluate_point(config, t));
    std::stable_sort(out.begin(), out.end(), row_less);
    return out;
}

std::string format_csv(const std::vector<BoundsResult>& results) {
    std::string s = "f,N,method,mu_lower,mu_upper,c_lower,c_upper,rho_avg,backend,condition_estimate,error\n";
    for (const BoundsResult& r : results) {
        s += number(r.f) + ',' + std::to_string(r.N) + ',' + csv_field(r.method) + ',' + number(r.mu_lower) + ',' +
             number(r.mu_upper) + ',' + number(r.c_lower) + ',' + number(r.c_upper) + ',' + number(r.rho_avg) + ',' +
             csv_field(r.backend) + ',' + number(r.condition_estimate) + ',' + csv_field(r.error) + '\n';
    }
    return s;
}

std::string format_json(const std::vector<BoundsResult>& results) {
    ordered_json arr = ordered_json::array();
    for (const BoundsResult& r : results) {
        ordered_json o;
        o["f"] = r.f;
        o["N"] = r.N;
        o["method"] = r.method;
        o["mu_lower"] = json_number(r.mu_lower);
        o["mu_upper"] = json_number(r.mu_upper);
        o["c_lower"] = json_number(r.c_lower);
        o["c_upper"] = json_number(r.c_upper);
        o["rho_avg"] = json_number(r.rho_avg);
        o["backend"] = r.backend;
        o["condition_estimate"] = json_number(r.condition_estimate);
        o["error"] = r.error;
        arr.push_back(std::move(o));
    }
    return arr.dump(2) + "\n";
}

std::vector<BoundsResult> parse_results_json(const std::string& text) {
    const json arr = json::parse(text);
    if (!arr.is_array()) throw std::invalid_argument("results JSON must be an array");
    auto num = [](const json& v) { return v.is_null() ? kNaN : v.get<double>(); };
    std::vector<BoundsResult> out;
    for (const json& o : arr) {
        BoundsResult r;
        r.f = o.at("f").get<double>();
        r.N = o.at("N").get<int>();
        r.method = o.at("method").get<std::string>();
        r.mu_lower = num(o.at("mu_lower"));
        r.mu_upper = num(o.at("mu_upper"));
        r.c_lower = num(o.at("c_lower"));
        r.c_upper = num(o.at("c_upper"));
        r.rho_avg = num(o.at("rho_avg"));
        r.backend = o.at("backend").get<std::string>();
        r.condition_estimate = num(o.at("condition_estimate"));
        r.error = o.at("error").get<std::string>();
        out.push_back(std::move(r));
    }
    return out;
}

void write_output(const std::vector<BoundsResult>& results, OutputFormat format, const std::string& path) {
    const std::string text = format == OutputFormat::csv ? format_csv(results) : format_json(results);
    if (path == "-") {
        std::cout << text << std::flush;
        if (!std::cout) throw OutputError("cannot write to standard output");
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OutputError("cannot open output file " + path);
    out << text;
    out.close();
    if (!out) throw OutputError("failed writing output file " + path);
}

}  // namespace shear

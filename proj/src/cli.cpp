#include <algorithm>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "shear/sweep.hpp"

namespace shear {

namespace {

std::vector<int> parse_n_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        try {
            if (colon == std::string::npos) {
                out.push_back(std::stoi(item));
                continue;
            }
            const int lo = std::stoi(item.substr(0, colon));
            const int hi = std::stoi(item.substr(colon + 1));
            if (hi < lo) throw ConfigError("empty N range " + item);
            for (int n = lo; n <= hi; ++n) out.push_back(n);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("cannot parse N list entry '" + item + "'");
        }
    }
    return out;
}

FGrid parse_f_grid(const std::string& s) {
    std::stringstream ss(s);
    std::string a, b, c;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c))
        throw ConfigError("--f-grid expects start:stop:count");
    try {
        return FGrid{std::stod(a), std::stod(b), std::stoi(c)};
    } catch (const std::exception&) {
        throw ConfigError("cannot parse --f-grid '" + s + "'");
    }
}

SweepConfig default_config() {
    SweepConfig c;
    c.geometry.kind = GeometryKind::nested_squares;
    c.geometry.matrix = named_material("epoxy");
    c.geometry.inclusions = {InclusionSpec{named_material("steel"), 1.0}};
    return c;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Bounds on the effective shear modulus and speed of 2D periodic composites"};
    std::string config_path, n_list, f_grid, method, backend, format, out;
    int steps = 0;
    bool oracle_mode = false;
    app.add_option("--config", config_path, "JSON sweep configuration");
    app.add_option("--N", n_list, "truncation orders, e.g. 0,1,2 or 0:6");
    app.add_option("--f-grid", f_grid, "filling fractions start:stop:count");
    app.add_option("--method", method, "pwe, mm or both");
    app.add_option("--backend", backend, "piecewise_exp, product or peano");
    app.add_option("--steps", steps, "product backend steps per unit length");
    app.add_option("--format", format, "csv or json");
    app.add_option("--out", out, "output path, - for standard output");
    app.add_flag("--oracle-mode", oracle_mode, "bypass the cubic-symmetry check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    SweepConfig config;
    try {
        config = config_path.empty() ? default_config() : load_config(config_path);
        if (!n_list.empty()) config.N = parse_n_list(n_list);
        if (!f_grid.empty()) config.f_grid = parse_f_grid(f_grid);
        if (!method.empty()) {
            if (method == "pwe") config.method = Method::pwe;
            else if (method == "mm") config.method = Method::mm;
            else if (method == "both") config.method = Method::both;
            else throw ConfigError("--method must be pwe, mm or both");
        }
        if (!backend.empty()) {
            try {
                config.mm.integrator.backend = parse_backend(backend);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
        if (app.count("--steps") > 0) config.mm.integrator.product_steps = steps;
        if (!format.empty()) {
            if (format == "csv") config.format = OutputFormat::csv;
            else if (format == "json") config.format = OutputFormat::json;
            else throw ConfigError("--format must be csv or json");
        }
        if (!out.empty()) config.output_path = out;
        if (oracle_mode) config.oracle_mode = true;
        validate_config(config);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    const std::vector<BoundsResult> rows = run_sweep(config);
    try {
        write_output(rows, config.format, config.output_path);
    } catch (const OutputError& e) {
        std::cerr << "output error: " << e.what() << '\n';
        return 3;
    }
    const auto failed = std::count_if(rows.begin(), rows.end(), [](const BoundsResult& r) { return !r.error.empty(); });
    if (failed > 0) {
        std::cerr << failed << " of " << rows.size() << " points failed\n";
        return 1;
    }
    return 0;
}

}  // namespace shear

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "shear/sweep.hpp"

using namespace shear;
namespace fs = std::filesystem;

namespace {

SweepConfig steel_epoxy(GeometryKind kind = GeometryKind::nested_squares) {
    SweepConfig c;
    c.geometry.kind = kind;
    c.geometry.matrix = named_material("epoxy");
    c.geometry.inclusions = {{named_material("steel"), 1.0}};
    c.N = {0, 1, 2};
    c.f_grid = {0.1, 0.7, 3};
    return c;
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("shear_sweep_test_" + name); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(std::vector<std::string> args) {
    args.insert(args.begin(), "shear-sweep");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

const BoundsResult& row(const std::vector<BoundsResult>& rows, double f, int N, const std::string& method) {
    for (const BoundsResult& r : rows)
        if (r.f == f && r.N == N && r.method == method) return r;
    throw std::out_of_range("row not found");
}

}  // namespace

TEST(BoundsToSpeed, Examples) {
    EXPECT_DOUBLE_EQ(bounds_to_speed(2.0, 1.0), std::sqrt(2.0));
    EXPECT_NEAR(bounds_to_speed(1.6, 1.0), 1.26491, 1e-5);
    EXPECT_NEAR(bounds_to_speed(80e9, 7800.0), 3202.56, 1e-2);
    EXPECT_THROW(bounds_to_speed(0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(bounds_to_speed(1.0, -1.0), std::invalid_argument);
}

TEST(Materials, NamedTable) {
    EXPECT_EQ(named_material("steel"), Material(80e9, 7800.0));
    EXPECT_EQ(named_material("epoxy"), Material(1.48e9, 1180.0));
    EXPECT_EQ(named_material("silicon"), Material(68e9, 2330.0));
    EXPECT_THROW(named_material("unobtainium"), ConfigError);
}

TEST(Config, ParsesFullDocument) {
    const SweepConfig c = parse_config(R"({
        "schema": "shear-sweep/1",
        "geometry": {"kind": "nested_squares", "matrix": "epoxy",
                     "inclusions": [{"material": "silicon", "ratio": 1.15}, "steel"]},
        "N": [0, 2, 4],
        "f_grid": {"start": 0.2, "stop": 0.6, "count": 5},
        "method": "mm",
        "mm": {"backend": "peano", "peano_order": 10, "circle_steps": 32, "period": "full"},
        "output": {"format": "json", "path": "out.json"}
    })");
    EXPECT_EQ(c.geometry.matrix, named_material("epoxy"));
    ASSERT_EQ(c.geometry.inclusions.size(), 2u);
    EXPECT_EQ(c.geometry.inclusions[0].ratio, 1.15);
    EXPECT_EQ(c.geometry.inclusions[1].material, named_material("steel"));
    EXPECT_EQ(c.N, (std::vector<int>{0, 2, 4}));
    EXPECT_EQ(c.f_grid.values().size(), 5u);
    EXPECT_EQ(c.method, Method::mm);
    EXPECT_EQ(c.mm.integrator.backend, Backend::peano);
    EXPECT_EQ(c.mm.integrator.peano_order, 10);
    EXPECT_EQ(c.mm.period, Period::full);
    EXPECT_EQ(c.format, OutputFormat::json);
    EXPECT_EQ(c.output_path, "out.json");
}

TEST(Config, ExplicitMaterials) {
    const SweepConfig c = parse_config(R"({"schema": "shear-sweep/1",
        "geometry": {"kind": "nested_circles", "matrix": {"mu": 2.0, "rho": 3.0},
                     "inclusions": [{"material": {"mu": 5.0, "rho": 1.0}, "ratio": 1}]}})");
    EXPECT_EQ(c.geometry.matrix, Material(2.0, 3.0));
    EXPECT_EQ(c.geometry.inclusions[0].material, Material(5.0, 1.0));
}

TEST(Config, RejectsBadDocuments) {
    const std::string geo = R"("geometry": {"kind": "homogeneous", "matrix": "steel"})";
    EXPECT_NO_THROW(parse_config(R"({"schema": "shear-sweep/1", )" + geo + "}"));
    EXPECT_THROW(parse_config("{" + geo + "}"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schema": "shear-sweep/9", )" + geo + "}"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schema": "shear-sweep/1", "colour": 1, )" + geo + "}"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schema": "shear-sweep/1", "mm": {"steps": 3}, )" + geo + "}"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schema": "shear-sweep/1", "N": [-1], )" + geo + "}"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schema": "shear-sweep/1", "f_grid": {"start": 0, "stop": 0.5, "count": 2}, )" +
                              geo + "}"),
                 ConfigError);
    EXPECT_THROW(parse_config(R"({"schema": "shear-sweep/1", "method": "fem", )" + geo + "}"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schema": "shear-sweep/1", "N": "two", )" + geo + "}"), ConfigError);
    EXPECT_THROW(parse_config("{not json"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schema": "shear-sweep/1",
        "geometry": {"kind": "laminate", "matrix": "epoxy", "inclusions": ["steel"]}})"),
                 ConfigError);
    EXPECT_THROW(parse_config(R"({"schema": "shear-sweep/1",
        "geometry": {"kind": "nested_squares", "matrix": "epoxy",
                     "inclusions": [{"material": "steel", "ratio": 1}, {"material": "silicon", "ratio": 1.2}]}})"),
                 ConfigError);
    EXPECT_THROW(load_config((fs::temp_directory_path() / "no_such_shear_config.json").string()), ConfigError);
}

TEST(BuildField, FillingFractionParameterisation) {
    GeometrySpec g = steel_epoxy().geometry;
    EXPECT_NEAR(cell_averages(build_field(g, 0.3)).mu_avg, 0.3 * 80e9 + 0.7 * 1.48e9, 1e-3);
    g.kind = GeometryKind::nested_circles;
    EXPECT_NEAR(cell_averages(build_field(g, 0.3)).mu_avg, 0.3 * 80e9 + 0.7 * 1.48e9, 1e-3);
    g.kind = GeometryKind::nested_squares;
    g.inclusions = {{named_material("silicon"), 1.15}, {named_material("steel"), 1.0}};
    const auto fr = filling_fractions(build_field(g, 0.4).geometry());
    EXPECT_NEAR(fr.back(), 0.4, 1e-15);
    EXPECT_NEAR(fr[1], 0.4 * (1.15 * 1.15 - 1.0), 1e-15);
    EXPECT_THROW(build_field(g, 0.9), std::invalid_argument);
}

TEST(Output, CsvHeaderAndRow) {
    EXPECT_EQ(format_csv({}), "f,N,method,mu_lower,mu_upper,c_lower,c_upper,rho_avg,backend,condition_estimate,error\n");
    BoundsResult r;
    r.f = 0.1;
    r.N = 2;
    r.method = "mm";
    r.mu_lower = 1.0 / 3.0;
    r.mu_upper = 2.0;
    r.c_lower = 0.5;
    r.c_upper = 1.5;
    r.rho_avg = 1180.0;
    r.backend = "piecewise_exp";
    r.condition_estimate = 12.5;
    r.error = "a, \"quoted\" note";
    const std::string csv = format_csv({r});
    const std::string data = csv.substr(csv.find('\n') + 1);
    EXPECT_EQ(std::count(data.begin(), data.end(), '\n'), 1);
    EXPECT_NE(data.find("0.3333333333333333,"), std::string::npos);
    EXPECT_NE(data.find("\"a, \"\"quoted\"\" note\""), std::string::npos);
    r.error.clear();
    const std::string plain = format_csv({r});
    const std::string line = plain.substr(plain.find('\n') + 1);
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 10);
}

TEST(Output, JsonRoundTrip) {
    const std::vector<BoundsResult> rows = run_sweep(steel_epoxy());
    EXPECT_EQ(parse_results_json(format_json(rows)), rows);
    BoundsResult bad;
    bad.method = "pwe";
    bad.mu_lower = bad.mu_upper = bad.c_lower = bad.c_upper = std::nan("");
    bad.error = "failed";
    EXPECT_EQ(parse_results_json(format_json({bad})), std::vector<BoundsResult>{bad});
}

TEST(Output, WritesFilesAndReportsFailures) {
    const fs::path p = temp_file("rows.json");
    const std::vector<BoundsResult> rows = run_sweep(steel_epoxy());
    write_output(rows, OutputFormat::json, p.string());
    EXPECT_EQ(parse_results_json(slurp(p)), rows);
    fs::remove(p);
    EXPECT_THROW(write_output(rows, OutputFormat::csv, (temp_file("missing_dir") / "x.csv").string()), OutputError);
}

TEST(Sweep, RowsAreSortedAndParallelMatchesSerial) {
    SweepConfig c = steel_epoxy(GeometryKind::nested_circles);
    c.N = {2, 0, 1};
    const std::vector<BoundsResult> par = run_sweep(c);
    const std::vector<BoundsResult> ser = run_sweep_serial(c);
    ASSERT_EQ(par.size(), 3u * 3u * 2u);
    EXPECT_EQ(par, ser);
    EXPECT_EQ(format_csv(par), format_csv(run_sweep(c)));
    for (std::size_t i = 1; i < par.size(); ++i) {
        const auto key = [](const BoundsResult& r) { return std::tie(r.f, r.N, r.method); };
        EXPECT_LT(key(par[i - 1]), key(par[i]));
    }
}

TEST(Sweep, HomogeneousCellGivesEqualBounds) {
    SweepConfig c;
    c.geometry.kind = GeometryKind::homogeneous;
    c.geometry.matrix = named_material("steel");
    for (const BoundsResult& r : run_sweep(c)) {
        EXPECT_TRUE(r.error.empty());
        EXPECT_NEAR(r.mu_lower, 80e9, 1e-12 * 80e9);
        EXPECT_NEAR(r.mu_upper, 80e9, 1e-12 * 80e9);
        EXPECT_NEAR(r.c_lower, std::sqrt(80e9 / 7800.0), 1e-9);
        EXPECT_NEAR(r.c_upper, std::sqrt(80e9 / 7800.0), 1e-9);
        EXPECT_EQ(r.rho_avg, 7800.0);
    }
}

TEST(Sweep, SpeedsAreConsistentWithModuli) {
    for (const BoundsResult& r : run_sweep(steel_epoxy())) {
        EXPECT_NEAR(r.c_lower, std::sqrt(r.mu_lower / r.rho_avg), 1e-14 * r.c_lower);
        EXPECT_NEAR(r.c_upper, std::sqrt(r.mu_upper / r.rho_avg), 1e-14 * r.c_upper);
        EXPECT_LE(r.mu_lower, r.mu_upper * (1 + 1e-12));
    }
}

TEST(Sweep, MmGapIsInsidePweGap) {
    SweepConfig c = steel_epoxy();
    c.f_grid = {0.05, 0.75, 8};
    c.N = {3};
    const std::vector<BoundsResult> rows = run_sweep(c);
    for (double f : c.f_grid.values()) {
        const BoundsResult& mm = row(rows, f, 3, "mm");
        const BoundsResult& pwe = row(rows, f, 3, "pwe");
        const double eps = 1e-8 * pwe.c_upper;
        EXPECT_LE(pwe.c_lower, mm.c_lower + eps);
        EXPECT_LE(mm.c_lower, mm.c_upper + eps);
        EXPECT_LE(mm.c_upper, pwe.c_upper + eps);
        EXPECT_LE(mm.mu_upper - mm.mu_lower, pwe.mu_upper - pwe.mu_lower);
    }
}

TEST(Sweep, ThreePhaseGapsShrinkWithOrder) {
    SweepConfig c = steel_epoxy();
    c.geometry.inclusions = {{named_material("silicon"), 1.15}, {named_material("steel"), 1.0}};
    c.N = {0, 1, 2, 3, 4, 5, 6, 7};
    c.f_grid = {0.2, 0.6, 2};
    const std::vector<BoundsResult> rows = run_sweep(c);
    for (double f : c.f_grid.values())
        for (const std::string m : {"mm", "pwe"})
            for (int N = 1; N <= 7; ++N) {
                const BoundsResult& a = row(rows, f, N - 1, m);
                const BoundsResult& b = row(rows, f, N, m);
                EXPECT_LE(b.mu_upper - b.mu_lower, (a.mu_upper - a.mu_lower) * (1 + 1e-10)) << m << " N=" << N;
            }
}

TEST(Sweep, LaminateOracleModeAndPointFailures) {
    SweepConfig c;
    c.geometry.kind = GeometryKind::laminate;
    c.geometry.matrix = Material(1.0, 1.0);
    c.geometry.inclusions = {{Material(4.0, 1.0), 1.0}};
    c.f_grid = {0.5, 0.5, 1};
    c.method = Method::mm;
    c.oracle_mode = true;
    for (const BoundsResult& r : run_sweep(c)) EXPECT_NEAR(r.mu_upper, 1.6, 1e-10);

    SweepConfig capped = steel_epoxy(GeometryKind::nested_circles);
    capped.method = Method::mm;
    capped.mm.circle_tol = 1e-15;
    capped.mm.circle_max_steps = 128;
    for (const BoundsResult& r : run_sweep(capped)) {
        EXPECT_FALSE(r.error.empty());
        EXPECT_TRUE(std::isfinite(r.c_upper));
    }
}

TEST(Cli, ExitCodes) {
    const fs::path out = temp_file("cli.csv");
    EXPECT_EQ(cli({"--N", "0:2", "--f-grid", "0.2:0.4:2", "--out", out.string()}), 0);
    const std::string csv = slurp(out);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 3 * 2);

    const fs::path cfg = temp_file("capped.json");
    std::ofstream(cfg) << R"({"schema": "shear-sweep/1",
        "geometry": {"kind": "nested_circles", "matrix": "epoxy", "inclusions": ["steel"]},
        "N": [1], "f_grid": {"start": 0.3, "stop": 0.3, "count": 1}, "method": "mm",
        "mm": {"circle_tol": 1e-15, "circle_max_steps": 128}})";
    EXPECT_EQ(cli({"--config", cfg.string(), "--out", out.string()}), 1);

    EXPECT_EQ(cli({"--method", "fem"}), 2);
    EXPECT_EQ(cli({"--N", "x"}), 2);
    EXPECT_EQ(cli({"--f-grid", "0.2:1.4:2"}), 2);
    EXPECT_EQ(cli({"--config", temp_file("nope.json").string()}), 2);
    EXPECT_EQ(cli({"--bogus"}), 2);
    EXPECT_EQ(cli({"--N", "0", "--f-grid", "0.2:0.2:1", "--out", (temp_file("missing_dir") / "x.csv").string()}), 3);

    EXPECT_EQ(cli({"--N", "1", "--f-grid", "0.3:0.3:1", "--method", "mm", "--backend", "product", "--steps", "64",
                   "--format", "json", "--out", out.string()}),
              0);
    const std::vector<BoundsResult> rows = parse_results_json(slurp(out));
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].backend, "product");
    fs::remove(out);
    fs::remove(cfg);
}

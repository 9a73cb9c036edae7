// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fields.hpp"
#include "mp_checks.hpp"
#include "shear/mm.hpp"
#include "shear/oracles.hpp"
#include "shear/pwe.hpp"
#include "shear/sweep.hpp"

using namespace shear;
using namespace shear::testing;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Tracks the worst value of a checked quantity and the case it came from.
class Check {
public:
    explicit Check(std::string what) : what_(std::move(what)) {}

    void expect(bool ok, double value, const std::string& where) {
        if (!ok && pass_) first_failure_ = where;
        pass_ = pass_ && ok;
        if (value > worst_) {
            worst_ = value;
            worst_at_ = where;
        }
    }

    Outcome outcome() const {
        char buf[512];
        std::snprintf(buf, sizeof buf, "worst %s %.3e at %s%s%s", what_.c_str(), worst_, worst_at_.c_str(),
                      pass_ ? "" : "; first failure at ", pass_ ? "" : first_failure_.c_str());
        return {pass_, buf};
    }

private:
    std::string what_;
    bool pass_ = true;
    double worst_ = 0.0;
    std::string worst_at_ = "-";
    std::string first_failure_;
};

double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string tag(const std::string& name, int N) { return name + " N=" + std::to_string(N); }

struct NamedField {
    std::string name;
    CellField field;
};

std::vector<NamedField> cubic_fields() {
    return {{"squares f=0.25", steel_epoxy_squares(0.25)}, {"squares f=0.5", steel_epoxy_squares(0.5)},
            {"circles f=0.25", steel_epoxy_circles(0.25)}, {"circles f=0.5", steel_epoxy_circles(0.5)},
            {"three-phase f=0.3", three_phase_squares(0.3)}, {"cross", cross()}};
}

bool is_circle(const CellField& f) { return std::holds_alternative<NestedCircles>(f.geometry()); }

// <mu> and <1/mu> from the phase areas (or the 1D profile for the cross).
std::pair<double, double> area_averages(const NamedField& nf) {
    if (nf.name == "cross") {
        const SeparableProfile g = separable_cross();
        return {g.g().mean() * g.g().mean(), g.g().inverse_mean() * g.g().inverse_mean()};
    }
    const std::vector<double> fr = filling_fractions(nf.field.geometry());
    double a = 0.0, h = 0.0;
    for (std::size_t i = 0; i < fr.size(); ++i) {
        const double mu = nf.field.phases()[i].shear_modulus;
        a += fr[i] * mu;
        h += fr[i] / mu;
    }
    return {a, h};
}

Outcome constant_field() {
    Check chk("relative error");
    const double c = 3.7e9, r = 2100.0;
    SweepConfig cfg;
    cfg.geometry.kind = GeometryKind::homogeneous;
    cfg.geometry.matrix = Material(c, r);
    cfg.N = {0, 1, 2, 3, 4, 5, 6};
    cfg.f_grid = {0.5, 0.5, 1};
    const double speed = std::sqrt(c / r);
    for (const BoundsResult& row : run_sweep(cfg)) {
        const std::string where = row.method + " N=" + std::to_string(row.N);
        if (!row.error.empty()) {
            chk.expect(false, 1.0, where + ": " + row.error);
            continue;
        }
        for (double mu : {row.mu_lower, row.mu_upper}) chk.expect(rel_err(mu, c) <= 1e-12, rel_err(mu, c), where);
        for (double s : {row.c_lower, row.c_upper}) chk.expect(rel_err(s, speed) <= 1e-12, rel_err(s, speed), where);
    }
    return chk.outcome();
}

Outcome voigt_reuss() {
    Check chk("relative error");
    for (const NamedField& nf : cubic_fields()) {
        const auto [avg, inv] = area_averages(nf);
        const double up = pwe_upper_mu(nf.field, 0), lo = pwe_lower_mu(nf.field, 0);
        chk.expect(rel_err(up, avg) <= 1e-12, rel_err(up, avg), nf.name + " upper");
        chk.expect(rel_err(lo, 1.0 / inv) <= 1e-12, rel_err(lo, 1.0 / inv), nf.name + " lower");
    }
    return chk.outcome();
}

Outcome nested_average() {
    Check chk("relative error");
    for (const NamedField& nf : cubic_fields()) {
        MmOptions o;
        if (is_circle(nf.field)) {
            o.circle_tol = 1e-11;
            o.circle_max_steps = 1 << 16;
        }
        const double up = quadrature_nested_average(nf.field, 1e-12);
        const double lo = 1.0 / quadrature_nested_average(invert_field(nf.field), 1e-12);
        const double mu = mm_upper_mu(nf.field, 0, o), ml = mm_lower_mu(nf.field, 0, o);
        chk.expect(rel_err(mu, up) <= 1e-10, rel_err(mu, up), nf.name + " upper");
        chk.expect(rel_err(ml, lo) <= 1e-10, rel_err(ml, lo), nf.name + " lower");
    }
    return chk.outcome();
}

struct Bounds {
    double pl, ml, mu, pu;
};

Bounds all_bounds(const CellField& f, int N) {
    return {pwe_lower_mu(f, N), mm_lower_mu(f, N), mm_upper_mu(f, N), pwe_upper_mu(f, N)};
}

Outcome ordering_chain() {
    Check chk("violation / mu^(0)");
    for (double f : {0.1, 0.25, 0.5, 0.7}) {
        const std::vector<NamedField> fields{{"squares f=" + std::to_string(f), steel_epoxy_squares(f)},
                                             {"three-phase f=" + std::to_string(f), three_phase_squares(f)}};
        for (const NamedField& nf : fields) {
            const double eps = 1e-8 * cell_averages(nf.field).mu_avg;
            for (int N = 0; N <= 5; ++N) {
                const Bounds b = all_bounds(nf.field, N);
                const double v = std::max({b.pl - b.ml, b.ml - b.mu, b.mu - b.pu});
                chk.expect(v <= eps, std::max(0.0, v) / (eps * 1e8), tag(nf.name, N));
            }
        }
    }
    return chk.outcome();
}

Outcome monotone_convergence() {
    Check chk("increase / mu^(0)");
    std::vector<NamedField> fields = cubic_fields();
    fields.push_back({"squares f=0.7", steel_epoxy_squares(0.7)});
    fields.push_back({"three-phase f=0.7", three_phase_squares(0.7)});
    for (const NamedField& nf : fields) {
        const double eps = 1e-8 * cell_averages(nf.field).mu_avg;
        Bounds prev = all_bounds(nf.field, 0);
        for (int N = 1; N <= 6; ++N) {
            const Bounds b = all_bounds(nf.field, N);
            const double v = std::max({b.pu - prev.pu, b.mu - prev.mu, prev.pl - b.pl, prev.ml - b.ml});
            chk.expect(v <= eps, std::max(0.0, v) / (eps * 1e8), tag(nf.name, N));
            prev = b;
        }
    }
    return chk.outcome();
}

Outcome separable_oracle() {
    Check chk("MM relative error");
    const double exact = separable_mu_eff(separable_cross());
    const CellField f = separable_field(separable_cross());
    bool reached = false;
    for (int N = 0; N <= 8; ++N) {
        const double mu = mm_upper_mu(f, N), ml = mm_lower_mu(f, N);
        const double pu = pwe_upper_mu(f, N), pl = pwe_lower_mu(f, N);
        const double err = std::max(rel_err(mu, exact), rel_err(ml, exact));
        reached = reached || err <= 1e-3;
        const bool better = std::abs(mu - exact) <= std::abs(pu - exact) && std::abs(ml - exact) <= std::abs(pl - exact);
        chk.expect(better, err, tag("cross", N) + (better ? "" : " (MM error above PWE error)"));
    }
    chk.expect(reached, 0.0, "no N <= 8 within 1e-3");
    return chk.outcome();
}

Outcome laminate_exactness() {
    Check chk("error");
    MmOptions o;
    o.require_cubic = false;
    for (int N = 0; N <= 4; ++N) {
        const double mu = mm_upper_mu(laminate_1_4(), N, o);
        chk.expect(std::abs(mu - 1.6) <= 1e-10, std::abs(mu - 1.6), tag("laminate", N));
    }
    const PiecewiseProfile p({0.5}, {1.0, 4.0});
    const double s = std::sqrt(0.5);
    const std::vector<std::pair<std::array<double, 2>, double>> cases{
        {{1.0, 0.0}, 1.6}, {{0.0, 1.0}, 2.5}, {{s, s}, 2.05}};
    for (const auto& [kappa, expected] : cases) {
        const double v = laminate_speed_sq(p, 1.0, kappa);
        // exact up to the rounding of 1/sqrt(2) squared
        chk.expect(rel_err(v, expected) <= 1e-15, rel_err(v, expected), "c^2 at " + std::to_string(expected));
    }
    return chk.outcome();
}

Outcome transfer_invariants_all_backends() {
    const auto cases = mp_transfer_invariants({{"squares", steel_epoxy_squares(0.5)}, {"circles", steel_epoxy_circles(0.5)}},
                                              5, {Backend::piecewise_exp, Backend::product, Backend::peano});
    Outcome out;
    std::string detail;
    for (Backend b : {Backend::piecewise_exp, Backend::product, Backend::peano}) {
        TransferInvariants worst;
        bool ok = true;
        for (const MpInvariantCase& c : cases) {
            if (c.backend != b) continue;
            ok = ok && invariants_hold(c.inv);
            worst.det_error = std::max(worst.det_error, c.inv.det_error);
            worst.w1_error = std::max(worst.w1_error, c.inv.w1_error);
            worst.w2_error = std::max(worst.w2_error, c.inv.w2_error);
            worst.symplectic_relative = std::max(worst.symplectic_relative, c.inv.symplectic_relative);
        }
        out.pass = out.pass && ok;
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s%s %s: det %.1e w1 %.1e w2 %.1e symp %.1e", detail.empty() ? "" : "; ",
                      backend_name(b).c_str(), ok ? "ok" : "FAILS", worst.det_error, worst.w1_error, worst.w2_error,
                      worst.symplectic_relative);
        detail += buf;
    }
    out.detail = detail;
    return out;
}

Outcome half_vs_full() {
    Check chk("relative difference");
    MmOptions full;
    full.period = Period::full;
    for (const NamedField& nf : cubic_fields()) {
        for (int N = 0; N <= 5; ++N) {
            const double a = mm_upper_mu_half(nf.field, N), b = mm_upper_mu(nf.field, N, full);
            MmOptions half = full;
            half.period = Period::half;
            const double c = mm_lower_mu(nf.field, N, half), d = mm_lower_mu(nf.field, N, full);
            const double v = std::max(rel_err(a, b), rel_err(c, d));
            chk.expect(v <= 1e-8, v, tag(nf.name, N));
        }
    }
    return chk.outcome();
}

// Product-rule error is measured on the transfer matrix (max norm relative to
// the piecewise-exponential matrix); mu_N itself converges faster because the
// first-order term cancels in the resolvent.
Outcome integrator_consistency() {
    Check chk("|ratio - 2| or Peano error");
    const std::vector<NamedField> fields{{"squares f=0.5", steel_epoxy_squares(0.5)},
                                        {"three-phase f=0.3", three_phase_squares(0.3)},
                                        {"circles f=0.5", steel_epoxy_circles(0.5)}};
    for (const NamedField& nf : fields) {
        for (int N : {1, 3}) {
            const BlockHamiltonian<double> h =
                build_q<double>(cross_section_profile(nf.field, N), cell_averages(nf.field).mu_avg);
            const Eigen::MatrixXd exact = monodromy_piecewise_exp(h).M;
            std::vector<double> errs;
            for (int k = 1024; k <= 8192; k *= 2)
                errs.push_back((monodromy_product(h, k).M - exact).cwiseAbs().maxCoeff() / exact.cwiseAbs().maxCoeff());
            for (std::size_t i = 1; i < errs.size(); ++i) {
                const double ratio = errs[i - 1] / errs[i];
                chk.expect(ratio >= 1.7 && ratio <= 2.3, std::abs(ratio - 2.0),
                           tag(nf.name, N) + " ratio " + std::to_string(ratio));
            }
            MmOptions o;
            o.circle_refine = false;
            const double ref = mm_upper_mu(nf.field, N, o);
            for (int order : {6, 12}) {
                MmOptions q = o;
                q.integrator.backend = Backend::peano;
                q.integrator.peano_order = order;
                const double e = rel_err(mm_upper_mu(nf.field, N, q), ref);
                chk.expect(e <= 1e-6, e, tag(nf.name, N) + " peano order " + std::to_string(order));
            }
        }
    }
    return chk.outcome();
}

Outcome eigenvalue_oracle() {
    Check chk("relative error");
    const std::vector<NamedField> fields{{"squares f=0.25", steel_epoxy_squares(0.25)},
                                        {"squares f=0.5", steel_epoxy_squares(0.5)},
                                        {"square a=0.5 contrast 3", square(0.5, 3.0, 1.0)},
                                        {"cross", cross()}};
    for (const NamedField& nf : fields) {
        for (int N = 0; N <= 3; ++N) {
            const double pwe = pwe_upper_mu(nf.field, N);
            const double e = rel_err(direct_bnn(nf.field, N, {1e-2, 5e-3}), pwe);
            chk.expect(e <= 1e-4, e, tag(nf.name, N));
        }
    }
    return chk.outcome();
}

Outcome reciprocal_construction() {
    Check chk("|product - 1|");
    for (const NamedField& nf : cubic_fields()) {
        const CellField inv = invert_field(nf.field);
        for (int N = 0; N <= 3; ++N) {
            const double p = pwe_lower_mu(nf.field, N) * pwe_upper_mu(inv, N);
            const double m = mm_lower_mu(nf.field, N) * mm_upper_mu(inv, N);
            chk.expect(std::abs(p - 1.0) <= 1e-14, std::abs(p - 1.0), tag(nf.name, N) + " pwe");
            chk.expect(std::abs(m - 1.0) <= 1e-14, std::abs(m - 1.0), tag(nf.name, N) + " mm");
        }
    }
    return chk.outcome();
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"constant-field identity", constant_field},
        {"Voigt-Reuss bounds at N=0", voigt_reuss},
        {"nested averages at N=0", nested_average},
        {"ordering chain", ordering_chain},
        {"monotone convergence", monotone_convergence},
        {"separable oracle convergence", separable_oracle},
        {"laminate exactness", laminate_exactness},
        {"transfer-matrix invariants", transfer_invariants_all_backends},
        {"half-period vs full-period", half_vs_full},
        {"integrator consistency", integrator_consistency},
        {"eigenvalue oracle", eigenvalue_oracle},
        {"reciprocal construction", reciprocal_construction},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}

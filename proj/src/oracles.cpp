#include "shear/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include "shear/error.hpp"

namespace shear {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Adaptive Gauss-Kronrod with extrapolation (GSL qagp).
class Integrator {
public:
    explicit Integrator(std::size_t limit = 2000)
        : limit_(limit), ws_(gsl_integration_workspace_alloc(limit), gsl_integration_workspace_free) {
        if (!ws_) throw std::runtime_error("cannot allocate quadrature workspace");
    }

    // Integral over [0, 1] with the integrand's jump locations as breakpoints.
    // The absolute tolerance is tol * scale, with scale the integrand's magnitude.
    double operator()(const std::function<double(double)>& fn, std::vector<double> pts, double tol, double scale) {
        gsl_function g;
        g.function = [](double x, void* p) { return (*static_cast<const std::function<double(double)>*>(p))(x); };
        g.params = const_cast<std::function<double(double)>*>(&fn);
        pts.push_back(0.0);
        pts.push_back(1.0);
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        double result = 0.0;
        double err = 0.0;
        const int status =
            gsl_integration_qagp(&g, pts.data(), pts.size(), tol * scale, tol, limit_, ws_.get(), &result, &err);
        if (status != GSL_SUCCESS && err > 10.0 * tol * std::max(scale, std::abs(result)))
            throw NumericalError(std::string("quadrature did not converge: ") + gsl_strerror(status));
        return result;
    }

private:
    std::size_t limit_;
    std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)> ws_;
};

void disable_gsl_abort() {
    static const bool done = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)done;
}

// The outer integrand is itself a quadrature result; keep its noise well below
// the outer tolerance.
double inner_tol(double tol) { return std::max(1e-3 * tol, 1e-14); }

void add_if_inside(std::vector<double>& pts, double x) {
    if (x > 0.0 && x < 1.0) pts.push_back(x);
}

// Coordinates along x2 at which mu(x1, .) may jump.
std::vector<double> x2_edges(const CellField& field, double x1) {
    std::vector<double> pts;
    const CellGeometry& geo = field.geometry();
    if (const auto* sq = std::get_if<NestedSquares>(&geo)) {
        for (const Layer& l : sq->layers)
            if (std::abs(x1 - 0.5) <= 0.5 * l.size) {
                add_if_inside(pts, 0.5 - 0.5 * l.size);
                add_if_inside(pts, 0.5 + 0.5 * l.size);
            }
    } else if (const auto* c = std::get_if<NestedCircles>(&geo)) {
        for (const Layer& l : c->layers) {
            const double d = x1 - 0.5;
            if (std::abs(d) < l.size) {
                const double h = std::sqrt(l.size * l.size - d * d);
                add_if_inside(pts, 0.5 - h);
                add_if_inside(pts, 0.5 + h);
            }
        }
    } else if (const auto* s = std::get_if<SeparableProduct>(&geo)) {
        pts = s->breaks;
    } else if (const auto* r = std::get_if<Raster>(&geo)) {
        for (int i = 1; i < r->M; ++i) pts.push_back(static_cast<double>(i) / r->M);
    }
    return pts;
}

// Coordinates along x1 at which the x2-integrals lose smoothness.
std::vector<double> x1_edges(const CellField& field) {
    std::vector<double> pts;
    const CellGeometry& geo = field.geometry();
    if (const auto* lam = std::get_if<Laminate>(&geo)) {
        pts = lam->breaks;
    } else if (const auto* sq = std::get_if<NestedSquares>(&geo)) {
        for (const Layer& l : sq->layers) {
            add_if_inside(pts, 0.5 - 0.5 * l.size);
            add_if_inside(pts, 0.5 + 0.5 * l.size);
        }
    } else if (const auto* c = std::get_if<NestedCircles>(&geo)) {
        for (const Layer& l : c->layers) {
            add_if_inside(pts, 0.5 - l.size);
            add_if_inside(pts, 0.5 + l.size);
        }
    } else if (const auto* s = std::get_if<SeparableProduct>(&geo)) {
        pts = s->breaks;
    } else if (const auto* r = std::get_if<Raster>(&geo)) {
        for (int i = 1; i < r->M; ++i) pts.push_back(static_cast<double>(i) / r->M);
    }
    return pts;
}

bool even_about_half(const PiecewiseProfile& p) {
    const std::size_t n = p.breaks.size();
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(p.breaks[i] + p.breaks[n - 1 - i] - 1.0) > 1e-14) return false;
    for (std::size_t i = 0; i < p.values.size(); ++i)
        if (p.values[i] != p.values[p.values.size() - 1 - i]) return false;
    return true;
}

}  // namespace

PiecewiseProfile::PiecewiseProfile(std::vector<double> b, std::vector<double> v)
    : breaks(std::move(b)), values(std::move(v)) {
    if (values.size() != breaks.size() + 1) throw std::invalid_argument("profile needs breaks.size() + 1 values");
    double prev = 0.0;
    for (double x : breaks) {
        if (!(x > prev) || !(x < 1.0)) throw std::invalid_argument("breakpoints must increase strictly inside (0, 1)");
        prev = x;
    }
    for (double x : values)
        if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("profile values must be positive");
}

double PiecewiseProfile::mean() const {
    double acc = 0.0;
    double lo = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double hi = i < breaks.size() ? breaks[i] : 1.0;
        acc += (hi - lo) * values[i];
        lo = hi;
    }
    return acc;
}

double PiecewiseProfile::inverse_mean() const {
    double acc = 0.0;
    double lo = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double hi = i < breaks.size() ? breaks[i] : 1.0;
        acc += (hi - lo) / values[i];
        lo = hi;
    }
    return acc;
}

SeparableProfile::SeparableProfile(PiecewiseProfile g) : g_(std::move(g)) {
    if (!even_about_half(g_)) throw std::invalid_argument("separable profile must be even about x = 1/2");
}

SeparableProfile SeparableProfile::reciprocal() const {
    std::vector<double> inv;
    inv.reserve(g_.values.size());
    for (double v : g_.values) inv.push_back(1.0 / v);
    return SeparableProfile(PiecewiseProfile(g_.breaks, std::move(inv)));
}

SeparableProfile separable_cross() { return SeparableProfile(PiecewiseProfile({0.25, 0.75}, {1.0, 2.0, 1.0})); }

double separable_mu_eff(const SeparableProfile& g) { return g.g().mean() / g.g().inverse_mean(); }

CellField separable_field(const SeparableProfile& g, double density) {
    return CellField(SeparableProduct{g.g().breaks, g.g().values, density}, {});
}

double laminate_speed_sq(const PiecewiseProfile& mu, double rho_avg, std::array<double, 2> kappa) {
    if (!(rho_avg > 0.0)) throw std::invalid_argument("average density must be positive");
    const double norm = std::hypot(kappa[0], kappa[1]);
    if (std::abs(norm - 1.0) > 1e-12) throw std::invalid_argument("kappa must be a unit vector");
    return (kappa[0] * kappa[0] / mu.inverse_mean() + mu.mean() * kappa[1] * kappa[1]) / rho_avg;
}

double plane_wave_lowest_eigenvalue(const FourierTable2D& table, int N, double k) {
    if (table.window() < 2 * N) throw std::invalid_argument("Fourier table window must be >= 2N");
    const int side = 2 * N + 1;
    const int n = side * side;
    Eigen::MatrixXcd c(n, n);
    for (int r = 0; r < n; ++r) {
        const int g1 = r / side - N;
        const int g2 = r % side - N;
        const double a1 = two_pi * g1 + k;
        const double a2 = two_pi * g2;
        for (int s = 0; s < n; ++s) {
            const int h1 = s / side - N;
            const int h2 = s % side - N;
            const double b1 = two_pi * h1 + k;
            const double b2 = two_pi * h2;
            c(r, s) = table(g1 - h1, g2 - h2) * (a1 * b1 + a2 * b2);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(c, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericalError("plane-wave eigenvalue solver did not converge");
    return eig.eigenvalues()(0);
}

double direct_bnn(const CellField& field, int N, std::vector<double> k_values, const DirectBnnOptions& options) {
    if (N < 0) throw std::invalid_argument("truncation order N must be >= 0");
    if (k_values.size() < 2) throw std::invalid_argument("direct_bnn needs at least two k values");
    for (double k : k_values)
        if (!(k > 0.0 && k <= 0.1)) throw std::invalid_argument("k values must lie in (0, 0.1]");
    if (options.order < 1) throw std::invalid_argument("extrapolation order must be >= 1");
    std::sort(k_values.begin(), k_values.end());
    const double k1 = k_values[0];
    const double k2 = k_values[1];
    if (!(k2 > k1)) throw std::invalid_argument("k values must be distinct");

    const FourierTable2D table = fourier2d(field, 2 * N, options.fourier);
    const double r1 = plane_wave_lowest_eigenvalue(table, N, k1) / (k1 * k1);
    const double r2 = plane_wave_lowest_eigenvalue(table, N, k2) / (k2 * k2);
    const double p1 = std::pow(k1, options.order);
    const double p2 = std::pow(k2, options.order);
    return (p2 * r1 - p1 * r2) / (p2 - p1);
}

cdouble quadrature_fourier(const CellField& field, int g1, int g2, double tol) {
    disable_gsl_abort();
    const double scale = cell_averages(field).mu_avg;
    Integrator outer;
    Integrator inner;
    auto part = [&](bool imag) {
        const std::function<double(double)> over_x1 = [&](double x1) {
            const std::function<double(double)> over_x2 = [&](double x2) {
                const double phase = -two_pi * (g1 * x1 + g2 * x2);
                return evaluate(field, x1, x2).mu * (imag ? std::sin(phase) : std::cos(phase));
            };
            return inner(over_x2, x2_edges(field, x1), inner_tol(tol), scale);
        };
        return outer(over_x1, x1_edges(field), tol, scale);
    };
    return {part(false), part(true)};
}

cdouble quadrature_fourier_1d(const CellField& field, int n, double x1, double tol) {
    disable_gsl_abort();
    const double scale = cell_averages(field).mu_avg;
    Integrator q;
    auto part = [&](bool imag) {
        const std::function<double(double)> fn = [&](double x2) {
            const double phase = -two_pi * n * x2;
            return evaluate(field, x1, x2).mu * (imag ? std::sin(phase) : std::cos(phase));
        };
        return q(fn, x2_edges(field, x1), tol, scale);
    };
    return {part(false), part(true)};
}

double quadrature_nested_average(const CellField& field, double tol) {
    disable_gsl_abort();
    const CellAverages av = cell_averages(field);
    Integrator outer;
    Integrator inner;
    const std::function<double(double)> over_x1 = [&](double x1) {
        const std::function<double(double)> mu = [&](double x2) { return evaluate(field, x1, x2).mu; };
        return 1.0 / inner(mu, x2_edges(field, x1), inner_tol(tol), av.mu_avg);
    };
    return 1.0 / outer(over_x1, x1_edges(field), tol, av.mu_inv_avg);
}

double profile_nested_average(const ToeplitzProfile& profile) {
    const int N = profile.N;
    double acc = 0.0;
    for (const ProfileSegment& s : profile.segments) acc += (s.x1 - s.x0) / s.mu_hat(N, N).real();
    return 1.0 / acc;
}

}  // namespace shear

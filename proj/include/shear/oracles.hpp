#pragma once

#include <array>
#include <vector>

#include "shear/cell_model.hpp"
#include "shear/fourier.hpp"

namespace shear {

/// Piecewise constant positive function on [0, 1): value i on
/// [breaks[i-1], breaks[i]).
struct PiecewiseProfile {
    std::vector<double> breaks;
    std::vector<double> values;

    PiecewiseProfile(std::vector<double> breaks, std::vector<double> values);

    double mean() const;
    double inverse_mean() const;  // <1/g>
};

/// Even profile g for the separable field mu(x) = g(x1) g(x2).
class SeparableProfile {
public:
    explicit SeparableProfile(PiecewiseProfile g);

    const PiecewiseProfile& g() const { return g_; }
    SeparableProfile reciprocal() const;

private:
    PiecewiseProfile g_;
};

/// g = 2 on [1/4, 3/4) and 1 elsewhere; mu_eff = 2.
SeparableProfile separable_cross();

/// <g> / <1/g>.
double separable_mu_eff(const SeparableProfile& g);

CellField separable_field(const SeparableProfile& g, double density = 1.0);

/// (<1/mu>^{-1} k1^2 + <mu> k2^2) / <rho> for an x1-laminate; kappa must be a
/// unit vector to 1e-12.
double laminate_speed_sq(const PiecewiseProfile& mu, double rho_avg, std::array<double, 2> kappa);

struct DirectBnnOptions {
    // Assumed order p of the error in omega^2 / k^2 for the two-point
    // Richardson step.
    int order = 2;
    FourierOptions fourier;
};

/// Small-k limit of omega_1(k)^2 / k^2 for the full plane-wave matrix
/// C(k)[g, g'] = mu^(g - g') (2 pi g + k).(2 pi g' + k), k = k e1, using the two
/// smallest k values.
double direct_bnn(const CellField& field, int N, std::vector<double> k_values, const DirectBnnOptions& options = {});

/// Smallest eigenvalue of C(k e1) above.
double plane_wave_lowest_eigenvalue(const FourierTable2D& table, int N, double k);

/// int mu(x) exp(-2 pi i g.x) dx over the cell by nested adaptive quadrature.
cdouble quadrature_fourier(const CellField& field, int g1, int g2, double tol = 1e-10);

/// int mu(x1, x2) exp(-2 pi i n x2) dx2 at fixed x1.
cdouble quadrature_fourier_1d(const CellField& field, int n, double x1, double tol = 1e-10);

/// <<mu>_2^{-1}>_1^{-1} by nested adaptive quadrature.
double quadrature_nested_average(const CellField& field, double tol = 1e-10);

/// The same nested average for a sampled cross-section profile, from the
/// diagonal of each Toeplitz segment (in the units of the profile).
double profile_nested_average(const ToeplitzProfile& profile);

}  // namespace shear

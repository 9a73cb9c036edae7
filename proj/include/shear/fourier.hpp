#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "shear/cell_model.hpp"

namespace shear {

using cdouble = std::complex<double>;

/// Fourier coefficients mu^(g) of a cell field on the window |g_i| <= window,
/// with mu(x) = sum_g mu^(g) exp(2 pi i g.x).
class FourierTable2D {
public:
    explicit FourierTable2D(int window);

    int window() const { return window_; }
    int side() const { return 2 * window_ + 1; }

    const cdouble& operator()(int g1, int g2) const { return coeffs_[index(g1, g2)]; }
    cdouble& operator()(int g1, int g2) { return coeffs_[index(g1, g2)]; }

    /// Largest |Im mu^(g)| over the table.
    double max_imag() const;

private:
    std::size_t index(int g1, int g2) const;

    int window_;
    std::vector<cdouble> coeffs_;
};

struct FourierOptions {
    // Composite Gauss-Legendre panels for disc coefficients (20 nodes each).
    int circle_panels = 8;
};

/// Coefficients on |g_i| <= G. Exact (sinc products) for laminates, squares,
/// separable products and rasters; discs use Gauss-Legendre quadrature of the
/// chord transform in the angle variable.
FourierTable2D fourier2d(const CellField& field, int G, const FourierOptions& options = {});

/// Serial reference for fourier2d (which is OpenMP-parallel over g1 for
/// nested squares and discs); the two agree bit for bit.
FourierTable2D fourier2d_serial(const CellField& field, int G, const FourierOptions& options = {});

/// Coefficient of the piecewise constant 1-periodic profile
/// sum_i values[i] * 1[breaks[i-1], breaks[i]) at frequency n.
cdouble piecewise_coefficient(const std::vector<double>& breaks, const std::vector<double>& values, int n);

/// Fourier coefficient of the indicator of a centred disc of radius r, at
/// frequency (g1, g2) and without the centring phase (-1)^(g1+g2).
double disc_transform(double r, int g1, int g2, int panels);

/// One x1-interval of the cross-section operator: the (2N+1)x(2N+1) Hermitian
/// Toeplitz matrix (mu^_{n-m}(x1))_{n,m=-N..N}, constant on [x0, x1).
struct ProfileSegment {
    double x0;
    double x1;
    Eigen::MatrixXcd mu_hat;
};

/// x1 -> mu^_N(x1), piecewise constant. `sampled` marks step-discretised
/// profiles (discs) as opposed to exact piecewise-constant cross-sections.
struct ToeplitzProfile {
    int N = 0;
    bool sampled = false;
    int steps_per_unit = 0;
    std::vector<ProfileSegment> segments;
};

struct ProfileOptions {
    // Steps per unit length inside disc bands (ignored for exact profiles).
    int circle_steps = 64;
};

/// The x2-Fourier coefficients of mu(x1, .) for n = -2N..2N at a fixed x1.
std::vector<cdouble> cross_section_coefficients(const CellField& field, int N, double x1);

/// Toeplitz matrix (c[n - m + 2N])_{n,m} from the 4N+1 coefficients c.
Eigen::MatrixXcd toeplitz_from_coefficients(const std::vector<cdouble>& c, int N);

ToeplitzProfile cross_section_profile(const CellField& field, int N, const ProfileOptions& options = {});

/// Inverse of a Hermitian positive definite block via Cholesky. Throws
/// NumericalError when the block is not positive definite.
Eigen::MatrixXcd toeplitz_inverse(const Eigen::MatrixXcd& block);

}  // namespace shear

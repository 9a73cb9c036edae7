#pragma once

#include <Eigen/Dense>

#include "shear/cell_model.hpp"
#include "shear/fourier.hpp"

namespace shear {

/// Truncated plane-wave system on the (2N+1)^2 harmonics |g_i| <= N.
///
/// Harmonic g = (g1, g2) sits at row (g1 + N) * (2N+1) + (g2 + N). Entries are
/// C0[g, g'] = mu^(g - g') g.g' and f[g] = mu^(g) g1, without the (2 pi)^2
/// factors: f^H C0^+ f is invariant under the common rescaling.
struct PweSystem {
    int N = 0;
    Eigen::MatrixXcd C0;
    Eigen::VectorXcd f;

    int constant_mode_index() const { return N * (2 * N + 1) + N; }
};

/// Builds the system from a table with window >= 2N. OpenMP-parallel over rows.
PweSystem assemble_pwe(const FourierTable2D& table, int N);

/// Serial reference for assemble_pwe; the two agree bit for bit.
PweSystem assemble_pwe_serial(const FourierTable2D& table, int N);

/// f^H x with C0 x = f solved on the complement of the constant mode
/// (constant row and column deleted, Cholesky on the rest). Optionally reports
/// the reciprocal of the Cholesky rcond estimate.
double solve_constrained(const PweSystem& system, double* condition = nullptr);

struct PweOptions {
    FourierOptions fourier;
    // Bypasses the cubic-symmetry requirement (oracle checks on laminates).
    bool require_cubic = true;
};

struct PweResult {
    double mu = 0.0;
    double condition_estimate = 1.0;
};

PweResult pwe_upper(const CellField& field, int N, const PweOptions& options = {});
PweResult pwe_lower(const CellField& field, int N, const PweOptions& options = {});

/// Upper bound <mu> - f^H C0^+ f. Equals <mu> at N = 0.
double pwe_upper_mu(const CellField& field, int N, const PweOptions& options = {});

/// Lower bound 1 / pwe_upper_mu(invert_field(field)). Equals <1/mu>^{-1} at N = 0.
double pwe_lower_mu(const CellField& field, int N, const PweOptions& options = {});

}  // namespace shear

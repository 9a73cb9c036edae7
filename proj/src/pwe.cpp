#include "shear/pwe.hpp"

#include <stdexcept>

#include "shear/error.hpp"

namespace shear {

namespace {

void check_window(const FourierTable2D& table, int N) {
    if (N < 0) throw std::invalid_argument("truncation order N must be >= 0");
    if (table.window() < 2 * N) throw std::invalid_argument("Fourier table window must be >= 2N");
}

// One row of C0 and the matching entry of f.
inline void fill_row(const FourierTable2D& table, int N, int row, PweSystem& s) {
    const int side = 2 * N + 1;
    const int g1 = row / side - N;
    const int g2 = row % side - N;
    for (int col = 0; col < side * side; ++col) {
        const int h1 = col / side - N;
        const int h2 = col % side - N;
        s.C0(row, col) = table(g1 - h1, g2 - h2) * static_cast<double>(g1 * h1 + g2 * h2);
    }
    s.f(row) = table(g1, g2) * static_cast<double>(g1);
}

PweSystem empty_system(int N) {
    const int n = (2 * N + 1) * (2 * N + 1);
    PweSystem s;
    s.N = N;
    s.C0.resize(n, n);
    s.f.resize(n);
    return s;
}

}  // namespace

PweSystem assemble_pwe(const FourierTable2D& table, int N) {
    check_window(table, N);
    PweSystem s = empty_system(N);
    const int n = static_cast<int>(s.f.size());
#pragma omp parallel for schedule(static)
    for (int row = 0; row < n; ++row) fill_row(table, N, row, s);
    return s;
}

PweSystem assemble_pwe_serial(const FourierTable2D& table, int N) {
    check_window(table, N);
    PweSystem s = empty_system(N);
    const int n = static_cast<int>(s.f.size());
    for (int row = 0; row < n; ++row) fill_row(table, N, row, s);
    return s;
}

double solve_constrained(const PweSystem& system, double* condition) {
    if (condition) *condition = 1.0;
    const Eigen::Index n = system.f.size();
    if (n <= 1) return 0.0;
    const Eigen::Index k = system.constant_mode_index();

    std::vector<Eigen::Index> keep;
    keep.reserve(static_cast<std::size_t>(n - 1));
    for (Eigen::Index i = 0; i < n; ++i)
        if (i != k) keep.push_back(i);
    const Eigen::MatrixXcd reduced = system.C0(keep, keep);
    const Eigen::VectorXcd rhs = system.f(keep);
    if (rhs.squaredNorm() == 0.0) return 0.0;

    Eigen::LLT<Eigen::MatrixXcd> llt(reduced);
    if (llt.info() != Eigen::Success)
        throw NumericalError("reduced plane-wave system is not positive definite");
    if (condition) *condition = 1.0 / llt.rcond();
    const Eigen::VectorXcd x = llt.solve(rhs);
    return rhs.dot(x).real();
}

PweResult pwe_upper(const CellField& field, int N, const PweOptions& options) {
    if (N < 0) throw std::invalid_argument("truncation order N must be >= 0");
    if (options.require_cubic && !field.symmetry().cubic)
        throw std::invalid_argument("plane-wave bounds need a cubic-symmetric field");
    const double mean = cell_averages(field).mu_avg;
    if (N == 0) return {mean, 1.0};
    const FourierTable2D table = fourier2d(field, 2 * N, options.fourier);
    PweResult r;
    r.mu = mean - solve_constrained(assemble_pwe(table, N), &r.condition_estimate);
    return r;
}

PweResult pwe_lower(const CellField& field, int N, const PweOptions& options) {
    PweResult r = pwe_upper(invert_field(field), N, options);
    r.mu = 1.0 / r.mu;
    return r;
}

double pwe_upper_mu(const CellField& field, int N, const PweOptions& options) {
    return pwe_upper(field, N, options).mu;
}

double pwe_lower_mu(const CellField& field, int N, const PweOptions& options) {
    return pwe_lower(field, N, options).mu;
}

}  // namespace shear

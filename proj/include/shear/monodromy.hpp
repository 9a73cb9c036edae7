#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "shear/error.hpp"
#include "shear/fourier.hpp"
#include "shear/matrix_exp.hpp"

namespace shear {

enum class Backend { piecewise_exp, product, peano };

std::string backend_name(Backend b);
Backend parse_backend(const std::string& name);

struct IntegratorOptions {
    Backend backend = Backend::piecewise_exp;
    // Product backend: sub-steps per unit length, aligned with breakpoints.
    int product_steps = 4096;
    // Peano backend: series order, and the bound on h ||Q||_1 per panel
    // (<= 0 keeps one panel per constant piece).
    int peano_order = 12;
    double peano_panel_norm = 0.25;
    // Shooting panels are closed once their 1-norm would exceed this.
    double panel_growth = 1.0e2;
};

/// Q(x1) = [[0, mu^_N^{-1}], [d mu^_N d, 0]] on each constant piece of a
/// profile, with d = 2 pi diag(-N..N) and mu^_N divided by `scale`.
template <class Scalar>
struct BlockHamiltonian {
    struct Piece {
        double x0;
        double x1;
        Mat<Scalar> Q;
    };
    int N = 0;
    double scale = 1.0;
    std::vector<Piece> pieces;

    int half_dim() const { return 2 * N + 1; }
    int dim() const { return 2 * (2 * N + 1); }
};

template <class Scalar>
Scalar from_cdouble(const cdouble& c) {
    using Real = RealOf<Scalar>;
    if constexpr (Eigen::NumTraits<Scalar>::IsComplex) {
        return Scalar(Real(c.real()), Real(c.imag()));
    } else {
        return Scalar(Real(c.real()));
    }
}

template <class Scalar>
BlockHamiltonian<Scalar> build_q(const ToeplitzProfile& profile, double scale = 1.0) {
    using Real = RealOf<Scalar>;
    using std::acos;
    if (!(scale > 0.0)) throw std::invalid_argument("profile scale must be positive");
    const int N = profile.N;
    const int m = 2 * N + 1;
    const Real two_pi = Real(2) * acos(Real(-1));

    BlockHamiltonian<Scalar> h;
    h.N = N;
    h.scale = scale;
    h.pieces.reserve(profile.segments.size());
    for (const ProfileSegment& seg : profile.segments) {
        if (!Eigen::NumTraits<Scalar>::IsComplex) {
            const double big = seg.mu_hat.cwiseAbs().maxCoeff();
            if (seg.mu_hat.imag().cwiseAbs().maxCoeff() > 1e-13 * big)
                throw std::invalid_argument("complex cross-section needs a complex scalar type");
        }
        Mat<Scalar> t(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) t(i, j) = from_cdouble<Scalar>(seg.mu_hat(i, j) / scale);
        Eigen::LLT<Mat<Scalar>> llt(t);
        if (llt.info() != Eigen::Success)
            throw NumericalError("cross-section Toeplitz block is not positive definite");
        Mat<Scalar> a = llt.solve(Mat<Scalar>::Identity(m, m));
        a = ((a + a.adjoint()) * Scalar(Real(0.5))).eval();

        Mat<Scalar> q = Mat<Scalar>::Zero(2 * m, 2 * m);
        q.topRightCorner(m, m) = a;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                q(m + i, j) = t(i, j) * Scalar(two_pi * Real(i - N) * two_pi * Real(j - N));
        h.pieces.push_back({seg.x0, seg.x1, std::move(q)});
    }
    return h;
}

/// Ordered propagators P_1..P_K over [a, b]; their product P_K ... P_1 is the
/// transfer matrix. Panels are kept separate so that ill-conditioned products
/// never need to be formed.
template <class Scalar>
struct PanelChain {
    int N = 0;
    double a = 0.0;
    double b = 1.0;
    Backend backend = Backend::piecewise_exp;
    std::vector<Mat<Scalar>> panels;
    std::int64_t steps = 0;
};

template <class Scalar>
struct TransferMatrix {
    int N = 0;
    double a = 0.0;
    double b = 1.0;
    Backend backend = Backend::piecewise_exp;
    Mat<Scalar> M;
};

namespace detail {

template <class Scalar>
class PanelAccumulator {
public:
    PanelAccumulator(PanelChain<Scalar>& chain, double limit) : chain_(chain), limit_(limit) {}

    void push(const Mat<Scalar>& step) {
        ++chain_.steps;
        if (!open_) {
            current_ = step;
            open_ = true;
            return;
        }
        Mat<Scalar> next = step * current_;
        if (static_cast<double>(norm1<Scalar>(next)) > limit_) {
            chain_.panels.push_back(std::move(current_));
            current_ = step;
        } else {
            current_ = std::move(next);
        }
    }

    void finish() {
        if (open_) chain_.panels.push_back(std::move(current_));
        open_ = false;
    }

private:
    PanelChain<Scalar>& chain_;
    double limit_;
    bool open_ = false;
    Mat<Scalar> current_;
};

inline void check_interval(double a, double b) {
    if (!(a >= 0.0 && b <= 1.0 && a < b)) throw std::invalid_argument("integration interval must satisfy 0 <= a < b <= 1");
}

template <class Scalar>
Mat<Scalar> truncated_series(const Mat<Scalar>& hq, int order) {
    using Real = RealOf<Scalar>;
    const Eigen::Index n = hq.rows();
    Mat<Scalar> sum = Mat<Scalar>::Identity(n, n);
    Mat<Scalar> term = Mat<Scalar>::Identity(n, n);
    for (int j = 1; j <= order; ++j) {
        term = (term * hq) * Scalar(Real(1) / Real(j));
        sum += term;
    }
    return sum;
}

// One constant piece of length len: a sub-step matrix and how many times it
// repeats.
template <class Scalar>
struct PieceStep {
    Mat<Scalar> step;
    std::int64_t count = 1;
};

template <class Scalar>
PieceStep<Scalar> piece_step(const Mat<Scalar>& q, double len, const IntegratorOptions& o) {
    const Eigen::Index n = q.rows();
    switch (o.backend) {
        case Backend::piecewise_exp:
            return {expm<Scalar>(q * Scalar(len)), 1};
        case Backend::product: {
            if (o.product_steps < 1) throw std::invalid_argument("product integrator needs k >= 1");
            const auto k = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(o.product_steps * len - 1e-9)));
            return {Mat<Scalar>::Identity(n, n) + q * Scalar(len / static_cast<double>(k)), k};
        }
        case Backend::peano: {
            if (o.peano_order < 1) throw std::invalid_argument("Peano series order must be >= 1");
            std::int64_t k = 1;
            if (o.peano_panel_norm > 0.0) {
                const double qn = static_cast<double>(norm1<Scalar>(q));
                k = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(len * qn / o.peano_panel_norm)));
            }
            return {truncated_series<Scalar>(q * Scalar(len / static_cast<double>(k)), o.peano_order), k};
        }
    }
    throw std::invalid_argument("unknown backend");
}

}  // namespace detail

/// a^n by binary powering.
template <class Scalar>
Mat<Scalar> matrix_power(const Mat<Scalar>& a, std::int64_t n) {
    if (n < 0) throw std::invalid_argument("matrix_power needs n >= 0");
    Mat<Scalar> result = Mat<Scalar>::Identity(a.rows(), a.cols());
    Mat<Scalar> base = a;
    while (n > 0) {
        if (n & 1) result = (result * base).eval();
        n >>= 1;
        if (n > 0) base = (base * base).eval();
    }
    return result;
}

/// Panels over [a, b] for the selected backend.
///
/// piecewise_exp: exp(h Q) on each constant piece (split into 2^s equal parts
/// when a single exponential would exceed the growth limit).
/// product: prod (I + h Q) with ceil(k L) equal sub-steps on a piece of
/// length L, so sub-steps never straddle a breakpoint.
/// peano: sum_{j<=order} (h Q)^j / j! per sub-panel with h ||Q||_1 bounded.
/// With Q constant on a sub-panel the j-fold iterated integral over the
/// simplex is exactly h^j / j!, so only the series truncation remains.
template <class Scalar>
PanelChain<Scalar> make_chain(const BlockHamiltonian<Scalar>& h, double a, double b, const IntegratorOptions& o) {
    detail::check_interval(a, b);
    PanelChain<Scalar> chain{h.N, a, b, o.backend, {}, 0};
    detail::PanelAccumulator<Scalar> acc(chain, o.panel_growth);
    for (const auto& p : h.pieces) {
        const double lo = std::max(a, p.x0);
        const double hi = std::min(b, p.x1);
        if (!(hi > lo)) continue;
        detail::PieceStep<Scalar> s = detail::piece_step(p.Q, hi - lo, o);
        if (o.backend == Backend::piecewise_exp) {
            int halvings = 0;
            while (static_cast<double>(norm1<Scalar>(s.step)) > o.panel_growth && halvings < 40) {
                ++halvings;
                s.step = expm<Scalar>(p.Q * Scalar(std::ldexp(hi - lo, -halvings)));
            }
            s.count = std::int64_t{1} << halvings;
        }
        for (std::int64_t i = 0; i < s.count; ++i) acc.push(s.step);
    }
    acc.finish();
    return chain;
}

/// Transfer matrix over [a, b]: the ordered product of piece propagators,
/// with repeated sub-steps combined by binary powering.
template <class Scalar>
TransferMatrix<Scalar> transfer_matrix(const BlockHamiltonian<Scalar>& h, double a, double b,
                                       const IntegratorOptions& o) {
    detail::check_interval(a, b);
    const int n = h.dim();
    TransferMatrix<Scalar> t{h.N, a, b, o.backend, Mat<Scalar>::Identity(n, n)};
    for (const auto& p : h.pieces) {
        const double lo = std::max(a, p.x0);
        const double hi = std::min(b, p.x1);
        if (!(hi > lo)) continue;
        const detail::PieceStep<Scalar> s = detail::piece_step(p.Q, hi - lo, o);
        t.M = (matrix_power(s.step, s.count) * t.M).eval();
    }
    return t;
}

template <class Scalar>
TransferMatrix<Scalar> assemble(const PanelChain<Scalar>& chain) {
    const int n = 2 * (2 * chain.N + 1);
    TransferMatrix<Scalar> t{chain.N, chain.a, chain.b, chain.backend, Mat<Scalar>::Identity(n, n)};
    for (const auto& p : chain.panels) t.M = (p * t.M).eval();
    return t;
}

template <class Scalar>
TransferMatrix<Scalar> monodromy_piecewise_exp(const BlockHamiltonian<Scalar>& h, double a = 0.0, double b = 1.0) {
    IntegratorOptions o;
    o.backend = Backend::piecewise_exp;
    return transfer_matrix(h, a, b, o);
}

template <class Scalar>
TransferMatrix<Scalar> monodromy_product(const BlockHamiltonian<Scalar>& h, int steps_per_unit, double a = 0.0,
                                         double b = 1.0) {
    if (steps_per_unit < 1) throw std::invalid_argument("product integrator needs k >= 1");
    IntegratorOptions o;
    o.backend = Backend::product;
    o.product_steps = steps_per_unit;
    return transfer_matrix(h, a, b, o);
}

/// panel_norm <= 0 applies the series once per constant piece.
template <class Scalar>
TransferMatrix<Scalar> monodromy_peano(const BlockHamiltonian<Scalar>& h, int order, double panel_norm = 0.25,
                                       double a = 0.0, double b = 1.0) {
    if (order < 1) throw std::invalid_argument("Peano series order must be >= 1");
    IntegratorOptions o;
    o.backend = Backend::peano;
    o.peano_order = order;
    o.peano_panel_norm = panel_norm;
    return transfer_matrix(h, a, b, o);
}

/// J = [[0, I], [-I, 0]] of size 2(2N+1).
template <class Scalar>
Mat<Scalar> symplectic_j(int N) {
    const int m = 2 * N + 1;
    Mat<Scalar> j = Mat<Scalar>::Zero(2 * m, 2 * m);
    j.topRightCorner(m, m) = Mat<Scalar>::Identity(m, m);
    j.bottomLeftCorner(m, m) = -Mat<Scalar>::Identity(m, m);
    return j;
}

struct GeneratorStructure {
    double trace = 0.0;     // max |tr Q| / max |Q_ij|
    double j_hermitian = 0.0;  // max |Q* J + J Q|_max / max |Q_ij|
};

template <class Scalar>
GeneratorStructure generator_structure(const BlockHamiltonian<Scalar>& h) {
    using std::abs;
    GeneratorStructure s;
    const Mat<Scalar> j = symplectic_j<Scalar>(h.N);
    for (const auto& p : h.pieces) {
        const double big = static_cast<double>(p.Q.cwiseAbs().maxCoeff());
        if (big == 0.0) continue;
        s.trace = std::max(s.trace, static_cast<double>(abs(p.Q.trace())) / big);
        const Mat<Scalar> r = p.Q.adjoint() * j + j * p.Q;
        s.j_hermitian = std::max(s.j_hermitian, static_cast<double>(r.cwiseAbs().maxCoeff()) / big);
    }
    return s;
}

struct TransferInvariants {
    double det_error = 0.0;         // |det M - 1|
    double w1_error = 0.0;          // max |M w1 - w1|
    double w2_error = 0.0;          // max |w2* M - w2*|
    double symplectic_error = 0.0;  // max |M* J M - J|
    // symplectic_error / max |M_ij|^2, the scale of the entries of M* J M.
    double symplectic_relative = 0.0;
};

template <class Scalar>
TransferInvariants transfer_invariants(const TransferMatrix<Scalar>& t) {
    using std::abs;
    const int N = t.N;
    const int m = 2 * N + 1;
    const int i0 = N;
    const int j0 = m + N;
    TransferInvariants out;
    const Scalar det = Eigen::PartialPivLU<Mat<Scalar>>(t.M).determinant();
    out.det_error = static_cast<double>(abs(det - Scalar(1)));

    Mat<Scalar> col = t.M.col(i0);
    col(i0) -= Scalar(1);
    out.w1_error = static_cast<double>(col.cwiseAbs().maxCoeff());
    Mat<Scalar> row = t.M.row(j0);
    row(j0) -= Scalar(1);
    out.w2_error = static_cast<double>(row.cwiseAbs().maxCoeff());

    const Mat<Scalar> j = symplectic_j<Scalar>(N);
    out.symplectic_error = static_cast<double>((t.M.adjoint() * j * t.M - j).cwiseAbs().maxCoeff());
    const double big = static_cast<double>(t.M.cwiseAbs().maxCoeff());
    out.symplectic_relative = out.symplectic_error / std::max(1.0, big * big);
    return out;
}

template <class Scalar>
struct ResolventResult {
    Scalar value{};               // in units of the Hamiltonian scale
    double condition_estimate = 0.0;
};

namespace detail {

// ||A||_1 times max over fixed probes of ||A^{-1} r||_1 / ||r||_1: a cheap
// lower estimate of the 1-norm condition number.
template <class Scalar, class Solver>
double sparse_condition(const Eigen::SparseMatrix<Scalar>& a, Solver& lu) {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    double anorm = 0.0;
    for (int k = 0; k < a.outerSize(); ++k) {
        double col = 0.0;
        for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(a, k); it; ++it)
            col += static_cast<double>(std::abs(it.value()));
        anorm = std::max(anorm, col);
    }
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double inv = 0.0;
    for (int probe = 0; probe < 3; ++probe) {
        Vec r(a.rows());
        for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = Scalar(u(rng));
        const Vec x = lu.solve(r);
        inv = std::max(inv, static_cast<double>(x.cwiseAbs().sum() / r.cwiseAbs().sum()));
    }
    return anorm * inv;
}

template <class Scalar>
void add_panel_block(std::vector<Eigen::Triplet<Scalar>>& trip, const Mat<Scalar>& p, int row0, int col_next,
                     int col_prev, int skip_prev) {
    const int n = static_cast<int>(p.rows());
    for (int r = 0; r < n; ++r) {
        trip.emplace_back(row0 + r, col_next + r, Scalar(1));
        for (int c = 0; c < n; ++c) {
            if (c == skip_prev) continue;
            const int cc = (skip_prev >= 0 && c > skip_prev) ? c - 1 : c;
            if (p(r, c) != Scalar(0)) trip.emplace_back(row0 + r, col_prev + cc, -p(r, c));
        }
    }
}

}  // namespace detail

/// w2 . (M - I)^{-1} w1 over the full chain by multiple shooting.
///
/// Unknowns are the states x_0..x_K at panel ends with x_j = P_j x_{j-1} and
/// closure x_K - x_0 = w1. The kernel direction w1 is removed by fixing
/// (x_0)_{i0} = 0, and the closure row j0 (always consistent because
/// w2* M = w2*) is dropped, which leaves a square nonsingular sparse system.
template <class Scalar>
ResolventResult<Scalar> periodic_resolvent(const PanelChain<Scalar>& chain) {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const int N = chain.N;
    const int n = 2 * (2 * N + 1);
    const int i0 = N;
    const int j0 = (2 * N + 1) + N;
    const int K = static_cast<int>(chain.panels.size());
    if (K == 0) throw std::invalid_argument("empty panel chain");
    const int unknowns = (n - 1) + K * n;

    auto col_of = [&](int j) { return j == 0 ? 0 : (n - 1) + (j - 1) * n; };
    std::vector<Eigen::Triplet<Scalar>> trip;
    trip.reserve(static_cast<std::size_t>(K) * n * (n + 1) + 2 * n);
    for (int j = 1; j <= K; ++j)
        detail::add_panel_block(trip, chain.panels[j - 1], (j - 1) * n, col_of(j), col_of(j - 1), j == 1 ? i0 : -1);

    Vec rhs = Vec::Zero(unknowns);
    int row = K * n;
    for (int r = 0; r < n; ++r) {
        if (r == j0) continue;
        trip.emplace_back(row, col_of(K) + r, Scalar(1));
        if (r != i0) trip.emplace_back(row, r < i0 ? r : r - 1, Scalar(-1));
        if (r == i0) rhs(row) = Scalar(1);
        ++row;
    }
    Eigen::SparseMatrix<Scalar> a(unknowns, unknowns);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw NumericalError("periodic shooting system is singular");
    const Vec x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite()) throw NumericalError("periodic shooting solve failed");
    ResolventResult<Scalar> out;
    out.value = x(j0 - 1);
    out.condition_estimate = detail::sparse_condition(a, lu);
    return out;
}

/// 1/2 e . m^{-1} e over a chain on [0, 1/2] by shooting: x_0 = (0, y) and
/// the upper half of x_K equals e, so that y = m^{-1} e with m the upper-right
/// block of the half-period transfer matrix.
template <class Scalar>
ResolventResult<Scalar> half_period_resolvent(const PanelChain<Scalar>& chain) {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Real = RealOf<Scalar>;
    const int N = chain.N;
    const int m = 2 * N + 1;
    const int n = 2 * m;
    const int K = static_cast<int>(chain.panels.size());
    if (K == 0) throw std::invalid_argument("empty panel chain");
    const int unknowns = m + K * n;

    auto col_of = [&](int j) { return j == 0 ? 0 : m + (j - 1) * n; };
    std::vector<Eigen::Triplet<Scalar>> trip;
    trip.reserve(static_cast<std::size_t>(K) * n * (n + 1) + m);
    for (int j = 1; j <= K; ++j) {
        const Mat<Scalar>& p = chain.panels[j - 1];
        const int row0 = (j - 1) * n;
        for (int r = 0; r < n; ++r) {
            trip.emplace_back(row0 + r, col_of(j) + r, Scalar(1));
            if (j == 1) {
                for (int c = 0; c < m; ++c)
                    if (p(r, m + c) != Scalar(0)) trip.emplace_back(row0 + r, c, -p(r, m + c));
            } else {
                for (int c = 0; c < n; ++c)
                    if (p(r, c) != Scalar(0)) trip.emplace_back(row0 + r, col_of(j - 1) + c, -p(r, c));
            }
        }
    }
    Vec rhs = Vec::Zero(unknowns);
    for (int r = 0; r < m; ++r) trip.emplace_back(K * n + r, col_of(K) + r, Scalar(1));
    rhs(K * n + N) = Scalar(1);

    Eigen::SparseMatrix<Scalar> a(unknowns, unknowns);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw NumericalError("half-period shooting system is singular");
    const Vec x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite()) throw NumericalError("half-period shooting solve failed");
    ResolventResult<Scalar> out;
    out.value = x(N) * Scalar(Real(0.5));
    out.condition_estimate = detail::sparse_condition(a, lu);
    return out;
}

/// 1/2 e . m^{-1} e from an assembled half-period transfer matrix.
template <class Scalar>
ResolventResult<Scalar> half_period_resolvent(const TransferMatrix<Scalar>& t) {
    using Real = RealOf<Scalar>;
    const int N = t.N;
    const int m = 2 * N + 1;
    const Mat<Scalar> block = t.M.topRightCorner(m, m);
    Eigen::PartialPivLU<Mat<Scalar>> lu(block);
    const double rc = static_cast<double>(lu.rcond());
    if (!(rc > 0.0)) throw NumericalError("half-period block m_N is singular");
    Mat<Scalar> e = Mat<Scalar>::Zero(m, 1);
    e(N, 0) = Scalar(1);
    const Mat<Scalar> y = lu.solve(e);
    ResolventResult<Scalar> out;
    out.value = y(N, 0) * Scalar(Real(0.5));
    out.condition_estimate = 1.0 / rc;
    return out;
}

/// w2 . (M - I)^{-1} w1 from an assembled full-period transfer matrix, via
/// the same kernel deflation as periodic_resolvent. Reliable only while M is
/// moderately conditioned; used as a cross-check and in extended precision.
template <class Scalar>
ResolventResult<Scalar> periodic_resolvent(const TransferMatrix<Scalar>& t) {
    const int N = t.N;
    const int n = 2 * (2 * N + 1);
    const int i0 = N;
    const int j0 = (2 * N + 1) + N;
    std::vector<int> rows, cols;
    for (int r = 0; r < n; ++r)
        if (r != j0) rows.push_back(r);
    for (int c = 0; c < n; ++c)
        if (c != i0) cols.push_back(c);
    Mat<Scalar> a = t.M - Mat<Scalar>::Identity(n, n);
    const Mat<Scalar> reduced = a(rows, cols);
    Mat<Scalar> rhs = Mat<Scalar>::Zero(n - 1, 1);
    rhs(i0, 0) = Scalar(1);  // i0 < j0, so row i0 keeps its index
    Eigen::PartialPivLU<Mat<Scalar>> lu(reduced);
    const double rc = static_cast<double>(lu.rcond());
    if (!(rc > 0.0)) throw NumericalError("deflated monodromy system is singular");
    const Mat<Scalar> x = lu.solve(rhs);
    ResolventResult<Scalar> out;
    out.value = x(j0 - 1, 0);
    out.condition_estimate = 1.0 / rc;
    return out;
}

}  // namespace shear

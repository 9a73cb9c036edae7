#include "shear/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "shear/error.hpp"

namespace shear {

namespace {

constexpr double pi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double sign_of_parity(int n) { return (n % 2 == 0) ? 1.0 : -1.0; }

// integral of exp(-2 pi i n x) over [a, b)
cdouble interval_coefficient(double a, double b, int n) {
    const double len = b - a;
    if (n == 0) return {len, 0.0};
    const double arg = -pi * n * (a + b);
    return std::polar(len * detail::sinc(pi * n * len), arg);
}

// Centred square of side s: 1D factor (-1)^n s sinc(pi n s).
double centred_interval(double s, int n) { return sign_of_parity(n) * s * detail::sinc(pi * n * s); }

// Contrast of a nested shape against the shape (or matrix) enclosing it.
template <class Nested>
std::vector<double> nested_contrasts(const Nested& g, const CellField& field) {
    std::vector<double> out;
    double outer = detail::phase_value_mu(field, g.matrix_phase);
    for (const Layer& l : g.layers) {
        const double inner = detail::phase_value_mu(field, l.phase);
        out.push_back(inner - outer);
        outer = inner;
    }
    return out;
}

std::vector<double> raster_column_mu(const Raster& r, const CellField& field, int i) {
    std::vector<double> col(r.M);
    for (int j = 0; j < r.M; ++j) col[j] = detail::phase_value_mu(field, r.ids[static_cast<std::size_t>(i) * r.M + j]);
    return col;
}

std::vector<double> raster_breaks(int M) {
    std::vector<double> b;
    for (int j = 1; j < M; ++j) b.push_back(static_cast<double>(j) / M);
    return b;
}

std::vector<double> laminate_values(const Laminate& lam, const CellField& field) {
    std::vector<double> v;
    for (int p : lam.phases) v.push_back(detail::phase_value_mu(field, p));
    return v;
}

double chord_half_length(double r, double x1) {
    const double d = x1 - 0.5;
    return std::sqrt(std::max(0.0, r * r - d * d));
}

}  // namespace

FourierTable2D::FourierTable2D(int window) : window_(window) {
    if (window < 0) throw std::invalid_argument("Fourier window must be >= 0");
    coeffs_.assign(static_cast<std::size_t>(side()) * side(), cdouble{0.0, 0.0});
}

std::size_t FourierTable2D::index(int g1, int g2) const {
    if (std::abs(g1) > window_ || std::abs(g2) > window_) throw std::out_of_range("Fourier index outside window");
    return static_cast<std::size_t>(g1 + window_) * side() + (g2 + window_);
}

double FourierTable2D::max_imag() const {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, std::abs(c.imag()));
    return m;
}

cdouble piecewise_coefficient(const std::vector<double>& breaks, const std::vector<double>& values, int n) {
    cdouble acc{0.0, 0.0};
    double lo = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double hi = i < breaks.size() ? breaks[i] : 1.0;
        acc += values[i] * interval_coefficient(lo, hi, n);
        lo = hi;
    }
    return acc;
}

double disc_transform(double r, int g1, int g2, int panels) {
    if (g1 == 0 && g2 == 0) return pi * r * r;
    // Depends on |g| only; evaluate in a canonical order so the table keeps
    // the quarter-turn symmetry exactly.
    const int a = std::max(std::abs(g1), std::abs(g2));
    const int b = std::min(std::abs(g1), std::abs(g2));
    // x = r sin(t): chord integral becomes smooth in t.
    auto integrand = [&](double t) {
        const double c = std::cos(t);
        return std::cos(2.0 * pi * a * r * std::sin(t)) * 2.0 * r * r * c * c * detail::sinc(2.0 * pi * b * r * c);
    };
    const double width = 0.5 * pi / panels;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p)
        acc += boost::math::quadrature::gauss<double, 20>::integrate(integrand, p * width, (p + 1) * width);
    return 2.0 * acc;
}

namespace {

FourierTable2D build_table(const CellField& field, int G, const FourierOptions& options, bool parallel) {
    if (G < 0) throw std::invalid_argument("Fourier window must be >= 0");
    FourierTable2D table(G);
    const auto& geometry = field.geometry();

    std::visit(
        overloaded{
            [&](const Laminate& lam) {
                const auto v = laminate_values(lam, field);
                for (int g1 = -G; g1 <= G; ++g1) table(g1, 0) = piecewise_coefficient(lam.breaks, v, g1);
            },
            [&](const NestedSquares& sq) {
                const auto contrast = nested_contrasts(sq, field);
                table(0, 0) = detail::phase_value_mu(field, sq.matrix_phase);
#pragma omp parallel for schedule(static) if (parallel)
                for (int g1 = -G; g1 <= G; ++g1)
                    for (int g2 = -G; g2 <= G; ++g2)
                        for (std::size_t k = 0; k < contrast.size(); ++k) {
                            const double s = sq.layers[k].size;
                            table(g1, g2) += contrast[k] * centred_interval(s, g1) * centred_interval(s, g2);
                        }
            },
            [&](const NestedCircles& c) {
                const auto contrast = nested_contrasts(c, field);
                table(0, 0) = detail::phase_value_mu(field, c.matrix_phase);
#pragma omp parallel for schedule(dynamic) if (parallel)
                for (int g1 = -G; g1 <= G; ++g1)
                    for (int g2 = -G; g2 <= G; ++g2)
                        for (std::size_t k = 0; k < contrast.size(); ++k) {
                            const double d = disc_transform(c.layers[k].size, g1, g2, options.circle_panels);
                            table(g1, g2) += contrast[k] * sign_of_parity(g1 + g2) * d;
                        }
            },
            [&](const SeparableProduct& s) {
                std::vector<cdouble> g(2 * G + 1);
                for (int n = -G; n <= G; ++n) g[n + G] = piecewise_coefficient(s.breaks, s.values, n);
                for (int g1 = -G; g1 <= G; ++g1)
                    for (int g2 = -G; g2 <= G; ++g2) table(g1, g2) = g[g1 + G] * g[g2 + G];
            },
            [&](const Raster& r) {
                const auto breaks = raster_breaks(r.M);
                for (int i = 0; i < r.M; ++i) {
                    const auto col = raster_column_mu(r, field, i);
                    const double lo = static_cast<double>(i) / r.M;
                    const double hi = static_cast<double>(i + 1) / r.M;
                    std::vector<cdouble> cross(2 * G + 1);
                    for (int n = -G; n <= G; ++n) cross[n + G] = piecewise_coefficient(breaks, col, n);
                    for (int g1 = -G; g1 <= G; ++g1) {
                        const cdouble w = interval_coefficient(lo, hi, g1);
                        for (int g2 = -G; g2 <= G; ++g2) table(g1, g2) += w * cross[g2 + G];
                    }
                }
            },
        },
        geometry);
    return table;
}

}  // namespace

FourierTable2D fourier2d(const CellField& field, int G, const FourierOptions& options) {
    return build_table(field, G, options, true);
}

FourierTable2D fourier2d_serial(const CellField& field, int G, const FourierOptions& options) {
    return build_table(field, G, options, false);
}

std::vector<cdouble> cross_section_coefficients(const CellField& field, int N, double x1) {
    if (N < 0) throw std::invalid_argument("truncation order N must be >= 0");
    const int W = 2 * N;
    std::vector<cdouble> c(2 * W + 1, cdouble{0.0, 0.0});
    auto at = [&](int n) -> cdouble& { return c[n + W]; };

    std::visit(overloaded{
                   [&](const Laminate&) { at(0) = evaluate(field, x1, 0.0).mu; },
                   [&](const NestedSquares& sq) {
                       const auto contrast = nested_contrasts(sq, field);
                       at(0) = detail::phase_value_mu(field, sq.matrix_phase);
                       for (std::size_t k = 0; k < contrast.size(); ++k) {
                           const double s = sq.layers[k].size;
                           if (std::abs(x1 - 0.5) > 0.5 * s) continue;
                           for (int n = -W; n <= W; ++n) at(n) += contrast[k] * centred_interval(s, n);
                       }
                   },
                   [&](const NestedCircles& circ) {
                       const auto contrast = nested_contrasts(circ, field);
                       at(0) = detail::phase_value_mu(field, circ.matrix_phase);
                       for (std::size_t k = 0; k < contrast.size(); ++k) {
                           const double h = chord_half_length(circ.layers[k].size, x1);
                           if (h == 0.0) continue;
                           for (int n = -W; n <= W; ++n) at(n) += contrast[k] * centred_interval(2.0 * h, n);
                       }
                   },
                   [&](const SeparableProduct& s) {
                       const auto seg = std::upper_bound(s.breaks.begin(), s.breaks.end(), x1) - s.breaks.begin();
                       const double g1 = s.values[static_cast<std::size_t>(seg)];
                       for (int n = -W; n <= W; ++n) at(n) = g1 * piecewise_coefficient(s.breaks, s.values, n);
                   },
                   [&](const Raster& r) {
                       const int i = std::clamp(static_cast<int>(std::floor(x1 * r.M)), 0, r.M - 1);
                       const auto col = raster_column_mu(r, field, i);
                       const auto breaks = raster_breaks(r.M);
                       for (int n = -W; n <= W; ++n) at(n) = piecewise_coefficient(breaks, col, n);
                   },
               },
               field.geometry());
    return c;
}

Eigen::MatrixXcd toeplitz_from_coefficients(const std::vector<cdouble>& c, int N) {
    const int m = 2 * N + 1;
    if (c.size() != static_cast<std::size_t>(4 * N + 1)) throw std::invalid_argument("need 4N+1 coefficients");
    Eigen::MatrixXcd t(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) t(i, j) = c[static_cast<std::size_t>(i - j + 2 * N)];
    return t;
}

ToeplitzProfile cross_section_profile(const CellField& field, int N, const ProfileOptions& options) {
    if (N < 0) throw std::invalid_argument("truncation order N must be >= 0");
    ToeplitzProfile profile;
    profile.N = N;

    auto push = [&](double a, double b, double sample) {
        profile.segments.push_back({a, b, toeplitz_from_coefficients(cross_section_coefficients(field, N, sample), N)});
    };
    auto exact_from_breaks = [&](std::vector<double> breaks) {
        breaks.push_back(0.0);
        breaks.push_back(1.0);
        std::sort(breaks.begin(), breaks.end());
        breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i) push(breaks[i], breaks[i + 1], 0.5 * (breaks[i] + breaks[i + 1]));
    };

    std::visit(overloaded{
                   [&](const Laminate& lam) { exact_from_breaks(lam.breaks); },
                   [&](const NestedSquares& sq) {
                       std::vector<double> b;
                       for (const Layer& l : sq.layers) {
                           b.push_back(0.5 - 0.5 * l.size);
                           b.push_back(0.5 + 0.5 * l.size);
                       }
                       exact_from_breaks(b);
                   },
                   [&](const SeparableProduct& s) { exact_from_breaks(s.breaks); },
                   [&](const Raster& r) { exact_from_breaks(raster_breaks(r.M)); },
                   [&](const NestedCircles& c) {
                       if (options.circle_steps < 1) throw std::invalid_argument("circle_steps must be >= 1");
                       profile.sampled = true;
                       profile.steps_per_unit = options.circle_steps;
                       std::vector<double> b{0.0, 1.0};
                       for (const Layer& l : c.layers) {
                           b.push_back(0.5 - l.size);
                           b.push_back(0.5 + l.size);
                       }
                       std::sort(b.begin(), b.end());
                       b.erase(std::unique(b.begin(), b.end()), b.end());
                       const double outer = c.layers.empty() ? 0.0 : c.layers.front().size;
                       for (std::size_t i = 0; i + 1 < b.size(); ++i) {
                           const double lo = b[i], hi = b[i + 1];
                           const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
                           if (std::abs(mid - 0.5) >= outer) {
                               push(lo, hi, mid);
                               continue;
                           }
                           // Steps uniform in t with x = mid + half*sin(t): the chord
                           // lengths have square-root ends, smooth in t.
                           const int count = std::max(2, static_cast<int>(std::ceil(options.circle_steps * (hi - lo))));
                           double x_prev = lo;
                           for (int s = 1; s <= count; ++s) {
                               const double t = -0.5 * pi + pi * s / count;
                               const double x_next = (s == count) ? hi : mid + half * std::sin(t);
                               push(x_prev, x_next, 0.5 * (x_prev + x_next));
                               x_prev = x_next;
                           }
                       }
                   },
               },
               field.geometry());
    return profile;
}

Eigen::MatrixXcd toeplitz_inverse(const Eigen::MatrixXcd& block) {
    Eigen::LLT<Eigen::MatrixXcd> llt(block);
    if (llt.info() != Eigen::Success) throw NumericalError("cross-section block is not positive definite");
    return llt.solve(Eigen::MatrixXcd::Identity(block.rows(), block.cols()));
}

}  // namespace shear

#include "shear/cell_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace shear {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void check_phase(int phase, std::size_t count) {
    if (phase < 0 || static_cast<std::size_t>(phase) >= count)
        throw std::invalid_argument("phase id " + std::to_string(phase) + " out of range");
}

void check_breaks(const std::vector<double>& breaks, std::size_t values) {
    if (values != breaks.size() + 1)
        throw std::invalid_argument("profile needs breaks.size() + 1 values");
    double prev = 0.0;
    for (double b : breaks) {
        if (!(b > prev) || !(b < 1.0))
            throw std::invalid_argument("breakpoints must increase strictly inside (0, 1)");
        prev = b;
    }
}

void check_nested(const std::vector<Layer>& layers, double max_size, std::size_t phases,
                  const char* what) {
    double prev = max_size;
    bool first = true;
    for (const Layer& l : layers) {
        if (!positive_finite(l.size) || l.size > prev || (!first && l.size == prev))
            throw std::invalid_argument(std::string(what) + " sizes must decrease strictly within the cell");
        check_phase(l.phase, phases);
        prev = l.size;
        first = false;
    }
}

std::size_t segment_index(const std::vector<double>& breaks, double x) {
    return static_cast<std::size_t>(std::upper_bound(breaks.begin(), breaks.end(), x) - breaks.begin());
}

// Merge neighbouring segments with equal values; returns (breaks, values).
std::pair<std::vector<double>, std::vector<double>> merged_profile(const std::vector<double>& breaks,
                                                                   const std::vector<double>& values) {
    std::vector<double> b;
    std::vector<double> v{values.front()};
    for (std::size_t i = 0; i < breaks.size(); ++i) {
        if (values[i + 1] != v.back()) {
            b.push_back(breaks[i]);
            v.push_back(values[i + 1]);
        }
    }
    return {b, v};
}

bool symmetric_about_half(const std::vector<double>& breaks, const std::vector<double>& values) {
    auto [b, v] = merged_profile(breaks, values);
    // Periodic profile: wrap-around segments carry the same value, so compare the
    // circular structure by reflecting x -> 1 - x.
    const std::size_t n = b.size();
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(b[i] + b[n - 1 - i] - 1.0) > 1e-14) return false;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] != v[v.size() - 1 - i]) return false;
    return true;
}

std::vector<double> laminate_mu(const Laminate& lam, const std::vector<Material>& phases) {
    std::vector<double> mu;
    mu.reserve(lam.phases.size());
    for (int p : lam.phases) mu.push_back(phases[p].shear_modulus);
    return mu;
}

double profile_mean(const std::vector<double>& breaks, const std::vector<double>& values, bool inverse) {
    double acc = 0.0;
    double lo = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double hi = i < breaks.size() ? breaks[i] : 1.0;
        acc += (hi - lo) * (inverse ? 1.0 / values[i] : values[i]);
        lo = hi;
    }
    return acc;
}

std::vector<double> segment_lengths(const std::vector<double>& breaks) {
    std::vector<double> len;
    double lo = 0.0;
    for (double b : breaks) {
        len.push_back(b - lo);
        lo = b;
    }
    len.push_back(1.0 - lo);
    return len;
}

// Region areas for nested shapes, matrix first.
std::vector<double> nested_areas(const std::vector<Layer>& layers, bool circles) {
    auto area = [circles](double s) { return circles ? std::numbers::pi * s * s : s * s; };
    std::vector<double> out;
    out.push_back(layers.empty() ? 1.0 : 1.0 - area(layers.front().size));
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const double inner = k + 1 < layers.size() ? area(layers[k + 1].size) : 0.0;
        out.push_back(area(layers[k].size) - inner);
    }
    return out;
}

SymmetryFlags derive_symmetry(const CellField& field) {
    return std::visit(
        overloaded{
            [&](const Laminate& lam) {
                const auto mu = laminate_mu(lam, field.phases());
                const auto merged = merged_profile(lam.breaks, mu);
                return SymmetryFlags{merged.second.size() == 1, symmetric_about_half(lam.breaks, mu)};
            },
            [](const NestedSquares&) { return SymmetryFlags{true, true}; },
            [](const NestedCircles&) { return SymmetryFlags{true, true}; },
            [](const SeparableProduct&) { return SymmetryFlags{true, true}; },
            [&](const Raster& r) { return check_symmetries(field, r.M); },
        },
        field.geometry());
}

}  // namespace

Material::Material(double mu, double rho) : shear_modulus(mu), density(rho) {
    if (!positive_finite(mu)) throw std::invalid_argument("shear modulus must be positive and finite");
    if (!positive_finite(rho)) throw std::invalid_argument("density must be positive and finite");
}

bool operator==(const Material& a, const Material& b) {
    return a.shear_modulus == b.shear_modulus && a.density == b.density;
}

bool operator==(const SymmetryFlags& a, const SymmetryFlags& b) {
    return a.cubic == b.cubic && a.even_x1 == b.even_x1;
}

CellField::CellField(CellGeometry geometry, std::vector<Material> phases)
    : geometry_(std::move(geometry)), phases_(std::move(phases)) {
    const std::size_t np = phases_.size();
    std::visit(overloaded{
                   [&](const Laminate& lam) {
                       check_breaks(lam.breaks, lam.phases.size());
                       for (int p : lam.phases) check_phase(p, np);
                   },
                   [&](const NestedSquares& sq) {
                       check_phase(sq.matrix_phase, np);
                       check_nested(sq.layers, 1.0, np, "square");
                   },
                   [&](const NestedCircles& c) {
                       check_phase(c.matrix_phase, np);
                       check_nested(c.layers, 0.5, np, "circle");
                   },
                   [&](const SeparableProduct& s) {
                       check_breaks(s.breaks, s.values.size());
                       for (double v : s.values)
                           if (!positive_finite(v)) throw std::invalid_argument("separable profile must be positive");
                       if (!positive_finite(s.density)) throw std::invalid_argument("density must be positive and finite");
                       if (!symmetric_about_half(s.breaks, s.values))
                           throw std::invalid_argument("separable profile must be even about x = 1/2");
                   },
                   [&](const Raster& r) {
                       if (r.M < 1 || r.ids.size() != static_cast<std::size_t>(r.M) * r.M)
                           throw std::invalid_argument("raster needs M*M phase ids");
                       for (int p : r.ids) check_phase(p, np);
                   },
               },
               geometry_);
    symmetry_ = derive_symmetry(*this);
}

CellField CellField::homogeneous(const Material& m) { return CellField(NestedSquares{0, {}}, {m}); }

PointValue evaluate(const CellField& field, double x1, double x2) {
    const auto& ph = field.phases();
    auto value = [&](int p) { return PointValue{ph[p].shear_modulus, ph[p].density}; };
    return std::visit(
        overloaded{
            [&](const Laminate& lam) { return value(lam.phases[segment_index(lam.breaks, x1)]); },
            [&](const NestedSquares& sq) {
                const double d = std::max(std::abs(x1 - 0.5), std::abs(x2 - 0.5));
                for (auto it = sq.layers.rbegin(); it != sq.layers.rend(); ++it)
                    if (d <= 0.5 * it->size) return value(it->phase);
                return value(sq.matrix_phase);
            },
            [&](const NestedCircles& c) {
                const double d2 = (x1 - 0.5) * (x1 - 0.5) + (x2 - 0.5) * (x2 - 0.5);
                for (auto it = c.layers.rbegin(); it != c.layers.rend(); ++it)
                    if (d2 <= it->size * it->size) return value(it->phase);
                return value(c.matrix_phase);
            },
            [&](const SeparableProduct& s) {
                const double g1 = s.values[segment_index(s.breaks, x1)];
                const double g2 = s.values[segment_index(s.breaks, x2)];
                return PointValue{g1 * g2, s.density};
            },
            [&](const Raster& r) {
                const int i = std::clamp(static_cast<int>(std::floor(x1 * r.M)), 0, r.M - 1);
                const int j = std::clamp(static_cast<int>(std::floor(x2 * r.M)), 0, r.M - 1);
                return value(r.ids[static_cast<std::size_t>(i) * r.M + j]);
            },
        },
        field.geometry());
}

CellField invert_field(const CellField& field) {
    std::vector<Material> inverted;
    inverted.reserve(field.phases().size());
    for (const Material& m : field.phases()) inverted.emplace_back(1.0 / m.shear_modulus, m.density);
    CellGeometry geometry = field.geometry();
    if (auto* s = std::get_if<SeparableProduct>(&geometry))
        for (double& v : s->values) v = 1.0 / v;
    return CellField(std::move(geometry), std::move(inverted));
}

CellAverages cell_averages(const CellField& field) {
    const auto& ph = field.phases();
    auto weighted = [&](const std::vector<double>& w, const auto& phase_of) {
        CellAverages a{0.0, 0.0, 0.0};
        for (std::size_t k = 0; k < w.size(); ++k) {
            const Material& m = ph[phase_of(k)];
            a.mu_avg += w[k] * m.shear_modulus;
            a.mu_inv_avg += w[k] / m.shear_modulus;
            a.rho_avg += w[k] * m.density;
        }
        return a;
    };
    return std::visit(
        overloaded{
            [&](const Laminate& lam) {
                return weighted(segment_lengths(lam.breaks), [&](std::size_t k) { return lam.phases[k]; });
            },
            [&](const NestedSquares& sq) {
                return weighted(nested_areas(sq.layers, false), [&](std::size_t k) {
                    return k == 0 ? sq.matrix_phase : sq.layers[k - 1].phase;
                });
            },
            [&](const NestedCircles& c) {
                return weighted(nested_areas(c.layers, true), [&](std::size_t k) {
                    return k == 0 ? c.matrix_phase : c.layers[k - 1].phase;
                });
            },
            [&](const SeparableProduct& s) {
                const double g = profile_mean(s.breaks, s.values, false);
                const double gi = profile_mean(s.breaks, s.values, true);
                return CellAverages{g * g, gi * gi, s.density};
            },
            [&](const Raster& r) {
                const double w = 1.0 / (static_cast<double>(r.M) * r.M);
                return weighted(std::vector<double>(r.ids.size(), w), [&](std::size_t k) { return r.ids[k]; });
            },
        },
        field.geometry());
}

std::vector<double> filling_fractions(const CellGeometry& geometry) {
    return std::visit(overloaded{
                          [](const Laminate& lam) { return segment_lengths(lam.breaks); },
                          [](const NestedSquares& sq) { return nested_areas(sq.layers, false); },
                          [](const NestedCircles& c) { return nested_areas(c.layers, true); },
                          [](const SeparableProduct& s) {
                              const auto len = segment_lengths(s.breaks);
                              std::vector<double> out;
                              for (double a : len)
                                  for (double b : len) out.push_back(a * b);
                              return out;
                          },
                          [](const Raster& r) {
                              const int top = r.ids.empty() ? 0 : *std::max_element(r.ids.begin(), r.ids.end());
                              std::vector<double> out(static_cast<std::size_t>(top) + 1, 0.0);
                              const double w = 1.0 / (static_cast<double>(r.M) * r.M);
                              for (int p : r.ids) out[p] += w;
                              return out;
                          },
                      },
                      geometry);
}

SymmetryFlags check_symmetries(const CellField& field, int grid_resolution) {
    if (grid_resolution < 2) throw std::invalid_argument("grid_resolution must be >= 2");
    const int n = grid_resolution;
    // Centred coordinates (2i + 1 - n) / (2n) are exact mirror images of each other.
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = 0.5 + static_cast<double>(2 * i + 1 - n) / (2.0 * n);
    std::vector<double> mu(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) mu[static_cast<std::size_t>(i) * n + j] = evaluate(field, x[i], x[j]).mu;
    auto at = [&](int i, int j) { return mu[static_cast<std::size_t>(i) * n + j]; };
    SymmetryFlags flags{true, true};
    for (int i = 0; i < n && (flags.cubic || flags.even_x1); ++i)
        for (int j = 0; j < n; ++j) {
            // quarter turn about the centre: (x1, x2) -> (1 - x2, x1)
            if (at(n - 1 - j, i) != at(i, j)) flags.cubic = false;
            if (at(n - 1 - i, j) != at(i, j)) flags.even_x1 = false;
        }
    return flags;
}

namespace detail {

double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

double phase_value_mu(const CellField& field, int phase) { return field.phases().at(phase).shear_modulus; }

}  // namespace detail

std::string geometry_name(const CellGeometry& geometry) {
    return std::visit(overloaded{
                          [](const Laminate&) { return std::string("laminate"); },
                          [](const NestedSquares&) { return std::string("nested_squares"); },
                          [](const NestedCircles&) { return std::string("nested_circles"); },
                          [](const SeparableProduct&) { return std::string("separable"); },
                          [](const Raster&) { return std::string("raster"); },
                      },
                      geometry);
}

}  // namespace shear

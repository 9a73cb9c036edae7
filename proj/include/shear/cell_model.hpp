#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

namespace shear {

/// One phase of the composite: shear modulus (Pa) and mass density (kg/m^3).
struct Material {
    double shear_modulus;
    double density;

    Material(double mu, double rho);
};

bool operator==(const Material& a, const Material& b);

// A shape of a nested lattice: side length (squares) or radius (circles),
// filled with phase `phase`.
struct Layer {
    double size;
    int phase;
};

/// Piecewise constant layers along x1; segment i is [breaks[i-1], breaks[i]).
struct Laminate {
    std::vector<double> breaks;   // interior breakpoints, strictly increasing in (0,1)
    std::vector<int> phases;      // breaks.size() + 1 entries
};

/// Concentric axis-aligned squares centred at (1/2, 1/2), outermost first.
struct NestedSquares {
    int matrix_phase = 0;
    std::vector<Layer> layers;
};

/// Concentric discs centred at (1/2, 1/2), outermost first, radii <= 1/2.
struct NestedCircles {
    int matrix_phase = 0;
    std::vector<Layer> layers;
};

/// mu(x) = g(x1) g(x2) with g piecewise constant and symmetric about 1/2.
/// The density is uniform.
struct SeparableProduct {
    std::vector<double> breaks;
    std::vector<double> values;   // breaks.size() + 1 entries, all > 0
    double density = 1.0;
};

/// M x M grid of phase ids; cell (i, j) covers [i/M,(i+1)/M) x [j/M,(j+1)/M)
/// and is stored at ids[i * M + j] (i runs along x1).
struct Raster {
    int M = 1;
    std::vector<int> ids;
};

using CellGeometry = std::variant<Laminate, NestedSquares, NestedCircles, SeparableProduct, Raster>;

struct SymmetryFlags {
    bool cubic = false;
    bool even_x1 = false;
};

bool operator==(const SymmetryFlags& a, const SymmetryFlags& b);

struct PointValue {
    double mu;
    double rho;
};

struct CellAverages {
    double mu_avg;
    double mu_inv_avg;
    double rho_avg;
};

/// A 1-periodic shear modulus / density field on the unit cell.
///
/// Immutable once built. The constructor validates the geometry against the
/// phase table and derives the symmetry flags: the nested and separable
/// variants are cubic and even in x1 by construction, laminates are never
/// cubic, rasters are checked cell by cell.
class CellField {
public:
    CellField(CellGeometry geometry, std::vector<Material> phases);

    const CellGeometry& geometry() const { return geometry_; }
    const std::vector<Material>& phases() const { return phases_; }
    const SymmetryFlags& symmetry() const { return symmetry_; }

    /// Convenience: a single-phase field.
    static CellField homogeneous(const Material& m);

private:
    CellGeometry geometry_;
    std::vector<Material> phases_;
    SymmetryFlags symmetry_;
};

/// Pointwise (mu, rho). Points on an interface belong to the innermost shape
/// whose closed region contains them; laminate/raster cells are half-open.
PointValue evaluate(const CellField& field, double x1, double x2);

/// Same geometry, every shear modulus replaced by its reciprocal.
CellField invert_field(const CellField& field);

/// Exact area-weighted <mu>, <1/mu>, <rho>.
CellAverages cell_averages(const CellField& field);

/// One area fraction per region in geometry order: matrix first, then each
/// nested shape (annulus); laminate segments; separable product cells
/// (i, j) row-major; raster phase ids 0..max.
std::vector<double> filling_fractions(const CellGeometry& geometry);

/// Samples mu at the centres of a grid_resolution^2 grid and compares under
/// the quarter turn about (1/2, 1/2) and under x1 -> -x1.
SymmetryFlags check_symmetries(const CellField& field, int grid_resolution);

// 1D helpers shared by the Fourier and oracle code.
namespace detail {
double sinc(double x);
double phase_value_mu(const CellField& field, int phase);
}  // namespace detail

std::string geometry_name(const CellGeometry& geometry);

}  // namespace shear

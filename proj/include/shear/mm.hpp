#pragma once

#include "shear/cell_model.hpp"
#include "shear/fourier.hpp"
#include "shear/monodromy.hpp"

namespace shear {

enum class Period { automatic, full, half };

struct MmOptions {
    IntegratorOptions integrator;
    // Disc fields: initial steps per unit length of the sampled profile. With
    // circle_refine the step count doubles and consecutive values are Richardson
    // extrapolated until the extrapolated value moves by less than circle_tol
    // (relative) or circle_max_steps is reached.
    int circle_steps = 64;
    bool circle_refine = true;
    double circle_tol = 1e-8;
    int circle_max_steps = 1 << 14;
    // automatic: half period when the field is even in x1.
    Period period = Period::automatic;
    bool require_cubic = true;
};

struct MmResult {
    double mu = 0.0;
    double condition_estimate = 0.0;
    Backend backend = Backend::piecewise_exp;
    bool half_period = false;
    int circle_steps = 0;   // 0 for exact profiles
    int panels = 0;
    bool converged = true;  // false when circle refinement hit its cap
};

/// mu_N for a fixed cross-section profile (no refinement).
MmResult mm_from_profile(const ToeplitzProfile& profile, double scale, bool half_period,
                         const IntegratorOptions& integrator);

/// Upper MM bound mu_N on the shear modulus.
MmResult mm_upper(const CellField& field, int N, const MmOptions& options = {});

/// Lower MM bound 1 / mu_N(1/mu).
MmResult mm_lower(const CellField& field, int N, const MmOptions& options = {});

double mm_upper_mu(const CellField& field, int N, const MmOptions& options = {});

/// mu_N from the half-period transfer matrix, 1/2 e . m_N^{-1} e. Rejects
/// fields that are not even in x1.
double mm_upper_mu_half(const CellField& field, int N, const MmOptions& options = {});
double mm_lower_mu(const CellField& field, int N, const MmOptions& options = {});

}  // namespace shear

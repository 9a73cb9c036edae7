#include "shear/mm.hpp"

#include <cmath>
#include <stdexcept>

namespace shear {

namespace {

double max_imag(const ToeplitzProfile& p) {
    double m = 0.0;
    for (const auto& s : p.segments) m = std::max(m, s.mu_hat.imag().cwiseAbs().maxCoeff());
    return m;
}

template <class Scalar>
MmResult solve(const ToeplitzProfile& profile, double scale, bool half, const IntegratorOptions& o) {
    const BlockHamiltonian<Scalar> h = build_q<Scalar>(profile, scale);
    const PanelChain<Scalar> chain = make_chain(h, 0.0, half ? 0.5 : 1.0, o);
    const ResolventResult<Scalar> r = half ? half_period_resolvent(chain) : periodic_resolvent(chain);
    MmResult out;
    out.mu = std::real(r.value) * scale;
    out.condition_estimate = r.condition_estimate;
    out.backend = o.backend;
    out.half_period = half;
    out.circle_steps = profile.sampled ? profile.steps_per_unit : 0;
    out.panels = static_cast<int>(chain.panels.size());
    if (!std::isfinite(out.mu) || !(out.mu > 0.0)) throw NumericalError("MM resolvent is not a positive number");
    return out;
}

bool use_half(const CellField& field, Period period) {
    switch (period) {
        case Period::full:
            return false;
        case Period::half:
            if (!field.symmetry().even_x1)
                throw std::invalid_argument("half-period formula needs a field even in x1");
            return true;
        case Period::automatic:
            return field.symmetry().even_x1;
    }
    return false;
}

}  // namespace

MmResult mm_from_profile(const ToeplitzProfile& profile, double scale, bool half_period,
                         const IntegratorOptions& integrator) {
    const double big = profile.segments.empty() ? 0.0 : profile.segments.front().mu_hat.cwiseAbs().maxCoeff();
    if (max_imag(profile) <= 1e-13 * big) return solve<double>(profile, scale, half_period, integrator);
    return solve<cdouble>(profile, scale, half_period, integrator);
}

MmResult mm_upper(const CellField& field, int N, const MmOptions& options) {
    if (N < 0) throw std::invalid_argument("truncation order N must be >= 0");
    if (options.require_cubic && !field.symmetry().cubic)
        throw std::invalid_argument("MM bounds need a cubic-symmetric field");
    const bool half = use_half(field, options.period);
    const double scale = cell_averages(field).mu_avg;

    ProfileOptions po;
    po.circle_steps = options.circle_steps;
    ToeplitzProfile profile = cross_section_profile(field, N, po);
    MmResult r = mm_from_profile(profile, scale, half, options.integrator);
    if (!profile.sampled || !options.circle_refine) return r;

    // The sampled profile converges at second order in the step count, so
    // successive doublings are combined by Richardson extrapolation.
    r.converged = false;
    double prev_raw = r.mu;
    double prev_extrap = 0.0;
    bool have_extrap = false;
    while (po.circle_steps * 2 <= options.circle_max_steps) {
        po.circle_steps *= 2;
        profile = cross_section_profile(field, N, po);
        MmResult next = mm_from_profile(profile, scale, half, options.integrator);
        const double raw = next.mu;
        next.mu = raw + (raw - prev_raw) / 3.0;
        prev_raw = raw;
        const bool done = have_extrap && std::abs(next.mu - prev_extrap) <= options.circle_tol * std::abs(next.mu);
        prev_extrap = next.mu;
        have_extrap = true;
        r = next;
        r.converged = done;
        if (done) break;
    }
    return r;
}

MmResult mm_lower(const CellField& field, int N, const MmOptions& options) {
    MmResult r = mm_upper(invert_field(field), N, options);
    r.mu = 1.0 / r.mu;
    return r;
}

double mm_upper_mu(const CellField& field, int N, const MmOptions& options) { return mm_upper(field, N, options).mu; }

double mm_upper_mu_half(const CellField& field, int N, const MmOptions& options) {
    MmOptions o = options;
    o.period = Period::half;
    return mm_upper(field, N, o).mu;
}

double mm_lower_mu(const CellField& field, int N, const MmOptions& options) { return mm_lower(field, N, options).mu; }

}  // namespace shear

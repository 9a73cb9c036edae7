#include "shear/monodromy.hpp"

namespace shear {

std::string backend_name(Backend b) {
    switch (b) {
        case Backend::piecewise_exp:
            return "piecewise_exp";
        case Backend::product:
            return "product";
        case Backend::peano:
            return "peano";
    }
    return "unknown";
}

Backend parse_backend(const std::string& name) {
    if (name == "piecewise_exp") return Backend::piecewise_exp;
    if (name == "product") return Backend::product;
    if (name == "peano") return Backend::peano;
    throw std::invalid_argument("unknown integrator backend: " + name);
}

template struct BlockHamiltonian<double>;
template struct BlockHamiltonian<cdouble>;
template BlockHamiltonian<double> build_q<double>(const ToeplitzProfile&, double);
template BlockHamiltonian<cdouble> build_q<cdouble>(const ToeplitzProfile&, double);
template PanelChain<double> make_chain<double>(const BlockHamiltonian<double>&, double, double,
                                               const IntegratorOptions&);
template PanelChain<cdouble> make_chain<cdouble>(const BlockHamiltonian<cdouble>&, double, double,
                                                 const IntegratorOptions&);
template ResolventResult<double> periodic_resolvent<double>(const PanelChain<double>&);
template ResolventResult<cdouble> periodic_resolvent<cdouble>(const PanelChain<cdouble>&);
template ResolventResult<double> half_period_resolvent<double>(const PanelChain<double>&);
template ResolventResult<cdouble> half_period_resolvent<cdouble>(const PanelChain<cdouble>&);

}  // namespace shear

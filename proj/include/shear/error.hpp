#pragma once

#include <stdexcept>

namespace shear {

/// A numerical breakdown: a block that should be positive definite is not,
/// a resolvent system is singular beyond its known kernel, an eigen solve
/// did not converge. Precondition violations throw std::invalid_argument.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace shear

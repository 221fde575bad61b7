#pragma once

#include <stdexcept>
#include <string>

namespace hestonis {

// Invalid parameter or input shape.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// An integrator or quadrature produced a value outside its admissible range.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An optimizer found no point with a finite objective.
struct OptimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace hestonis

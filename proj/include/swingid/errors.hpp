#pragma once
#include <stdexcept>

namespace swingid {

// Bad inputs, configs, malformed files. CLI exit code 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Divergence, singular systems, non-finite intermediates. CLI exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace swingid

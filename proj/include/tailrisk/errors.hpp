#pragma once

#include <stdexcept>

namespace tailrisk {

// An iterative numeric routine exhausted its evaluation budget.
struct NonConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The sample cannot support the requested estimate (constant data,
// zero variance, and similar).
struct DegenerateSampleError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Fewer observations than the estimator's floor.
struct InsufficientDataError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed or out-of-contract user-supplied data (parse failures,
// bound violations). Messages carry row/line context where known.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tailrisk

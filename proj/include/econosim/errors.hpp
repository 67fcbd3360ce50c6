#pragma once

#include <stdexcept>
#include <string>

namespace econosim {

struct SelfLoopError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct UndefinedCapitalError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Thrown when a tail fit has fewer than the minimum number of samples
/// above the cutoff. The CLI maps this to exit code 3.
struct InsufficientTailError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DisconnectedInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NoSolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace econosim

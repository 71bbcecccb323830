#pragma once

#include <stdexcept>

namespace hmt {

// A caller broke a documented precondition (bad radius, grid too small, ...).
struct domain_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A solver could not deliver its contract (no bracket, singular system, ...).
struct solver_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace hmt

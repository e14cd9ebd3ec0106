#pragma once

#include <stdexcept>
#include <string>

namespace cylint {

/// Base class of every exception thrown by this library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates a precondition (negative time,
/// weights not summing to one, non-finite entries, ...).
class invalid_input : public error {
public:
    using error::error;
};

/// Operand dimensions or space tags do not agree.
class shape_error : public error {
public:
    using error::error;
};

/// A numeric procedure failed to produce a usable result
/// (iteration did not converge, state blew up, ...).
class numeric_error : public error {
public:
    using error::error;
};

/// A caller-supplied rule broke its stated contract
/// (evaluator exceeding its bound, expectation of a selector-form operator).
class contract_violation : public error {
public:
    using error::error;
};

/// A scenario file could not be parsed or validated.
/// Messages carry "line N:" or the offending field path.
class config_error : public error {
public:
    using error::error;
};

} // namespace cylint

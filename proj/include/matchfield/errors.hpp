#pragma once

#include <stdexcept>
#include <string>

namespace matchfield {

/// Input tables or distributions break a stated invariant.
class InvalidInputs : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matching intensities would create asymmetric matched mass, or the
/// finite-population targets do not fit into the unmatched pools.
class MatchingInfeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The initial distribution cannot be rounded to a valid finite population.
class InfeasibleRounding : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scenario file is malformed or contains unknown keys.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace matchfield

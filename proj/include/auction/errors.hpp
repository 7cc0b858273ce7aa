#pragma once

#include <stdexcept>
#include <string>

namespace auction {

// Malformed model data: shape mismatches, mass not summing to one, unknown
// labels, invalid matroid families, out-of-range indices.
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed instance or rule document: missing fields, wrong value kinds,
// out-of-range entries.  Message names the offending field's path.
struct SchemaError : StructuralError {
  using StructuralError::StructuralError;
};

// A requested rule cannot be represented: denormalizing more mass than the
// type carries, or a rule exceeding probability one.
struct InfeasibleMassError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input exceeds an enumeration guard (subset or profile enumeration).
struct InstanceTooLargeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The LP solver failed to converge or returned an unexpected status.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A token reroute was asked to move more mass than the connecting edge holds.
struct RerouteCapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A point handed to the rounding procedure lies outside the polytope.
struct NotInPolytopeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace auction

#pragma once

#include <stdexcept>
#include <string>

namespace seqcert {

// Base class for all failures raised by this library. Every subtype prefixes
// its message with the throwing function so callers can log it verbatim.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// File or stream could not be read/written.
class IoError : public Error { using Error::Error; };

// Manifest or tensor payload is malformed.
class ParseError : public Error { using Error::Error; };

// Tensor/layer widths disagree with what a node requires.
class ShapeError : public Error { using Error::Error; };

// A size parameter is out of its admissible range.
class SizeError : public Error { using Error::Error; };

// A node kind is not accepted by the routine that was handed the node.
class KindError : public Error { using Error::Error; };

// An operand interval leaves the domain a relaxation needs (e.g. 1/y with
// a lower bound that is not strictly positive).
class DomainError : public Error { using Error::Error; };

// The plane-fitting linear program was infeasible/unbounded or degenerate.
class LpError : public Error { using Error::Error; };

// Stationary-point search failed to bracket a root it needed.
class RootFindError : public Error { using Error::Error; };

// A value became non-finite where finiteness is required.
class NumericalError : public Error { using Error::Error; };

// Generic relaxation failure not covered by a more specific type.
class TransformerError : public Error { using Error::Error; };

// Interval intersection during refinement produced an empty set.
class InfeasibleError : public Error { using Error::Error; };

// Cooperative per-sample deadline expired; callers report Unknown.
class TimeoutError : public Error { using Error::Error; };

}  // namespace seqcert

#pragma once

#include <stdexcept>

namespace gensec {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error { using Error::Error; };
struct SingularOperator : Error { using Error::Error; };
struct NonFiniteEvaluation : Error { using Error::Error; };
struct DegeneratePoints : Error { using Error::Error; };
struct UnboundedDomain : Error { using Error::Error; };
struct NoAnalyticProjection : Error { using Error::Error; };
struct MaxInnerIterations : Error { using Error::Error; };
struct SubproblemSingular : Error { using Error::Error; };
struct SubproblemInfeasible : Error { using Error::Error; };
struct SubproblemNoConvergence : Error { using Error::Error; };
struct DimensionTooLarge : Error { using Error::Error; };
struct ZeroStep : Error { using Error::Error; };
struct MissingJacobian : Error { using Error::Error; };
struct MissingGroundTruth : Error { using Error::Error; };
struct InsufficientTrace : Error { using Error::Error; };
struct InfeasibleStart : Error { using Error::Error; };

/// Malformed problem descriptions (bad file schema, inconsistent sizes, ...).
struct InvalidProblem : Error { using Error::Error; };

}  // namespace gensec

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace fracgelfand {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define FRACGELFAND_DEFINE_ERROR(Name)      \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  };

FRACGELFAND_DEFINE_ERROR(DomainError)
FRACGELFAND_DEFINE_ERROR(BadGeometry)
FRACGELFAND_DEFINE_ERROR(ParameterOutOfRange)
FRACGELFAND_DEFINE_ERROR(ShapeMismatch)
FRACGELFAND_DEFINE_ERROR(SingularWeight)
FRACGELFAND_DEFINE_ERROR(NotConvex)
FRACGELFAND_DEFINE_ERROR(NoLimit)
FRACGELFAND_DEFINE_ERROR(BadBracket)
FRACGELFAND_DEFINE_ERROR(PreconditionFailed)
FRACGELFAND_DEFINE_ERROR(ExpansionFailed)
FRACGELFAND_DEFINE_ERROR(InsufficientPoints)
FRACGELFAND_DEFINE_ERROR(SingularB)
FRACGELFAND_DEFINE_ERROR(BadTestFunction)
FRACGELFAND_DEFINE_ERROR(RangeError)
FRACGELFAND_DEFINE_ERROR(ConfigError)

#undef FRACGELFAND_DEFINE_ERROR

/// Raised when an iterative solve exhausts its budget; carries the best iterate.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, Eigen::VectorXd best, double residual)
      : Error(what), best_(std::move(best)), residual_(residual) {}

  const Eigen::VectorXd& best_iterate() const { return best_; }
  double residual() const { return residual_; }

 private:
  Eigen::VectorXd best_;
  double residual_;
};

}  // namespace fracgelfand

#pragma once

#include <stdexcept>
#include <string>

namespace conservolast {

// Bad input, violated precondition, or I/O failure.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical procedure failed on otherwise valid input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CONSERVOLAST_NUMERICAL_ERROR(Name)            \
  class Name : public NumericalError {                \
   public:                                            \
    explicit Name(const std::string& what)            \
        : NumericalError(#Name ": " + what) {}        \
  }

CONSERVOLAST_NUMERICAL_ERROR(IllConditioned);
CONSERVOLAST_NUMERICAL_ERROR(AllIllConditioned);
CONSERVOLAST_NUMERICAL_ERROR(NonConverged);
CONSERVOLAST_NUMERICAL_ERROR(ElementInversion);
CONSERVOLAST_NUMERICAL_ERROR(SingularReducedHessian);
CONSERVOLAST_NUMERICAL_ERROR(NoBracket);
CONSERVOLAST_NUMERICAL_ERROR(NoMinimum);

#undef CONSERVOLAST_NUMERICAL_ERROR

class DuplicateCenters : public InputError {
 public:
  explicit DuplicateCenters(const std::string& what) : InputError("DuplicateCenters: " + what) {}
};

class MeshingFailed : public InputError {
 public:
  explicit MeshingFailed(const std::string& what) : InputError("MeshingFailed: " + what) {}
};

}  // namespace conservolast

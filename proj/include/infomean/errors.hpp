#pragma once

#include <stdexcept>
#include <string>

namespace infomean {

/// Base class for all library errors.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A type invariant or input precondition was violated.
class validation_error : public error {
 public:
  using error::error;
};

/// A configured capacity limit (e.g. the convolution component cap) was exceeded.
class capacity_error : public error {
 public:
  using error::error;
};

/// I/O failure (unreadable input, unwritable output).
class io_error : public error {
 public:
  using error::error;
};

/// A numerical procedure failed to reach its accuracy target.
/// Carries the best available estimate and its estimated error.
class accuracy_error : public error {
 public:
  accuracy_error(const std::string& what, double best_estimate, double error_bound)
      : error(what), best_estimate_(best_estimate), error_bound_(error_bound) {}

  double best_estimate() const { return best_estimate_; }
  double error_bound() const { return error_bound_; }

 private:
  double best_estimate_;
  double error_bound_;
};

}  // namespace infomean

#pragma once

#include <stdexcept>
#include <string>

namespace copcal {

// Malformed or out-of-range input data; `line` is the 1-based file line,
// or 0 for file-level problems.
class CsvError : public std::runtime_error {
 public:
  CsvError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                    : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// A numerical procedure failed in a way the caller cannot recover from by
// adjusting inputs (as opposed to precondition violations, which throw
// std::invalid_argument / std::domain_error).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fewer data points carry positive kernel weight than the local polynomial
// needs; the caller must widen the bandwidth.
class InsufficientLocalData : public NumericalError {
 public:
  InsufficientLocalData(double x0, double h, int n_effective, int needed)
      : NumericalError("insufficient local data at x0=" + std::to_string(x0) +
                       ", h=" + std::to_string(h) + ": " +
                       std::to_string(n_effective) + " weighted points, need " +
                       std::to_string(needed)),
        x0_(x0),
        h_(h),
        n_effective_(n_effective) {}

  double x0() const { return x0_; }
  double h() const { return h_; }
  int n_effective() const { return n_effective_; }

 private:
  double x0_;
  double h_;
  int n_effective_;
};

}  // namespace copcal

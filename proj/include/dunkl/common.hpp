#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace dunkl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error taxonomy. Claim failures are reported through verify::Report, never
// through exceptions; everything below signals an input or numerics problem.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(const std::string& what, int line, int column)
      : Error(what + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line(line),
        column(column) {}
  int line;
  int column;
};

// f <= 0 where strict positivity is required, point outside the admissible set.
struct DomainError : Error {
  using Error::Error;
};

// Evaluation too close to a reflecting hyperplane for a closed form.
struct SingularityError : Error {
  using Error::Error;
};

// Quadrature, truncation or step control could not reach the requested accuracy.
struct ResolutionError : Error {
  using Error::Error;
};

// Runaway expression growth (polynomial degree cap) and similar.
struct ResourceError : Error {
  using Error::Error;
};

struct NumericError : Error {
  using Error::Error;
};

// Broken internal invariant. Never expected on valid input.
struct InvariantViolation : std::logic_error {
  using std::logic_error::logic_error;
};

std::string format_point(const Vec& x);

// Worker-pool width shared by all parallel kernels. Defaults to DUNKL_THREADS,
// then hardware concurrency.
unsigned thread_count();
void set_thread_count(unsigned n);

// Runs body(i) for i in [0, n) on the worker pool. Iterations must be
// independent; the first exception thrown is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace dunkl

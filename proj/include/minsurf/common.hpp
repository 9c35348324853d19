#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace minsurf {

// Invalid input: non-SPD matrix, degenerate simplex, malformed mesh or file,
// bad barycentric coordinates, parameter out of range. CLI maps this to exit
// code 2.
class DomainError : public std::runtime_error {
public:
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// A proven inequality failed at runtime (perturbation estimate, volume
// modulus, minimizer inclusion). Indicates a bug, not bad input. CLI maps
// this to exit code 3.
class CertificateViolation : public std::runtime_error {
public:
  explicit CertificateViolation(const std::string& msg) : std::runtime_error(msg) {}
};

// Result of checking one perturbation estimate. `applicable` is the
// smallness hypothesis; when it holds, `actual <= bound` is asserted by the
// issuing function (with a small float slack) and a CertificateViolation is
// thrown otherwise.
struct Certificate {
  bool applicable = false;
  double bound = 0.0;
  double actual = 0.0;
};

// Slack used when asserting certified inequalities, to keep exact-equality
// cases (e.g. zero perturbation) and nearly tight cases from tripping on
// rounding. Recorded in test output.
inline constexpr double kCertSlackRel = 1e-9;
inline constexpr double kCertSlackAbs = 1e-12;

inline bool violates(double actual, double bound) {
  return actual > bound * (1.0 + kCertSlackRel) + kCertSlackAbs;
}

// Number of worker threads for multistart solves: MINSURF_THREADS if set,
// else hardware concurrency.
int thread_budget();

}  // namespace minsurf

#pragma once

#include <charconv>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace oscitime {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Index or support outside the truncation.
class truncation_error : public std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Parameter outside the mathematical domain of an operation.
class domain_error : public std::domain_error {
  using std::domain_error::domain_error;
};

class dimension_mismatch : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Coefficient family fails the ratio test within the truncation.
class divergent_family_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Commutator guard: support plus bandwidth would leak past the truncation.
class support_overflow_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class unsatisfiable_constraint : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Contour too close to the numerical spectrum, or no admissible radius.
class contour_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// log f would cross a branch cut on the contour.
class branch_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class pairing_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Theorem hypothesis violated (e.g. polynomial root off the unit circle).
class hypothesis_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class convergence_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal formatting; used by all CSV/JSON writers so
// outputs are byte-identical across runs.
inline std::string format_double(double x) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::string format_cplx(cplx z) {
  return format_double(z.real()) + (z.imag() < 0 ? "-" : "+") +
         format_double(std::abs(z.imag())) + "i";
}

}  // namespace oscitime

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oscitime/fock.hpp"

namespace oscitime {

enum class Parity { Even, Odd };

// Gaussian profile e^{-alpha x^2/2} (even) or x e^{-alpha x^2/2} (odd),
// alpha in (0,1).
struct GaussianProfile {
  double alpha = 0.5;
  Parity parity = Parity::Even;
};

// Hermite-expansion coefficients of the profile: the closed form is
// pi^{1/4} sqrt(2/(1+alpha)) times the super coherent vector at
// beta = (1-alpha)/(1+alpha), with an extra sqrt(2)/(1+alpha) a* for the odd
// case.
FockVector gaussian_to_fock(const GaussianProfile& profile, Truncation tr);

struct OverlapResult {
  cplx value;
  bool q_adequate = true;     // q >= n + 20
  double est_error = 0.0;     // crude estimate when q is short
};

// Overlap (v_n, profile) by Gauss-Hermite quadrature after absorbing the
// combined Gaussian into the weight; exact for q past the polynomial degree.
OverlapResult quadrature_overlap(std::size_t n, const GaussianProfile& profile,
                                 std::size_t q);

struct BridgeReport {
  double max_deviation_even = 0.0;
  double max_deviation_odd = 0.0;
  bool pass = false;
};

// Analytic coefficients against quadrature overlaps for all n <= n_max,
// both parities.
BridgeReport bridge_check(double alpha, std::size_t n_max, double tol);

std::string bridge_table_csv(double alpha, std::size_t n_max);

// Nodes and weights of the q-point Gauss-Hermite rule for weight e^{-x^2};
// exposed for tests.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermiteRule gauss_hermite_rule(std::size_t q);

// Value of the normalized Hermite function v_n with the Gaussian factored
// out: v_n(x) = hermite_poly_normalized(n, x) * e^{-x^2/2}.
double hermite_poly_normalized(std::size_t n, double x);

}  // namespace oscitime

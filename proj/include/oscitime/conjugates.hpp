#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oscitime/fock.hpp"
#include "oscitime/operators.hpp"
#include "oscitime/opfunc.hpp"

namespace oscitime {

// Three-way classification of T_{omega,m} = (i/m) log(omega - L^m) by omega.
enum class FamilyClass { Zero, OpenDisc, Boundary };
enum class CcrDomainKind { InfiniteDim, FiniteDim, Dense };

const char* to_string(FamilyClass c);
const char* to_string(CcrDomainKind k);

struct FamilyExpectation {
  bool bounded = false;
  CcrDomainKind ccr_domain = CcrDomainKind::Dense;
};

struct ConjugateFamily {
  cplx omega;
  unsigned m = 1;
  FamilyClass classification = FamilyClass::Boundary;
  FamilyExpectation expected;
};

// Total on the closed disc (tolerance 1e-12 at the boundary); |omega| > 1 is
// rejected here — that family only exists through the contour calculus.
FamilyClass classify(cplx omega);
ConjugateFamily classify_family(cplx omega, unsigned m);

// Handle for T_{omega,m}: the inner operator omega*1 - L^m plus the
// classification-appropriate way of applying the logarithm. The Boundary
// branch uses the principal Log; Zero and OpenDisc use the plain series.
// The Zero branch applies the log to L^m itself, the form the commutation
// theorem is stated for.
struct ConjugateOperator {
  cplx omega;
  unsigned m = 1;
  ConjugateFamily family;
  BandedOperator inner;     // omega*1 - L^m
  BandedOperator shift_m;   // L^m

  std::pair<FockVector, SeriesReport> apply(const FockVector& v,
                                            const SeriesPolicy& policy = {}) const;
};

ConjugateOperator conjugate_operator(cplx omega, unsigned m, std::size_t dim);

// Matrix-element form: entry (n, m) = i/(n-m) off the diagonal.
BandedOperator galapon_operator(std::size_t dim);
// Band-series route i sum_k (1/k)(L*^k - L^k), assembled from shift powers;
// must agree with the matrix-element form entrywise.
BandedOperator galapon_operator_series_form(std::size_t dim);

// Symmetrized boundary operator L_{m,omega} with exact band entries
// -(i/(mk)) conj(omega)^k at offset +mk, +(i/(mk)) omega^k at offset -mk and
// the constant (i/m)(log omega - log conj(omega)) on the diagonal.
BandedOperator boundary_time_operator(cplx omega, unsigned m, std::size_t dim);

struct WeightedGalaponResult {
  BandedOperator op;
  bool growth_ok = true;
  double fitted_exponent = 0.0;
  std::optional<std::string> warning;
};

// L_g = i{log(1 - g_N L) - log(1 - L* g_N^{-1})} with band entries built from
// cumulative weight products; g == 1 reproduces the Galapon operator exactly.
// With symmetrize the result is (L_g + L_{conj(g)^{-1}})/2 and the growth
// condition on prod |g_k| is fitted numerically (warning attached on failure).
WeightedGalaponResult weighted_galapon(std::function<cplx(std::size_t)> g,
                                       std::size_t dim, bool symmetrize);

// Diagonal V with V xi_n = (prod_{k<n} g_k) xi_n; for |g| = 1 it is unitary
// and g_N L = V* L V.
BandedOperator phase_conjugation_unitary(std::function<cplx(std::size_t)> g,
                                         std::size_t dim);

// Weight w(n) = prod_{k<n} g_k whose zero-sum hyperplane is the CCR domain of
// L_g. (The displayed weight in the source material includes the factor g_n
// itself; the telescoping identity requires the product to stop at n-1.)
std::function<cplx(std::size_t)> weighted_ccr_weight(std::function<cplx(std::size_t)> g);

// --- polynomial families ----------------------------------------------------

struct PolySpec {
  std::vector<cplx> coefficients;        // p(z) = sum_j coefficients[j] z^j
  std::vector<cplx> roots_of_one_minus_p;
  unsigned degree = 0;
  cplx p_at_zero;
};

// Finds the roots of 1 - p and validates the unit-circle hypothesis
// (each | |root| - 1 | <= 1e-10, |1-p(root)| <= 1e-10).
PolySpec analyze_poly(std::vector<cplx> coefficients);

// Evaluation context for X_p = log(1-p(L)) - log(1-p(L*)). Commutator
// content is verified through forward multiplications only: the resolvent
// identities of the eigenvector construction are algebraically equivalent to
//   (alpha - L)(L* psi()) = (alpha L* - 1) psi
//   (alpha^{-1} - L*)(-alpha psi) = (alpha L* - 1) psi
// which avoid resolvent solves on the unit circle.
struct PolyTimeContext {
  PolySpec spec;
  std::size_t dim = 0;

  // Max residual of the two forward identities at one root.
  double forward_identity_residual(cplx root, const FockVector& psi) const;
  // Max over every root of 1 - p.
  double forward_identities_max(const FockVector& psi) const;
  // phi = prod_i (alpha_i L* - 1) psi; [N, X_p] phi = -degree * phi.
  FockVector domain_vector(const FockVector& psi) const;
  double expected_xp_eigenvalue() const { return -static_cast<double>(spec.degree); }
};

PolyTimeContext poly_time_operator(PolySpec spec, std::size_t dim);

// Band form of (i/m) X_p for the monomial p(z) = omega z^m with |omega| = 1:
// offset +mk carries -(i/(mk)) omega^k, offset -mk carries +(i/(mk)) conj(omega)^k.
BandedOperator monomial_xp_operator(cplx omega, unsigned m, std::size_t dim);

// --- angle operators ---------------------------------------------------------

enum class AngleVariant { S0, S1 };

// Inner operator g_{N+2} L^2 with the variant weight; the natural eigenvector
// family is the super coherent one (S1 takes the a*-raised member) with
// eigenvalue beta.
struct AngleContext {
  AngleVariant variant = AngleVariant::S0;
  std::size_t dim = 0;
  BandedOperator inner;

  FockVector eigenvector(cplx beta, Truncation tr) const;
  static cplx eigenvalue(cplx beta) { return beta; }
};

AngleContext angle_operator(AngleVariant variant, std::size_t dim);

struct AnglePairing {
  std::function<cplx(std::size_t)> f;
  std::function<cplx(std::size_t)> g;
  cplx beta;
  double radius = 0.0;  // M_f; may be +infinity
};

struct PairingReport {
  bool ok = false;
  std::size_t first_failing_n = 0;
  double max_deviation = 0.0;
  cplx beta_recomputed;      // g(2) f(2), the n = 0 instance
  double m_f_estimate = 0.0;
  bool admissible_region_empty = false;
};

// Verifies g(n+2) f(n+2) - g(n) f(n) = beta on even n <= n_max (the P_{>=2}
// cutoff makes the n = 0 instance g(2) f(2) = beta) and extrapolates
// M_f = lim n/|f(2n)| over a dyadic ladder.
PairingReport pairing_check(const AnglePairing& pair, std::size_t n_max);

struct GeneralAngleContext {
  AnglePairing pair;
  std::size_t dim = 0;
  BandedOperator inner;   // g_{N+2} L^2
  BandedOperator raiser;  // f_N L*^2

  // (f_N L*^2)^n xi_{alpha,f}; eigenvalue of the inner operator on the n = 0
  // member is alpha*beta; [N, log(g_{N+2} L^2)] = -2 on the whole family.
  FockVector family_member(unsigned n, cplx alpha, Truncation tr) const;
  bool alpha_admissible(cplx alpha) const;
  static double expected_log_commutator() { return -2.0; }
};

GeneralAngleContext general_angle_builder(const AnglePairing& pair, std::size_t dim);

struct ReductionReport {
  double discrepancy = 0.0;
  SeriesStatus lhs_status = SeriesStatus::Converged;
  SeriesStatus rhs_status = SeriesStatus::Converged;
};

// Lemma-style reduction: for f(n) g(n) = n pointwise,
//   log(g_{N+k} L^k) e^{alpha f_N L*^k} Omega
//     = f!_k(N) log((N+k) L^k) e^{alpha L*^k} Omega,
// both sides evaluated by independent series runs.
ReductionReport reduction_identity_check(const std::function<cplx(std::size_t)>& f,
                                         const std::function<cplx(std::size_t)>& g,
                                         unsigned k, cplx alpha, std::size_t dim);

struct RootSet {
  std::vector<cplx> roots;
  std::vector<bool> admissible;  // |root| < 1 and |1 - omega + root^m| < 1
};

// Roots of -(c+m) z^m + c omega = 0, i.e. z^m = c omega/(c+m), with
// admissibility flags for the OpenDisc CCR construction.
RootSet finite_ccr_root_solver(cplx omega, unsigned m, cplx c);

}  // namespace oscitime

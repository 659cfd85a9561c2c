#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "oscitime/common.hpp"

namespace oscitime {

// Certifies |c_n| <= coeff * ratio^n for every n >= start of the untruncated
// vector. coeff == 0 certifies exact zero tail (finite support).
struct TailBound {
  std::size_t start = 0;
  double coeff = 0.0;
  double ratio = 0.0;

  // Upper bound on the l2 norm of the coefficients at indices >= from.
  double norm_beyond(std::size_t from) const;
};

// Truncated vector in l2(N); coeffs[n] is the component on the basis vector
// xi_n. All constructors either attach a tail certificate or refuse.
struct FockVector {
  std::vector<cplx> coeffs;
  std::optional<TailBound> tail;

  std::size_t dim() const { return coeffs.size(); }
  cplx operator[](std::size_t n) const { return coeffs[n]; }
};

double norm(const FockVector& v);
// Conjugate-linear in the first argument: (u, v) = sum conj(u_n) v_n.
cplx inner(const FockVector& u, const FockVector& v);
FockVector scaled(cplx c, const FockVector& v);
FockVector add(const FockVector& u, const FockVector& v);
FockVector sub(const FockVector& u, const FockVector& v);
// Largest index carrying a nonzero coefficient; 0 for the zero vector.
std::size_t support_max(const FockVector& v);
FockVector normalized(const FockVector& v);

// Truncation request: a fixed dimension, or the smallest dimension whose
// certified tail mass is below eps.
class Truncation {
 public:
  static Truncation fixed(std::size_t d) { return Truncation(d, 0.0); }
  static Truncation adaptive(double eps = 1e-14) { return Truncation(0, eps); }

  bool is_adaptive() const { return dim_ == 0; }
  std::size_t dim() const { return dim_; }
  double eps() const { return eps_; }

 private:
  Truncation(std::size_t d, double e) : dim_(d), eps_(e) {}
  std::size_t dim_;
  double eps_;
};

FockVector basis_vector(std::size_t n, std::size_t dim);

// Coherent vector w_beta with coefficients e^{-|beta|^2/2} beta^n / sqrt(n!);
// unit norm, eigenvector of the annihilation operator.
FockVector coherent_vector(cplx beta, Truncation tr);

// e^{beta a*^2/2} Omega for j = 0 (defined iff |beta| < 1), with a*^j applied
// on top for j > 0. Unnormalized; squared norm (1-|beta|^2)^{-1/2} at j = 0.
FockVector super_coherent_vector(cplx beta, unsigned j, Truncation tr);

// e^{alpha f_N (L*)^k} Omega: coefficient at n = j*k is
// prod_{i=1..j} f(i*k) * alpha^j / j!. Refuses when the coefficient ratio
// test detects growth within the truncation. The tail certificate assumes the
// stepwise ratio |c_{(j+1)k}/c_{jk}| is eventually monotone, which holds for
// every family used here (polynomial f).
FockVector generalized_eigen_vector(const std::function<cplx(std::size_t)>& f,
                                    unsigned k, cplx alpha, Truncation tr);

// Linear constraints cutting out the CCR domains of the main theorems.
class DomainConstraint {
 public:
  struct SumZero {};
  struct WeightedSumZero {
    std::function<cplx(std::size_t)> weight;
  };
  struct ResidueClassZero {
    cplx omega;
    unsigned m = 1;
  };
  struct GeometricEigen {
    cplx alpha;
  };
  struct SupportBound {
    std::size_t n_max = 0;
  };
  using Clause = std::variant<SumZero, WeightedSumZero, ResidueClassZero,
                              GeometricEigen, SupportBound>;

  static DomainConstraint sum_zero();
  static DomainConstraint weighted_sum_zero(std::function<cplx(std::size_t)> w);
  static DomainConstraint residue_class_zero(cplx omega, unsigned m);
  static DomainConstraint geometric_eigen(cplx alpha);
  static DomainConstraint support_bound(std::size_t n_max);

  DomainConstraint& and_also(const DomainConstraint& other);

  const std::vector<Clause>& clauses() const { return clauses_; }
  std::string describe() const;

 private:
  std::vector<Clause> clauses_;
};

// Deterministic unit-norm sample satisfying the constraint exactly (up to
// rounding). Support is confined to the first dim/2 coordinates unless the
// constraint itself fixes the support (GeometricEigen) or narrows it further.
FockVector ccr_domain_sample(const DomainConstraint& constraint,
                             std::uint64_t seed, std::size_t dim);

// Residual of each clause on v, scaled by ||v||; all entries ~1e-15 for
// samples produced above.
std::vector<double> constraint_residuals(const DomainConstraint& constraint,
                                         const FockVector& v);

std::string to_json(const FockVector& v);

}  // namespace oscitime

#pragma once

#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "oscitime/common.hpp"
#include "oscitime/fock.hpp"

namespace oscitime {

// Dense complex matrix, row-major.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<cplx> a;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  cplx& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  cplx at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  std::vector<cplx> apply(const std::vector<cplx>& x) const;
  std::vector<cplx> apply_adjoint(const std::vector<cplx>& x) const;
};

double max_entry_diff(const DenseMatrix& a, const DenseMatrix& b);
std::string to_csv(const DenseMatrix& m);  // row-major "re,im" pairs

// Operator on the D-truncation stored as offset-indexed diagonals: the entry
// at (row n, column n+d) is bands[d](n). Truncating at D is the compression
// P_D A P_D of the infinite operator. Immutable after construction; the
// generators must be pure.
class BandedOperator {
 public:
  using Gen = std::function<cplx(std::size_t)>;

  BandedOperator(std::size_t dim, std::map<int, Gen> bands)
      : dim_(dim), bands_(std::move(bands)) {}

  std::size_t dim() const { return dim_; }
  const std::map<int, Gen>& bands() const { return bands_; }

  cplx entry(std::size_t n, std::size_t m) const;
  // Largest |offset| over the stored bands.
  std::size_t bandwidth() const;
  // True when every band offset is >= min_off (e.g. 0: no raising part).
  bool offsets_at_least(int min_off) const;

  FockVector apply(const FockVector& v) const;
  std::vector<cplx> apply_raw(const std::vector<cplx>& x) const;

  BandedOperator adjoint() const;
  DenseMatrix materialize() const;

 private:
  std::size_t dim_;
  std::map<int, Gen> bands_;
};

BandedOperator compose(const BandedOperator& a, const BandedOperator& b);
BandedOperator add(const BandedOperator& a, const BandedOperator& b);
BandedOperator scale(cplx c, const BandedOperator& a);
BandedOperator pow_compose(const BandedOperator& a, unsigned k);

// A(Bv) - B(Av), guarded: support(v) + bandwidth(A) + bandwidth(B) must stay
// inside the truncation so the compressed commutator equals the infinite one.
FockVector commutator_apply(const BandedOperator& a, const BandedOperator& b,
                            const FockVector& v);

// Largest singular value via power iteration on A*A, deterministic start,
// relative tolerance 1e-10. Throws convergence_error with diagnostics when
// the iteration cap is hit.
double operator_norm_estimate(const BandedOperator& a);
double operator_norm_estimate(const DenseMatrix& a);

// --- factories -------------------------------------------------------------

struct LeftShiftKind {};
struct RightShiftKind {};
struct NumberKind {};
struct AnnihilateKind {};
struct CreateKind {};
struct IdentityKind {};
struct ProjOmegaKind {};
struct ProjGeq2Kind {};
struct ProjEvenKind {};
struct DiagonalKind {
  std::function<cplx(std::size_t)> g;
  int shift = 0;
};
struct FactorialWeightKind {
  std::function<cplx(std::size_t)> f;
  unsigned k = 1;
};

using OperatorKind =
    std::variant<LeftShiftKind, RightShiftKind, NumberKind, AnnihilateKind,
                 CreateKind, IdentityKind, ProjOmegaKind, ProjGeq2Kind,
                 ProjEvenKind, DiagonalKind, FactorialWeightKind>;

BandedOperator make(const OperatorKind& kind, std::size_t dim);

BandedOperator left_shift(std::size_t dim);
BandedOperator right_shift(std::size_t dim);
BandedOperator number_op(std::size_t dim);
BandedOperator annihilate(std::size_t dim);
BandedOperator create(std::size_t dim);
BandedOperator identity(std::size_t dim);
BandedOperator proj_omega(std::size_t dim);
BandedOperator proj_geq2(std::size_t dim);
BandedOperator proj_even(std::size_t dim);
BandedOperator diagonal(std::function<cplx(std::size_t)> g, int shift, std::size_t dim);
// Cumulative product prod f(n - k m) over m >= 0 while n - k m >= 1; the
// index-0 factor is excluded so the weight is invertible for f vanishing at 0.
BandedOperator factorial_weight(std::function<cplx(std::size_t)> f, unsigned k, std::size_t dim);

}  // namespace oscitime

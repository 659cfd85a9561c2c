#include "oscitime/operators.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "oscitime/rng.hpp"

namespace oscitime {

std::vector<cplx> DenseMatrix::apply(const std::vector<cplx>& x) const {
  std::vector<cplx> y(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    cplx s = 0.0;
    const cplx* row = a.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

std::vector<cplx> DenseMatrix::apply_adjoint(const std::vector<cplx>& x) const {
  std::vector<cplx> y(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    const cplx* row = a.data() + i * cols;
    cplx xi = x[i];
    for (std::size_t j = 0; j < cols; ++j) y[j] += std::conj(row[j]) * xi;
  }
  return y;
}

double max_entry_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw dimension_mismatch("max_entry_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.a.size(); ++i) m = std::max(m, std::abs(a.a[i] - b.a[i]));
  return m;
}

std::string to_csv(const DenseMatrix& m) {
  std::ostringstream os;
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      if (j) os << ",";
      os << format_double(m.at(i, j).real()) << "," << format_double(m.at(i, j).imag());
    }
    os << "\n";
  }
  return os.str();
}

cplx BandedOperator::entry(std::size_t n, std::size_t m) const {
  if (n >= dim_ || m >= dim_) throw truncation_error("entry: index outside truncation");
  int d = static_cast<int>(m) - static_cast<int>(n);
  auto it = bands_.find(d);
  if (it == bands_.end()) return 0.0;
  return it->second(n);
}

std::size_t BandedOperator::bandwidth() const {
  std::size_t bw = 0;
  for (const auto& [d, g] : bands_) bw = std::max<std::size_t>(bw, static_cast<std::size_t>(std::abs(d)));
  return bw;
}

bool BandedOperator::offsets_at_least(int min_off) const {
  for (const auto& [d, g] : bands_)
    if (d < min_off) return false;
  return true;
}

std::vector<cplx> BandedOperator::apply_raw(const std::vector<cplx>& x) const {
  if (x.size() != dim_) throw dimension_mismatch("apply: dim mismatch");
  std::vector<cplx> y(dim_, 0.0);
  for (const auto& [d, g] : bands_) {
    std::size_t n_lo = d < 0 ? static_cast<std::size_t>(-d) : 0;
    std::size_t n_hi = d > 0 ? dim_ - static_cast<std::size_t>(d) : dim_;
    for (std::size_t n = n_lo; n < n_hi; ++n) {
      cplx xv = x[static_cast<std::size_t>(static_cast<long long>(n) + d)];
      if (xv != cplx(0.0, 0.0)) y[n] += g(n) * xv;
    }
  }
  return y;
}

FockVector BandedOperator::apply(const FockVector& v) const {
  FockVector out;
  out.coeffs = apply_raw(v.coeffs);
  if (v.tail) {
    // Tail propagation: each band shifts the certified envelope by its offset
    // and scales it by the generator's size near the tail; only meaningful
    // for bounded generators, so take the sup over the stored range and the
    // tail start as a conservative proxy.
    TailBound t = *v.tail;
    if (t.coeff == 0.0) {
      std::size_t bw = bandwidth();
      t.start = t.start + bw;
      out.tail = t;
    } else {
      double gmax = 0.0;
      for (const auto& [d, g] : bands_) {
        std::size_t probe = std::min(dim_ - 1, t.start);
        for (std::size_t n = probe; n < dim_; n += std::max<std::size_t>(1, dim_ / 8))
          gmax = std::max(gmax, std::abs(g(n)));
        gmax = std::max(gmax, std::abs(g(dim_ - 1)));
      }
      double r = t.ratio;
      double shift = static_cast<double>(bandwidth());
      t.coeff = t.coeff * static_cast<double>(bands_.size()) * gmax *
                std::pow(std::max(r, 1e-300), -shift);
      out.tail = t;
    }
  }
  return out;
}

BandedOperator BandedOperator::adjoint() const {
  std::map<int, Gen> out;
  std::size_t dim = dim_;
  for (const auto& [d, g] : bands_) {
    Gen gen = g;
    int dd = d;
    out[-d] = [gen, dd](std::size_t n) {
      return std::conj(gen(static_cast<std::size_t>(static_cast<long long>(n) - dd)));
    };
  }
  return BandedOperator(dim, std::move(out));
}

DenseMatrix BandedOperator::materialize() const {
  DenseMatrix m(dim_, dim_);
  for (const auto& [d, g] : bands_) {
    std::size_t n_lo = d < 0 ? static_cast<std::size_t>(-d) : 0;
    std::size_t n_hi = d > 0 ? dim_ - static_cast<std::size_t>(d) : dim_;
    for (std::size_t n = n_lo; n < n_hi; ++n)
      m.at(n, static_cast<std::size_t>(static_cast<long long>(n) + d)) += g(n);
  }
  return m;
}

BandedOperator compose(const BandedOperator& a, const BandedOperator& b) {
  if (a.dim() != b.dim()) throw dimension_mismatch("compose: dim mismatch");
  std::size_t dim = a.dim();
  struct Term {
    BandedOperator::Gen ga, gb;
    int da;
  };
  std::map<int, std::vector<Term>> terms;
  for (const auto& [da, ga] : a.bands())
    for (const auto& [db, gb] : b.bands()) terms[da + db].push_back({ga, gb, da});
  std::map<int, BandedOperator::Gen> bands;
  for (auto& [d, ts] : terms) {
    auto list = std::make_shared<std::vector<Term>>(std::move(ts));
    std::size_t dd = dim;
    bands[d] = [list, dd](std::size_t n) {
      cplx s = 0.0;
      for (const auto& t : *list) {
        long long mid = static_cast<long long>(n) + t.da;
        if (mid < 0 || mid >= static_cast<long long>(dd)) continue;
        s += t.ga(n) * t.gb(static_cast<std::size_t>(mid));
      }
      return s;
    };
  }
  return BandedOperator(dim, std::move(bands));
}

BandedOperator add(const BandedOperator& a, const BandedOperator& b) {
  if (a.dim() != b.dim()) throw dimension_mismatch("add: dim mismatch");
  std::map<int, BandedOperator::Gen> bands = a.bands();
  for (const auto& [d, gb] : b.bands()) {
    auto it = bands.find(d);
    if (it == bands.end()) {
      bands[d] = gb;
    } else {
      auto ga = it->second;
      auto g2 = gb;
      bands[d] = [ga, g2](std::size_t n) { return ga(n) + g2(n); };
    }
  }
  return BandedOperator(a.dim(), std::move(bands));
}

BandedOperator scale(cplx c, const BandedOperator& a) {
  std::map<int, BandedOperator::Gen> bands;
  for (const auto& [d, g] : a.bands()) {
    auto gg = g;
    bands[d] = [c, gg](std::size_t n) { return c * gg(n); };
  }
  return BandedOperator(a.dim(), std::move(bands));
}

BandedOperator pow_compose(const BandedOperator& a, unsigned k) {
  BandedOperator out = identity(a.dim());
  for (unsigned i = 0; i < k; ++i) out = compose(out, a);
  return out;
}

FockVector commutator_apply(const BandedOperator& a, const BandedOperator& b,
                            const FockVector& v) {
  if (a.dim() != b.dim() || a.dim() != v.dim())
    throw dimension_mismatch("commutator_apply: dim mismatch");
  std::size_t s = support_max(v);
  std::size_t bw = a.bandwidth() + b.bandwidth();
  bool tail_zero = v.tail && v.tail->coeff == 0.0;
  if (!tail_zero || s + bw >= v.dim())
    throw support_overflow_error(
        "commutator_apply: support " + std::to_string(s) + " + bandwidth " +
        std::to_string(bw) + " does not fit inside the truncation " +
        std::to_string(v.dim()));
  FockVector ab = a.apply(b.apply(v));
  FockVector ba = b.apply(a.apply(v));
  return sub(ab, ba);
}

double operator_norm_estimate(const DenseMatrix& m) {
  if (m.rows == 0) return 0.0;
  CounterRng rng(0x05c1711e);
  std::vector<cplx> x(m.cols);
  double nx = 0.0;
  for (auto& c : x) {
    c = rng.complex_normal();
    nx += std::norm(c);
  }
  nx = std::sqrt(nx);
  for (auto& c : x) c /= nx;

  double sigma = 0.0;
  const long cap = 200000;
  for (long it = 1; it <= cap; ++it) {
    std::vector<cplx> y = m.apply(x);
    double ny = 0.0;
    for (cplx c : y) ny += std::norm(c);
    double s = std::sqrt(ny);  // = ||A x|| for unit x: Rayleigh sqrt on A*A
    std::vector<cplx> z = m.apply_adjoint(y);
    double nz = 0.0;
    for (cplx c : z) nz += std::norm(c);
    nz = std::sqrt(nz);
    if (nz == 0.0) return 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) x[i] = z[i] / nz;
    if (it > 2 && std::abs(s - sigma) <= 1e-10 * std::max(s, 1e-300)) return s;
    sigma = s;
  }
  throw convergence_error("operator_norm_estimate: power iteration cap hit; last sigma=" +
                          format_double(sigma));
}

double operator_norm_estimate(const BandedOperator& a) {
  return operator_norm_estimate(a.materialize());
}

// --- factories -------------------------------------------------------------

BandedOperator left_shift(std::size_t dim) {
  return BandedOperator(dim, {{+1, [](std::size_t) { return cplx(1.0); }}});
}

BandedOperator right_shift(std::size_t dim) {
  return BandedOperator(dim, {{-1, [](std::size_t) { return cplx(1.0); }}});
}

BandedOperator number_op(std::size_t dim) {
  return BandedOperator(dim, {{0, [](std::size_t n) { return cplx(static_cast<double>(n)); }}});
}

BandedOperator annihilate(std::size_t dim) {
  // a xi_{n+1} = sqrt(n+1) xi_n
  return BandedOperator(
      dim, {{+1, [](std::size_t n) { return cplx(std::sqrt(static_cast<double>(n) + 1.0)); }}});
}

BandedOperator create(std::size_t dim) {
  // a* xi_{n-1} = sqrt(n) xi_n
  return BandedOperator(
      dim, {{-1, [](std::size_t n) { return cplx(std::sqrt(static_cast<double>(n))); }}});
}

BandedOperator identity(std::size_t dim) {
  return BandedOperator(dim, {{0, [](std::size_t) { return cplx(1.0); }}});
}

BandedOperator proj_omega(std::size_t dim) {
  return BandedOperator(dim, {{0, [](std::size_t n) { return cplx(n == 0 ? 1.0 : 0.0); }}});
}

BandedOperator proj_geq2(std::size_t dim) {
  return BandedOperator(dim, {{0, [](std::size_t n) { return cplx(n >= 2 ? 1.0 : 0.0); }}});
}

BandedOperator proj_even(std::size_t dim) {
  return BandedOperator(dim, {{0, [](std::size_t n) { return cplx(n % 2 == 0 ? 1.0 : 0.0); }}});
}

BandedOperator diagonal(std::function<cplx(std::size_t)> g, int shift, std::size_t dim) {
  auto gg = std::move(g);
  return BandedOperator(dim, {{0, [gg, shift](std::size_t n) {
                                 long long idx = static_cast<long long>(n) + shift;
                                 if (idx < 0) return cplx(0.0);
                                 return gg(static_cast<std::size_t>(idx));
                               }}});
}

BandedOperator factorial_weight(std::function<cplx(std::size_t)> f, unsigned k, std::size_t dim) {
  if (k == 0) throw domain_error("factorial_weight: k must be positive");
  auto ff = std::move(f);
  return BandedOperator(dim, {{0, [ff, k](std::size_t n) {
                                 cplx p = 1.0;
                                 for (long long i = static_cast<long long>(n); i >= 1;
                                      i -= static_cast<long long>(k))
                                   p *= ff(static_cast<std::size_t>(i));
                                 return p;
                               }}});
}

BandedOperator make(const OperatorKind& kind, std::size_t dim) {
  if (dim < 1) throw truncation_error("make: dim must be positive");
  return std::visit(
      [dim](const auto& k) -> BandedOperator {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, LeftShiftKind>) return left_shift(dim);
        else if constexpr (std::is_same_v<T, RightShiftKind>) return right_shift(dim);
        else if constexpr (std::is_same_v<T, NumberKind>) return number_op(dim);
        else if constexpr (std::is_same_v<T, AnnihilateKind>) return annihilate(dim);
        else if constexpr (std::is_same_v<T, CreateKind>) return create(dim);
        else if constexpr (std::is_same_v<T, IdentityKind>) return identity(dim);
        else if constexpr (std::is_same_v<T, ProjOmegaKind>) return proj_omega(dim);
        else if constexpr (std::is_same_v<T, ProjGeq2Kind>) return proj_geq2(dim);
        else if constexpr (std::is_same_v<T, ProjEvenKind>) return proj_even(dim);
        else if constexpr (std::is_same_v<T, DiagonalKind>) return diagonal(k.g, k.shift, dim);
        else return factorial_weight(k.f, k.k, dim);
      },
      kind);
}

}  // namespace oscitime

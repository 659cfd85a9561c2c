#include "oscitime/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "oscitime/rng.hpp"

namespace oscitime {

double TailBound::norm_beyond(std::size_t from) const {
  if (coeff == 0.0) return 0.0;
  std::size_t n0 = std::max(from, start);
  if (ratio <= 0.0) return from <= start ? coeff : 0.0;
  if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
  return coeff * std::pow(ratio, static_cast<double>(n0)) / (1.0 - ratio);
}

double norm(const FockVector& v) {
  double s = 0.0;
  for (cplx c : v.coeffs) s += std::norm(c);
  return std::sqrt(s);
}

cplx inner(const FockVector& u, const FockVector& v) {
  if (u.dim() != v.dim()) throw dimension_mismatch("inner: dim mismatch");
  cplx s = 0.0;
  for (std::size_t n = 0; n < u.dim(); ++n) s += std::conj(u.coeffs[n]) * v.coeffs[n];
  return s;
}

FockVector scaled(cplx c, const FockVector& v) {
  FockVector out = v;
  for (auto& x : out.coeffs) x *= c;
  if (out.tail) out.tail->coeff *= std::abs(c);
  return out;
}

static std::optional<TailBound> merge_tails(const std::optional<TailBound>& a,
                                            const std::optional<TailBound>& b) {
  if (!a || !b) return std::nullopt;
  // |a_n| + |b_n| <= (Ca + Cb) max(ra, rb)^n for n past both starts.
  TailBound t;
  t.start = std::max(a->start, b->start);
  t.ratio = std::max(a->ratio, b->ratio);
  t.coeff = a->coeff + b->coeff;
  return t;
}

FockVector add(const FockVector& u, const FockVector& v) {
  if (u.dim() != v.dim()) throw dimension_mismatch("add: dim mismatch");
  FockVector out = u;
  for (std::size_t n = 0; n < v.dim(); ++n) out.coeffs[n] += v.coeffs[n];
  out.tail = merge_tails(u.tail, v.tail);
  return out;
}

FockVector sub(const FockVector& u, const FockVector& v) {
  return add(u, scaled(-1.0, v));
}

std::size_t support_max(const FockVector& v) {
  for (std::size_t n = v.dim(); n-- > 0;)
    if (v.coeffs[n] != cplx(0.0, 0.0)) return n;
  return 0;
}

FockVector normalized(const FockVector& v) {
  double nv = norm(v);
  if (nv == 0.0) throw domain_error("normalized: zero vector");
  return scaled(1.0 / nv, v);
}

namespace {

// Smallest D >= lo with certified tail mass C r^D/(1-r) < eps.
std::size_t adaptive_dim(const TailBound& tail, double eps, std::size_t lo) {
  std::size_t d = std::max<std::size_t>(lo, 8);
  if (tail.coeff == 0.0) return std::max(lo, tail.start + 1);
  while (tail.norm_beyond(d) >= eps) {
    if (d > (1u << 22)) throw divergent_family_error("adaptive truncation: tail mass will not certify below eps");
    d = d * 2;
  }
  // Binary refine down to the smallest admissible D.
  std::size_t hi = d, lo2 = std::max<std::size_t>(lo, tail.start + 1);
  while (lo2 < hi) {
    std::size_t mid = lo2 + (hi - lo2) / 2;
    if (tail.norm_beyond(mid) < eps)
      hi = mid;
    else
      lo2 = mid + 1;
  }
  return hi;
}

}  // namespace

FockVector basis_vector(std::size_t n, std::size_t dim) {
  if (n >= dim) throw truncation_error("basis_vector: index outside truncation");
  FockVector v;
  v.coeffs.assign(dim, 0.0);
  v.coeffs[n] = 1.0;
  v.tail = TailBound{n + 1, 0.0, 0.0};
  return v;
}

FockVector coherent_vector(cplx beta, Truncation tr) {
  double b = std::abs(beta);
  if (b == 0.0) {
    std::size_t d = tr.is_adaptive() ? 8 : tr.dim();
    if (d < 1) throw truncation_error("coherent_vector: dim must be positive");
    return basis_vector(0, d);
  }
  // Ratio |c_{n+1}/c_n| = |beta|/sqrt(n+1) drops below 1/2 from n0 on.
  double r = 0.5;
  std::size_t n0 = static_cast<std::size_t>(std::ceil(4.0 * b * b)) + 1;
  TailBound tail;
  tail.start = n0;
  tail.ratio = r;

  auto coeff_at = [&](std::size_t n) {
    // log |c_n| = -|b|^2/2 + n log b - lgamma(n+1)/2, assembled in log space.
    double lg = -0.5 * b * b + n * std::log(b) - 0.5 * std::lgamma(static_cast<double>(n) + 1.0);
    return std::exp(lg);
  };
  tail.coeff = coeff_at(n0) / std::pow(r, static_cast<double>(n0));

  std::size_t d = tr.is_adaptive() ? adaptive_dim(tail, tr.eps(), n0 + 2) : tr.dim();
  if (d < 1) throw truncation_error("coherent_vector: dim must be positive");

  FockVector v;
  v.coeffs.assign(d, 0.0);
  cplx c = std::exp(cplx(-0.5 * b * b, 0.0));
  for (std::size_t n = 0; n < d; ++n) {
    v.coeffs[n] = c;
    c *= beta / std::sqrt(static_cast<double>(n) + 1.0);
  }
  v.tail = tail;
  return v;
}

FockVector super_coherent_vector(cplx beta, unsigned j, Truncation tr) {
  double b = std::abs(beta);
  if (b >= 1.0)
    throw domain_error("super_coherent_vector: defined iff |beta| < 1");
  if (b == 0.0) {
    std::size_t d = tr.is_adaptive() ? std::max<std::size_t>(8, j + 2) : tr.dim();
    if (d <= j) throw truncation_error("super_coherent_vector: dim too small for a*^j");
    return basis_vector(j, d);
  }
  // |c_{2k}| ratio between consecutive even slots is |beta| sqrt((2k+1)/(2k+2)),
  // always below |beta|; per-index ratio sqrt(|beta|).
  TailBound tail;
  tail.start = 0;
  tail.ratio = std::sqrt(b);
  tail.coeff = 1.0;

  double eps_eff = tr.eps() / std::pow(4.0, static_cast<double>(j));
  std::size_t d = tr.is_adaptive() ? adaptive_dim(tail, eps_eff, 8) + j : tr.dim();
  if (d < 2 + j) throw truncation_error("super_coherent_vector: dim too small");

  FockVector v;
  v.coeffs.assign(d, 0.0);
  cplx c = 1.0;
  v.coeffs[0] = c;
  for (std::size_t k = 1; 2 * k < d; ++k) {
    // c_{2k} = c_{2k-2} * beta * sqrt((2k-1)(2k)) / (2k)  [= beta sqrt((2k-1)/(2k))]
    double n2 = 2.0 * static_cast<double>(k);
    c *= beta * std::sqrt((n2 - 1.0) / n2);
    v.coeffs[2 * k] = c;
  }
  // Apply a*^j: (a* w)_n = sqrt(n) w_{n-1}.
  for (unsigned step = 0; step < j; ++step) {
    std::vector<cplx> next(d, 0.0);
    for (std::size_t n = d; n-- > 1;)
      next[n] = std::sqrt(static_cast<double>(n)) * v.coeffs[n - 1];
    v.coeffs = std::move(next);
    // sqrt(n) growth is absorbed by nudging the certified ratio upward.
    double r2 = (tail.ratio + 1.0) / 2.0;
    double worst = 0.0;
    for (double n = 1.0; n < 4096.0; n += 1.0)
      worst = std::max(worst, std::sqrt(n) * std::pow(tail.ratio / r2, n - 1.0));
    tail.coeff *= worst / r2;
    tail.ratio = r2;
  }
  // Tighten the certificate to the stored coefficients (analytic ratio bound
  // keeps it valid beyond the truncation).
  double c_needed = 0.0;
  for (std::size_t n = 0; n < d; ++n)
    c_needed = std::max(c_needed, std::abs(v.coeffs[n]) / std::pow(tail.ratio, static_cast<double>(n)));
  tail.coeff = std::min(tail.coeff, c_needed * (1.0 + 1e-12) + 1e-300);
  tail.start = j;
  v.tail = tail;
  return v;
}

FockVector generalized_eigen_vector(const std::function<cplx(std::size_t)>& f,
                                    unsigned k, cplx alpha, Truncation tr) {
  if (k == 0) throw domain_error("generalized_eigen_vector: k must be positive");
  if (alpha == cplx(0.0, 0.0)) {
    std::size_t d = tr.is_adaptive() ? 8 : tr.dim();
    if (d < 1) throw truncation_error("generalized_eigen_vector: dim must be positive");
    return basis_vector(0, d);
  }

  auto build = [&](std::size_t d) {
    std::vector<cplx> coeffs(d, 0.0);
    std::vector<double> ratios;
    coeffs[0] = 1.0;
    cplx c = 1.0;
    for (std::size_t jj = 1; jj * k < d; ++jj) {
      cplx prev = c;
      c *= f(jj * k) * alpha / static_cast<double>(jj);
      coeffs[jj * k] = c;
      if (std::abs(prev) > 0.0) ratios.push_back(std::abs(c) / std::abs(prev));
    }
    return std::pair{std::move(coeffs), std::move(ratios)};
  };

  std::size_t d = tr.is_adaptive() ? 256 : tr.dim();
  if (d < 1) throw truncation_error("generalized_eigen_vector: dim must be positive");

  for (;;) {
    auto [coeffs, ratios] = build(d);
    if (ratios.size() < 4)
      throw truncation_error("generalized_eigen_vector: truncation too small for the ratio test");
    // Trailing quarter of the stepwise ratios decides convergence.
    std::size_t tail_from = ratios.size() - std::max<std::size_t>(2, ratios.size() / 4);
    double roof = 0.0;
    for (std::size_t i = tail_from; i < ratios.size(); ++i) roof = std::max(roof, ratios[i]);
    bool growing = ratios.back() > 1.0 || roof >= 1.0;
    if (growing)
      throw divergent_family_error(
          "generalized_eigen_vector: coefficient ratio test failed within the truncation");

    double step_roof = std::min(roof * (1.0 + 1e-3), 1.0 - 1e-9);
    TailBound tail;
    tail.ratio = std::pow(step_roof, 1.0 / static_cast<double>(k));
    tail.start = 0;
    double c_needed = 0.0;
    for (std::size_t n = 0; n < d; ++n)
      if (coeffs[n] != cplx(0.0, 0.0))
        c_needed = std::max(c_needed, std::abs(coeffs[n]) / std::pow(tail.ratio, static_cast<double>(n)));
    tail.coeff = c_needed * (1.0 + 1e-12);

    if (tr.is_adaptive() && tail.norm_beyond(d) >= tr.eps()) {
      d *= 2;
      if (d > (1u << 22))
        throw divergent_family_error("generalized_eigen_vector: adaptive truncation overflow");
      continue;
    }
    FockVector v;
    v.coeffs = std::move(coeffs);
    v.tail = tail;
    return v;
  }
}

// ---------------------------------------------------------------------------
// Domain constraints

DomainConstraint DomainConstraint::sum_zero() {
  DomainConstraint c;
  c.clauses_.push_back(SumZero{});
  return c;
}

DomainConstraint DomainConstraint::weighted_sum_zero(std::function<cplx(std::size_t)> w) {
  DomainConstraint c;
  c.clauses_.push_back(WeightedSumZero{std::move(w)});
  return c;
}

DomainConstraint DomainConstraint::residue_class_zero(cplx omega, unsigned m) {
  if (m == 0) throw domain_error("residue_class_zero: m must be positive");
  if (std::abs(std::abs(omega) - 1.0) > 1e-12)
    throw domain_error("residue_class_zero: omega must have unit modulus");
  DomainConstraint c;
  c.clauses_.push_back(ResidueClassZero{omega, m});
  return c;
}

DomainConstraint DomainConstraint::geometric_eigen(cplx alpha) {
  if (std::abs(alpha) >= 1.0)
    throw domain_error("geometric_eigen: |alpha| must be below 1");
  DomainConstraint c;
  c.clauses_.push_back(GeometricEigen{alpha});
  return c;
}

DomainConstraint DomainConstraint::support_bound(std::size_t n_max) {
  DomainConstraint c;
  c.clauses_.push_back(SupportBound{n_max});
  return c;
}

DomainConstraint& DomainConstraint::and_also(const DomainConstraint& other) {
  for (const auto& cl : other.clauses_) clauses_.push_back(cl);
  return *this;
}

std::string DomainConstraint::describe() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& cl : clauses_) {
    if (!first) os << " & ";
    first = false;
    std::visit(
        [&os](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, SumZero>)
            os << "sum_zero";
          else if constexpr (std::is_same_v<T, WeightedSumZero>)
            os << "weighted_sum_zero";
          else if constexpr (std::is_same_v<T, ResidueClassZero>)
            os << "residue_class_zero(omega=" << format_cplx(c.omega) << ",m=" << c.m << ")";
          else if constexpr (std::is_same_v<T, GeometricEigen>)
            os << "geometric_eigen(alpha=" << format_cplx(c.alpha) << ")";
          else
            os << "support_bound(" << c.n_max << ")";
        },
        cl);
  }
  return os.str();
}

namespace {

// Functional u with constraint (u, c) = 0, restricted to [0, window).
using Functional = std::vector<cplx>;

std::vector<Functional> hyperplanes(const DomainConstraint& constraint,
                                    std::size_t window) {
  std::vector<Functional> out;
  for (const auto& cl : constraint.clauses()) {
    if (std::holds_alternative<DomainConstraint::SumZero>(cl)) {
      out.emplace_back(window, cplx(1.0, 0.0));
    } else if (auto* w = std::get_if<DomainConstraint::WeightedSumZero>(&cl)) {
      Functional u(window);
      for (std::size_t n = 0; n < window; ++n) u[n] = std::conj(w->weight(n));
      out.push_back(std::move(u));
    } else if (auto* r = std::get_if<DomainConstraint::ResidueClassZero>(&cl)) {
      // One functional per residue class l: sum_j conj(omega)^j c_{l+mj} = 0,
      // i.e. u_{l+mj} = omega^j in the conjugate-first pairing.
      for (unsigned l = 0; l < r->m; ++l) {
        Functional u(window, 0.0);
        cplx w = 1.0;
        for (std::size_t n = l; n < window; n += r->m) {
          u[n] = w;
          w *= r->omega;
        }
        out.push_back(std::move(u));
      }
    }
  }
  return out;
}

}  // namespace

FockVector ccr_domain_sample(const DomainConstraint& constraint,
                             std::uint64_t seed, std::size_t dim) {
  if (dim == 0) throw truncation_error("ccr_domain_sample: dim must be positive");

  std::size_t window = std::max<std::size_t>(1, dim / 2);
  const DomainConstraint::GeometricEigen* geo = nullptr;
  for (const auto& cl : constraint.clauses()) {
    if (auto* s = std::get_if<DomainConstraint::SupportBound>(&cl))
      window = std::min(window, std::min(dim, s->n_max + 1));
    if (auto* g = std::get_if<DomainConstraint::GeometricEigen>(&cl)) geo = g;
  }

  CounterRng rng(seed);

  if (geo) {
    // One-dimensional solution space: a random phase times the geometric
    // vector, full support with a geometric tail certificate.
    FockVector v;
    v.coeffs.assign(dim, 0.0);
    cplx c = std::exp(cplx(0.0, 2.0 * kPi * rng.uniform()));
    double nrm2 = 0.0;
    cplx g = c;
    for (std::size_t n = 0; n < dim; ++n) {
      v.coeffs[n] = g;
      nrm2 += std::norm(g);
      g *= geo->alpha;
    }
    double a = std::abs(geo->alpha);
    // True norm includes the tail of the geometric series.
    nrm2 += std::pow(a, 2.0 * static_cast<double>(dim)) / (1.0 - a * a);
    double s = 1.0 / std::sqrt(nrm2);
    for (auto& x : v.coeffs) x *= s;
    v.tail = TailBound{0, s * (1.0 + 1e-12), a};
    return v;
  }

  auto planes = hyperplanes(constraint, window);

  FockVector v;
  v.coeffs.assign(dim, 0.0);
  for (std::size_t n = 0; n < window; ++n) v.coeffs[n] = rng.complex_normal();

  // Alternating projections; the clause functionals here are either mutually
  // orthogonal (residue classes) or few, so a handful of sweeps suffices.
  for (int round = 0; round < 16; ++round) {
    double worst = 0.0;
    for (const auto& u : planes) {
      cplx num = 0.0;
      double den = 0.0;
      for (std::size_t n = 0; n < window; ++n) {
        num += std::conj(u[n]) * v.coeffs[n];
        den += std::norm(u[n]);
      }
      if (den == 0.0) continue;
      cplx t = num / den;
      for (std::size_t n = 0; n < window; ++n) v.coeffs[n] -= t * u[n];
      worst = std::max(worst, std::abs(num));
    }
    if (worst < 1e-18) break;
  }

  double nv = norm(v);
  if (nv < 1e-10)
    throw unsatisfiable_constraint("ccr_domain_sample: constraint not satisfiable at this truncation (" +
                                   constraint.describe() + ")");
  for (auto& x : v.coeffs) x /= nv;
  v.tail = TailBound{window, 0.0, 0.0};

  for (double r : constraint_residuals(constraint, v))
    if (r > 1e-13)
      throw unsatisfiable_constraint("ccr_domain_sample: projection failed to satisfy " +
                                     constraint.describe());
  return v;
}

std::vector<double> constraint_residuals(const DomainConstraint& constraint,
                                         const FockVector& v) {
  std::vector<double> out;
  double scale = std::max(norm(v), 1e-300);
  for (const auto& cl : constraint.clauses()) {
    if (std::holds_alternative<DomainConstraint::SumZero>(cl)) {
      cplx s = 0.0;
      for (cplx c : v.coeffs) s += c;
      out.push_back(std::abs(s) / scale);
    } else if (auto* w = std::get_if<DomainConstraint::WeightedSumZero>(&cl)) {
      cplx s = 0.0;
      double wmax = 1.0;
      for (std::size_t n = 0; n < v.dim(); ++n) {
        cplx wn = w->weight(n);
        s += wn * v.coeffs[n];
        if (v.coeffs[n] != cplx(0.0, 0.0)) wmax = std::max(wmax, std::abs(wn));
      }
      out.push_back(std::abs(s) / (scale * wmax));
    } else if (auto* r = std::get_if<DomainConstraint::ResidueClassZero>(&cl)) {
      for (unsigned l = 0; l < r->m; ++l) {
        cplx s = 0.0;
        cplx wk = 1.0;
        for (std::size_t n = l; n < v.dim(); n += r->m) {
          s += wk * v.coeffs[n];
          wk *= std::conj(r->omega);
        }
        out.push_back(std::abs(s) / scale);
      }
    } else if (auto* g = std::get_if<DomainConstraint::GeometricEigen>(&cl)) {
      // Distance from the span of the geometric vector.
      FockVector ref;
      ref.coeffs.assign(v.dim(), 0.0);
      cplx a = 1.0;
      for (std::size_t n = 0; n < v.dim(); ++n) {
        ref.coeffs[n] = a;
        a *= g->alpha;
      }
      cplx proj = inner(ref, v) / inner(ref, ref);
      out.push_back(norm(sub(v, scaled(proj, ref))) / scale);
    } else if (auto* s = std::get_if<DomainConstraint::SupportBound>(&cl)) {
      double leak = 0.0;
      for (std::size_t n = s->n_max + 1; n < v.dim(); ++n) leak += std::norm(v.coeffs[n]);
      out.push_back(std::sqrt(leak) / scale);
    }
  }
  return out;
}

std::string to_json(const FockVector& v) {
  std::ostringstream os;
  os << "{\"dim\":" << v.dim() << ",\"re\":[";
  for (std::size_t n = 0; n < v.dim(); ++n)
    os << (n ? "," : "") << format_double(v.coeffs[n].real());
  os << "],\"im\":[";
  for (std::size_t n = 0; n < v.dim(); ++n)
    os << (n ? "," : "") << format_double(v.coeffs[n].imag());
  os << "]";
  if (v.tail)
    os << ",\"tail\":{\"n0\":" << v.tail->start << ",\"C\":" << format_double(v.tail->coeff)
       << ",\"r\":" << format_double(v.tail->ratio) << "}";
  os << "}";
  return os.str();
}

}  // namespace oscitime

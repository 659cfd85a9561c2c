#include "oscitime/conjugates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace oscitime {

const char* to_string(FamilyClass c) {
  switch (c) {
    case FamilyClass::Zero: return "zero";
    case FamilyClass::OpenDisc: return "open_disc";
    default: return "boundary";
  }
}

const char* to_string(CcrDomainKind k) {
  switch (k) {
    case CcrDomainKind::InfiniteDim: return "infinite_dim";
    case CcrDomainKind::FiniteDim: return "finite_dim";
    default: return "dense";
  }
}

FamilyClass classify(cplx omega) {
  double a = std::abs(omega);
  if (a > 1.0 + 1e-12)
    throw domain_error("classify: |omega| > 1 belongs to the contour-calculus family");
  if (a == 0.0) return FamilyClass::Zero;
  if (std::abs(a - 1.0) <= 1e-12) return FamilyClass::Boundary;
  return FamilyClass::OpenDisc;
}

ConjugateFamily classify_family(cplx omega, unsigned m) {
  if (m == 0) throw domain_error("classify_family: m must be positive");
  ConjugateFamily fam;
  fam.omega = omega;
  fam.m = m;
  fam.classification = classify(omega);
  switch (fam.classification) {
    case FamilyClass::Zero:
      fam.expected = {false, CcrDomainKind::InfiniteDim};
      break;
    case FamilyClass::OpenDisc:
      fam.expected = {false, CcrDomainKind::FiniteDim};
      break;
    case FamilyClass::Boundary:
      fam.expected = {true, CcrDomainKind::Dense};
      break;
  }
  return fam;
}

namespace {

BandedOperator shift_power(std::size_t dim, unsigned m) {
  // L^m: single band at offset +m.
  return BandedOperator(dim, {{static_cast<int>(m), [](std::size_t) { return cplx(1.0); }}});
}

BandedOperator shift_power_adj(std::size_t dim, unsigned m) {
  return BandedOperator(dim, {{-static_cast<int>(m), [](std::size_t) { return cplx(1.0); }}});
}

}  // namespace

std::pair<FockVector, SeriesReport> ConjugateOperator::apply(
    const FockVector& v, const SeriesPolicy& policy) const {
  cplx scale_im = cplx(0.0, 1.0) / static_cast<double>(m);
  std::pair<FockVector, SeriesReport> res;
  switch (family.classification) {
    case FamilyClass::Boundary:
      res = principal_log_apply(omega, shift_m, v, policy);
      break;
    case FamilyClass::OpenDisc:
      res = series_apply(SeriesKind::Log, inner, v, policy);
      break;
    case FamilyClass::Zero:
      res = series_apply(SeriesKind::Log, shift_m, v, policy);
      break;
  }
  res.first = scaled(scale_im, res.first);
  return res;
}

ConjugateOperator conjugate_operator(cplx omega, unsigned m, std::size_t dim) {
  ConjugateFamily fam = classify_family(omega, m);
  BandedOperator lm = shift_power(dim, m);
  BandedOperator inner = add(scale(omega, identity(dim)), scale(-1.0, lm));
  return ConjugateOperator{omega, m, fam, std::move(inner), std::move(lm)};
}

BandedOperator galapon_operator(std::size_t dim) {
  if (dim < 2) throw truncation_error("galapon_operator: need dim >= 2");
  std::map<int, BandedOperator::Gen> bands;
  for (int d = -static_cast<int>(dim) + 1; d < static_cast<int>(dim); ++d) {
    if (d == 0) continue;
    // entry (n, n+d) = i/(n - (n+d)) = -i/d
    cplx val = cplx(0.0, -1.0) / static_cast<double>(d);
    bands[d] = [val](std::size_t) { return val; };
  }
  return BandedOperator(dim, std::move(bands));
}

BandedOperator galapon_operator_series_form(std::size_t dim) {
  if (dim < 2) throw truncation_error("galapon_operator_series_form: need dim >= 2");
  BandedOperator acc = scale(0.0, identity(dim));
  for (unsigned k = 1; k < dim; ++k) {
    BandedOperator term =
        add(shift_power_adj(dim, k), scale(-1.0, shift_power(dim, k)));
    acc = add(acc, scale(cplx(0.0, 1.0 / static_cast<double>(k)), term));
  }
  return acc;
}

BandedOperator boundary_time_operator(cplx omega, unsigned m, std::size_t dim) {
  if (m == 0) throw domain_error("boundary_time_operator: m must be positive");
  if (std::abs(std::abs(omega) - 1.0) > 1e-12)
    throw domain_error("boundary_time_operator: |omega| must equal 1");
  std::map<int, BandedOperator::Gen> bands;
  double md = static_cast<double>(m);
  cplx diag = cplx(0.0, 1.0) / md * (std::log(omega) - std::log(std::conj(omega)));
  if (diag != cplx(0.0, 0.0))
    bands[0] = [diag](std::size_t) { return diag; };
  cplx wbar_pow = 1.0;
  cplx w_pow = 1.0;
  for (unsigned k = 1; k * m < dim; ++k) {
    wbar_pow *= std::conj(omega);
    w_pow *= omega;
    cplx up = cplx(0.0, -1.0) / (md * k) * wbar_pow;
    cplx down = cplx(0.0, 1.0) / (md * k) * w_pow;
    bands[static_cast<int>(k * m)] = [up](std::size_t) { return up; };
    bands[-static_cast<int>(k * m)] = [down](std::size_t) { return down; };
  }
  return BandedOperator(dim, std::move(bands));
}

std::function<cplx(std::size_t)> weighted_ccr_weight(std::function<cplx(std::size_t)> g) {
  auto gg = std::move(g);
  return [gg](std::size_t n) {
    cplx p = 1.0;
    for (std::size_t k = 0; k < n; ++k) p *= gg(k);
    return p;
  };
}

BandedOperator phase_conjugation_unitary(std::function<cplx(std::size_t)> g,
                                         std::size_t dim) {
  auto w = weighted_ccr_weight(std::move(g));
  return BandedOperator(dim, {{0, [w](std::size_t n) { return w(n); }}});
}

namespace {

// Cumulative products G(n) = prod_{k<n} g(k), memoized up to dim.
std::shared_ptr<std::vector<cplx>> cumulative_products(
    const std::function<cplx(std::size_t)>& g, std::size_t dim) {
  auto table = std::make_shared<std::vector<cplx>>(dim + 1);
  (*table)[0] = 1.0;
  for (std::size_t n = 0; n < dim; ++n) {
    cplx gn = g(n);
    if (gn == cplx(0.0, 0.0))
      throw domain_error("weighted_galapon: weight vanishes at n=" + std::to_string(n));
    (*table)[n + 1] = (*table)[n] * gn;
  }
  return table;
}

BandedOperator weighted_galapon_raw(const std::function<cplx(std::size_t)>& g,
                                    std::size_t dim) {
  auto cum = cumulative_products(g, dim);
  std::map<int, BandedOperator::Gen> bands;
  for (unsigned k = 1; k < dim; ++k) {
    double kk = static_cast<double>(k);
    // offset +k: -(i/k) prod_{l=0}^{k-1} g(n+l) = -(i/k) G(n+k)/G(n)
    bands[static_cast<int>(k)] = [cum, k, kk](std::size_t n) {
      return cplx(0.0, -1.0 / kk) * (*cum)[n + k] / (*cum)[n];
    };
    // offset -k: +(i/k) / prod_{l=0}^{k-1} g(n-k+l) = +(i/k) G(n-k)/G(n)
    bands[-static_cast<int>(k)] = [cum, k, kk](std::size_t n) {
      return cplx(0.0, 1.0 / kk) * (*cum)[n - k] / (*cum)[n];
    };
  }
  return BandedOperator(dim, std::move(bands));
}

}  // namespace

WeightedGalaponResult weighted_galapon(std::function<cplx(std::size_t)> g,
                                       std::size_t dim, bool symmetrize) {
  if (dim < 2) throw truncation_error("weighted_galapon: need dim >= 2");
  WeightedGalaponResult res{weighted_galapon_raw(g, dim), true, 0.0, std::nullopt};
  if (!symmetrize) return res;

  // Least-squares exponent of prod_{k<=n} |g_k| against n on the upper half
  // of the truncation; the symmetrized operator needs |exponent| < 1/2.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  double logprod = 0.0;
  for (std::size_t n = 0; n < dim; ++n) {
    logprod += std::log(std::abs(g(n)));
    if (n >= dim / 2 && n >= 2) {
      double x = std::log(static_cast<double>(n));
      sx += x;
      sy += logprod;
      sxx += x * x;
      sxy += x * logprod;
      ++count;
    }
  }
  if (count >= 2) {
    double denom = count * sxx - sx * sx;
    res.fitted_exponent = denom != 0.0 ? (count * sxy - sx * sy) / denom : 0.0;
  }
  res.growth_ok = std::abs(res.fitted_exponent) < 0.5;
  if (!res.growth_ok)
    res.warning = "cumulative weight growth exponent " + format_double(res.fitted_exponent) +
                  " outside (-1/2, 1/2); symmetrized operator may not be a time operator";

  auto ginv_conj = [g](std::size_t n) { return 1.0 / std::conj(g(n)); };
  BandedOperator other = weighted_galapon_raw(ginv_conj, dim);
  res.op = scale(0.5, add(res.op, other));
  return res;
}

// --- polynomial families ----------------------------------------------------

namespace {

cplx eval_poly(const std::vector<cplx>& coeffs, cplx z) {
  cplx acc = 0.0;
  for (std::size_t j = coeffs.size(); j-- > 0;) acc = acc * z + coeffs[j];
  return acc;
}

// Durand-Kerner on a monic-normalized polynomial.
std::vector<cplx> poly_roots(std::vector<cplx> coeffs) {
  while (!coeffs.empty() && std::abs(coeffs.back()) < 1e-300) coeffs.pop_back();
  if (coeffs.size() < 2) return {};
  std::size_t deg = coeffs.size() - 1;
  cplx lead = coeffs.back();
  for (auto& c : coeffs) c /= lead;
  std::vector<cplx> r(deg);
  cplx seed(0.4, 0.9);
  cplx acc = 1.0;
  for (std::size_t i = 0; i < deg; ++i) {
    acc *= seed;
    r[i] = acc;
  }
  for (int iter = 0; iter < 500; ++iter) {
    double worst = 0.0;
    for (std::size_t i = 0; i < deg; ++i) {
      cplx num = eval_poly(coeffs, r[i]);
      cplx den = 1.0;
      for (std::size_t j = 0; j < deg; ++j)
        if (j != i) den *= r[i] - r[j];
      cplx delta = num / den;
      r[i] -= delta;
      worst = std::max(worst, std::abs(delta));
    }
    if (worst < 1e-15) break;
  }
  return r;
}

}  // namespace

PolySpec analyze_poly(std::vector<cplx> coefficients) {
  while (!coefficients.empty() && std::abs(coefficients.back()) < 1e-300)
    coefficients.pop_back();
  if (coefficients.size() < 2)
    throw hypothesis_error("analyze_poly: p must have positive degree");
  PolySpec spec;
  spec.coefficients = coefficients;
  spec.degree = static_cast<unsigned>(coefficients.size() - 1);
  spec.p_at_zero = coefficients[0];

  // 1 - p(z)
  std::vector<cplx> q = coefficients;
  for (auto& c : q) c = -c;
  q[0] += 1.0;
  spec.roots_of_one_minus_p = poly_roots(q);
  for (cplx root : spec.roots_of_one_minus_p) {
    cplx val = 1.0 - eval_poly(coefficients, root);
    if (std::abs(val) > 1e-10)
      throw hypothesis_error("analyze_poly: root refinement failed, |1-p(root)| = " +
                             format_double(std::abs(val)));
    if (std::abs(std::abs(root) - 1.0) > 1e-10)
      throw hypothesis_error("analyze_poly: root of 1-p off the unit circle, |root| = " +
                             format_double(std::abs(root)));
  }
  return spec;
}

double PolyTimeContext::forward_identity_residual(cplx root,
                                                  const FockVector& psi) const {
  BandedOperator l = left_shift(dim);
  BandedOperator ls = right_shift(dim);
  BandedOperator id = identity(dim);
  // phi = (root L* - 1) psi
  FockVector phi = sub(scaled(root, ls.apply(psi)), psi);
  // (root - L)(L* psi) = phi
  FockVector lhs1 = sub(scaled(root, ls.apply(psi)), l.apply(ls.apply(psi)));
  double r1 = norm(sub(lhs1, phi));
  // (root^{-1} - L*)(-root psi) = phi
  FockVector mrpsi = scaled(-root, psi);
  FockVector lhs2 = sub(scaled(1.0 / root, mrpsi), ls.apply(mrpsi));
  double r2 = norm(sub(lhs2, phi));
  return std::max(r1, r2);
}

double PolyTimeContext::forward_identities_max(const FockVector& psi) const {
  double worst = 0.0;
  for (cplx root : spec.roots_of_one_minus_p)
    worst = std::max(worst, forward_identity_residual(root, psi));
  return worst;
}

FockVector PolyTimeContext::domain_vector(const FockVector& psi) const {
  BandedOperator ls = right_shift(dim);
  FockVector phi = psi;
  for (cplx root : spec.roots_of_one_minus_p)
    phi = sub(scaled(root, ls.apply(phi)), phi);
  return phi;
}

PolyTimeContext poly_time_operator(PolySpec spec, std::size_t dim) {
  if (dim < 2 * spec.degree + 2)
    throw truncation_error("poly_time_operator: truncation too small for the root set");
  return PolyTimeContext{std::move(spec), dim};
}

BandedOperator monomial_xp_operator(cplx omega, unsigned m, std::size_t dim) {
  if (m == 0) throw domain_error("monomial_xp_operator: m must be positive");
  if (std::abs(std::abs(omega) - 1.0) > 1e-12)
    throw domain_error("monomial_xp_operator: |omega| must equal 1");
  std::map<int, BandedOperator::Gen> bands;
  double md = static_cast<double>(m);
  cplx w_pow = 1.0, wbar_pow = 1.0;
  for (unsigned k = 1; k * m < dim; ++k) {
    w_pow *= omega;
    wbar_pow *= std::conj(omega);
    cplx up = cplx(0.0, -1.0) / (md * k) * w_pow;
    cplx down = cplx(0.0, 1.0) / (md * k) * wbar_pow;
    bands[static_cast<int>(k * m)] = [up](std::size_t) { return up; };
    bands[-static_cast<int>(k * m)] = [down](std::size_t) { return down; };
  }
  return BandedOperator(dim, std::move(bands));
}

// --- angle operators ---------------------------------------------------------

AngleContext angle_operator(AngleVariant variant, std::size_t dim) {
  if (dim < 4) throw truncation_error("angle_operator: need dim >= 4");
  BandedOperator::Gen gen;
  if (variant == AngleVariant::S0) {
    gen = [](std::size_t n) {
      double nn = static_cast<double>(n);
      return cplx(std::sqrt((nn + 2.0) / (nn + 1.0)));
    };
  } else {
    gen = [](std::size_t n) {
      double nn = static_cast<double>(n);
      return cplx(std::sqrt((nn + 1.0) / (nn + 2.0)));
    };
  }
  return AngleContext{variant, dim, BandedOperator(dim, {{+2, std::move(gen)}})};
}

FockVector AngleContext::eigenvector(cplx beta, Truncation tr) const {
  unsigned j = variant == AngleVariant::S0 ? 0 : 1;
  FockVector v = super_coherent_vector(beta, j, tr);
  if (!tr.is_adaptive() && v.dim() != dim)
    throw dimension_mismatch("angle eigenvector: truncation disagrees with context dim");
  return v;
}

PairingReport pairing_check(const AnglePairing& pair, std::size_t n_max) {
  PairingReport rep;
  rep.beta_recomputed = pair.g(2) * pair.f(2);
  rep.ok = true;
  double scale = std::max(1.0, std::abs(pair.beta));
  // n = 0 instance: the projection kills the second term.
  double dev0 = std::abs(rep.beta_recomputed - pair.beta);
  rep.max_deviation = dev0;
  if (dev0 > 1e-10 * scale) {
    rep.ok = false;
    rep.first_failing_n = 0;
  }
  for (std::size_t n = 2; n + 2 <= n_max; n += 2) {
    cplx lhs = pair.g(n + 2) * pair.f(n + 2) - pair.g(n) * pair.f(n);
    double dev = std::abs(lhs - pair.beta);
    rep.max_deviation = std::max(rep.max_deviation, dev);
    if (dev > 1e-10 * scale && rep.ok) {
      rep.ok = false;
      rep.first_failing_n = n;
    }
  }

  // Dyadic ladder for M_f = lim n/|f(2n)|.
  std::vector<double> ladder;
  for (std::size_t n = 2; 2 * n <= std::max<std::size_t>(n_max, 64); n *= 2) {
    double fv = std::abs(pair.f(2 * n));
    ladder.push_back(fv > 0.0 ? static_cast<double>(n) / fv
                              : std::numeric_limits<double>::infinity());
  }
  if (ladder.size() >= 3) {
    double a0 = ladder[ladder.size() - 3], a1 = ladder[ladder.size() - 2],
           a2 = ladder.back();
    if (std::abs(a2 - a1) <= 1e-9 * std::max(1.0, std::abs(a2))) {
      rep.m_f_estimate = a2;
    } else if (a2 > a1 && a1 > a0 && a2 > 2.0 * ladder.front()) {
      rep.m_f_estimate = std::numeric_limits<double>::infinity();
    } else {
      double denom = (a2 - a1) - (a1 - a0);
      rep.m_f_estimate = std::abs(denom) > 1e-300 ? a2 - (a2 - a1) * (a2 - a1) / denom : a2;
      if (rep.m_f_estimate < 0.0) rep.m_f_estimate = 0.0;
    }
  } else if (!ladder.empty()) {
    rep.m_f_estimate = ladder.back();
  }
  rep.admissible_region_empty =
      rep.m_f_estimate <= 1e-12 || std::abs(pair.beta) == 0.0;
  return rep;
}

GeneralAngleContext general_angle_builder(const AnglePairing& pair, std::size_t dim) {
  PairingReport rep = pairing_check(pair, dim);
  if (!rep.ok)
    throw pairing_error("general_angle_builder: pairing identity fails first at n=" +
                        std::to_string(rep.first_failing_n) + " (deviation " +
                        format_double(rep.max_deviation) + ")");
  auto g = pair.g;
  auto f = pair.f;
  BandedOperator inner(dim, {{+2, [g](std::size_t n) { return g(n + 2); }}});
  BandedOperator raiser(dim, {{-2, [f](std::size_t n) { return f(n); }}});
  return GeneralAngleContext{pair, dim, std::move(inner), std::move(raiser)};
}

FockVector GeneralAngleContext::family_member(unsigned n, cplx alpha,
                                              Truncation tr) const {
  FockVector base = generalized_eigen_vector(pair.f, 2, alpha, tr);
  if (!tr.is_adaptive() && base.dim() != dim)
    throw dimension_mismatch("family_member: truncation disagrees with context dim");
  FockVector out = base;
  if (n > 0) {
    BandedOperator r = base.dim() == dim
                           ? raiser
                           : BandedOperator(base.dim(), raiser.bands());
    for (unsigned i = 0; i < n; ++i) out = r.apply(out);
  }
  return out;
}

bool GeneralAngleContext::alpha_admissible(cplx alpha) const {
  return std::abs(1.0 - alpha * pair.beta) < 1.0 && std::abs(alpha) < pair.radius;
}

ReductionReport reduction_identity_check(const std::function<cplx(std::size_t)>& f,
                                         const std::function<cplx(std::size_t)>& g,
                                         unsigned k, cplx alpha, std::size_t dim) {
  if (k == 0) throw domain_error("reduction_identity_check: k must be positive");
  for (std::size_t n = 0; n < dim; ++n) {
    cplx prod = f(n) * g(n);
    if (std::abs(prod - cplx(static_cast<double>(n))) >
        1e-10 * std::max(1.0, static_cast<double>(n)))
      throw domain_error("reduction_identity_check: f(n) g(n) != n at n=" + std::to_string(n));
  }
  double ka = std::abs(static_cast<double>(k) * alpha);
  if (!(ka < 1.0) || !(std::abs(1.0 - static_cast<double>(k) * alpha) < 1.0))
    throw domain_error("reduction_identity_check: need |k alpha| < 1 and |1 - k alpha| < 1");

  SeriesPolicy policy;
  // LHS: log(g_{N+k} L^k) applied to xi_{alpha,f}.
  FockVector xi_f = generalized_eigen_vector(f, k, alpha, Truncation::fixed(dim));
  BandedOperator lhs_inner(dim, {{static_cast<int>(k), [g, k](std::size_t n) {
                                    return g(n + k);
                                  }}});
  auto [lhs, lhs_rep] = series_apply(SeriesKind::Log, lhs_inner, xi_f, policy);

  // RHS: f!_k(N) log((N+k) L^k) applied to e^{alpha L*^k} Omega.
  FockVector xi_one = generalized_eigen_vector(
      [](std::size_t) { return cplx(1.0); }, k, alpha, Truncation::fixed(dim));
  BandedOperator rhs_inner(dim, {{static_cast<int>(k), [k](std::size_t n) {
                                    return cplx(static_cast<double>(n + k));
                                  }}});
  auto [rhs_core, rhs_rep] = series_apply(SeriesKind::Log, rhs_inner, xi_one, policy);
  FockVector rhs = factorial_weight(f, k, dim).apply(rhs_core);

  return ReductionReport{norm(sub(lhs, rhs)), lhs_rep.status, rhs_rep.status};
}

RootSet finite_ccr_root_solver(cplx omega, unsigned m, cplx c) {
  if (m == 0) throw domain_error("finite_ccr_root_solver: m must be positive");
  double aw = std::abs(omega);
  if (!(aw > 0.0) || !(aw < 1.0))
    throw domain_error("finite_ccr_root_solver: omega must lie in the open punctured disc");
  if (c == cplx(0.0, 0.0)) throw domain_error("finite_ccr_root_solver: c must be nonzero");
  if (std::abs(c + static_cast<double>(m)) < 1e-300)
    throw domain_error("finite_ccr_root_solver: c = -m degenerates the root equation");

  cplx target = c * omega / (c + static_cast<double>(m));
  double rad = std::pow(std::abs(target), 1.0 / static_cast<double>(m));
  double theta = std::arg(target) / static_cast<double>(m);
  RootSet out;
  for (unsigned kk = 0; kk < m; ++kk) {
    cplx root = std::polar(rad, theta + 2.0 * kPi * kk / static_cast<double>(m));
    cplx root_m = std::pow(root, static_cast<double>(m));
    bool ok = std::abs(root) < 1.0 && std::abs(1.0 - omega + root_m) < 1.0;
    out.roots.push_back(root);
    out.admissible.push_back(ok);
  }
  return out;
}

}  // namespace oscitime

#include "oscitime/ccr.hpp"

#include <cmath>
#include <sstream>

namespace oscitime {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    default: return "inconclusive";
  }
}

CcrReport ccr_check(const VectorOp& t_apply, const FockVector& phi, cplx expected,
                    double tol, const CcrOptions& opts) {
  CcrReport rep;
  rep.expected_eigenvalue = expected;
  rep.domain_tag = opts.domain_tag;
  rep.vector_id = opts.vector_id;
  rep.truncation_budget = opts.truncation_budget;

  if (opts.support_limit && support_max(phi) > *opts.support_limit) {
    rep.verdict = Verdict::Inconclusive;
    rep.note = "support " + std::to_string(support_max(phi)) +
               " exceeds the guard limit " + std::to_string(*opts.support_limit) +
               "; the compressed commutator is not trusted here";
    return rep;
  }
  bool tailed = phi.tail.has_value();
  if (!tailed) {
    rep.verdict = Verdict::Inconclusive;
    rep.note = "vector carries no tail certificate";
    return rep;
  }

  std::size_t d = phi.dim();
  BandedOperator n_op = number_op(d);

  FockVector t_phi = t_apply(phi);
  FockVector n_t_phi = n_op.apply(t_phi);
  FockVector t_n_phi = t_apply(n_op.apply(phi));
  FockVector r = sub(sub(n_t_phi, t_n_phi), scaled(expected, phi));

  rep.residual_norm = norm(r);
  rep.verdict = rep.residual_norm <= tol + opts.truncation_budget ? Verdict::Pass
                                                                  : Verdict::Fail;
  return rep;
}

namespace {

void require_sector(const FockVector& v, bool even, const char* what) {
  double bad = 0.0;
  for (std::size_t n = (even ? 1 : 0); n < v.dim(); n += 2) bad += std::norm(v.coeffs[n]);
  double scale = std::max(norm(v), 1e-300);
  if (std::sqrt(bad) > 1e-12 * scale)
    throw domain_error(std::string("ultraweak form: ") + what +
                       " component violates its parity sector");
}

cplx sector_form(const VectorOp& s, const FockVector& phi, const FockVector& psi) {
  if (phi.dim() == 0 || psi.dim() == 0) return 0.0;
  FockVector s_phi = s(phi);
  FockVector s_psi = s(psi);
  return 0.5 * (inner(s_phi, psi) + inner(phi, s_psi));
}

}  // namespace

cplx ultraweak_eval(const UltraWeakForm& form, const SectorPair& phi,
                    const SectorPair& psi) {
  require_sector(phi.even, true, "phi even");
  require_sector(psi.even, true, "psi even");
  require_sector(phi.odd, false, "phi odd");
  require_sector(psi.odd, false, "psi odd");
  cplx acc = 0.0;
  if (norm(phi.even) > 0.0 && norm(psi.even) > 0.0)
    acc += sector_form(form.s_even, phi.even, psi.even);
  if (norm(phi.odd) > 0.0 && norm(psi.odd) > 0.0)
    acc += sector_form(form.s_odd, phi.odd, psi.odd);
  return acc;
}

namespace {

SectorPair apply_number(const SectorPair& p) {
  SectorPair out = p;
  if (p.even.dim()) out.even = number_op(p.even.dim()).apply(p.even);
  if (p.odd.dim()) out.odd = number_op(p.odd.dim()).apply(p.odd);
  return out;
}

cplx pair_inner(const SectorPair& a, const SectorPair& b) {
  cplx s = 0.0;
  if (a.even.dim() && b.even.dim()) s += inner(a.even, b.even);
  if (a.odd.dim() && b.odd.dim()) s += inner(a.odd, b.odd);
  return s;
}

}  // namespace

UltraweakReport ultraweak_ccr_check(const UltraWeakForm& form, const SectorPair& phi,
                                    const SectorPair& psi, double tol) {
  UltraweakReport rep;
  SectorPair n_phi = apply_number(phi);
  SectorPair n_psi = apply_number(psi);

  cplx lhs = ultraweak_eval(form, n_phi, psi) -
             std::conj(ultraweak_eval(form, n_psi, phi));
  rep.ccr_defect = std::abs(lhs + cplx(0.0, 1.0) * pair_inner(phi, psi));
  rep.symmetry_defect = std::abs(ultraweak_eval(form, phi, psi) -
                                 std::conj(ultraweak_eval(form, psi, phi)));
  rep.pass = rep.ccr_defect <= tol;
  return rep;
}

KennardReport kennard_check(const BandedOperator& a, const VectorOp& b_apply,
                            const FockVector& psi_in) {
  KennardReport rep;
  FockVector psi = psi_in;
  double n0 = norm(psi);
  if (std::abs(n0 - 1.0) > 1e-12) {
    psi = scaled(1.0 / n0, psi);
    rep.input_normalized = true;
  }

  FockVector a_psi = a.apply(psi);
  FockVector b_psi = b_apply(psi);
  cplx mean_a = inner(psi, a_psi);
  cplx mean_b = inner(psi, b_psi);
  rep.sigma_a = norm(sub(a_psi, scaled(mean_a, psi)));
  rep.sigma_b = norm(sub(b_psi, scaled(mean_b, psi)));

  FockVector ab = a.apply(b_psi);
  FockVector ba = b_apply(a_psi);
  rep.commutator_expectation = inner(psi, sub(ab, ba));
  rep.slack = rep.sigma_a * rep.sigma_b - 0.5 * std::abs(rep.commutator_expectation);
  rep.pass = rep.slack >= -1e-10;
  return rep;
}

std::string ccr_report_csv_header() {
  return "family,domain,vector_id,expected_re,expected_im,residual,budget,verdict\n";
}

std::string ccr_report_csv_row(const std::string& family, const CcrReport& rep) {
  std::ostringstream os;
  os << family << "," << rep.domain_tag << "," << rep.vector_id << ","
     << format_double(rep.expected_eigenvalue.real()) << ","
     << format_double(rep.expected_eigenvalue.imag()) << ","
     << format_double(rep.residual_norm) << "," << format_double(rep.truncation_budget)
     << "," << to_string(rep.verdict) << "\n";
  return os.str();
}

}  // namespace oscitime

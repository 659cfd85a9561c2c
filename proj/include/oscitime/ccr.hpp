#pragma once

#include <functional>
#include <optional>
#include <string>

#include "oscitime/fock.hpp"
#include "oscitime/operators.hpp"

namespace oscitime {

enum class Verdict { Pass, Fail, Inconclusive };
const char* to_string(Verdict v);

struct CcrReport {
  double residual_norm = 0.0;
  cplx expected_eigenvalue;
  std::string domain_tag;
  std::string vector_id;
  double truncation_budget = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::string note;
};

using VectorOp = std::function<FockVector(const FockVector&)>;

struct CcrOptions {
  // Certified bound on the truncation contribution to the residual; the
  // verdict compares against tol + budget.
  double truncation_budget = 0.0;
  // Largest support index the check may trust; beyond it the verdict is
  // Inconclusive (never a silent Fail).
  std::optional<std::size_t> support_limit;
  std::string domain_tag;
  std::string vector_id;
};

// Residual of [N, T] phi = expected * phi:
//   r = N(T phi) - T(N phi) - expected * phi.
// The expected eigenvalue is explicit so the engine covers conjugate
// operators that are not time operators (-i, c, -m scalings).
CcrReport ccr_check(const VectorOp& t_apply, const FockVector& phi, cplx expected,
                    double tol, const CcrOptions& opts = {});

// Direct-sum element of the even/odd sector decomposition.
struct SectorPair {
  FockVector even;
  FockVector odd;
};

// Sesquilinear form T[phi,psi] = T0[phi_e,psi_e] + T1[phi_o,psi_o] with
// Ti[phi,psi] = {(S_i phi, psi) + (phi, S_i psi)}/2 (conjugate-linear in the
// first slot).
struct UltraWeakForm {
  VectorOp s_even;
  VectorOp s_odd;
};

cplx ultraweak_eval(const UltraWeakForm& form, const SectorPair& phi,
                    const SectorPair& psi);

struct UltraweakReport {
  double ccr_defect = 0.0;       // |T[N phi, psi] - conj(T[N psi, phi]) + i (phi, psi)|
  double symmetry_defect = 0.0;  // |T[phi,psi] - conj(T[psi,phi])|
  bool pass = false;
};

UltraweakReport ultraweak_ccr_check(const UltraWeakForm& form, const SectorPair& phi,
                                    const SectorPair& psi, double tol);

struct KennardReport {
  double sigma_a = 0.0;
  double sigma_b = 0.0;
  cplx commutator_expectation;
  double slack = 0.0;  // sigma_a sigma_b - |<[A,B]>|/2
  bool input_normalized = false;
  bool pass = false;
};

// Kennard inequality on psi: sigma_A sigma_B >= |<[A,B]>_psi| / 2. A non-unit
// psi is normalized with a warning flag.
KennardReport kennard_check(const BandedOperator& a, const VectorOp& b_apply,
                            const FockVector& psi);

std::string ccr_report_csv_header();
std::string ccr_report_csv_row(const std::string& family, const CcrReport& rep);

}  // namespace oscitime

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oscitime/fock.hpp"
#include "oscitime/operators.hpp"

namespace oscitime {

// Stopping contract for the power-series functional calculus. Convergence is
// decided on increment norms; streak consecutive sub-tol increments are
// required to rule out slow oscillatory tails.
struct SeriesPolicy {
  double tol = 1e-14;
  int streak = 3;
  long k_max = 100000;
  double divergence_factor = 1e6;
  bool record_trace = false;
};

enum class SeriesStatus { Converged, Diverged, Capped };

struct SeriesReport {
  long terms_used = 0;
  double last_increment = 0.0;
  SeriesStatus status = SeriesStatus::Converged;
  std::vector<double> partial_norm_trace;
  // Set when the increments rebounded after decaying: the truncation edge
  // started to contaminate the iterates and the best partial sum was kept.
  // last_increment then reports the achieved accuracy floor.
  bool truncation_guard_hit = false;
};

std::string to_json(const SeriesReport& r);
const char* to_string(SeriesStatus s);

enum class SeriesKind { Log, Exp, Arctan };

// Power-series application per the definitions used throughout:
//   log A f    = -sum_{k>=1} (1/k) (1-A)^k f
//   e^A f      =  sum_{k>=0} (1/k!) A^k f
//   arctan(A)f = -sum_{k>=0} (-1)^k/(2k+1) A^{2k+1} f
// One running vector, O(terms * bandwidth * dim); (1-A)^k is never
// materialized. Divergence is a report status, not an exception.
std::pair<FockVector, SeriesReport> series_apply(SeriesKind kind,
                                                 const BandedOperator& a,
                                                 const FockVector& v,
                                                 const SeriesPolicy& policy = {});

// Log(omega 1 - A) phi = log(omega) phi - sum_{k>=1} (1/k) (A/omega)^k phi,
// |omega| = 1; the scalar log takes the principal branch arg in (-pi, pi].
std::pair<FockVector, SeriesReport> principal_log_apply(cplx omega,
                                                        const BandedOperator& a,
                                                        const FockVector& v,
                                                        const SeriesPolicy& policy = {});

// Contour logarithm (1/2 pi i) \oint_{|z|=r} log(omega - z^m) (z-A)^{-1} dz
// by the trapezoidal rule on q equispaced points; every resolvent is solved
// densely (well-conditioned for |z| > ||A||). Requires 1 < r < |omega|^{1/m}
// and r above the norm estimate of A by a margin.
DenseMatrix dunford_log(cplx omega, unsigned m, const BandedOperator& a,
                        double r, std::size_t q);

// Partial inner products s_K = <xi_probe, sum_{k<=K} (1/k)(1-A)^k v> for
// K = 1..k_count; harmonic growth of |s_K| witnesses a trivial log domain.
std::vector<cplx> divergence_probe(const BandedOperator& a, const FockVector& v,
                                   std::size_t probe_index, std::size_t k_count);

std::string divergence_trace_csv(const std::vector<cplx>& trace);

}  // namespace oscitime

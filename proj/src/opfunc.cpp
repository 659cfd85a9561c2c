#include "oscitime/opfunc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace oscitime {

const char* to_string(SeriesStatus s) {
  switch (s) {
    case SeriesStatus::Converged: return "converged";
    case SeriesStatus::Diverged: return "diverged";
    default: return "capped";
  }
}

std::string to_json(const SeriesReport& r) {
  std::ostringstream os;
  os << "{\"terms_used\":" << r.terms_used
     << ",\"last_increment\":" << format_double(r.last_increment)
     << ",\"status\":\"" << to_string(r.status) << "\"";
  if (!r.partial_norm_trace.empty()) {
    os << ",\"partial_norm_trace\":[";
    for (std::size_t i = 0; i < r.partial_norm_trace.size(); ++i)
      os << (i ? "," : "") << format_double(r.partial_norm_trace[i]);
    os << "]";
  }
  os << "}";
  return os.str();
}

namespace {

void require_series_domain(const BandedOperator& a, const FockVector& v) {
  if (a.dim() != v.dim()) throw dimension_mismatch("series_apply: dim mismatch");
  // Lowering-only operators keep the truncation exact for any vector; with a
  // raising part the caller must supply a tail certificate and account the
  // budget downstream.
  if (!v.tail && !a.offsets_at_least(0))
    throw domain_error("series: vector must carry a tail certificate when the operator raises support");
}

struct Accumulator {
  explicit Accumulator(std::size_t dim) : sum(dim, 0.0) {}
  std::vector<cplx> sum;

  double add(const std::vector<cplx>& term, cplx weight) {
    double inc2 = 0.0;
    for (std::size_t i = 0; i < sum.size(); ++i) {
      cplx t = weight * term[i];
      sum[i] += t;
      inc2 += std::norm(t);
    }
    return std::sqrt(inc2);
  }

  double norm() const {
    double s = 0.0;
    for (cplx c : sum) s += std::norm(c);
    return std::sqrt(s);
  }
};

// Watches for the truncation-edge instability of (1-A)^k on compressed
// operators: once the increments have decayed well below their starting size,
// a strong rebound can only come from coefficients orphaned at the truncation
// edge (their infinite-picture siblings are missing, and the defect grows
// binomially). The best partial sum seen so far is kept and restored.
struct EdgeGuard {
  double first_increment = -1.0;
  double best_increment = std::numeric_limits<double>::infinity();
  long best_k = 0;
  std::vector<cplx> best_sum;

  // Returns true when contamination is detected and the caller should stop.
  bool observe(long k, double increment, const std::vector<cplx>& sum) {
    if (first_increment < 0.0) first_increment = increment;
    if (increment < best_increment) {
      best_increment = increment;
      best_k = k;
      best_sum = sum;
      return false;
    }
    return increment > 100.0 * best_increment &&
           best_increment < 1e-3 * std::max(first_increment, 1e-300);
  }

  void restore(SeriesReport& rep, std::vector<cplx>& sum) const {
    rep.truncation_guard_hit = true;
    rep.terms_used = best_k;
    rep.last_increment = best_increment;
    sum = best_sum;
  }
};

std::pair<FockVector, SeriesReport> run_series(
    const BandedOperator& stepper, const FockVector& v,
    const SeriesPolicy& policy,
    const std::function<cplx(long)>& weight,  // weight of term k (k >= 1)
    cplx constant_term /* multiple of v added up front */) {
  SeriesReport rep;
  Accumulator acc(v.dim());
  double v_norm = norm(v);
  if (constant_term != cplx(0.0, 0.0)) acc.add(v.coeffs, constant_term);

  std::vector<cplx> running = v.coeffs;
  EdgeGuard guard;
  int quiet = 0;
  for (long k = 1; k <= policy.k_max; ++k) {
    running = stepper.apply_raw(running);
    rep.terms_used = k;
    rep.last_increment = acc.add(running, weight(k));
    if (policy.record_trace) rep.partial_norm_trace.push_back(acc.norm());
    // An exactly-zero running vector stays zero forever: the series has
    // terminated, not merely converged.
    if (rep.last_increment == 0.0) {
      rep.status = SeriesStatus::Converged;
      FockVector out;
      out.coeffs = std::move(acc.sum);
      return {std::move(out), rep};
    }
    if (guard.observe(k, rep.last_increment, acc.sum)) {
      guard.restore(rep, acc.sum);
      rep.status = rep.last_increment <= policy.tol ? SeriesStatus::Converged
                                                    : SeriesStatus::Capped;
      FockVector out;
      out.coeffs = std::move(acc.sum);
      return {std::move(out), rep};
    }
    if (rep.last_increment <= policy.tol) {
      if (++quiet >= policy.streak) {
        rep.status = SeriesStatus::Converged;
        FockVector out;
        out.coeffs = std::move(acc.sum);
        out.tail = std::nullopt;
        return {std::move(out), rep};
      }
    } else {
      quiet = 0;
    }
    if (acc.norm() > policy.divergence_factor * std::max(v_norm, 1e-300)) {
      rep.status = SeriesStatus::Diverged;
      FockVector out;
      out.coeffs = std::move(acc.sum);
      return {std::move(out), rep};
    }
  }
  rep.status = SeriesStatus::Capped;
  FockVector out;
  out.coeffs = std::move(acc.sum);
  return {std::move(out), rep};
}

}  // namespace

std::pair<FockVector, SeriesReport> series_apply(SeriesKind kind,
                                                 const BandedOperator& a,
                                                 const FockVector& v,
                                                 const SeriesPolicy& policy) {
  require_series_domain(a, v);
  switch (kind) {
    case SeriesKind::Log: {
      // -sum (1/k) (1-A)^k v
      BandedOperator step = add(identity(a.dim()), scale(-1.0, a));
      return run_series(step, v, policy,
                        [](long k) { return cplx(-1.0 / static_cast<double>(k)); }, 0.0);
    }
    case SeriesKind::Exp: {
      // sum (1/k!) A^k v; fold 1/k! into the running vector via 1/k steps.
      SeriesReport rep;
      Accumulator acc(v.dim());
      acc.add(v.coeffs, 1.0);
      std::vector<cplx> running = v.coeffs;
      EdgeGuard guard;
      int quiet = 0;
      double v_norm = norm(v);
      for (long k = 1; k <= policy.k_max; ++k) {
        running = a.apply_raw(running);
        for (auto& c : running) c /= static_cast<double>(k);
        rep.terms_used = k;
        rep.last_increment = acc.add(running, 1.0);
        if (policy.record_trace) rep.partial_norm_trace.push_back(acc.norm());
        if (rep.last_increment == 0.0) {
          rep.status = SeriesStatus::Converged;
          break;
        }
        if (guard.observe(k, rep.last_increment, acc.sum)) {
          guard.restore(rep, acc.sum);
          rep.status = rep.last_increment <= policy.tol ? SeriesStatus::Converged
                                                        : SeriesStatus::Capped;
          break;
        }
        if (rep.last_increment <= policy.tol) {
          if (++quiet >= policy.streak) {
            rep.status = SeriesStatus::Converged;
            break;
          }
        } else {
          quiet = 0;
        }
        if (acc.norm() > policy.divergence_factor * std::max(v_norm, 1e-300)) {
          rep.status = SeriesStatus::Diverged;
          break;
        }
        if (k == policy.k_max) rep.status = SeriesStatus::Capped;
      }
      FockVector out;
      out.coeffs = std::move(acc.sum);
      return {std::move(out), rep};
    }
    case SeriesKind::Arctan: {
      // -sum_{k>=0} (-1)^k/(2k+1) A^{2k+1} v
      SeriesReport rep;
      Accumulator acc(v.dim());
      std::vector<cplx> running = a.apply_raw(v.coeffs);  // A v
      BandedOperator a2 = compose(a, a);
      rep.terms_used = 1;
      rep.last_increment = acc.add(running, -1.0);
      EdgeGuard guard;
      int quiet = 0;
      double v_norm = norm(v);
      rep.status = SeriesStatus::Capped;
      for (long k = 1; k <= policy.k_max; ++k) {
        running = a2.apply_raw(running);
        double sign = (k % 2 == 0) ? -1.0 : 1.0;
        rep.terms_used = k + 1;
        rep.last_increment = acc.add(running, sign / (2.0 * k + 1.0));
        if (policy.record_trace) rep.partial_norm_trace.push_back(acc.norm());
        if (rep.last_increment == 0.0) {
          rep.status = SeriesStatus::Converged;
          break;
        }
        if (guard.observe(k, rep.last_increment, acc.sum)) {
          guard.restore(rep, acc.sum);
          rep.status = rep.last_increment <= policy.tol ? SeriesStatus::Converged
                                                        : SeriesStatus::Capped;
          break;
        }
        if (rep.last_increment <= policy.tol) {
          if (++quiet >= policy.streak) {
            rep.status = SeriesStatus::Converged;
            break;
          }
        } else {
          quiet = 0;
        }
        if (acc.norm() > policy.divergence_factor * std::max(v_norm, 1e-300)) {
          rep.status = SeriesStatus::Diverged;
          break;
        }
      }
      FockVector out;
      out.coeffs = std::move(acc.sum);
      return {std::move(out), rep};
    }
  }
  throw std::logic_error("series_apply: unknown kind");
}

std::pair<FockVector, SeriesReport> principal_log_apply(cplx omega,
                                                        const BandedOperator& a,
                                                        const FockVector& v,
                                                        const SeriesPolicy& policy) {
  if (std::abs(std::abs(omega) - 1.0) > 1e-12)
    throw domain_error("principal_log_apply: |omega| must equal 1 (use series_apply or dunford_log)");
  require_series_domain(a, v);
  BandedOperator step = scale(1.0 / omega, a);
  return run_series(step, v, policy,
                    [](long k) { return cplx(-1.0 / static_cast<double>(k)); },
                    std::log(omega));
}

// --- Dunford contour --------------------------------------------------------

namespace {

// Dense LU with partial pivoting; factor once per contour point, then solve
// for all identity columns.
struct Lu {
  std::size_t n;
  std::vector<cplx> a;     // factored in place
  std::vector<std::size_t> piv;

  explicit Lu(DenseMatrix m) : n(m.rows), a(std::move(m.a)), piv(n) {
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      double best = std::abs(a[k * n + k]);
      for (std::size_t i = k + 1; i < n; ++i) {
        double cand = std::abs(a[i * n + k]);
        if (cand > best) {
          best = cand;
          p = i;
        }
      }
      if (best == 0.0) throw contour_error("dunford_log: singular shift z - A on the contour");
      piv[k] = p;
      if (p != k)
        for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[p * n + j]);
      cplx pivval = a[k * n + k];
      for (std::size_t i = k + 1; i < n; ++i) {
        cplx f = a[i * n + k] / pivval;
        a[i * n + k] = f;
        if (f != cplx(0.0, 0.0))
          for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
      }
    }
  }

  void solve(std::vector<cplx>& b) const {
    for (std::size_t k = 0; k < n; ++k)
      if (piv[k] != k) std::swap(b[k], b[piv[k]]);
    for (std::size_t i = 1; i < n; ++i) {
      cplx s = b[i];
      for (std::size_t j = 0; j < i; ++j) s -= a[i * n + j] * b[j];
      b[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
      cplx s = b[i];
      for (std::size_t j = i + 1; j < n; ++j) s -= a[i * n + j] * b[j];
      b[i] = s / a[i * n + i];
    }
  }
};

}  // namespace

DenseMatrix dunford_log(cplx omega, unsigned m, const BandedOperator& op,
                        double r, std::size_t q) {
  if (m == 0) throw domain_error("dunford_log: m must be positive");
  double omega_radius = std::pow(std::abs(omega), 1.0 / static_cast<double>(m));
  if (!(r > 1.0) || !(r < omega_radius))
    throw contour_error("dunford_log: no admissible contour radius in (1, |omega|^{1/m})");
  double nrm = operator_norm_estimate(op);
  if (r - nrm < 0.05)
    throw contour_error("dunford_log: contour radius too close to the numerical spectrum (margin " +
                        format_double(r - nrm) + ")");
  if (q < 8) throw domain_error("dunford_log: need at least 8 quadrature points");

  // Branch guard: log f must be single-valued on the contour.
  double min_mod = std::numeric_limits<double>::infinity();
  double winding = 0.0;
  cplx prev_f;
  for (std::size_t j = 0; j <= q; ++j) {
    double th = 2.0 * kPi * static_cast<double>(j % q) / static_cast<double>(q);
    cplx z = std::polar(r, th);
    cplx f = omega - std::pow(z, static_cast<double>(m));
    min_mod = std::min(min_mod, std::abs(f));
    if (j > 0) winding += std::arg(f / prev_f);
    prev_f = f;
  }
  if (min_mod < 1e-10)
    throw branch_error("dunford_log: omega - z^m vanishes on the contour");
  if (std::abs(winding) > 1e-6)
    throw branch_error("dunford_log: log(omega - z^m) is not single-valued on the contour");

  const std::size_t d = op.dim();
  DenseMatrix acc(d, d);
  DenseMatrix a_dense = op.materialize();
  for (std::size_t j = 0; j < q; ++j) {
    double th = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(q);
    cplx z = std::polar(r, th);
    cplx f = omega - std::pow(z, static_cast<double>(m));
    // (1/2 pi i) * log f(z) * dz with dz = i z dtheta: weight z log f / q.
    cplx w = z * std::log(f) / static_cast<double>(q);

    DenseMatrix shifted(d, d);
    for (std::size_t i = 0; i < d * d; ++i) shifted.a[i] = -a_dense.a[i];
    for (std::size_t i = 0; i < d; ++i) shifted.at(i, i) += z;
    Lu lu(std::move(shifted));
    std::vector<cplx> col(d);
    for (std::size_t c = 0; c < d; ++c) {
      std::fill(col.begin(), col.end(), cplx(0.0));
      col[c] = 1.0;
      lu.solve(col);
      for (std::size_t i = 0; i < d; ++i) acc.at(i, c) += w * col[i];
    }
  }
  return acc;
}

std::vector<cplx> divergence_probe(const BandedOperator& a, const FockVector& v,
                                   std::size_t probe_index, std::size_t k_count) {
  if (a.dim() != v.dim()) throw dimension_mismatch("divergence_probe: dim mismatch");
  if (probe_index >= v.dim())
    throw truncation_error("divergence_probe: probe index outside truncation");
  BandedOperator step = add(identity(a.dim()), scale(-1.0, a));
  std::vector<cplx> out;
  out.reserve(k_count);
  std::vector<cplx> running = v.coeffs;
  cplx s = 0.0;
  for (std::size_t k = 1; k <= k_count; ++k) {
    running = step.apply_raw(running);
    s += running[probe_index] / static_cast<double>(k);
    out.push_back(s);
  }
  return out;
}

std::string divergence_trace_csv(const std::vector<cplx>& trace) {
  std::ostringstream os;
  os << "K,re_sK,im_sK\n";
  for (std::size_t k = 0; k < trace.size(); ++k)
    os << (k + 1) << "," << format_double(trace[k].real()) << ","
       << format_double(trace[k].imag()) << "\n";
  return os.str();
}

}  // namespace oscitime

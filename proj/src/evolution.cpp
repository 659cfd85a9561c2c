#include "oscitime/evolution.hpp"

#include <cmath>
#include <sstream>

#include "oscitime/opfunc.hpp"

namespace oscitime {

BandedOperator boundary_time_operator_evolved(cplx omega, unsigned m, double t,
                                              std::size_t dim) {
  if (m == 0) throw domain_error("boundary_time_operator_evolved: m must be positive");
  if (std::abs(std::abs(omega) - 1.0) > 1e-12)
    throw domain_error("boundary_time_operator_evolved: |omega| must equal 1");
  std::map<int, BandedOperator::Gen> bands;
  double md = static_cast<double>(m);
  cplx diag = cplx(0.0, 1.0) / md * (std::log(omega) - std::log(std::conj(omega)));
  if (diag != cplx(0.0, 0.0))
    bands[0] = [diag](std::size_t) { return diag; };
  cplx rot = std::exp(cplx(0.0, -t * md));
  cplx up_base = rot * std::conj(omega);
  cplx down_base = std::conj(rot) * omega;
  cplx up_pow = 1.0, down_pow = 1.0;
  for (unsigned k = 1; k * m < dim; ++k) {
    up_pow *= up_base;
    down_pow *= down_base;
    cplx up = cplx(0.0, -1.0) / (md * k) * up_pow;
    cplx down = cplx(0.0, 1.0) / (md * k) * down_pow;
    bands[static_cast<int>(k * m)] = [up](std::size_t) { return up; };
    bands[-static_cast<int>(k * m)] = [down](std::size_t) { return down; };
  }
  return BandedOperator(dim, std::move(bands));
}

EvolvedBoundary evolve_boundary(const EvolutionParams& params, std::size_t dim) {
  EvolvedBoundary out;
  // Conjugation route: entry (n, m) of e^{itN} T e^{-itN} is e^{it(n-m)} T_{nm}.
  DenseMatrix base = boundary_time_operator(params.omega, params.m, dim).materialize();
  out.conjugated = DenseMatrix(dim, dim);
  for (std::size_t n = 0; n < dim; ++n)
    for (std::size_t mm = 0; mm < dim; ++mm) {
      double phase = params.t * (static_cast<double>(n) - static_cast<double>(mm));
      out.conjugated.at(n, mm) = std::exp(cplx(0.0, phase)) * base.at(n, mm);
    }
  out.direct =
      boundary_time_operator_evolved(params.omega, params.m, params.t, dim).materialize();
  out.agreement = max_entry_diff(out.conjugated, out.direct);
  return out;
}

PeriodicityReport periodicity_check(const EvolutionParams& params, std::size_t dim) {
  double period = 2.0 * kPi / static_cast<double>(params.m);
  DenseMatrix a =
      boundary_time_operator_evolved(params.omega, params.m, params.t, dim).materialize();
  DenseMatrix b = boundary_time_operator_evolved(params.omega, params.m,
                                                 params.t + period, dim)
                      .materialize();
  PeriodicityReport rep;
  rep.deviation = max_entry_diff(a, b);
  rep.pass = rep.deviation <= 1e-12;
  return rep;
}

double angle_evolution_periodicity(cplx beta, double t, std::size_t dim) {
  FockVector s = super_coherent_vector(beta, 0, Truncation::fixed(dim));
  SeriesPolicy policy;
  auto evolved_apply = [&](double time) {
    cplx rot = std::exp(cplx(0.0, -2.0 * time));
    BandedOperator inner(dim, {{+2, [rot](std::size_t n) {
                                  double nn = static_cast<double>(n);
                                  return rot * std::sqrt((nn + 2.0) / (nn + 1.0));
                                }}});
    auto [res, rep] = series_apply(SeriesKind::Log, inner, s, policy);
    return scaled(cplx(0.0, 0.5), res);
  };
  FockVector a = evolved_apply(t);
  FockVector b = evolved_apply(t + kPi);
  return norm(sub(a, b));
}

WeakWeylReport weak_weyl_failure_probe(const EvolutionParams& params, std::size_t dim) {
  WeakWeylReport rep;
  rep.degenerate = params.t == 0.0;
  rep.weak_weyl_gap = std::abs(params.t);
  DenseMatrix evolved =
      boundary_time_operator_evolved(params.omega, params.m, params.t, dim).materialize();
  DenseMatrix base = boundary_time_operator(params.omega, params.m, dim).materialize();
  double worst = 0.0;
  for (std::size_t n = 0; n < dim; ++n)
    worst = std::max(worst, std::abs(evolved.at(n, n) - base.at(n, n)));
  rep.diagonal_invariance = worst;
  return rep;
}

std::string evolution_csv_header() { return "omega_re,omega_im,m,t,deviation\n"; }

std::string evolution_csv_row(const EvolutionParams& params, double deviation) {
  std::ostringstream os;
  os << format_double(params.omega.real()) << "," << format_double(params.omega.imag())
     << "," << params.m << "," << format_double(params.t) << ","
     << format_double(deviation) << "\n";
  return os.str();
}

}  // namespace oscitime

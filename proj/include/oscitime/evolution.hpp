#pragma once

#include <string>

#include "oscitime/conjugates.hpp"
#include "oscitime/operators.hpp"

namespace oscitime {

struct EvolutionParams {
  double t = 0.0;
  cplx omega;
  unsigned m = 1;
};

// Heisenberg evolution of the boundary operator, both constructions:
// conjugation by the exact diagonal phase e^{itN}, and the direct band form
// with L^m replaced by e^{-itm} L^m.
struct EvolvedBoundary {
  DenseMatrix conjugated;
  DenseMatrix direct;
  double agreement = 0.0;  // max entrywise deviation
};

EvolvedBoundary evolve_boundary(const EvolutionParams& params, std::size_t dim);

// Direct band form of L_{m,omega}(t).
BandedOperator boundary_time_operator_evolved(cplx omega, unsigned m, double t,
                                              std::size_t dim);

struct PeriodicityReport {
  double deviation = 0.0;  // max entrywise |T(t) - T(t + 2 pi/m)|
  bool pass = false;
};

// Dense comparison T(t) against T(t + 2 pi/m) for the boundary family.
PeriodicityReport periodicity_check(const EvolutionParams& params, std::size_t dim);

// Vector-wise periodicity of the evolved angle inner form on a super coherent
// vector: ||T(t) s - T(t + pi) s||. The inner operator picks up the factor
// e^{-2it}, so the period is pi.
double angle_evolution_periodicity(cplx beta, double t, std::size_t dim);

struct WeakWeylReport {
  double diagonal_invariance = 0.0;  // max |diag T(t) - diag T|; 0 up to rounding
  double weak_weyl_gap = 0.0;        // |t|: the diagonal shift the relation would force
  bool degenerate = false;           // t == 0
};

// Conjugation by a diagonal unitary fixes the diagonal, while the weak Weyl
// relation would shift it by t; the surviving gap |t| witnesses that no
// strong time operator exists for N.
WeakWeylReport weak_weyl_failure_probe(const EvolutionParams& params, std::size_t dim);

std::string evolution_csv_header();
std::string evolution_csv_row(const EvolutionParams& params, double deviation);

}  // namespace oscitime

#include "oscitime/hermite.hpp"

#include <cmath>
#include <sstream>

namespace oscitime {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw domain_error("gaussian profile: alpha must lie in (0,1)");
}

}  // namespace

double hermite_poly_normalized(std::size_t n, double x) {
  // Orthonormal (physicists') Hermite recurrence with the Gaussian removed:
  // p_0 = pi^{-1/4}, p_{k+1} = x sqrt(2/(k+1)) p_k - sqrt(k/(k+1)) p_{k-1}.
  double pm1 = 0.0;
  double p = std::pow(kPi, -0.25);
  for (std::size_t k = 0; k < n; ++k) {
    double kk = static_cast<double>(k);
    double next = x * std::sqrt(2.0 / (kk + 1.0)) * p - std::sqrt(kk / (kk + 1.0)) * pm1;
    pm1 = p;
    p = next;
  }
  return p;
}

GaussHermiteRule gauss_hermite_rule(std::size_t q) {
  if (q < 1) throw domain_error("gauss_hermite_rule: need at least one point");
  GaussHermiteRule rule;
  rule.nodes.resize(q);
  rule.weights.resize(q);

  // Newton on the orthonormal polynomial p_q; classic initial guesses march
  // inward from the largest root.
  double z = 0.0;
  std::size_t half = (q + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double nq = static_cast<double>(q);
    if (i == 0) {
      z = std::sqrt(2.0 * nq + 1.0) - 1.85575 * std::pow(2.0 * nq + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(nq, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.nodes[1];
    } else {
      z = 2.0 * z - rule.nodes[i - 2];
    }
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double pm1 = 0.0;
      double p = std::pow(kPi, -0.25);
      for (std::size_t k = 0; k < q; ++k) {
        double kk = static_cast<double>(k);
        double next = z * std::sqrt(2.0 / (kk + 1.0)) * p - std::sqrt(kk / (kk + 1.0)) * pm1;
        pm1 = p;
        p = next;
      }
      pp = std::sqrt(2.0 * nq) * pm1;  // p_q'(z) = sqrt(2q) p_{q-1}(z)
      double dz = p / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    rule.nodes[i] = z;
    rule.nodes[q - 1 - i] = -z;
    double w = 2.0 / (pp * pp);
    rule.weights[i] = w;
    rule.weights[q - 1 - i] = w;
  }
  if (q % 2 == 1) rule.nodes[q / 2] = 0.0;
  return rule;
}

FockVector gaussian_to_fock(const GaussianProfile& profile, Truncation tr) {
  check_alpha(profile.alpha);
  double beta = (1.0 - profile.alpha) / (1.0 + profile.alpha);
  double scale_even = std::pow(kPi, 0.25) * std::sqrt(2.0 / (1.0 + profile.alpha));
  if (profile.parity == Parity::Even) {
    return scaled(scale_even, super_coherent_vector(beta, 0, tr));
  }
  double scale_odd = scale_even * std::sqrt(2.0) / (1.0 + profile.alpha);
  return scaled(scale_odd, super_coherent_vector(beta, 1, tr));
}

OverlapResult quadrature_overlap(std::size_t n, const GaussianProfile& profile,
                                 std::size_t q) {
  check_alpha(profile.alpha);
  OverlapResult res;
  unsigned p = profile.parity == Parity::Even ? 0 : 1;
  res.q_adequate = q >= n + 20;

  // integrand: p_n(x) x^p e^{-(1+alpha) x^2 / 2}; substitute x = s u with
  // s = sqrt(2/(1+alpha)) to match the e^{-u^2} weight.
  double s = std::sqrt(2.0 / (1.0 + profile.alpha));
  GaussHermiteRule rule = gauss_hermite_rule(q);
  double acc = 0.0;
  for (std::size_t i = 0; i < q; ++i) {
    double x = s * rule.nodes[i];
    double val = hermite_poly_normalized(n, x);
    if (p == 1) val *= x;
    acc += rule.weights[i] * val;
  }
  acc *= s;
  res.value = acc;
  if (!res.q_adequate) {
    // One coarser rule gives a crude error estimate.
    std::size_t q2 = q > 4 ? q - 2 : q;
    GaussHermiteRule rule2 = gauss_hermite_rule(q2);
    double acc2 = 0.0;
    for (std::size_t i = 0; i < q2; ++i) {
      double x = s * rule2.nodes[i];
      double val = hermite_poly_normalized(n, x);
      if (p == 1) val *= x;
      acc2 += rule2.weights[i] * val;
    }
    acc2 *= s;
    res.est_error = std::abs(acc - acc2);
  }
  return res;
}

BridgeReport bridge_check(double alpha, std::size_t n_max, double tol) {
  check_alpha(alpha);
  BridgeReport rep;
  std::size_t dim = std::max<std::size_t>(n_max + 2, 16);
  for (int par = 0; par < 2; ++par) {
    GaussianProfile prof{alpha, par == 0 ? Parity::Even : Parity::Odd};
    FockVector analytic = gaussian_to_fock(prof, Truncation::fixed(dim));
    double& worst = par == 0 ? rep.max_deviation_even : rep.max_deviation_odd;
    for (std::size_t n = 0; n <= n_max; ++n) {
      double quad = quadrature_overlap(n, prof, n + 24).value.real();
      worst = std::max(worst, std::abs(analytic.coeffs[n].real() - quad));
    }
  }
  rep.pass = rep.max_deviation_even <= tol && rep.max_deviation_odd <= tol;
  return rep;
}

std::string bridge_table_csv(double alpha, std::size_t n_max) {
  check_alpha(alpha);
  std::size_t dim = std::max<std::size_t>(n_max + 2, 16);
  std::ostringstream os;
  os << "n,parity,re,im,quadrature_re,deviation\n";
  for (int par = 0; par < 2; ++par) {
    GaussianProfile prof{alpha, par == 0 ? Parity::Even : Parity::Odd};
    FockVector analytic = gaussian_to_fock(prof, Truncation::fixed(dim));
    for (std::size_t n = 0; n <= n_max; ++n) {
      double quad = quadrature_overlap(n, prof, n + 24).value.real();
      double dev = std::abs(analytic.coeffs[n].real() - quad);
      os << n << "," << (par == 0 ? "even" : "odd") << ","
         << format_double(analytic.coeffs[n].real()) << ","
         << format_double(analytic.coeffs[n].imag()) << "," << format_double(quad)
         << "," << format_double(dev) << "\n";
    }
  }
  return os.str();
}

}  // namespace oscitime

#include "ridgelab/counterexample.hpp"

#include <stdexcept>
#include <string>

namespace ridgelab {

void TwoPointDistribution::validate() const {
  if (!(A > 0.0)) throw std::invalid_argument("A must be > 0");
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in [0, 1)");
}

double population_risk(double beta1, double beta2, const TwoPointDistribution& dist) {
  const double e1 = beta1 - 1.0;
  return (1.0 - dist.eps) * e1 * e1 + dist.eps * (beta2 * beta2 + dist.A * dist.A);
}

std::vector<SampleOutcome> enumerate_outcomes(int n, double lambda, const TwoPointDistribution& dist) {
  dist.validate();
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  const double e = dist.eps;
  const double q = 1.0 - e;
  // Ridge on k copies of a coordinate with summed response s: s / (k + lambda).
  const double u = 1.0 / (1.0 + lambda);
  const double v = 1.0 / (2.0 + lambda);
  const double A = dist.A;
  switch (n) {
    case 1:
      return {
          {q, u, 0.0},
          {e / 2, 0.0, A * u},
          {e / 2, 0.0, -A * u},
      };
    case 2:
      return {
          {q * q, 2.0 * v, 0.0},
          {q * e, u, A * u},  // clean + noisy(+A), either order
          {q * e, u, -A * u},
          {e * e / 4, 0.0, 2.0 * A * v},
          {e * e / 4, 0.0, -2.0 * A * v},
          {e * e / 2, 0.0, 0.0},  // opposite signs cancel
      };
    default:
      throw std::invalid_argument("exact enumeration supports n in {1, 2}, got " + std::to_string(n));
  }
}

double exact_expected_risk(int n, double lambda, const TwoPointDistribution& dist) {
  double total = 0.0;
  for (const SampleOutcome& o : enumerate_outcomes(n, lambda, dist))
    total += o.probability * population_risk(o.beta1, o.beta2, dist);
  return total;
}

double null_risk(const TwoPointDistribution& dist) { return (1.0 - dist.eps) + dist.eps * dist.A * dist.A; }

CounterexampleOptimum optimal_counterexample(int n, const TwoPointDistribution& dist, double rel_tol) {
  dist.validate();
  if (n != 1 && n != 2) throw std::invalid_argument("exact enumeration supports n in {1, 2}, got " + std::to_string(n));
  CounterexampleOptimum out;
  SearchOptions opts;
  opts.rel_tol = rel_tol;
  opts.null_risk = null_risk(dist);
  const double hi = lambda_search_cap(2, 1.0, dist.A * dist.A);
  out.search = minimize_over_lambda([&](double lam) { return exact_expected_risk(n, lam, dist); }, 0.0, hi, opts);
  if (n == 1) {
    const double q = 1.0 - dist.eps;
    out.analytic_lambda = dist.eps * dist.eps * dist.A * dist.A / (q * q);
  }
  return out;
}

NonmonotonicityReport verify_nonmonotonicity(const TwoPointDistribution& dist) {
  const CounterexampleOptimum one = optimal_counterexample(1, dist);
  const CounterexampleOptimum two = optimal_counterexample(2, dist);
  NonmonotonicityReport r;
  // The closed-form n = 1 optimum is exact; the search only confirms it.
  r.lambda1 = one.analytic_lambda.value_or(one.search.lambda_opt);
  r.risk1 = exact_expected_risk(1, r.lambda1, dist);
  if (one.search.risk_at_opt < r.risk1 * (1.0 - 1e-12)) {
    r.lambda1 = one.search.lambda_opt;
    r.risk1 = one.search.risk_at_opt;
  }
  r.lambda2 = two.search.lambda_opt;
  r.risk2 = two.search.risk_at_opt;
  r.gap = r.risk2 - r.risk1;
  r.increases = r.gap > 0.0;
  return r;
}

double conditional_risk_clean(double lambda, const TwoPointDistribution& dist) {
  return population_risk(1.0 / (1.0 + lambda), 0.0, dist);
}

double conditional_risk_noisy(double lambda, const TwoPointDistribution& dist) {
  return population_risk(0.0, dist.A / (1.0 + lambda), dist);
}

}  // namespace ridgelab

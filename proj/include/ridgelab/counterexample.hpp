#pragma once

#include <array>
#include <optional>
#include <vector>

#include "ridgelab/tuner.hpp"

namespace ridgelab {

/// Heteroscedastic distribution on R^2 x R:
///   (e1, 1)  with probability 1 - eps,
///   (e2, +-A) with probability eps, sign uniform.
/// E[y | x] = <(1, 0), x>, so the problem is well specified.
struct TwoPointDistribution {
  double A = 20.0;
  double eps = 0.02;

  void validate() const;
};

/// One equally weighted outcome class of an n-sample draw: probability and the
/// resulting ridge estimate.
struct SampleOutcome {
  double probability;
  double beta1;
  double beta2;
};

/// Every distinct n-sample configuration (n = 1 or 2) with its probability
/// and ridge estimate at lambda.
std::vector<SampleOutcome> enumerate_outcomes(int n, double lambda, const TwoPointDistribution& dist);

/// Population risk (1 - eps)(b1 - 1)^2 + eps (b2^2 + A^2).
double population_risk(double beta1, double beta2, const TwoPointDistribution& dist);

/// Exact expected test risk of ridge with n in {1, 2} samples.
double exact_expected_risk(int n, double lambda, const TwoPointDistribution& dist);

/// Risk of the lambda -> infinity (zero) estimator, (1 - eps) + eps A^2.
double null_risk(const TwoPointDistribution& dist);

struct CounterexampleOptimum {
  LambdaSearchResult search;
  /// eps^2 A^2 / (1 - eps)^2 for n = 1.
  std::optional<double> analytic_lambda;
};

CounterexampleOptimum optimal_counterexample(int n, const TwoPointDistribution& dist, double rel_tol = 1e-9);

struct NonmonotonicityReport {
  double risk1 = 0.0;
  double risk2 = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double gap = 0.0;  // risk2 - risk1
  bool increases = false;
};

NonmonotonicityReport verify_nonmonotonicity(const TwoPointDistribution& dist);

/// Risk of the n = 1 estimator conditioned on which coordinate was sampled.
double conditional_risk_clean(double lambda, const TwoPointDistribution& dist);
double conditional_risk_noisy(double lambda, const TwoPointDistribution& dist);

}  // namespace ridgelab

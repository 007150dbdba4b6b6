#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ridgelab/general.hpp"
#include "ridgelab/tuner.hpp"

namespace ridgelab {

enum class Verdict { holds, violated, inconclusive };

std::string to_string(Verdict v);

/// holds iff min_eig >= -3 se; violated iff min_eig < -3 se and
/// |min_eig| > 10 se; inconclusive otherwise.
Verdict classify(double min_eigenvalue, double std_error);

struct ConjectureInstance {
  int n = 0;
  int d = 0;
  Eigen::VectorXd q;  // diagonal of Q
  double lambda = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
};

struct PSDReport {
  double min_eigenvalue = 0.0;
  /// Weyl bound: Frobenius norm of the entrywise standard errors.
  double std_error = 0.0;
  Verdict verdict = Verdict::inconclusive;
  ConjectureInstance instance;
  /// max |A - A^T| / max |A| before symmetrization.
  double asymmetry = 0.0;
};

/// Symmetrizes, takes the smallest eigenvalue and classifies it.
PSDReport psd_report(const Eigen::MatrixXd& matrix, const Eigen::MatrixXd& entry_se, const ConjectureInstance& instance);

/// G/H estimates at n and n + 1 from one set of draws. With coupling the
/// (n+1)-row design extends the n-row one; without it the (n+1)-row design is
/// drawn independently.
struct CoupledGH {
  GHEstimate at_n;
  GHEstimate at_next;
  Eigen::MatrixXd G_diff;     // G^n - G^{n+1}
  Eigen::MatrixXd G_diff_se;  // from per-trial differences
  double H_diff = 0.0;        // H^n - H^{n+1}
  double H_diff_se = 0.0;
  bool coupled = true;
  int trials = 0;
  std::uint64_t seed = 0;
  /// Means over fixed trial batches of
  /// [G^n, dG^n, H^n, dH^n, G^{n+1}, dG^{n+1}, H^{n+1}, dH^{n+1}].
  std::vector<Eigen::ArrayXd> batch_means;
};

inline constexpr int kConditionBatches = 32;

CoupledGH estimate_coupled_GH(int n, const Eigen::MatrixXd& Q, double lambda, int trials, std::uint64_t seed,
                              bool coupled = true);

/// G^n - G^{n+1} is PSD.
PSDReport condition_one(int n, const Eigen::MatrixXd& Q, double lambda, int trials, std::uint64_t seed);
PSDReport condition_one(const CoupledGH& gh);

struct ConditionTwoReport {
  PSDReport psd;
  Eigen::MatrixXd matrix;  // (G^n - G^{n+1}) - (H^n - H^{n+1}) dG^n / dH^n
  double dH = 0.0, dH_se = 0.0;
  bool dH_resolved = false;  // |dH| > 3 SE
  double H_diff = 0.0, H_diff_se = 0.0;
  /// +1 or -1 when H^n - H^{n+1} differs from zero by more than 3 SE, else 0.
  int H_diff_sign = 0;
};

ConditionTwoReport condition_two(int n, const Eigen::MatrixXd& Q, double lambda, int trials, std::uint64_t seed);
ConditionTwoReport condition_two(const CoupledGH& gh);

enum class OptimumCase { infinite_lambda = 1, interior = 2, zero_lambda = 3 };

std::string to_string(OptimumCase c);

struct ImplicationReport {
  int n = 0;
  OptimumCase optimum_case = OptimumCase::interior;
  LambdaSearchResult search;
  RiskEstimate risk_n;     // at lambda_n^opt
  RiskEstimate risk_next;  // n + 1 samples, same lambda
  double step = 0.0;       // risk_n - risk_next
  double step_se = 0.0;    // paired SE
  Verdict step_verdict = Verdict::inconclusive;
  /// Interior case only: a^T dG a + sigma^2 dH at lambda_n^opt, a = Q beta*.
  double first_order_residual = 0.0;
  double first_order_se = 0.0;
  /// Interior case only: -a^T dG a / dH, the largest noise level compatible
  /// with a stationary point.
  double sigma_sq_bound = 0.0;
  double sigma_sq_bound_se = 0.0;
};

/// Locates lambda_n^opt on [lambda_lo, lambda_hi] (plus the null limit) and
/// checks that n + 1 samples at the same lambda do no worse.
ImplicationReport implication_check(int n, const Eigen::MatrixXd& Q, const Eigen::VectorXd& beta_star, double sigma,
                                    double lambda_lo, double lambda_hi, int trials, std::uint64_t seed);

/// implication_check over a sorted grid of n, sharing draws between neighbours.
std::vector<ImplicationReport> implication_sweep(const std::vector<int>& ns, const Eigen::MatrixXd& Q,
                                                 const Eigen::VectorXd& beta_star, double sigma, double lambda_lo,
                                                 double lambda_hi, int trials, std::uint64_t seed);

struct BatteryOptions {
  int instances = 50;
  int d_min = 2, d_max = 12;
  int n_min = 2, n_max = 12;
  double q_min = 0.1, q_max = 10.0;
  std::vector<double> lambdas{0.1, 1.0, 10.0};
  int trials = 100000;
  std::uint64_t seed = 1;
  /// Replace every Q by the identity.
  bool identity_q = false;
};

struct BatteryRow {
  int instance = 0;
  PSDReport one;
  ConditionTwoReport two;
  /// d >= n, the range the conjecture is stated for.
  bool in_domain = true;
};

/// Random instances drawn from options.seed; each is checked at every lambda.
std::vector<BatteryRow> run_battery(const BatteryOptions& options);

void write_battery_csv(std::ostream& out, const std::vector<BatteryRow>& rows);

}  // namespace ridgelab

#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ridgelab/stats.hpp"

namespace ridgelab {

/// Singular values of an n x d design, sorted non-increasing and zero-padded
/// to length d when n < d.
struct SpectrumSample {
  Eigen::VectorXd gammas;
  int n = 0;
  int d = 0;
};

/// Singular values below this fraction of the largest are exact zeros in the
/// lambda -> 0+ limit.
inline constexpr double kRankTolerance = 1e-12;

/// Computed from the eigenvalues of the smaller Gram matrix (X X^T or X^T X).
SpectrumSample singular_spectrum(const Eigen::MatrixXd& design);

/// Parameters of the isotropic problem; the risk depends on beta only through
/// its norm.
struct IsoParams {
  int d = 1;
  double beta_norm = 1.0;
  double sigma = 0.0;
};

/// sum_i (|beta|^2 lambda^2 / d + sigma^2 gamma_i^2) / (gamma_i^2 + lambda)^2.
/// lambda = 0 is the pseudoinverse limit: sigma^2 / gamma_i^2 on the numerical
/// range and |beta|^2 / d per zero singular value.
double iso_risk_summand(const Eigen::VectorXd& gammas, double lambda, const IsoParams& params);

/// Per-coordinate term S(gamma) of the summand above.
double iso_term(double gamma, double lambda, const IsoParams& params);

/// lambda-derivative of the summand:
/// 2 (|beta|^2 lambda / d - sigma^2) sum_i gamma_i^2 / (gamma_i^2 + lambda)^3.
double iso_risk_summand_derivative(const Eigen::VectorXd& gammas, double lambda, const IsoParams& params);

/// Monte-Carlo expected test risk of ridge on isotropic Gaussian data.
RiskEstimate expected_risk_iso(int n, double lambda, const IsoParams& params, int trials, std::uint64_t seed);

/// d sigma^2 / |beta|^2, or nullopt when beta = 0 (the null estimator is
/// optimal and lambda is effectively infinite).
std::optional<double> optimal_lambda_iso(int d, double sigma, double beta_norm);

/// Expected risk at the optimal lambda,
/// E[sum_i sigma^2 / (gamma_i^2 + d sigma^2 / |beta|^2)] + sigma^2.
RiskEstimate optimal_risk_iso(int n, const IsoParams& params, int trials, std::uint64_t seed);

/// Spectra of X_n and X_{n+1}, where X_{n+1} appends one row to X_n. For
/// Gaussian rows drawn from `covariance`.
std::pair<SpectrumSample, SpectrumSample> coupled_spectrum_pair(int n, int d, const Eigen::MatrixXd& covariance,
                                                                std::uint64_t seed);

/// Checks gamma_i(X_{n+1}) >= gamma_i(X_n) >= gamma_{i+1}(X_{n+1}) within tol;
/// returns the largest violation (<= tol when interlaced).
double interlacing_violation(const SpectrumSample& fewer_rows, const SpectrumSample& more_rows);

/// Spectra of one isotropic design per trial, for every sample count
/// 0..n_max. Trial t's design for n rows is the first n rows of its n_max-row
/// draw, so adjacent sample counts are coupled exactly as in the interlacing
/// argument and every lambda reuses the same draws.
class IsoSpectrumPaths {
 public:
  IsoSpectrumPaths(int n_max, int d, int trials, std::uint64_t seed);

  /// Only sample counts in `ns` are decomposed.
  IsoSpectrumPaths(const std::vector<int>& ns, int d, int trials, std::uint64_t seed);

  int d() const { return d_; }
  int trials() const { return trials_; }
  const std::vector<int>& sample_counts() const { return ns_; }

  /// Spectrum of trial t at sample count n (n must be one of sample_counts()).
  const Eigen::VectorXd& gammas(int n, int trial) const;

  /// Risk at n over the stored trials.
  RiskEstimate risk(int n, double lambda, const IsoParams& params) const;
  RiskEstimate optimal_risk(int n, const IsoParams& params) const;

  /// Per-trial summands (no +sigma^2) at n.
  std::vector<double> summands(int n, double lambda, const IsoParams& params) const;

 private:
  std::size_t index_of(int n) const;

  int d_;
  int trials_;
  std::vector<int> ns_;
  std::vector<std::vector<Eigen::VectorXd>> spectra_;  // [n index][trial]
};

}  // namespace ridgelab

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ridgelab/stats.hpp"

namespace ridgelab {

/// Ridge on d randomly projected coordinates of a p-dimensional isotropic
/// Gaussian problem. Only |theta| enters the expected risk.
struct ProjectionParams {
  int p = 1;
  double theta_norm = 1.0;
  double sigma = 0.0;
};

struct ProjectedRiskPoint {
  int d = 0;
  double lambda = 0.0;
  RiskEstimate risk;
  double sigma_tilde_sq = 0.0;
};

/// sigma^2 + ((p - d) / p) |theta|^2: the unexplained signal outside the
/// projected subspace acts as extra noise.
double sigma_tilde_sq(int p, int d, double sigma, double theta_norm);

/// p sigma_tilde^2 / |theta|^2. nullopt when theta = 0.
std::optional<double> optimal_lambda_proj(int p, int d, double sigma, double theta_norm);

/// sum_{i<=d} (sigma_tilde^2 gamma_i^2 + (|theta|^2 / p) lambda^2) / (gamma_i^2 + lambda)^2
/// over the d zero-padded singular values of the projected design.
double proj_risk_summand(const Eigen::VectorXd& gammas, double lambda, int d, const ProjectionParams& params);

/// sigma^2 + (1 - d/p) |theta|^2 + E[summand].
RiskEstimate expected_risk_proj(int d, int n, double lambda, const ProjectionParams& params, int trials,
                                std::uint64_t seed);

RiskEstimate optimal_risk_proj(int d, int n, const ProjectionParams& params, int trials, std::uint64_t seed);

/// Projected designs for a sweep over model size at fixed n. Trial t draws
/// one n x p standard Gaussian matrix; model size d uses its first d
/// columns, which is distributed exactly as X P^T and couples adjacent
/// model sizes by column interlacing.
class ProjectionSweep {
 public:
  ProjectionSweep(const std::vector<int>& ds, int n, const ProjectionParams& params, int trials, std::uint64_t seed);

  const std::vector<int>& model_sizes() const { return ds_; }
  int n() const { return n_; }
  int trials() const { return trials_; }

  const Eigen::VectorXd& gammas(int d, int trial) const;

  RiskEstimate risk(int d, double lambda) const;
  ProjectedRiskPoint optimal(int d) const;
  /// Per-trial risk values (including the constant terms) at d.
  std::vector<double> trial_risks(int d, double lambda) const;

 private:
  std::size_t index_of(int d) const;

  std::vector<int> ds_;
  int n_;
  ProjectionParams params_;
  int trials_;
  std::vector<std::vector<Eigen::VectorXd>> spectra_;
};

}  // namespace ridgelab

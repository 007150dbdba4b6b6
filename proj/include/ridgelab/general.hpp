#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ridgelab/problem.hpp"
#include "ridgelab/stats.hpp"

namespace ridgelab {

enum class RegularizerKind { identity, inverse_covariance, covariance, custom };

/// Penalty lambda * beta^T M beta.
struct RegularizerSpec {
  Eigen::MatrixXd matrix;
  RegularizerKind kind = RegularizerKind::identity;

  static RegularizerSpec identity(int d);
  static RegularizerSpec inverse_covariance(const Eigen::MatrixXd& covariance);
  static RegularizerSpec covariance(const Eigen::MatrixXd& covariance);
  static RegularizerSpec custom(const Eigen::MatrixXd& m);

  /// Throws unless M is symmetric PSD.
  void validate() const;
};

struct RidgeSolution {
  Eigen::VectorXd beta;
  bool pseudoinverse_limit = false;
  bool ill_conditioned = false;
};

/// argmin |X b - y|^2 + lambda b^T M b. lambda = 0 returns the lambda -> 0+
/// limit, which for a rank-deficient design is the minimum-M-norm
/// interpolator (the pseudoinverse solution when M = I).
RidgeSolution ridge_solve(const Eigen::MatrixXd& design, const Eigen::VectorXd& responses, double lambda,
                          const Eigen::MatrixXd& regularizer);

/// |beta_hat - beta*|_Sigma^2 + sigma^2.
double population_risk(const Eigen::VectorXd& beta_hat, const GaussianProblem& problem);

/// Samples (X, y), fits the regularized estimator and averages the exact
/// population risk.
RiskEstimate mc_risk_general(const GaussianProblem& problem, int n, double lambda, const RegularizerSpec& regularizer,
                             int trials, std::uint64_t seed);

/// Convenience wrapper: mc_risk_general with the covariance-adapted
/// regularizer M = Sigma, which the change of variables maps onto isotropic
/// ridge.
RiskEstimate adaptive_risk(const GaussianProblem& problem, int n, double lambda, int trials, std::uint64_t seed);

/// Expected risk as a function of lambda for fixed draws of X, with the
/// response noise integrated out exactly. Trial t uses the same design as
/// mc_risk_general(..., seed) and the first n rows of the draw for any larger
/// n, so curves at different n and lambda share random numbers.
///
/// Per trial, with M = L L^T and L^{-1} X^T = V S U^T:
///   risk(lambda) = (w o c)^T K (w o c) + sigma^2 sum_i v_i K_ii + sigma^2,
/// where c = V^T L^T beta*, K = B^T Sigma B, B = L^{-T} V,
/// w_i = lambda / (s_i^2 + lambda) and v_i = s_i^2 / (s_i^2 + lambda)^2.
class GeneralRiskCurve {
 public:
  GeneralRiskCurve(const GaussianProblem& problem, const RegularizerSpec& regularizer, int n, int trials,
                   std::uint64_t seed);

  int n() const { return n_; }
  int trials() const { return static_cast<int>(draws_.size()); }

  RiskEstimate risk(double lambda) const;
  /// Mean squared training residual (1/n) E|y - X beta_hat|^2.
  RiskEstimate train_risk(double lambda) const;
  std::vector<double> trial_risks(double lambda) const;
  /// beta*^T Sigma beta* + sigma^2.
  double null_risk() const;

 private:
  struct Draw {
    Eigen::VectorXd s2;
    Eigen::VectorXd c;
    Eigen::MatrixXd K;
  };
  int n_;
  double sigma2_;
  double null_risk_;
  std::vector<Draw> draws_;
};

/// Change of variables between a problem with covariance Sigma and
/// penalty M and an isotropic problem: with X = Z Sigma^{1/2},
/// beta_iso = Sigma^{1/2} beta* and M_iso = Sigma^{-1/2} M Sigma^{-1/2}, the
/// two estimators have equal population risk on every draw.
struct ReducedProblem {
  GaussianProblem isotropic;
  RegularizerSpec regularizer;
  Eigen::MatrixXd sqrt_covariance;
  Eigen::MatrixXd inv_sqrt_covariance;
};

ReducedProblem reduce_to_isotropic(const GaussianProblem& problem, const RegularizerSpec& regularizer);

/// Optimal lambda of the adaptive estimator: d sigma^2 / |Sigma^{1/2} beta*|^2.
double adaptive_optimal_lambda(const GaussianProblem& problem);

/// Monte-Carlo estimates of
///   G = lambda^2 E[(X^T X + lambda Q)^{-2}],
///   H = E[|(X^T X + lambda Q)^{-1} X^T|_F^2],
/// and their lambda-derivatives, for X with n i.i.d. standard normal rows.
/// The expected risk of ridge with penalty Q on isotropic data is
///   (Q beta*)^T G (Q beta*) + sigma^2 H + sigma^2.
struct GHEstimate {
  int n = 0;
  double lambda = 0.0;
  int trials = 0;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd G, dG;
  Eigen::MatrixXd G_se, dG_se;
  double H = 0.0, dH = 0.0;
  double H_se = 0.0, dH_se = 0.0;
  bool ill_conditioned = false;
  /// Covariance of the mean of [vech(G), H] (lower triangle of G stacked by
  /// column, then H). Only kept for d <= kGHCovarianceMaxDim; empty otherwise.
  Eigen::MatrixXd vech_cov;

  double max_G_se() const { return G_se.size() ? G_se.maxCoeff() : 0.0; }
};

inline constexpr int kGHCovarianceMaxDim = 16;

GHEstimate estimate_GH(int n, const Eigen::MatrixXd& Q, double lambda, int trials, std::uint64_t seed);

/// (Q beta*)^T G (Q beta*) + sigma^2 H + sigma^2. The SE is exact (from the
/// joint covariance of G and H) when vech_cov is present, otherwise the
/// triangle-inequality bound sum_k |a_k| se_k.
RiskEstimate risk_from_GH(const GHEstimate& gh, const Eigen::VectorXd& beta_star, double sigma);

/// Q = U diag(q) U^T. Because X is rotation invariant, estimates are computed
/// for diag(q) and rotated back with U.
struct DiagonalizedQ {
  Eigen::VectorXd q;
  Eigen::MatrixXd rotation;  // U; identity when Q is already diagonal
  bool diagonal = true;
};
DiagonalizedQ diagonalize_penalty(const Eigen::MatrixXd& Q);

/// Per-draw G/H quantities flattened as [G (d*d), dG (d*d), H, dH] in
/// column-major order. The design is taken in the eigenbasis of Q (penalty
/// diag(q)); matrix outputs are rotated back to the original basis. Exposed
/// for the coupled estimators and for finite-difference checks. Sets
/// *ill_conditioned when the regularized Gram matrix has reciprocal condition
/// number below 1e-12.
Eigen::ArrayXd gh_trial_sample(const Eigen::MatrixXd& design, const DiagonalizedQ& penalty, double lambda,
                               bool* ill_conditioned = nullptr);

}  // namespace ridgelab

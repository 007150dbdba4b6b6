#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ridgelab {

/// Monte-Carlo estimate of an expected risk.
struct RiskEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int trials = 0;
  double lambda = 0.0;
  /// Set when some trial needed the lambda -> 0+ (pseudoinverse) limit.
  bool pseudoinverse_limit = false;
  /// Set when some trial's regularized Gram matrix had condition number > 1e12.
  bool ill_conditioned = false;
};

/// Pairwise (cascade) summation; the result depends only on the values and
/// their order.
double pairwise_sum(std::span<const double> values);

/// Mean and standard error of per-trial values.
RiskEstimate summarize(std::span<const double> values, double lambda = 0.0);

/// sqrt(a.se^2 + b.se^2).
double combined_se(const RiskEstimate& a, const RiskEstimate& b);

/// Largest adjacent increase in a sequence of estimates, measured in units of
/// the combined standard error of the pair. Non-positive when the sequence is
/// non-increasing.
struct MonotonicityVerdict {
  double worst_increase = 0.0;      // max over i of mean[i+1] - mean[i]
  double worst_increase_in_se = 0.0;  // the same step divided by its combined SE
  std::size_t worst_index = 0;      // i of the worst step
  bool monotone = true;             // no step exceeds `allowance_se` combined SE
};
MonotonicityVerdict check_non_increasing(std::span<const RiskEstimate> curve, double allowance_se = 2.0);

/// Welford accumulator over fixed-length vectors, mergeable with Chan's
/// update so chunked accumulation is order-deterministic.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(Eigen::Index size = 0);

  void add(const Eigen::Ref<const Eigen::ArrayXd>& sample);
  void merge(const MomentAccumulator& other);

  Eigen::Index size() const { return mean_.size(); }
  long long count() const { return count_; }
  const Eigen::ArrayXd& mean() const { return mean_; }
  /// Unbiased sample variance per entry (zero for fewer than two samples).
  Eigen::ArrayXd variance() const;
  /// Standard error of the mean per entry.
  Eigen::ArrayXd std_error() const;

 private:
  long long count_ = 0;
  Eigen::ArrayXd mean_;
  Eigen::ArrayXd m2_;
};

/// Mean and co-moment matrix of fixed-length vectors; mergeable.
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(Eigen::Index size = 0);

  void add(const Eigen::Ref<const Eigen::VectorXd>& sample);
  void merge(const CovarianceAccumulator& other);

  long long count() const { return count_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  /// Unbiased sample covariance.
  Eigen::MatrixXd covariance() const;

 private:
  long long count_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd comoment_;
};

}  // namespace ridgelab

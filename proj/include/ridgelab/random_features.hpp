#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ridgelab {

/// Labelled covariates in [-1, 1].
struct Dataset {
  Eigen::MatrixXd inputs;   // n x d
  std::vector<int> labels;  // in [0, classes)
  Eigen::MatrixXd one_hot;  // n x classes
  std::string name;

  int size() const { return static_cast<int>(inputs.rows()); }
  int dim() const { return static_cast<int>(inputs.cols()); }
  int classes() const { return static_cast<int>(one_hot.cols()); }

  /// Throws unless labels, one_hot and inputs are consistent.
  void validate() const;
};

Eigen::MatrixXd one_hot_encode(const std::vector<int>& labels, int classes);

/// Reads an IDX image file (magic 0x00000803) and label file (0x00000801),
/// either raw or gzip-compressed. Pixels map linearly from [0, 255] to
/// [-1, 1]; images are flattened row-major.
Dataset load_idx_pair(const std::filesystem::path& images, const std::filesystem::path& labels,
                      const std::string& name);

struct DatasetSplit {
  Dataset train;
  Dataset test;
};

/// Loads train-{images,labels} and t10k-{images,labels} (".gz" optional)
/// from an MNIST-family directory.
DatasetSplit load_idx_dataset(const std::filesystem::path& directory);

/// n rows drawn without replacement, deterministic in seed.
Dataset subsample(const Dataset& data, int n, std::uint64_t seed);

struct SyntheticOptions {
  int dim = 784;
  int classes = 10;
  int train = 4000;
  int test = 2000;
  /// Class means are N(0, mean_scale^2 I); points add N(0, noise^2 I).
  double mean_scale = 0.2;
  double noise = 0.6;
  std::uint64_t seed = 20200101;
};

/// Gaussian-mixture stand-in for an image dataset, clamped to [-1, 1].
DatasetSplit synthetic_mixture(const SyntheticOptions& options = {});

enum class WeightScale {
  inv_sqrt_dim,  // variance 1/sqrt(d)
  inv_dim,       // variance 1/d
};

/// D x d Gaussian feature matrix.
Eigen::MatrixXd sample_feature_matrix(int features, int dim, std::uint64_t seed,
                                      WeightScale scale = WeightScale::inv_sqrt_dim);

/// max(0, X W^T).
Eigen::MatrixXd relu_embed(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& W);

struct MultiRidgeFit {
  Eigen::MatrixXd weights;  // D x C
  bool dual = false;
  bool pseudoinverse_limit = false;
};

/// (Phi^T Phi + lambda I) W = Phi^T Y, through the D x D system when D <= n
/// and the n x n system otherwise. lambda = 0 gives the minimum-norm
/// least-squares solution.
MultiRidgeFit fit_ridge_multi(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets, double lambda);
Eigen::MatrixXd fit_ridge_primal(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets, double lambda);
Eigen::MatrixXd fit_ridge_dual(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets, double lambda);

struct FeatureModel {
  Eigen::MatrixXd W;
  double lambda = 0.0;
  Eigen::MatrixXd weights;

  int features() const { return static_cast<int>(W.rows()); }
};

FeatureModel train_feature_model(const Dataset& train, const Eigen::MatrixXd& W, double lambda);

struct ClassifierMetrics {
  double classification_error = 0.0;
  double mse = 0.0;  // mean over rows of the squared error against one-hot targets
};

/// Argmax prediction, ties to the lowest class index.
ClassifierMetrics score_predictions(const Eigen::MatrixXd& predictions, const Dataset& data);
ClassifierMetrics eval_classifier(const FeatureModel& model, const Dataset& data);

/// Ridge fits for many lambda from one SVD of the training features.
class RidgePath {
 public:
  RidgePath(const Eigen::MatrixXd& train_features, const Eigen::MatrixXd& targets);

  /// Predictions Phi_new W(lambda).
  Eigen::MatrixXd predict(const Eigen::MatrixXd& features, double lambda) const;
  Eigen::MatrixXd weights(double lambda) const;

 private:
  Eigen::VectorXd coefficients(double lambda) const;
  Eigen::MatrixXd V_;
  Eigen::VectorXd s_;
  Eigen::MatrixXd UtY_;
};

struct FeatureSweepPoint {
  int n = 0;
  int features = 0;
  double lambda = 0.0;
  ClassifierMetrics test;
  ClassifierMetrics train;
  double test_error_se = 0.0;  // across trials; zero for a single trial
  double test_mse_se = 0.0;
};

struct FeatureSweepOptions {
  std::vector<double> lambdas;
  int trials = 1;  // independent (subset, W) draws averaged per point
  std::uint64_t seed = 1;
  WeightScale scale = WeightScale::inv_sqrt_dim;
};

/// Sample-wise sweep at fixed D, or model-wise at fixed n: every (n, D)
/// pair in the grid is evaluated at every lambda. Draws are shared across
/// lambda, and trial t uses the same subset stream and W stream at every
/// grid point.
std::vector<FeatureSweepPoint> feature_sweep(const DatasetSplit& data, const std::vector<int>& ns,
                                             const std::vector<int>& features, const FeatureSweepOptions& options);

}  // namespace ridgelab

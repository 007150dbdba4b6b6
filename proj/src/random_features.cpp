#include "ridgelab/random_features.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "ridgelab/parallel.hpp"
#include "ridgelab/rng.hpp"
#include "ridgelab/stats.hpp"

namespace ridgelab {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<unsigned char> read_maybe_gzip(const std::filesystem::path& path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::vector<unsigned char> out;
  std::vector<unsigned char> buf(1 << 16);
  for (;;) {
    const int got = gzread(f, buf.data(), static_cast<unsigned>(buf.size()));
    if (got < 0) {
      int code = 0;
      const std::string msg = gzerror(f, &code);
      gzclose(f);
      throw std::runtime_error(path.string() + ": read error after byte offset " + std::to_string(out.size()) +
                               ": " + msg);
    }
    if (got == 0) break;
    out.insert(out.end(), buf.begin(), buf.begin() + got);
  }
  gzclose(f);
  return out;
}

class ByteReader {
 public:
  ByteReader(const std::vector<unsigned char>& bytes, std::string name) : bytes_(bytes), name_(std::move(name)) {}

  std::uint32_t u32() {
    need(4, "32-bit header field");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 4;
    return v;
  }
  const unsigned char* take(std::size_t count, const char* what) {
    need(count, what);
    const unsigned char* p = bytes_.data() + pos_;
    pos_ += count;
    return p;
  }
  std::size_t offset() const { return pos_; }
  [[noreturn]] void fail(const std::string& what, std::size_t at) const {
    throw std::runtime_error(name_ + ": " + what + " at byte offset " + std::to_string(at));
  }

 private:
  void need(std::size_t count, const char* what) const {
    if (bytes_.size() - pos_ < count)
      fail(std::string("truncated ") + what + " (need " + std::to_string(count) + " bytes, " +
               std::to_string(bytes_.size() - pos_) + " left)",
           pos_);
  }
  const std::vector<unsigned char>& bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

std::filesystem::path find_file(const std::filesystem::path& dir, const std::string& stem) {
  for (const std::string& suffix : {std::string(), std::string(".gz")}) {
    const std::filesystem::path p = dir / (stem + suffix);
    if (std::filesystem::exists(p)) return p;
  }
  throw std::runtime_error("missing " + stem + "[.gz] in " + dir.string());
}

}  // namespace

void Dataset::validate() const {
  if (static_cast<Eigen::Index>(labels.size()) != inputs.rows() || one_hot.rows() != inputs.rows())
    throw std::invalid_argument("dataset '" + name + "': inputs, labels and one_hot disagree in length");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int c = labels[i];
    if (c < 0 || c >= one_hot.cols())
      throw std::invalid_argument("dataset '" + name + "': label out of range at row " + std::to_string(i));
    const auto row = one_hot.row(static_cast<Eigen::Index>(i));
    if (row.sum() != 1.0 || row(c) != 1.0)
      throw std::invalid_argument("dataset '" + name + "': one_hot row " + std::to_string(i) + " is not e_label");
  }
  if (inputs.size() > 0 && inputs.cwiseAbs().maxCoeff() > 1.0 + 1e-9)
    throw std::invalid_argument("dataset '" + name + "': inputs outside [-1, 1]");
}

Eigen::MatrixXd one_hot_encode(const std::vector<int>& labels, int classes) {
  if (classes < 1) throw std::invalid_argument("classes must be >= 1");
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes)
      throw std::invalid_argument("label " + std::to_string(labels[i]) + " outside [0, " + std::to_string(classes) +
                                  ")");
    y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return y;
}

Dataset load_idx_pair(const std::filesystem::path& images, const std::filesystem::path& labels,
                      const std::string& name) {
  const std::vector<unsigned char> ib = read_maybe_gzip(images);
  const std::vector<unsigned char> lb = read_maybe_gzip(labels);

  ByteReader ir(ib, images.string());
  if (const std::uint32_t m = ir.u32(); m != kImageMagic) ir.fail("bad image magic number " + std::to_string(m), 0);
  const std::uint32_t count = ir.u32();
  const std::uint32_t rows = ir.u32();
  const std::uint32_t cols = ir.u32();
  const std::size_t dim = static_cast<std::size_t>(rows) * cols;
  if (dim == 0) ir.fail("empty image dimensions", 8);

  ByteReader lr(lb, labels.string());
  if (const std::uint32_t m = lr.u32(); m != kLabelMagic) lr.fail("bad label magic number " + std::to_string(m), 0);
  const std::uint32_t label_count = lr.u32();
  if (label_count != count)
    lr.fail("label count " + std::to_string(label_count) + " does not match image count " + std::to_string(count), 4);

  const unsigned char* pixels = ir.take(static_cast<std::size_t>(count) * dim, "pixel data");
  const std::size_t label_start = lr.offset();
  const unsigned char* raw_labels = lr.take(count, "label data");

  Dataset out;
  out.name = name;
  out.inputs.resize(count, static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      out.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = pixels[i * dim + j] / 127.5 - 1.0;
  out.labels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (raw_labels[i] > 9) lr.fail("label " + std::to_string(raw_labels[i]) + " outside 0..9", label_start + i);
    out.labels[i] = raw_labels[i];
  }
  out.one_hot = one_hot_encode(out.labels, 10);
  return out;
}

DatasetSplit load_idx_dataset(const std::filesystem::path& directory) {
  if (!std::filesystem::is_directory(directory))
    throw std::runtime_error("dataset directory " + directory.string() + " does not exist");
  const std::string name = directory.filename().string();
  return {load_idx_pair(find_file(directory, "train-images-idx3-ubyte"),
                        find_file(directory, "train-labels-idx1-ubyte"), name + "/train"),
          load_idx_pair(find_file(directory, "t10k-images-idx3-ubyte"),
                        find_file(directory, "t10k-labels-idx1-ubyte"), name + "/test")};
}

namespace {

std::vector<int> permutation(int size, std::uint64_t seed) {
  std::vector<int> idx(static_cast<std::size_t>(size));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

Dataset take_rows(const Dataset& data, const std::vector<int>& rows, int n) {
  Dataset out;
  out.name = data.name;
  out.inputs.resize(n, data.inputs.cols());
  out.one_hot.resize(n, data.one_hot.cols());
  out.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int r = rows[static_cast<std::size_t>(i)];
    out.inputs.row(i) = data.inputs.row(r);
    out.one_hot.row(i) = data.one_hot.row(r);
    out.labels[static_cast<std::size_t>(i)] = data.labels[static_cast<std::size_t>(r)];
  }
  return out;
}

}  // namespace

Dataset subsample(const Dataset& data, int n, std::uint64_t seed) {
  if (n < 0 || n > data.size())
    throw std::invalid_argument("cannot draw " + std::to_string(n) + " rows from a dataset of " +
                                std::to_string(data.size()));
  return take_rows(data, permutation(data.size(), seed), n);
}

DatasetSplit synthetic_mixture(const SyntheticOptions& o) {
  if (o.dim < 1 || o.classes < 2 || o.train < 1 || o.test < 1)
    throw std::invalid_argument("synthetic mixture needs dim >= 1, classes >= 2 and non-empty splits");
  Rng mean_rng = make_rng(o.seed, 0, Stream::aux);
  const Eigen::MatrixXd means = o.mean_scale * standard_normal(mean_rng, o.classes, o.dim);
  auto make = [&](int count, std::uint64_t trial, const std::string& name) {
    Rng rng = make_rng(o.seed, trial, Stream::design);
    std::uniform_int_distribution<int> pick(0, o.classes - 1);
    Dataset d;
    d.name = name;
    d.labels.resize(static_cast<std::size_t>(count));
    for (int& l : d.labels) l = pick(rng);
    d.inputs = o.noise * standard_normal(rng, count, o.dim);
    for (int i = 0; i < count; ++i) d.inputs.row(i) += means.row(d.labels[static_cast<std::size_t>(i)]);
    d.inputs = d.inputs.cwiseMax(-1.0).cwiseMin(1.0);
    d.one_hot = one_hot_encode(d.labels, o.classes);
    return d;
  };
  return {make(o.train, 1, "synthetic/train"), make(o.test, 2, "synthetic/test")};
}

Eigen::MatrixXd sample_feature_matrix(int features, int dim, std::uint64_t seed, WeightScale scale) {
  if (features < 1 || dim < 1) throw std::invalid_argument("feature matrix needs D >= 1 and d >= 1");
  Rng rng(seed);
  const double variance = scale == WeightScale::inv_sqrt_dim ? 1.0 / std::sqrt(double(dim)) : 1.0 / dim;
  return std::sqrt(variance) * standard_normal(rng, features, dim);
}

Eigen::MatrixXd relu_embed(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& W) {
  if (inputs.cols() != W.cols())
    throw std::invalid_argument("relu_embed: inputs have " + std::to_string(inputs.cols()) + " columns, W has " +
                                std::to_string(W.cols()));
  return (inputs * W.transpose()).cwiseMax(0.0);
}

namespace {

void check_fit(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets, double lambda) {
  if (features.rows() != targets.rows()) throw std::invalid_argument("features and targets differ in row count");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
}

}  // namespace

Eigen::MatrixXd fit_ridge_primal(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets, double lambda) {
  check_fit(features, targets, lambda);
  Eigen::MatrixXd a = features.transpose() * features;
  a.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (lambda == 0.0 || llt.info() != Eigen::Success)
    return features.completeOrthogonalDecomposition().solve(targets);
  return llt.solve(features.transpose() * targets);
}

Eigen::MatrixXd fit_ridge_dual(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets, double lambda) {
  check_fit(features, targets, lambda);
  Eigen::MatrixXd k = features * features.transpose();
  k.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (lambda == 0.0 || llt.info() != Eigen::Success)
    return features.completeOrthogonalDecomposition().solve(targets);
  return features.transpose() * llt.solve(targets);
}

MultiRidgeFit fit_ridge_multi(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets, double lambda) {
  check_fit(features, targets, lambda);
  MultiRidgeFit fit;
  fit.dual = features.cols() > features.rows();
  if (lambda == 0.0) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(features);
    fit.pseudoinverse_limit = cod.rank() < features.cols();
    fit.weights = cod.solve(targets);
    return fit;
  }
  fit.weights = fit.dual ? fit_ridge_dual(features, targets, lambda) : fit_ridge_primal(features, targets, lambda);
  return fit;
}

FeatureModel train_feature_model(const Dataset& train, const Eigen::MatrixXd& W, double lambda) {
  FeatureModel m;
  m.W = W;
  m.lambda = lambda;
  m.weights = fit_ridge_multi(relu_embed(train.inputs, W), train.one_hot, lambda).weights;
  return m;
}

ClassifierMetrics score_predictions(const Eigen::MatrixXd& predictions, const Dataset& data) {
  if (predictions.rows() != data.one_hot.rows() || predictions.cols() != data.one_hot.cols())
    throw std::invalid_argument("prediction shape does not match dataset targets");
  ClassifierMetrics m;
  const Eigen::Index n = predictions.rows();
  if (n == 0) return m;
  long long wrong = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < predictions.cols(); ++c)
      if (predictions(i, c) > predictions(i, best)) best = c;
    wrong += best != data.labels[static_cast<std::size_t>(i)];
  }
  m.classification_error = static_cast<double>(wrong) / static_cast<double>(n);
  m.mse = (predictions - data.one_hot).squaredNorm() / static_cast<double>(n);
  return m;
}

ClassifierMetrics eval_classifier(const FeatureModel& model, const Dataset& data) {
  return score_predictions(relu_embed(data.inputs, model.W) * model.weights, data);
}

RidgePath::RidgePath(const Eigen::MatrixXd& train_features, const Eigen::MatrixXd& targets) {
  if (train_features.rows() != targets.rows()) throw std::invalid_argument("features and targets differ in row count");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(train_features, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double cutoff = s.size() ? s(0) * std::max(train_features.rows(), train_features.cols()) *
                                       std::numeric_limits<double>::epsilon()
                                 : 0.0;
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  s_ = s.head(rank);
  V_ = svd.matrixV().leftCols(rank);
  UtY_ = svd.matrixU().leftCols(rank).transpose() * targets;
}

Eigen::VectorXd RidgePath::coefficients(double lambda) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
  return s_.array() / (s_.array().square() + lambda);
}

Eigen::MatrixXd RidgePath::weights(double lambda) const {
  return V_ * (coefficients(lambda).asDiagonal() * UtY_);
}

Eigen::MatrixXd RidgePath::predict(const Eigen::MatrixXd& features, double lambda) const {
  if (features.cols() != V_.rows()) throw std::invalid_argument("feature width does not match the fitted path");
  return (features * V_) * (coefficients(lambda).asDiagonal() * UtY_);
}

std::vector<FeatureSweepPoint> feature_sweep(const DatasetSplit& data, const std::vector<int>& ns,
                                             const std::vector<int>& features, const FeatureSweepOptions& o) {
  if (ns.empty() || features.empty() || o.lambdas.empty()) throw std::invalid_argument("sweep grids must be non-empty");
  if (o.trials < 1) throw std::invalid_argument("trials must be >= 1");
  const int n_max = *std::max_element(ns.begin(), ns.end());
  const int d_max = *std::max_element(features.begin(), features.end());
  if (*std::min_element(ns.begin(), ns.end()) < 1 || *std::min_element(features.begin(), features.end()) < 1)
    throw std::invalid_argument("sample and feature counts must be >= 1");
  if (n_max > data.train.size())
    throw std::invalid_argument("n = " + std::to_string(n_max) + " exceeds the " + std::to_string(data.train.size()) +
                                " training rows");

  struct Cell {
    int n, D;
  };
  std::vector<Cell> cells;
  for (int n : ns)
    for (int D : features) cells.push_back({n, D});
  const std::size_t L = o.lambdas.size();
  // [trial][cell * L + k]
  std::vector<std::vector<ClassifierMetrics>> test(static_cast<std::size_t>(o.trials)), train(test.size());

  for (int t = 0; t < o.trials; ++t) {
    const Dataset sub = subsample(data.train, n_max, substream_seed(o.seed, static_cast<std::uint64_t>(t), Stream::subset));
    const Eigen::MatrixXd W = sample_feature_matrix(
        d_max, data.train.dim(), substream_seed(o.seed, static_cast<std::uint64_t>(t), Stream::features), o.scale);
    const Eigen::MatrixXd phi_train = relu_embed(sub.inputs, W);
    const Eigen::MatrixXd phi_test = relu_embed(data.test.inputs, W);
    auto& te = test[static_cast<std::size_t>(t)];
    auto& tr = train[static_cast<std::size_t>(t)];
    te.resize(cells.size() * L);
    tr.resize(cells.size() * L);
    parallel_for(cells.size(), [&](std::size_t c) {
      const auto [n, D] = cells[c];
      const Dataset head = take_rows(sub, [&] {
        std::vector<int> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        return idx;
      }(), n);
      const Eigen::MatrixXd ftrain = phi_train.topLeftCorner(n, D);
      const Eigen::MatrixXd ftest = phi_test.leftCols(D);
      const RidgePath path(ftrain, head.one_hot);
      for (std::size_t k = 0; k < L; ++k) {
        te[c * L + k] = score_predictions(path.predict(ftest, o.lambdas[k]), data.test);
        tr[c * L + k] = score_predictions(path.predict(ftrain, o.lambdas[k]), head);
      }
    });
  }

  std::vector<FeatureSweepPoint> out;
  out.reserve(cells.size() * L);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t k = 0; k < L; ++k) {
      std::vector<double> err(static_cast<std::size_t>(o.trials)), mse(err.size()), trerr(err.size()), trmse(err.size());
      for (std::size_t t = 0; t < err.size(); ++t) {
        err[t] = test[t][c * L + k].classification_error;
        mse[t] = test[t][c * L + k].mse;
        trerr[t] = train[t][c * L + k].classification_error;
        trmse[t] = train[t][c * L + k].mse;
      }
      FeatureSweepPoint p;
      p.n = cells[c].n;
      p.features = cells[c].D;
      p.lambda = o.lambdas[k];
      const RiskEstimate e = summarize(err), m = summarize(mse);
      p.test = {e.mean, m.mean};
      p.train = {summarize(trerr).mean, summarize(trmse).mean};
      p.test_error_se = o.trials > 1 ? e.std_error : 0.0;
      p.test_mse_se = o.trials > 1 ? m.std_error : 0.0;
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace ridgelab

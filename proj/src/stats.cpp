#include "ridgelab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

#include "ridgelab/parallel.hpp"

namespace ridgelab {

namespace {
std::size_t default_workers() {
  if (const char* env = std::getenv("RIDGELAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}
std::atomic<std::size_t> g_workers{0};
}  // namespace

std::size_t worker_count() {
  std::size_t w = g_workers.load();
  if (w == 0) {
    w = default_workers();
    g_workers.store(w);
  }
  return w;
}

void set_worker_count(std::size_t count) { g_workers.store(count == 0 ? default_workers() : count); }

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 16) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

RiskEstimate summarize(std::span<const double> values, double lambda) {
  if (values.empty()) throw std::invalid_argument("summarize: no trials");
  RiskEstimate out;
  out.trials = static_cast<int>(values.size());
  out.lambda = lambda;
  const double n = static_cast<double>(values.size());
  out.mean = pairwise_sum(values) / n;
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    std::transform(values.begin(), values.end(), sq.begin(), [&](double v) {
      const double c = v - out.mean;
      return c * c;
    });
    const double var = pairwise_sum(sq) / (n - 1.0);
    out.std_error = std::sqrt(var / n);
  }
  return out;
}

double combined_se(const RiskEstimate& a, const RiskEstimate& b) {
  return std::hypot(a.std_error, b.std_error);
}

MonotonicityVerdict check_non_increasing(std::span<const RiskEstimate> curve, double allowance_se) {
  MonotonicityVerdict v;
  v.worst_increase = -std::numeric_limits<double>::infinity();
  v.worst_increase_in_se = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const double step = curve[i + 1].mean - curve[i].mean;
    const double se = combined_se(curve[i], curve[i + 1]);
    const double in_se = se > 0 ? step / se : (step > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    v.worst_increase = std::max(v.worst_increase, step);
    if (in_se > v.worst_increase_in_se) {
      v.worst_increase_in_se = in_se;
      v.worst_index = i;
    }
    // Steps below 1e-12 relative are rounding, not increases.
    if (step > allowance_se * se && step > 1e-12 * std::abs(curve[i].mean)) v.monotone = false;
  }
  if (curve.size() < 2) {
    v.worst_increase = 0.0;
    v.worst_increase_in_se = 0.0;
  }
  return v;
}

MomentAccumulator::MomentAccumulator(Eigen::Index size)
    : mean_(Eigen::ArrayXd::Zero(size)), m2_(Eigen::ArrayXd::Zero(size)) {}

void MomentAccumulator::add(const Eigen::Ref<const Eigen::ArrayXd>& sample) {
  if (sample.size() != mean_.size()) throw std::invalid_argument("MomentAccumulator: size mismatch");
  ++count_;
  const Eigen::ArrayXd delta = sample - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (sample - mean_);
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  if (other.size() != size()) throw std::invalid_argument("MomentAccumulator: size mismatch");
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  const Eigen::ArrayXd delta = other.mean_ - mean_;
  mean_ += delta * (nb / n);
  m2_ += other.m2_ + delta.square() * (na * nb / n);
  count_ += other.count_;
}

Eigen::ArrayXd MomentAccumulator::variance() const {
  if (count_ < 2) return Eigen::ArrayXd::Zero(mean_.size());
  return m2_ / static_cast<double>(count_ - 1);
}

Eigen::ArrayXd MomentAccumulator::std_error() const {
  if (count_ < 2) return Eigen::ArrayXd::Zero(mean_.size());
  return (variance() / static_cast<double>(count_)).sqrt();
}

CovarianceAccumulator::CovarianceAccumulator(Eigen::Index size)
    : mean_(Eigen::VectorXd::Zero(size)), comoment_(Eigen::MatrixXd::Zero(size, size)) {}

void CovarianceAccumulator::add(const Eigen::Ref<const Eigen::VectorXd>& sample) {
  if (sample.size() != mean_.size()) throw std::invalid_argument("CovarianceAccumulator: size mismatch");
  ++count_;
  const Eigen::VectorXd delta = sample - mean_;
  mean_ += delta / static_cast<double>(count_);
  comoment_.noalias() += delta * (sample - mean_).transpose();
}

void CovarianceAccumulator::merge(const CovarianceAccumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  const Eigen::VectorXd delta = other.mean_ - mean_;
  mean_ += delta * (nb / n);
  comoment_ += other.comoment_ + delta * delta.transpose() * (na * nb / n);
  count_ += other.count_;
}

Eigen::MatrixXd CovarianceAccumulator::covariance() const {
  if (count_ < 2) return Eigen::MatrixXd::Zero(mean_.size(), mean_.size());
  return comoment_ / static_cast<double>(count_ - 1);
}

}  // namespace ridgelab

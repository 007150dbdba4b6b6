#include "ridgelab/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ridgelab {

namespace {

class CountingCurve {
 public:
  explicit CountingCurve(const RiskCurve& curve) : curve_(curve) {}

  double operator()(double lambda) {
    ++count_;
    const double v = curve_(lambda);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "risk curve is not finite at lambda = " << lambda << " (value " << v << ")";
      throw std::domain_error(msg.str());
    }
    return v;
  }
  int count() const { return count_; }

 private:
  const RiskCurve& curve_;
  int count_ = 0;
};

struct GoldenResult {
  double x, fx, lo, hi;
  bool converged;
};

// Golden section over log(lambda) in [log_lo, log_hi].
GoldenResult golden_log(CountingCurve& f, double log_lo, double log_hi, double rel_tol, int max_iter) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = log_lo, b = log_hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(std::exp(c));
  double fd = f(std::exp(d));
  int it = 0;
  while (b - a > rel_tol && it < max_iter) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(std::exp(d));
    }
    ++it;
  }
  const bool left = fc <= fd;
  return {std::exp(left ? c : d), left ? fc : fd, std::exp(a), std::exp(b), b - a <= rel_tol};
}

}  // namespace

LambdaSearchResult minimize_over_lambda(const RiskCurve& curve, double lo, double hi, const SearchOptions& options) {
  if (!(lo >= 0.0)) throw std::invalid_argument("lambda lower bound must be >= 0");
  if (lo > hi) throw std::invalid_argument("lambda search interval is empty (lo > hi)");
  if (!(options.rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
  CountingCurve f(curve);
  LambdaSearchResult best;

  if (lo == hi) {
    best.lambda_opt = lo;
    best.risk_at_opt = f(lo);
    best.bracket_lo = best.bracket_hi = lo;
    best.converged = true;
    best.at_lower_endpoint = true;
  } else {
    const double log_lo = std::log(lo > 0.0 ? lo : hi * 1e-12);
    const double log_hi = std::log(hi);
    GoldenResult g = golden_log(f, log_lo, log_hi, options.rel_tol, options.max_iterations);

    // Guard grid against multimodal curves.
    const int m = std::max(2, options.guard_points);
    double grid_best_x = 0.0, grid_best_f = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double x = std::exp(log_lo + (log_hi - log_lo) * i / (m - 1));
      const double fx = f(x);
      if (fx < grid_best_f) {
        grid_best_f = fx;
        grid_best_x = x;
      }
    }
    if (grid_best_f < g.fx - options.rel_tol * std::abs(g.fx)) {
      const double step = (log_hi - log_lo) / (m - 1);
      const double a = std::max(log_lo, std::log(grid_best_x) - step);
      const double b = std::min(log_hi, std::log(grid_best_x) + step);
      GoldenResult again = golden_log(f, a, b, options.rel_tol, options.max_iterations);
      if (again.fx <= grid_best_f) {
        g = again;
      } else {
        g = {grid_best_x, grid_best_f, std::exp(a), std::exp(b), false};
      }
    }
    best.lambda_opt = g.x;
    best.risk_at_opt = g.fx;
    best.bracket_lo = g.lo;
    best.bracket_hi = g.hi;
    best.converged = g.converged;

    const double f_lo = f(lo);
    if (f_lo <= best.risk_at_opt) {
      best.lambda_opt = lo;
      best.risk_at_opt = f_lo;
      best.bracket_lo = lo;
      best.bracket_hi = std::max(lo, g.lo);
      best.at_lower_endpoint = true;
    }
  }

  if (options.null_risk && *options.null_risk < best.risk_at_opt) {
    best.lambda_opt = std::numeric_limits<double>::infinity();
    best.risk_at_opt = *options.null_risk;
    best.bracket_lo = hi;
    best.bracket_hi = std::numeric_limits<double>::infinity();
    best.at_null_limit = true;
    best.at_lower_endpoint = false;
    best.converged = true;
  }
  best.evaluations = f.count();
  return best;
}

std::vector<std::pair<double, double>> sweep_lambda(const RiskCurve& curve, const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("lambda grid is empty");
  if (!std::is_sorted(grid.begin(), grid.end())) throw std::invalid_argument("lambda grid must be sorted");
  std::vector<std::pair<double, double>> out;
  out.reserve(grid.size());
  for (double lam : grid) out.emplace_back(lam, curve(lam));
  return out;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw std::invalid_argument("log_grid: need 0 < lo <= hi and n >= 1");
  std::vector<double> g(static_cast<std::size_t>(n));
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

double lambda_search_cap(int d, double sigma, double beta_norm_sq) {
  return 1e6 * d * (sigma * sigma + beta_norm_sq);
}

}  // namespace ridgelab

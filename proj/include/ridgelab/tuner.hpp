#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace ridgelab {

using RiskCurve = std::function<double(double)>;

struct LambdaSearchResult {
  double lambda_opt = 0.0;  // +inf when the null-estimator limit wins
  double risk_at_opt = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int evaluations = 0;
  bool converged = false;
  bool at_null_limit = false;
  bool at_lower_endpoint = false;
};

struct SearchOptions {
  double rel_tol = 1e-4;
  /// Risk of the lambda -> infinity estimator, compared against the search
  /// result when provided.
  std::optional<double> null_risk;
  /// Points in the multimodality guard grid.
  int guard_points = 40;
  int max_iterations = 500;
};

/// Minimizes curve over [lo, hi] by golden-section search in log(lambda).
/// When lo == 0 the log search starts at hi * 1e-12 and lambda = 0 itself is
/// compared as an endpoint. A log-spaced guard grid re-seeds the search if it
/// finds a better point, so multimodal curves are handled.
LambdaSearchResult minimize_over_lambda(const RiskCurve& curve, double lo, double hi, const SearchOptions& options = {});

std::vector<std::pair<double, double>> sweep_lambda(const RiskCurve& curve, const std::vector<double>& grid);

/// n log-spaced points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int n);

/// Upper end of the search domain, 1e6 * d * (sigma^2 + |beta|^2).
double lambda_search_cap(int d, double sigma, double beta_norm_sq);

}  // namespace ridgelab

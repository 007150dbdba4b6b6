#include "ridgelab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ridgelab/conjecture.hpp"
#include "ridgelab/counterexample.hpp"
#include "ridgelab/general.hpp"
#include "ridgelab/output.hpp"
#include "ridgelab/projection.hpp"
#include "ridgelab/random_features.hpp"
#include "ridgelab/spectrum.hpp"
#include "ridgelab/stats.hpp"
#include "ridgelab/tuner.hpp"

namespace ridgelab {

using nlohmann::json;

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {"samplewise-iso", "samplewise-noniso", "modelwise-proj",
                                                 "counterexample", "conjecture",        "relu-samplewise",
                                                 "relu-modelwise"};
  return kinds;
}

namespace {

// ---- config helpers -------------------------------------------------------

double get_number(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) throw ConfigError(path + key, "missing");
  if (!obj[key].is_number()) throw ConfigError(path + key, "must be a number");
  return obj[key].get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& path) {
  return obj.contains(key) ? get_number(obj, key, path) : fallback;
}

int int_or(const json& obj, const std::string& key, int fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) throw ConfigError(path + key, "must be an integer");
  return obj[key].get<int>();
}

int get_int(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) throw ConfigError(path + key, "missing");
  return int_or(obj, key, 0, path);
}

std::string string_or(const json& obj, const std::string& key, const std::string& fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) throw ConfigError(path + key, "must be a string");
  return obj[key].get<std::string>();
}

std::vector<int> parse_int_grid(const json& v, const std::string& field) {
  std::vector<int> out;
  if (v.is_array()) {
    for (const json& e : v) {
      if (!e.is_number_integer()) throw ConfigError(field, "entries must be integers");
      out.push_back(e.get<int>());
    }
  } else if (v.is_object()) {
    const int from = get_int(v, "from", field + ".");
    const int to = get_int(v, "to", field + ".");
    const int step = int_or(v, "step", 1, field + ".");
    if (step < 1) throw ConfigError(field + ".step", "must be >= 1");
    for (int i = from; i <= to; i += step) out.push_back(i);
  } else {
    throw ConfigError(field, "must be an array or {from, to, step}");
  }
  if (out.empty()) throw ConfigError(field, "must be non-empty");
  if (!std::is_sorted(out.begin(), out.end()) || std::adjacent_find(out.begin(), out.end()) != out.end())
    throw ConfigError(field, "must be strictly increasing");
  return out;
}

std::vector<double> parse_lambda_grid(const json& v) {
  const std::string field = "lambda_grid";
  std::vector<double> out;
  if (v.is_array()) {
    for (const json& e : v) {
      if (!e.is_number()) throw ConfigError(field, "entries must be numbers");
      out.push_back(e.get<double>());
    }
  } else if (v.is_object()) {
    const double lo = get_number(v, "log_from", field + ".");
    const double hi = get_number(v, "log_to", field + ".");
    const int points = get_int(v, "points", field + ".");
    if (!(lo > 0.0) || !(hi >= lo) || points < 1) throw ConfigError(field, "need 0 < log_from <= log_to, points >= 1");
    if (v.contains("include_zero") && v["include_zero"].get<bool>()) out.push_back(0.0);
    for (double l : log_grid(lo, hi, points)) out.push_back(l);
  } else {
    throw ConfigError(field, "must be an array or {log_from, log_to, points, include_zero}");
  }
  if (out.empty()) throw ConfigError(field, "must be non-empty");
  if (!std::is_sorted(out.begin(), out.end()) || std::adjacent_find(out.begin(), out.end()) != out.end())
    throw ConfigError(field, "must be strictly increasing");
  for (double l : out)
    if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError(field, "entries must be finite and >= 0");
  return out;
}

bool needs_n_grid(const std::string& kind) {
  return kind == "samplewise-iso" || kind == "samplewise-noniso" || kind == "counterexample" ||
         kind == "relu-samplewise";
}

bool needs_d_grid(const std::string& kind) { return kind == "modelwise-proj" || kind == "relu-modelwise"; }

}  // namespace

ExperimentConfig parse_config(const json& doc, const std::string& kind) {
  if (!doc.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  ExperimentConfig c;
  const std::string own = string_or(doc, "kind", "", "");
  if (!kind.empty() && !own.empty() && kind != own)
    throw ConfigError("kind", "config is for '" + own + "' but '" + kind + "' was requested");
  c.kind = kind.empty() ? own : kind;
  if (c.kind.empty()) throw ConfigError("kind", "missing");
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end()) throw ConfigError("kind", "unknown kind '" + c.kind + "'");

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer()) throw ConfigError("seed", "must be an integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  c.trials = int_or(doc, "trials", c.trials, "");
  if (c.trials < 1) throw ConfigError("trials", "must be >= 1");
  if (doc.contains("problem")) {
    if (!doc["problem"].is_object()) throw ConfigError("problem", "must be an object");
    c.problem = doc["problem"];
  }
  if (!doc.contains("lambda_grid")) throw ConfigError("lambda_grid", "missing");
  c.lambda_grid = parse_lambda_grid(doc["lambda_grid"]);
  if (needs_n_grid(c.kind)) {
    if (!doc.contains("n_grid")) throw ConfigError("n_grid", "missing");
    c.n_grid = parse_int_grid(doc["n_grid"], "n_grid");
    if (c.n_grid.front() < (c.kind == "relu-samplewise" ? 1 : 0)) throw ConfigError("n_grid", "sample counts out of range");
  }
  if (needs_d_grid(c.kind)) {
    if (!doc.contains("d_grid")) throw ConfigError("d_grid", "missing");
    c.d_grid = parse_int_grid(doc["d_grid"], "d_grid");
    if (c.d_grid.front() < 1) throw ConfigError("d_grid", "entries must be >= 1");
  }
  c.output = string_or(doc, "output", c.output.string(), "");
  c.synthetic = doc.contains("synthetic") && doc["synthetic"].get<bool>();
  c.dataset_dir = string_or(doc, "dataset_dir", "", "");
  c.title = string_or(doc, "title", "", "");
  c.x_label = string_or(doc, "x_label", "", "");
  c.y_label = string_or(doc, "y_label", "", "");
  c.log_y = doc.contains("log_y") && doc["log_y"].get<bool>();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::string& kind) {
  std::ifstream f(path);
  if (!f) throw ConfigError("<file>", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(f, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc, kind);
}

namespace {

// ---- shared pieces --------------------------------------------------------

struct Envelope {
  std::vector<double> x;
  std::vector<double> lambda;
  std::vector<RiskEstimate> risk;
};

json verdict_json(const MonotonicityVerdict& v, const std::vector<double>& x) {
  json j;
  j["pass"] = v.monotone;
  j["worst_increase"] = v.worst_increase;
  j["worst_increase_se"] = v.worst_increase_in_se;
  if (x.size() > v.worst_index + 1) {
    j["from"] = x[v.worst_index];
    j["to"] = x[v.worst_index + 1];
  }
  return j;
}

std::string verdict_line(const std::string& what, const MonotonicityVerdict& v, const std::vector<double>& x) {
  std::ostringstream o;
  o << what << ": " << (v.monotone ? "pass" : "FAIL") << " (largest adjacent change " << format_double(v.worst_increase);
  if (x.size() > v.worst_index + 1)
    o << " = " << format_double(v.worst_increase_in_se) << " SE between " << x[v.worst_index] << " and "
      << x[v.worst_index + 1];
  o << ")\n";
  return o.str();
}

std::string lambda_label(double lam) { return lam == 0.0 ? "lambda=0+" : "lambda=" + format_double(lam); }

/// Writes the main CSV (|grid| x |lambda| rows), envelope CSV and SVG.
struct CurveSet {
  std::string sweep_name;  // "n" or "d" or "D"
  std::vector<double> sweep;
  std::vector<double> lambdas;
  std::vector<std::vector<RiskEstimate>> values;  // [sweep][lambda]
  std::string value_name = "risk";
};

void emit_curves(const ExperimentConfig& c, const CurveSet& set, const Envelope& env, const AxisSpec& axes,
                 RunResult& result, const std::string& stem) {
  Table main;
  main.header = {set.sweep_name, "lambda", set.value_name, "se"};
  for (std::size_t i = 0; i < set.sweep.size(); ++i)
    for (std::size_t k = 0; k < set.lambdas.size(); ++k)
      main.rows.push_back({set.sweep[i], set.lambdas[k], set.values[i][k].mean, set.values[i][k].std_error});
  const auto main_path = c.output / (stem + ".csv");
  emit_csv(main, main_path);
  result.csv_files.push_back(main_path);

  Table et;
  et.header = {set.sweep_name, "lambda_opt", set.value_name, "se"};
  for (std::size_t i = 0; i < env.x.size(); ++i) et.rows.push_back({env.x[i], env.lambda[i], env.risk[i].mean, env.risk[i].std_error});
  const auto env_path = c.output / (stem + "_envelope.csv");
  emit_csv(et, env_path);
  result.csv_files.push_back(env_path);

  std::vector<Series> series;
  for (std::size_t k = 0; k < set.lambdas.size(); ++k) {
    Series s;
    s.label = lambda_label(set.lambdas[k]);
    s.x = set.sweep;
    for (std::size_t i = 0; i < set.sweep.size(); ++i) s.y.push_back(set.values[i][k].mean);
    series.push_back(std::move(s));
  }
  Series opt;
  opt.label = "optimal";
  opt.x = env.x;
  for (const RiskEstimate& r : env.risk) opt.y.push_back(r.mean);
  opt.emphasize = true;
  series.push_back(std::move(opt));
  const auto svg_path = c.output / (stem + ".svg");
  emit_svg_plot(series, axes, svg_path);
  result.svg_files.push_back(svg_path);
}

AxisSpec axes_for(const ExperimentConfig& c, const std::string& title, const std::string& x, const std::string& y,
                  bool log_y_default) {
  AxisSpec a;
  a.title = c.title.empty() ? title : c.title;
  a.x_label = c.x_label.empty() ? x : c.x_label;
  a.y_label = c.y_label.empty() ? y : c.y_label;
  a.log_y = c.log_y || log_y_default;
  return a;
}

std::vector<double> as_doubles(const std::vector<int>& v) { return {v.begin(), v.end()}; }

void add_envelope_summary(const Envelope& env, const std::string& what, RunResult& r, double allowance = 2.0) {
  const MonotonicityVerdict v = check_non_increasing(env.risk, allowance);
  r.summary["envelope_monotone"] = verdict_json(v, env.x);
  r.text += verdict_line(what, v, env.x);
}

// ---- kinds ----------------------------------------------------------------

RunResult run_samplewise_iso(const ExperimentConfig& c) {
  const std::string p = "problem.";
  IsoParams params;
  params.d = int_or(c.problem, "d", 50, p);
  params.sigma = number_or(c.problem, "sigma", 0.5, p);
  params.beta_norm = number_or(c.problem, "beta_norm", 1.0, p);
  if (params.d < 1) throw ConfigError("problem.d", "must be >= 1");
  if (params.sigma < 0 || params.beta_norm < 0) throw ConfigError("problem", "sigma and beta_norm must be >= 0");

  const IsoSpectrumPaths paths(c.n_grid, params.d, c.trials, c.seed);
  CurveSet set;
  set.sweep_name = "n";
  set.sweep = as_doubles(c.n_grid);
  set.lambdas = c.lambda_grid;
  Envelope env;
  const auto lam_opt = optimal_lambda_iso(params.d, params.sigma, params.beta_norm);
  for (int n : c.n_grid) {
    std::vector<RiskEstimate> row;
    for (double lam : c.lambda_grid) row.push_back(paths.risk(n, lam, params));
    set.values.push_back(std::move(row));
    env.x.push_back(n);
    env.lambda.push_back(lam_opt.value_or(std::numeric_limits<double>::infinity()));
    env.risk.push_back(paths.optimal_risk(n, params));
  }
  RunResult r;
  const double null_risk = params.beta_norm * params.beta_norm + params.sigma * params.sigma;
  r.summary["lambda_opt"] = env.lambda.front();
  r.summary["null_risk"] = null_risk;
  std::ostringstream o;
  o << "optimal lambda (constant in n): " << format_double(env.lambda.front()) << "\n";
  r.text += o.str();
  add_envelope_summary(env, "optimally tuned risk non-increasing in n", r);
  const auto it = std::min_element(c.lambda_grid.begin(), c.lambda_grid.end());
  const std::size_t k0 = static_cast<std::size_t>(it - c.lambda_grid.begin());
  double peak = 0.0;
  int peak_n = 0;
  for (std::size_t i = 0; i < c.n_grid.size(); ++i)
    if (set.values[i][k0].mean > peak) {
      peak = set.values[i][k0].mean;
      peak_n = c.n_grid[i];
    }
  r.summary["smallest_lambda_peak"] = {{"n", peak_n}, {"risk", peak}, {"exceeds_null", peak > null_risk}};
  r.text += "smallest-lambda curve peaks at n = " + std::to_string(peak_n) + " with risk " + format_double(peak) +
            (peak > null_risk ? " (above" : " (below") + " the null risk " + format_double(null_risk) + ")\n";
  emit_curves(c, set, env, axes_for(c, "Isotropic ridge: test risk vs samples", "num. samples n", "test risk", true), r,
              "samplewise_iso");
  return r;
}

Eigen::MatrixXd covariance_from(const json& prob, int d) {
  if (prob.contains("covariance_diag")) {
    const auto v = prob["covariance_diag"].get<std::vector<double>>();
    if (static_cast<int>(v.size()) != d) throw ConfigError("problem.covariance_diag", "length must equal d");
    return Eigen::Map<const Eigen::VectorXd>(v.data(), d).asDiagonal();
  }
  if (prob.contains("covariance_blocks")) {
    Eigen::VectorXd diag(d);
    int at = 0;
    for (const json& b : prob["covariance_blocks"]) {
      if (!b.is_array() || b.size() != 2) throw ConfigError("problem.covariance_blocks", "entries must be [value, count]");
      const double value = b[0].get<double>();
      const int count = b[1].get<int>();
      if (count < 0 || at + count > d) throw ConfigError("problem.covariance_blocks", "block counts exceed d");
      diag.segment(at, count).setConstant(value);
      at += count;
    }
    if (at != d) throw ConfigError("problem.covariance_blocks", "block counts must sum to d");
    return diag.asDiagonal();
  }
  return Eigen::MatrixXd::Identity(d, d);
}

Eigen::VectorXd beta_from(const json& prob, int d) {
  if (prob.contains("beta_star")) {
    const auto v = prob["beta_star"].get<std::vector<double>>();
    if (static_cast<int>(v.size()) != d) throw ConfigError("problem.beta_star", "length must equal d");
    return Eigen::Map<const Eigen::VectorXd>(v.data(), d);
  }
  if (prob.contains("beta_entries")) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
    for (const json& e : prob["beta_entries"]) {
      if (!e.is_array() || e.size() != 2) throw ConfigError("problem.beta_entries", "entries must be [index, value]");
      const int i = e[0].get<int>();
      if (i < 0 || i >= d) throw ConfigError("problem.beta_entries", "index out of range");
      b(i) = e[1].get<double>();
    }
    return b;
  }
  throw ConfigError("problem.beta_star", "missing (or give problem.beta_entries)");
}

RunResult run_samplewise_noniso(const ExperimentConfig& c) {
  const std::string p = "problem.";
  const int d = int_or(c.problem, "d", 30, p);
  if (d < 1) throw ConfigError("problem.d", "must be >= 1");
  GaussianProblem prob;
  prob.covariance = covariance_from(c.problem, d);
  prob.beta_star = beta_from(c.problem, d);
  prob.sigma = number_or(c.problem, "sigma", 0.5, p);
  try {
    prob.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("problem", e.what());
  }
  const std::string reg_name = string_or(c.problem, "regularizer", "identity", p);
  RegularizerSpec reg;
  if (reg_name == "identity") {
    reg = RegularizerSpec::identity(d);
  } else if (reg_name == "covariance") {
    reg = RegularizerSpec::covariance(prob.covariance);
  } else if (reg_name == "inverse_covariance") {
    reg = RegularizerSpec::inverse_covariance(prob.covariance);
  } else {
    throw ConfigError("problem.regularizer", "must be identity, covariance or inverse_covariance");
  }
  const double signal = prob.beta_star.dot(prob.covariance * prob.beta_star);
  const double cap = number_or(c.problem, "lambda_max", lambda_search_cap(d, prob.sigma, signal), p);

  CurveSet set, train;
  set.sweep_name = train.sweep_name = "n";
  set.sweep = train.sweep = as_doubles(c.n_grid);
  set.lambdas = train.lambdas = c.lambda_grid;
  train.value_name = "train_mse";
  Envelope env;
  for (int n : c.n_grid) {
    const GeneralRiskCurve curve(prob, reg, n, c.trials, c.seed);
    std::vector<RiskEstimate> row, trow;
    for (double lam : c.lambda_grid) {
      row.push_back(curve.risk(lam));
      trow.push_back(n > 0 ? curve.train_risk(lam) : RiskEstimate{});
    }
    set.values.push_back(std::move(row));
    train.values.push_back(std::move(trow));
    SearchOptions opts;
    opts.null_risk = curve.null_risk();
    const LambdaSearchResult s =
        minimize_over_lambda([&](double lam) { return curve.risk(lam).mean; }, 0.0, cap, opts);
    env.x.push_back(n);
    env.lambda.push_back(s.lambda_opt);
    if (s.at_null_limit) {
      RiskEstimate e;
      e.mean = curve.null_risk();
      e.trials = c.trials;
      e.lambda = s.lambda_opt;
      env.risk.push_back(e);
    } else {
      env.risk.push_back(curve.risk(s.lambda_opt));
    }
  }
  RunResult r;
  add_envelope_summary(env, "optimally tuned risk non-increasing in n", r);
  // Local maxima of the smallest-lambda curve.
  const std::size_t k0 = static_cast<std::size_t>(
      std::min_element(c.lambda_grid.begin(), c.lambda_grid.end()) - c.lambda_grid.begin());
  json peaks = json::array();
  std::string peak_text;
  for (std::size_t i = 1; i + 1 < c.n_grid.size(); ++i) {
    const double v = set.values[i][k0].mean;
    if (v > set.values[i - 1][k0].mean && v > set.values[i + 1][k0].mean) {
      peaks.push_back(c.n_grid[i]);
      peak_text += " " + std::to_string(c.n_grid[i]);
    }
  }
  r.summary["smallest_lambda_local_maxima"] = peaks;
  r.text += "smallest-lambda curve local maxima at n =" + (peak_text.empty() ? std::string(" (none)") : peak_text) + "\n";
  const AxisSpec axes = axes_for(c, "Non-isotropic ridge: test risk vs samples", "num. samples n", "test risk", true);
  emit_curves(c, set, env, axes, r, "samplewise_noniso");

  Table tt;
  tt.header = {"n", "lambda", "train_mse", "se"};
  for (std::size_t i = 0; i < train.sweep.size(); ++i)
    for (std::size_t k = 0; k < train.lambdas.size(); ++k)
      tt.rows.push_back({train.sweep[i], train.lambdas[k], train.values[i][k].mean, train.values[i][k].std_error});
  const auto train_path = c.output / "samplewise_noniso_train.csv";
  emit_csv(tt, train_path);
  r.csv_files.push_back(train_path);
  return r;
}

RunResult run_modelwise_proj(const ExperimentConfig& c) {
  const std::string p = "problem.";
  ProjectionParams params;
  params.p = int_or(c.problem, "p", 100, p);
  params.sigma = number_or(c.problem, "sigma", 0.5, p);
  params.theta_norm = number_or(c.problem, "theta_norm", 1.0, p);
  const int n = int_or(c.problem, "n", 50, p);
  if (params.p < 1 || n < 0) throw ConfigError("problem", "need p >= 1 and n >= 0");
  if (c.d_grid.back() > params.p) throw ConfigError("d_grid", "model sizes must not exceed p");

  const ProjectionSweep sweep(c.d_grid, n, params, c.trials, c.seed);
  CurveSet set;
  set.sweep_name = "d";
  set.sweep = as_doubles(c.d_grid);
  set.lambdas = c.lambda_grid;
  Envelope env;
  for (int d : c.d_grid) {
    std::vector<RiskEstimate> row;
    for (double lam : c.lambda_grid) row.push_back(sweep.risk(d, lam));
    set.values.push_back(std::move(row));
    const ProjectedRiskPoint opt = sweep.optimal(d);
    env.x.push_back(d);
    env.lambda.push_back(opt.lambda);
    env.risk.push_back(opt.risk);
  }
  RunResult r;
  add_envelope_summary(env, "optimally tuned risk non-increasing in d", r);
  emit_curves(c, set, env, axes_for(c, "Projected ridge: test risk vs model size", "model size d", "test risk", true),
              r, "modelwise_proj");
  return r;
}

RunResult run_counterexample(const ExperimentConfig& c) {
  TwoPointDistribution dist;
  dist.A = number_or(c.problem, "A", dist.A, "problem.");
  dist.eps = number_or(c.problem, "eps", dist.eps, "problem.");
  try {
    dist.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("problem", e.what());
  }
  for (int n : c.n_grid)
    if (n != 1 && n != 2) throw ConfigError("n_grid", "exact enumeration supports n in {1, 2}");
  CurveSet set;
  set.sweep_name = "n";
  set.sweep = as_doubles(c.n_grid);
  set.lambdas = c.lambda_grid;
  Envelope env;
  for (int n : c.n_grid) {
    std::vector<RiskEstimate> row;
    for (double lam : c.lambda_grid) {
      RiskEstimate e;
      e.mean = exact_expected_risk(n, lam, dist);
      e.lambda = lam;
      row.push_back(e);
    }
    set.values.push_back(std::move(row));
  }
  const NonmonotonicityReport rep = verify_nonmonotonicity(dist);
  for (int n : c.n_grid) {
    RiskEstimate e;
    e.mean = n == 1 ? rep.risk1 : rep.risk2;
    e.lambda = n == 1 ? rep.lambda1 : rep.lambda2;
    env.x.push_back(n);
    env.lambda.push_back(e.lambda);
    env.risk.push_back(e);
  }
  RunResult r;
  r.summary["risk1"] = rep.risk1;
  r.summary["risk2"] = rep.risk2;
  r.summary["lambda1"] = rep.lambda1;
  r.summary["lambda2"] = rep.lambda2;
  r.summary["gap"] = rep.gap;
  r.summary["increases"] = rep.increases;
  std::ostringstream o;
  o.precision(10);
  o << "optimal risk with 1 sample: " << rep.risk1 << " at lambda " << rep.lambda1 << "\n"
    << "optimal risk with 2 samples: " << rep.risk2 << " at lambda " << rep.lambda2 << "\n"
    << "gap: " << rep.gap << (rep.increases ? " (more data hurts)" : "") << "\n";
  r.text += o.str();
  const MonotonicityVerdict v = check_non_increasing(env.risk, 0.0);
  r.summary["envelope_monotone"] = verdict_json(v, env.x);
  emit_curves(c, set, env, axes_for(c, "Two-point counterexample: exact risk", "num. samples n", "test risk", false), r,
              "counterexample");
  return r;
}

RunResult run_conjecture(const ExperimentConfig& c) {
  const std::string p = "problem.";
  BatteryOptions o;
  o.instances = int_or(c.problem, "instances", o.instances, p);
  o.d_min = int_or(c.problem, "d_min", o.d_min, p);
  o.d_max = int_or(c.problem, "d_max", o.d_max, p);
  o.n_min = int_or(c.problem, "n_min", o.n_min, p);
  o.n_max = int_or(c.problem, "n_max", o.n_max, p);
  o.q_min = number_or(c.problem, "q_min", o.q_min, p);
  o.q_max = number_or(c.problem, "q_max", o.q_max, p);
  o.identity_q = c.problem.contains("identity_q") && c.problem["identity_q"].get<bool>();
  o.lambdas = c.lambda_grid;
  if (o.lambdas.front() <= 0.0) throw ConfigError("lambda_grid", "conjecture checks need lambda > 0");
  o.trials = c.trials;
  o.seed = c.seed;
  if (o.trials < 2 * kConditionBatches) throw ConfigError("trials", "need at least 64 trials for batch errors");
  std::vector<BatteryRow> rows;
  try {
    rows = run_battery(o);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("problem", e.what());
  }

  RunResult r;
  const auto path = c.output / "conjecture_battery.csv";
  std::filesystem::create_directories(c.output);
  {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    write_battery_csv(f, rows);
  }
  r.csv_files.push_back(path);

  int counts[2][3] = {};
  Series one{"condition 1: min eigenvalue / SE", {}, {}, false};
  Series two{"condition 2: min eigenvalue / SE", {}, {}, false};
  Series floor{"violation threshold (-10 SE)", {}, {}, true};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ++counts[0][static_cast<int>(rows[i].one.verdict)];
    ++counts[1][static_cast<int>(rows[i].two.psd.verdict)];
    const double x = static_cast<double>(i);
    one.x.push_back(x);
    one.y.push_back(rows[i].one.min_eigenvalue / rows[i].one.std_error);
    two.x.push_back(x);
    two.y.push_back(rows[i].two.psd.min_eigenvalue / rows[i].two.psd.std_error);
    floor.x.push_back(x);
    floor.y.push_back(-10.0);
  }
  const char* names[3] = {"holds", "violated", "inconclusive"};
  for (int k = 0; k < 2; ++k) {
    json j;
    for (int v = 0; v < 3; ++v) j[names[v]] = counts[k][v];
    r.summary[k == 0 ? "condition_one" : "condition_two"] = j;
    r.text += std::string(k == 0 ? "condition 1" : "condition 2") + ": " + std::to_string(counts[k][0]) + " holds, " +
              std::to_string(counts[k][1]) + " violated, " + std::to_string(counts[k][2]) + " inconclusive\n";
  }
  r.summary["evaluations"] = rows.size();
  const auto svg = c.output / "conjecture_battery.svg";
  emit_svg_plot({one, two, floor}, axes_for(c, "PSD battery", "battery row", "min eigenvalue / SE", false), svg);
  r.svg_files.push_back(svg);
  return r;
}

RunResult run_relu(const ExperimentConfig& c, bool samplewise) {
  const std::string p = "problem.";
  DatasetSplit data;
  if (c.synthetic) {
    SyntheticOptions so;
    if (c.problem.contains("synthetic")) {
      const json& s = c.problem["synthetic"];
      so.train = int_or(s, "train", so.train, "problem.synthetic.");
      so.test = int_or(s, "test", so.test, "problem.synthetic.");
      so.mean_scale = number_or(s, "mean_scale", so.mean_scale, "problem.synthetic.");
      so.noise = number_or(s, "noise", so.noise, "problem.synthetic.");
      so.seed = static_cast<std::uint64_t>(int_or(s, "seed", static_cast<int>(so.seed), "problem.synthetic."));
    }
    data = synthetic_mixture(so);
  } else {
    if (c.dataset_dir.empty())
      throw ConfigError("dataset_dir", "relu experiments need a dataset directory (--data DIR) or --synthetic");
    if (!std::filesystem::is_directory(c.dataset_dir))
      throw ConfigError("dataset_dir", "directory " + c.dataset_dir.string() + " does not exist");
    data = load_idx_dataset(c.dataset_dir);
  }
  const int test_size = int_or(c.problem, "test_size", data.test.size(), p);
  if (test_size < 1 || test_size > data.test.size()) throw ConfigError("problem.test_size", "out of range");
  if (test_size < data.test.size()) data.test = subsample(data.test, test_size, c.seed ^ 0x7e57ULL);

  FeatureSweepOptions o;
  o.lambdas = c.lambda_grid;
  o.trials = c.trials;
  o.seed = c.seed;
  const std::string scale = string_or(c.problem, "weight_scale", "inv_sqrt_dim", p);
  if (scale == "inv_sqrt_dim") {
    o.scale = WeightScale::inv_sqrt_dim;
  } else if (scale == "inv_dim") {
    o.scale = WeightScale::inv_dim;
  } else {
    throw ConfigError("problem.weight_scale", "must be inv_sqrt_dim or inv_dim");
  }
  std::vector<int> ns, Ds;
  if (samplewise) {
    ns = c.n_grid;
    Ds = {int_or(c.problem, "features", 500, p)};
    if (Ds[0] < 1) throw ConfigError("problem.features", "must be >= 1");
  } else {
    ns = {int_or(c.problem, "n", 500, p)};
    Ds = c.d_grid;
    if (ns[0] < 1) throw ConfigError("problem.n", "must be >= 1");
  }
  if (*std::max_element(ns.begin(), ns.end()) > data.train.size())
    throw ConfigError(samplewise ? "n_grid" : "problem.n", "exceeds the training set size");
  const std::vector<FeatureSweepPoint> pts = feature_sweep(data, ns, Ds, o);

  const std::size_t L = c.lambda_grid.size();
  const std::vector<int>& grid = samplewise ? ns : Ds;
  CurveSet set;
  set.sweep_name = samplewise ? "n" : "D";
  set.sweep = as_doubles(grid);
  set.lambdas = c.lambda_grid;
  set.value_name = "test_error";
  Table main, train;
  main.header = {set.sweep_name, "lambda", "test_error", "se", "test_mse", "mse_se"};
  train.header = {set.sweep_name, "lambda", "train_error", "train_mse"};
  Envelope env;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<RiskEstimate> row;
    std::size_t best = 0;
    for (std::size_t k = 0; k < L; ++k) {
      const FeatureSweepPoint& q = pts[i * L + k];
      RiskEstimate e;
      e.mean = q.test.classification_error;
      e.std_error = q.test_error_se;
      e.lambda = q.lambda;
      row.push_back(e);
      main.rows.push_back({set.sweep[i], q.lambda, q.test.classification_error, q.test_error_se, q.test.mse, q.test_mse_se});
      train.rows.push_back({set.sweep[i], q.lambda, q.train.classification_error, q.train.mse});
      if (e.mean < row[best].mean) best = k;
    }
    env.x.push_back(set.sweep[i]);
    env.lambda.push_back(row[best].lambda);
    env.risk.push_back(row[best]);
    set.values.push_back(std::move(row));
  }
  const std::string stem = samplewise ? "relu_samplewise" : "relu_modelwise";
  RunResult r;
  r.summary["dataset"] = data.train.name;
  add_envelope_summary(env, std::string("tuned test error non-increasing in ") + (samplewise ? "n" : "D"), r);
  const std::size_t k0 = static_cast<std::size_t>(
      std::min_element(c.lambda_grid.begin(), c.lambda_grid.end()) - c.lambda_grid.begin());
  std::size_t peak = 0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (set.values[i][k0].mean > set.values[peak][k0].mean) peak = i;
  r.summary["smallest_lambda_peak"] = {{set.sweep_name, grid[peak]}, {"test_error", set.values[peak][k0].mean}};
  r.text += "smallest-lambda test error peaks at " + set.sweep_name + " = " + std::to_string(grid[peak]) + " (" +
            format_double(set.values[peak][k0].mean) + ")\n";
  const AxisSpec axes = axes_for(c, samplewise ? "Random ReLU features: test error vs samples"
                                               : "Random ReLU features: test error vs features",
                                 samplewise ? "num. samples n" : "num. features D", "test classification error", false);
  // Main CSV carries the MSE columns, so it is written here rather than by emit_curves.
  emit_curves(c, set, env, axes, r, stem);
  const auto main_path = c.output / (stem + ".csv");
  emit_csv(main, main_path);
  const auto train_path = c.output / (stem + "_train.csv");
  emit_csv(train, train_path);
  r.csv_files.push_back(train_path);
  return r;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& c) {
  std::filesystem::create_directories(c.output);
  RunResult r;
  if (c.kind == "samplewise-iso") r = run_samplewise_iso(c);
  else if (c.kind == "samplewise-noniso") r = run_samplewise_noniso(c);
  else if (c.kind == "modelwise-proj") r = run_modelwise_proj(c);
  else if (c.kind == "counterexample") r = run_counterexample(c);
  else if (c.kind == "conjecture") r = run_conjecture(c);
  else if (c.kind == "relu-samplewise") r = run_relu(c, true);
  else if (c.kind == "relu-modelwise") r = run_relu(c, false);
  else throw ConfigError("kind", "unknown kind '" + c.kind + "'");
  r.summary["kind"] = c.kind;
  r.summary["seed"] = c.seed;
  r.summary["trials"] = c.trials;
  json files = json::array();
  for (const auto& f : r.csv_files) files.push_back(f.string());
  r.summary["csv"] = files;
  files = json::array();
  for (const auto& f : r.svg_files) files.push_back(f.string());
  r.summary["svg"] = files;
  r.text = c.kind + " (seed " + std::to_string(c.seed) + ", trials " + std::to_string(c.trials) + ")\n" + r.text;
  return r;
}

}  // namespace ridgelab

#include "dlasftc/analysis.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace dlasftc {

double error_metric(const Eigen::MatrixXd& states, const Eigen::MatrixXd& initial,
                    double target, int coordinate) {
  if (states.rows() != initial.rows() || coordinate < 0 ||
      coordinate >= states.cols()) {
    throw std::invalid_argument("error_metric: shape mismatch");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < states.rows(); ++i) {
    const double den = initial(i, coordinate) - target;
    if (den == 0.0) {
      throw std::domain_error(
          "error_metric: node initialized exactly at the target; reseed the "
          "initialization");
    }
    const double num = states(i, coordinate) - target;
    total += (num / den) * (num / den);
  }
  return std::sqrt(total);
}

double zeta(const BoundParams& params, int t) {
  const double l = params.lambda.at(t);
  return std::max(std::abs(1.0 - l * params.smoothness),
                  std::abs(1.0 - l * params.strong_convexity));
}

double contraction_bound(const BoundParams& params, int k) {
  if (k < 0 || k >= static_cast<int>(params.lambda.size())) {
    throw std::invalid_argument("contraction_bound: k out of range");
  }
  double product = 1.0;
  for (int t = 0; t <= k; ++t) product *= zeta(params, t);
  double noise = 0.0;
  for (int h = 0; h <= k; ++h) {
    double tail = 1.0;
    for (int j = h + 1; j <= k; ++j) tail *= zeta(params, j);
    noise += params.lambda[h] * tail;
  }
  return product * params.initial_distance + params.grad_deviation * noise;
}

double conservative_bound(const BoundParams& params, int k) {
  if (k < 0 || k >= static_cast<int>(params.lambda.size())) {
    throw std::invalid_argument("conservative_bound: k out of range");
  }
  // The maxima run over rounds 1..k; at k = 0 they fall back to round 0.
  double nu = zeta(params, 0);
  double lambda_bar = params.lambda[0];
  if (k >= 1) {
    nu = zeta(params, 1);
    lambda_bar = params.lambda[1];
    for (int t = 2; t <= k; ++t) {
      nu = std::max(nu, zeta(params, t));
      lambda_bar = std::max(lambda_bar, params.lambda[t]);
    }
  }
  const double geometric = std::abs(1.0 - nu) < 1e-12
                               ? static_cast<double>(k + 1)
                               : (1.0 - std::pow(nu, k + 1)) / (1.0 - nu);
  return std::pow(nu, k) * params.initial_distance +
         lambda_bar * params.grad_deviation * geometric;
}

BoundParams bound_params(const TrajectoryRecord& record) {
  BoundParams params;
  params.smoothness = record.constants.smoothness;
  params.strong_convexity = record.constants.strong_convexity;
  params.grad_deviation =
      record.config.deterministic_gradients ? 0.0 : record.constants.grad_deviation;
  params.initial_distance = record.initial_distance;
  params.lambda.reserve(record.rounds.size());
  for (const auto& round : record.rounds) params.lambda.push_back(round.lambda_mean);
  return params;
}

BoundReport bound_check(const std::vector<TrajectoryRecord>& repetitions,
                        const BoundCheckOptions& options) {
  if (repetitions.empty()) {
    throw std::invalid_argument("bound_check: no repetitions");
  }
  std::size_t round_count = repetitions.front().rounds.size();
  for (const auto& rep : repetitions) {
    round_count = std::min(round_count, rep.rounds.size());
  }
  const int reps = static_cast<int>(repetitions.size());

  std::vector<BoundParams> params;
  params.reserve(repetitions.size());
  for (const auto& rep : repetitions) params.push_back(bound_params(rep));

  BoundReport report;
  report.repetitions = reps;
  for (std::size_t k = 0; k < round_count; ++k) {
    BoundCheckRow row;
    row.k = static_cast<int>(k);

    double dist_sum = 0.0;
    double dist_sq_sum = 0.0;
    double bound_sum = 0.0;
    double cons_sum = 0.0;
    for (int r = 0; r < reps; ++r) {
      const auto& round = repetitions[r].rounds[k];
      const double dist = round.distance_to_opt;
      dist_sum += dist;
      dist_sq_sum += dist * dist;
      bound_sum += contraction_bound(params[r], row.k);
      cons_sum += conservative_bound(params[r], row.k);

      const double z = zeta(params[r], row.k);
      row.zeta_max = std::max(row.zeta_max, z);

      // Per-step contraction: previous distance shrinks by zeta plus the
      // measured projection error of the stochastic gradient.
      const double prev = k == 0 ? repetitions[r].initial_distance
                                 : repetitions[r].rounds[k - 1].distance_to_opt;
      const double eg = round.lambda_mean * round.grad_noise;
      const double allowance =
          options.one_step_slack + options.one_step_relative_slack * prev;
      if (dist > z * prev + eg + allowance) ++row.one_step_violations;

      // Projection-error bound, pathwise.
      const double eg_bound = round.lambda_mean * params[r].grad_deviation;
      row.grad_error_max = std::max(row.grad_error_max, eg);
      row.grad_error_bound = std::max(row.grad_error_bound, eg_bound);
      if (eg > eg_bound + 1e-15) ++row.grad_error_violations;
    }
    row.distance_mean = dist_sum / reps;
    row.distance_sd = reps > 1
                          ? std::sqrt(std::max(0.0, (dist_sq_sum - dist_sum * dist_sum / reps) /
                                                        (reps - 1)))
                          : 0.0;
    row.bound_tight = bound_sum / reps;
    row.bound_conservative = cons_sum / reps;
    row.slack = options.slack_sigmas * row.distance_sd / std::sqrt(double(reps)) +
                options.cumulative_slack;
    row.mean_bound_violated = row.distance_mean > row.bound_tight + row.slack;

    if (row.mean_bound_violated) ++report.mean_bound_violations;
    report.one_step_violations += row.one_step_violations;
    report.grad_error_violations += row.grad_error_violations;
    if (row.zeta_max >= 1.0) ++report.zeta_out_of_range;
    report.rows.push_back(row);
  }
  return report;
}

std::string BoundReport::to_json() const {
  nlohmann::json j;
  j["repetitions"] = repetitions;
  j["mean_bound_violations"] = mean_bound_violations;
  j["one_step_violations"] = one_step_violations;
  j["grad_error_violations"] = grad_error_violations;
  j["zeta_out_of_range_rounds"] = zeta_out_of_range;
  j["ok"] = ok();
  auto arr = [this](auto&& get) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& row : rows) v.push_back(get(row));
    return v;
  };
  j["k"] = [this] {
    std::vector<int> v;
    for (const auto& row : rows) v.push_back(row.k);
    return v;
  }();
  j["distance_mean"] = arr([](const BoundCheckRow& r) { return r.distance_mean; });
  j["distance_sd"] = arr([](const BoundCheckRow& r) { return r.distance_sd; });
  j["bound_thm1"] = arr([](const BoundCheckRow& r) { return r.bound_tight; });
  j["bound_rem2"] = arr([](const BoundCheckRow& r) { return r.bound_conservative; });
  j["slack"] = arr([](const BoundCheckRow& r) { return r.slack; });
  j["zeta_max"] = arr([](const BoundCheckRow& r) { return r.zeta_max; });
  j["grad_error_max"] = arr([](const BoundCheckRow& r) { return r.grad_error_max; });
  j["grad_error_bound"] = arr([](const BoundCheckRow& r) { return r.grad_error_bound; });
  return j.dump(2);
}

std::string BoundReport::summary_table() const {
  std::ostringstream out;
  out << "  k  E||x-x*||     bound(tight)  bound(cons.)  zeta_max  flags\n";
  for (const auto& row : rows) {
    out << std::setw(3) << row.k << "  " << std::scientific << std::setprecision(4)
        << row.distance_mean << "    " << row.bound_tight << "    "
        << row.bound_conservative << "  " << std::fixed << std::setprecision(4)
        << row.zeta_max << "    ";
    if (row.mean_bound_violated) out << "MEAN-BOUND ";
    if (row.one_step_violations > 0)
      out << "ONE-STEP(" << row.one_step_violations << ") ";
    if (row.grad_error_violations > 0)
      out << "GRAD-ERR(" << row.grad_error_violations << ") ";
    if (row.zeta_max >= 1.0) out << "ZETA>=1 ";
    out << '\n';
  }
  out << (ok() ? "all bound checks passed" : "BOUND CHECK VIOLATIONS PRESENT")
      << " over " << repetitions << " repetition(s)\n";
  return out.str();
}

std::string trajectory_csv(const TrajectoryRecord& record) {
  const BoundParams params = bound_params(record);
  std::ostringstream out;
  out.precision(17);
  out << "# " << run_meta_json(record) << '\n';
  out << "k,lambda,eps,eta_min,eta_max,x_spread,bound_thm1,bound_rem2\n";
  for (std::size_t k = 0; k < record.rounds.size(); ++k) {
    const auto& round = record.rounds[k];
    out << round.round << ',' << round.lambda_mean << ',' << round.error << ','
        << round.eta.minCoeff() << ',' << round.eta.maxCoeff() << ','
        << round.post_spread << ',' << contraction_bound(params, round.round) << ','
        << conservative_bound(params, round.round) << '\n';
  }
  return out.str();
}

}  // namespace dlasftc

#include "teamdesign/win_model.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "teamdesign/rng.hpp"

namespace teamdesign {
namespace {

double log1pexp(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Eigen::VectorXd linear_predictor(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta) {
  return (x * theta.tail(theta.size() - 1)).array() + theta[0];
}

std::vector<std::size_t> resolve_columns(const std::vector<std::string>& names) {
  std::vector<std::size_t> cols;
  if (names.empty()) {
    for (std::size_t i = 0; i < kFeatureCount; ++i) cols.push_back(i);
    return cols;
  }
  for (const auto& n : names) {
    auto c = feature_column(n);
    if (!c) throw invalid_argument("unknown feature column: " + n);
    cols.push_back(*c);
  }
  return cols;
}

Eigen::MatrixXd design(std::span<const LabeledRow> rows, std::span<const std::size_t> row_ids,
                       const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(row_ids.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < row_ids.size(); ++i) {
    const auto v = rows[row_ids[i]].features.values();
    for (std::size_t j = 0; j < cols.size(); ++j) x(i, j) = v[cols[j]];
  }
  return x;
}

struct Standardizer {
  Eigen::VectorXd mean, std;

  static Standardizer fit(const Eigen::MatrixXd& x) {
    Standardizer s;
    const double n = static_cast<double>(x.rows());
    s.mean = x.colwise().mean().transpose();
    s.std.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double var = (x.col(j).array() - s.mean[j]).square().sum() / std::max(n - 1.0, 1.0);
      const double scale = std::max(1.0, std::abs(s.mean[j]));
      s.std[j] = var <= 1e-24 * scale * scale ? 0.0 : std::sqrt(var);
    }
    return s;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd z(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (std[j] == 0.0)
        z.col(j).setZero();
      else
        z.col(j) = (x.col(j).array() - mean[j]) / std[j];
    }
    return z;
  }
};

struct CellFit {
  Standardizer standardizer;
  Eigen::VectorXd theta;
  int iterations = 0;
  double gradient_norm = 0.0;
};

// Constant columns are held at weight zero by solving over the rest.
CellFit fit_cell(const Eigen::MatrixXd& raw, const Eigen::VectorXd& y, const TrainOptions& options) {
  CellFit out;
  out.standardizer = Standardizer::fit(raw);
  const Eigen::MatrixXd z = out.standardizer.apply(raw);
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    if (out.standardizer.std[j] > 0.0) active.push_back(j);
  Eigen::MatrixXd za(z.rows(), static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) za.col(static_cast<Eigen::Index>(k)) = z.col(active[k]);
  const LogisticFit fit =
      fit_logistic(za, y, options.l2_lambda, options.max_iterations, options.gradient_tolerance);
  out.theta = Eigen::VectorXd::Zero(z.cols() + 1);
  out.theta[0] = fit.theta[0];
  for (std::size_t k = 0; k < active.size(); ++k) out.theta[active[k] + 1] = fit.theta[static_cast<Eigen::Index>(k) + 1];
  out.iterations = fit.iterations;
  out.gradient_norm = fit.gradient_norm;
  return out;
}

void check_trainable(std::span<const LabeledRow> rows, int folds) {
  if (folds < 2) throw invalid_argument("need at least 2 folds");
  if (rows.size() < static_cast<std::size_t>(2 * folds))
    throw data_error("need at least " + std::to_string(2 * folds) + " rows, got " + std::to_string(rows.size()));
  const auto wins = std::count_if(rows.begin(), rows.end(), [](const LabeledRow& r) { return r.win; });
  if (wins == 0 || wins == static_cast<long>(rows.size())) throw data_error("training rows contain a single class");
}

Eigen::VectorXd labels(std::span<const LabeledRow> rows, std::span<const std::size_t> ids) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) y[i] = rows[ids[i]].win ? 1.0 : 0.0;
  return y;
}

CrossValidation cross_validate_on(std::span<const LabeledRow> rows, const std::vector<int>& fold_of,
                                  const std::vector<std::size_t>& cols, const TrainOptions& options) {
  CrossValidation cv;
  for (int f = 0; f < options.folds; ++f) {
    std::vector<std::size_t> train_ids, test_ids;
    for (std::size_t i = 0; i < rows.size(); ++i) (fold_of[i] == f ? test_ids : train_ids).push_back(i);
    const Eigen::VectorXd y = labels(rows, train_ids);
    if (y.sum() == 0.0 || y.sum() == static_cast<double>(y.size()))
      throw data_error("fold " + std::to_string(f) + " training split has a single class");
    const CellFit fit = fit_cell(design(rows, train_ids, cols), y, options);
    const Eigen::VectorXd eta = linear_predictor(fit.standardizer.apply(design(rows, test_ids, cols)), fit.theta);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test_ids.size(); ++i)
      if ((sigmoid(eta[static_cast<Eigen::Index>(i)]) >= 0.5) == rows[test_ids[i]].win) ++correct;
    cv.fold_accuracies.push_back(static_cast<double>(correct) / static_cast<double>(test_ids.size()));
  }
  double sum = 0.0;
  for (double a : cv.fold_accuracies) sum += a;
  cv.accuracy = sum / static_cast<double>(cv.fold_accuracies.size());
  return cv;
}

}  // namespace

double logistic_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& theta,
                     double l2_lambda) {
  const Eigen::VectorXd eta = linear_predictor(x, theta);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) loss += log1pexp(eta[i]) - y[i] * eta[i];
  return loss / static_cast<double>(eta.size()) + 0.5 * l2_lambda * theta.tail(theta.size() - 1).squaredNorm();
}

Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& theta, double l2_lambda) {
  const Eigen::VectorXd eta = linear_predictor(x, theta);
  Eigen::VectorXd r(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) r[i] = sigmoid(eta[i]) - y[i];
  const double n = static_cast<double>(eta.size());
  Eigen::VectorXd g(theta.size());
  g[0] = r.sum() / n;
  g.tail(theta.size() - 1) = x.transpose() * r / n + l2_lambda * theta.tail(theta.size() - 1);
  return g;
}

LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double l2_lambda,
                         int max_iterations, double gradient_tolerance, const Eigen::VectorXd* start) {
  if (l2_lambda < 0) throw invalid_argument("l2_lambda must be >= 0");
  const Eigen::Index p = x.cols() + 1;
  const double n = static_cast<double>(x.rows());
  LogisticFit fit;
  fit.theta = start ? *start : Eigen::VectorXd::Zero(p);
  double loss = logistic_loss(x, y, fit.theta, l2_lambda);
  fit.loss_trace.push_back(loss);
  Eigen::VectorXd g = logistic_gradient(x, y, fit.theta, l2_lambda);

  for (int it = 0; it < max_iterations && g.norm() > gradient_tolerance; ++it) {
    const Eigen::VectorXd eta = linear_predictor(x, fit.theta);
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double s = sigmoid(eta[i]);
      w[i] = s * (1.0 - s) / n;
    }
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
    h(0, 0) = w.sum();
    const Eigen::VectorXd xw = x.transpose() * w;
    h.block(1, 0, p - 1, 1) = xw;
    h.block(0, 1, 1, p - 1) = xw.transpose();
    h.block(1, 1, p - 1, p - 1) = x.transpose() * w.asDiagonal() * x;
    h.block(1, 1, p - 1, p - 1).diagonal().array() += l2_lambda;
    h.diagonal().array() += 1e-12;

    Eigen::VectorXd step = -h.ldlt().solve(g);
    if (!step.allFinite() || g.dot(step) >= 0) step = -g;

    double t = 1.0;
    Eigen::VectorXd candidate;
    double candidate_loss = 0.0;
    // Inside the quadratic region the predicted decrease falls below the
    // summation noise of the loss, so the full Newton step is taken as is.
    const bool local = -g.dot(step) < 1e-12 * std::max(1.0, std::abs(loss));
    for (;;) {
      candidate = fit.theta + t * step;
      candidate_loss = logistic_loss(x, y, candidate, l2_lambda);
      if (local || candidate_loss <= loss + 1e-4 * t * g.dot(step)) break;
      t *= 0.5;
      if (t < 1e-12) break;
    }
    const Eigen::VectorXd candidate_g = logistic_gradient(x, y, candidate, l2_lambda);
    if (candidate_loss > loss) {
      // Rounding floor: accept only if it still shrinks the gradient.
      if (candidate_g.norm() >= g.norm()) break;
      candidate_loss = loss;
    }
    fit.theta = candidate;
    loss = candidate_loss;
    g = candidate_g;
    fit.loss_trace.push_back(loss);
    fit.iterations = it + 1;
  }
  fit.gradient_norm = g.norm();
  if (fit.gradient_norm > gradient_tolerance)
    throw Error(Error::Kind::Convergence, "logistic fit did not converge: gradient norm " +
                                              fmt::format("{:.3e}", fit.gradient_norm) + " after " +
                                              std::to_string(fit.iterations) + " iterations");
  return fit;
}

std::vector<int> stratified_folds(std::span<const LabeledRow> rows, int folds, std::uint64_t seed) {
  std::vector<int> fold_of(rows.size(), 0);
  int offset = 0;
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].win == (cls == 1)) ids.push_back(i);
    CounterRng rng(seed, 0x666f6c64ULL + static_cast<std::uint64_t>(cls));
    rng.shuffle(std::span<std::size_t>(ids));
    for (std::size_t k = 0; k < ids.size(); ++k)
      fold_of[ids[k]] = static_cast<int>((static_cast<std::size_t>(offset) + k) % static_cast<std::size_t>(folds));
    offset = static_cast<int>((static_cast<std::size_t>(offset) + ids.size()) % static_cast<std::size_t>(folds));
  }
  return fold_of;
}

CrossValidation cross_validate(std::span<const LabeledRow> rows, const TrainOptions& options) {
  check_trainable(rows, options.folds);
  return cross_validate_on(rows, stratified_folds(rows, options.folds, options.seed),
                           resolve_columns(options.columns), options);
}

WinModel train(std::span<const LabeledRow> rows, Region region, Tier tier, const TrainOptions& options) {
  check_trainable(rows, options.folds);
  const auto cols = resolve_columns(options.columns);
  const CrossValidation cv = cross_validate_on(rows, stratified_folds(rows, options.folds, options.seed), cols, options);

  std::vector<std::size_t> all(rows.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const CellFit fit = fit_cell(design(rows, all, cols), labels(rows, all), options);

  WinModel m;
  m.region = region;
  m.tier = tier;
  for (auto c : cols) m.feature_order.emplace_back(kFeatureNames[c]);
  m.feature_means = fit.standardizer.mean;
  m.feature_stds = fit.standardizer.std;
  m.intercept = fit.theta[0];
  m.weights = fit.theta.tail(fit.theta.size() - 1);
  m.l2_lambda = options.l2_lambda;
  m.cv_accuracy = cv.accuracy;
  m.fold_accuracies = cv.fold_accuracies;
  m.training_rows = rows.size();
  m.iterations = fit.iterations;
  m.gradient_norm = fit.gradient_norm;
  return m;
}

std::vector<WinModel> train_cells(std::span<const LabeledRow> rows, const TrainOptions& options, bool pooled) {
  std::map<std::pair<int, int>, std::vector<LabeledRow>> cells;
  for (const auto& r : rows) cells[{static_cast<int>(r.tier), static_cast<int>(r.region)}].push_back(r);
  std::vector<WinModel> out;
  for (const auto& [key, cell_rows] : cells) {
    const auto tier = static_cast<Tier>(key.first);
    const auto region = static_cast<Region>(key.second);
    try {
      out.push_back(train(cell_rows, region, tier, options));
    } catch (const Error& e) {
      if (e.kind() != Error::Kind::Data) throw;
      spdlog::warn("skipping cell {}/{}: {}", to_string(tier), to_string(region), e.what());
    }
  }
  if (pooled) {
    WinModel m = train(rows, Region::SYN, Tier::Bronze, options);
    m.pooled = true;
    out.push_back(std::move(m));
  }
  return out;
}

double predict(const WinModel& model, const TeamFeatureVector& features) {
  if (model.feature_order.size() != static_cast<std::size_t>(model.weights.size()) ||
      model.feature_means.size() != model.weights.size() || model.feature_stds.size() != model.weights.size())
    throw invalid_argument("model columns are inconsistent");
  const auto v = features.values();
  double eta = model.intercept;
  for (std::size_t j = 0; j < model.feature_order.size(); ++j) {
    const auto col = feature_column(model.feature_order[j]);
    if (!col) throw invalid_argument("model references unknown feature: " + model.feature_order[j]);
    const auto jj = static_cast<Eigen::Index>(j);
    if (model.feature_stds[jj] == 0.0) continue;
    eta += model.weights[jj] * (v[*col] - model.feature_means[jj]) / model.feature_stds[jj];
  }
  return sigmoid(eta);
}

std::vector<FeatureSubset> default_feature_subsets() {
  std::vector<FeatureSubset> subsets;
  subsets.push_back({"all", {}});
  subsets.push_back({"individual", {"mean_proficiency", "mean_generality"}});
  subsets.push_back({"team_composition", {"congruency", "diversity", "min_champ_distance", "max_champ_distance"}});
  subsets.push_back({"team_assignment",
                     {"starting_bottom", "background_diversity", "min_background_diversity", "max_background_diversity"}});
  for (auto name : kFeatureNames) subsets.push_back({std::string(name), {std::string(name)}});
  return subsets;
}

std::vector<AblationResult> ablate(std::span<const LabeledRow> rows, const std::vector<FeatureSubset>& subsets,
                                   const TrainOptions& options) {
  check_trainable(rows, options.folds);
  const std::vector<int> fold_of = stratified_folds(rows, options.folds, options.seed);
  std::vector<AblationResult> out;
  for (const auto& [name, columns] : subsets) {
    const auto cols = resolve_columns(columns);
    CrossValidation cv = cross_validate_on(rows, fold_of, cols, options);
    AblationResult r;
    r.subset = name;
    for (auto c : cols) r.columns.emplace_back(kFeatureNames[c]);
    r.cv_accuracy = cv.accuracy;
    r.fold_accuracies = std::move(cv.fold_accuracies);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace teamdesign

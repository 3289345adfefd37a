#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "teamdesign/team_features.hpp"
#include "teamdesign/types.hpp"

namespace teamdesign {

/// One team's features and whether it won, tagged with its matchmaking cell.
struct LabeledRow {
  TeamFeatureVector features;
  bool win = false;
  Region region = Region::SYN;
  Tier tier = Tier::Bronze;
};

struct TrainOptions {
  int folds = 5;
  double l2_lambda = 1e-4;
  std::uint64_t seed = 0;
  /// Feature subset by name; empty means all ten columns.
  std::vector<std::string> columns;
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
};

struct WinModel {
  Region region = Region::SYN;
  Tier tier = Tier::Bronze;
  bool pooled = false;
  std::vector<std::string> feature_order;
  Eigen::VectorXd feature_means;
  Eigen::VectorXd feature_stds;  // 0 marks a constant column (weight fixed at 0)
  Eigen::VectorXd weights;
  double intercept = 0.0;
  double l2_lambda = 1e-4;
  double cv_accuracy = 0.0;
  std::vector<double> fold_accuracies;
  std::size_t training_rows = 0;
  int iterations = 0;
  double gradient_norm = 0.0;
};

/// Regularized mean logistic loss over standardized inputs. `theta` holds the
/// intercept at index 0 followed by one weight per column of `x`; the
/// intercept is not penalized.
double logistic_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& theta,
                     double l2_lambda);
Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& theta, double l2_lambda);

struct LogisticFit {
  Eigen::VectorXd theta;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::vector<double> loss_trace;
};

/// Damped Newton with Armijo backtracking. Throws Error(Convergence) when the
/// gradient norm is still above tolerance after `max_iterations`.
LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double l2_lambda,
                         int max_iterations = 200, double gradient_tolerance = 1e-8,
                         const Eigen::VectorXd* start = nullptr);

/// Seeded stratified assignment of rows to folds 0..folds-1.
std::vector<int> stratified_folds(std::span<const LabeledRow> rows, int folds, std::uint64_t seed);

struct CrossValidation {
  double accuracy = 0.0;
  std::vector<double> fold_accuracies;
};

CrossValidation cross_validate(std::span<const LabeledRow> rows, const TrainOptions& options);

WinModel train(std::span<const LabeledRow> rows, Region region, Tier tier, const TrainOptions& options = {});

/// One model per (tier, region) cell with enough rows; `pooled` adds a model
/// over all rows.
std::vector<WinModel> train_cells(std::span<const LabeledRow> rows, const TrainOptions& options,
                                  bool pooled = false);

double predict(const WinModel& model, const TeamFeatureVector& features);

struct AblationResult {
  std::string subset;
  std::vector<std::string> columns;
  double cv_accuracy = 0.0;
  std::vector<double> fold_accuracies;
};

using FeatureSubset = std::pair<std::string, std::vector<std::string>>;

/// Full model, each single feature, and the three feature groups.
std::vector<FeatureSubset> default_feature_subsets();

/// Cross-validates every subset on identical folds.
std::vector<AblationResult> ablate(std::span<const LabeledRow> rows, const std::vector<FeatureSubset>& subsets,
                                   const TrainOptions& options = {});

}  // namespace teamdesign

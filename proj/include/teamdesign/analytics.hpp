#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "teamdesign/champion_space.hpp"
#include "teamdesign/match.hpp"
#include "teamdesign/roster.hpp"
#include "teamdesign/team_features.hpp"
#include "teamdesign/win_model.hpp"

namespace teamdesign {

/// One team's view of a match, with features already computed.
struct TeamRow {
  std::size_t match = 0;  // index into the source match list
  std::string match_id;
  int team = 0;  // index into MatchRecord::teams
  Side side = Side::Bottom;
  Region region = Region::SYN;
  Tier tier = Tier::Bronze;
  int division = 1;
  bool win = false;
  TeamFeatureVector features;
  std::array<double, kTeamSize> slot_proficiency{};
  std::array<int, kTeamSize> pick_index{};
};

/// Rows come in match order, two per match (teams[0] then teams[1]).
struct FeatureTable {
  std::vector<TeamRow> rows;

  const TeamRow& opponent(std::size_t row) const { return rows[row ^ 1U]; }
};

FeatureTable compute_feature_table(const SimilaritySpace& space, std::span<const MatchRecord> matches,
                                   const HistoryIndex& histories, const FeatureOptions& options = {});

/// Training rows for the win model, in table order.
std::vector<LabeledRow> labeled_rows(const FeatureTable& table);

/// Delimited-text table with a header row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_delimited(std::ostream& out, const Table& table, char delimiter = ',');

// --- tier profile -------------------------------------------------------------

struct ProfileCell {
  Tier tier = Tier::Bronze;
  int division = 1;
  Outcome outcome = Outcome::Win;
  std::size_t count = 0;
  std::array<double, kFeatureCount> mean{};
  std::array<double, kFeatureCount> half_width{};  // normal-approximation interval
};

struct TierProfile {
  double confidence = 0.95;
  std::vector<ProfileCell> cells;   // tier, division, outcome order
  std::vector<std::string> notes;   // empty groups that were omitted
};

TierProfile tier_profile(const FeatureTable& table);
Table to_table(const TierProfile& profile);

// --- relative win-rate curve --------------------------------------------------

struct CurveBin {
  double lower = 0;  // smallest relative value in the bin
  double upper = 0;  // largest relative value in the bin
  double center = 0;
  std::size_t count = 0;
  std::size_t wins = 0;
  double win_rate = 0;
};

struct WinrateCurve {
  std::string feature;
  std::vector<CurveBin> bins;
};

/// Each match contributes both teams' relative values (team minus opponent),
/// binned into equal-count bins whose boundaries mirror about zero.
WinrateCurve relative_winrate_curve(const FeatureTable& table, const std::string& feature, int bins = 20);
Table to_table(const WinrateCurve& curve);

// --- pick order ---------------------------------------------------------------

struct PickOrderCell {
  Tier tier = Tier::Bronze;
  int pick_index = 1;
  std::size_t count = 0;
  double mean_proficiency = 0;
};

struct PickOrderRatio {
  Tier tier = Tier::Bronze;
  double first = 0;
  double fifth = 0;
  double ratio = 0;  // first / fifth; infinite or NaN when fifth is 0
  std::size_t teams = 0;
};

struct PickOrderProfile {
  bool low_background_diversity_only = false;
  std::vector<PickOrderCell> cells;
  std::vector<PickOrderRatio> ratios;
};

struct PickOrderOptions {
  /// Keep only teams in the bottom decile of background diversity within
  /// their tier.
  bool low_background_diversity_only = false;
};

PickOrderProfile pick_order_proficiency(const FeatureTable& table, const PickOrderOptions& options = {});
Table to_table(const PickOrderProfile& profile);

// --- correlations -------------------------------------------------------------

/// Controls allowed in correlation_by_tier.
inline constexpr std::array<std::string_view, 4> kAssignmentFeatures{
    "starting_bottom", "background_diversity", "min_background_diversity", "max_background_diversity"};

struct TierCoefficient {
  Tier tier = Tier::Bronze;
  std::size_t n = 0;
  double coefficient = 0;
  double std_error = 0;
  double lower = 0;
  double upper = 0;
  bool collinear = false;
  std::string note;
};

struct CorrelationResult {
  std::string x_feature;
  std::string y_feature;
  std::vector<std::string> controls;
  std::vector<TierCoefficient> tiers;
};

/// Per tier, the coefficient on x from an OLS of y on x plus controls, with a
/// 95% interval. Rank-deficient designs are flagged instead of solved.
CorrelationResult correlation_by_tier(const FeatureTable& table, const std::string& x_feature,
                                      const std::string& y_feature, const std::vector<std::string>& controls = {});
Table to_table(const CorrelationResult& result);

struct OlsFit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;
  int rank = 0;
  double residual_variance = 0;
};

/// OLS with intercept prepended to `x`.
OlsFit ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

}  // namespace teamdesign

#include "teamdesign/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <ostream>

namespace teamdesign {

namespace {

constexpr double kZ95 = 1.959963984540054;

std::size_t require_column(const std::string& name) {
  const auto col = feature_column(name);
  if (!col) throw invalid_argument("unknown feature: " + name);
  return *col;
}

std::string num(double v) { return fmt::format("{:.10g}", v); }

std::string division_label(int d) {
  static const char* roman[] = {"", "I", "II", "III", "IV", "V"};
  return d >= 1 && d <= 5 ? roman[d] : std::to_string(d);
}

bool single_division(Tier t) { return t == Tier::Master || t == Tier::Challenger; }

}  // namespace

std::vector<LabeledRow> labeled_rows(const FeatureTable& table) {
  std::vector<LabeledRow> out;
  out.reserve(table.rows.size());
  for (const auto& r : table.rows) out.push_back({r.features, r.win, r.region, r.tier});
  return out;
}

FeatureTable compute_feature_table(const SimilaritySpace& space, std::span<const MatchRecord> matches,
                                   const HistoryIndex& histories, const FeatureOptions& options) {
  FeatureTable table;
  table.rows.reserve(2 * matches.size());
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const auto& m = matches[i];
    for (int t = 0; t < 2; ++t) {
      const auto& team = m.teams[t];
      TeamRow row;
      row.match = i;
      row.match_id = m.match_id;
      row.team = t;
      row.side = team.side;
      row.region = m.region;
      row.tier = m.tier;
      row.division = m.division;
      row.win = team.outcome == Outcome::Win;
      row.features = team_features(space, m, team.side, histories, options);
      const auto slots = slot_values(space, team, histories, options);
      for (int s = 0; s < kTeamSize; ++s) {
        row.slot_proficiency[s] = slots[s].proficiency;
        row.pick_index[s] = team.slots[s].pick_index;
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

void write_delimited(std::ostream& out, const Table& table, char delimiter) {
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << delimiter;
      out << cells[i];
    }
    out << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
}

TierProfile tier_profile(const FeatureTable& table) {
  if (table.rows.empty()) throw invalid_argument("tier profile needs a nonempty corpus");
  struct Acc {
    std::size_t n = 0;
    std::array<double, kFeatureCount> sum{};
    std::vector<std::array<double, kFeatureCount>> values;
  };
  std::map<std::tuple<int, int, int>, Acc> groups;  // tier, division, outcome (0 win, 1 loss)
  std::array<bool, kTierCount> seen{};
  for (const auto& r : table.rows) {
    auto& g = groups[{static_cast<int>(r.tier), r.division, r.win ? 0 : 1}];
    const auto v = r.features.values();
    ++g.n;
    for (std::size_t j = 0; j < kFeatureCount; ++j) g.sum[j] += v[j];
    g.values.push_back(v);
    seen[static_cast<int>(r.tier)] = true;
  }

  TierProfile p;
  for (int t = 0; t < kTierCount; ++t) {
    if (!seen[t]) continue;
    const int divisions = single_division(kAllTiers[t]) ? 1 : 5;
    for (int d = 1; d <= divisions; ++d)
      for (int o = 0; o < 2; ++o) {
        const Outcome outcome = o == 0 ? Outcome::Win : Outcome::Loss;
        const auto it = groups.find({t, d, o});
        if (it == groups.end()) {
          p.notes.push_back(fmt::format("{} {} {}: no teams, omitted", to_string(kAllTiers[t]), division_label(d),
                                        to_string(outcome)));
          continue;
        }
        const auto& g = it->second;
        ProfileCell cell{kAllTiers[t], d, outcome, g.n, {}, {}};
        for (std::size_t j = 0; j < kFeatureCount; ++j) {
          double mean = g.sum[j] / static_cast<double>(g.n);
          double correction = 0;
          for (const auto& v : g.values) correction += v[j] - mean;
          mean += correction / static_cast<double>(g.n);
          cell.mean[j] = mean;
          if (g.n < 2) continue;
          double ss = 0;
          for (const auto& v : g.values) ss += (v[j] - mean) * (v[j] - mean);
          cell.half_width[j] = kZ95 * std::sqrt(ss / static_cast<double>(g.n - 1) / static_cast<double>(g.n));
        }
        p.cells.push_back(cell);
      }
  }
  // Groups outside the expected division range are still reported.
  for (const auto& [key, g] : groups) {
    const auto [t, d, o] = key;
    if (d >= 1 && d <= (single_division(kAllTiers[t]) ? 1 : 5)) continue;
    p.notes.push_back(fmt::format("{} division {} is out of range; {} teams skipped", to_string(kAllTiers[t]), d, g.n));
  }
  return p;
}

Table to_table(const TierProfile& profile) {
  Table t;
  t.header = {"tier", "division", "outcome", "count", "confidence"};
  for (auto name : kFeatureNames) {
    t.header.emplace_back(fmt::format("{}_mean", name));
    t.header.emplace_back(fmt::format("{}_half_width", name));
  }
  for (const auto& c : profile.cells) {
    std::vector<std::string> row{std::string(to_string(c.tier)), std::to_string(c.division),
                                 std::string(to_string(c.outcome)), std::to_string(c.count), num(profile.confidence)};
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      row.push_back(num(c.mean[j]));
      row.push_back(num(c.half_width[j]));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

WinrateCurve relative_winrate_curve(const FeatureTable& table, const std::string& feature, int bins) {
  const std::size_t col = require_column(feature);
  if (bins < 1) throw invalid_argument("bins must be positive");
  if (table.rows.size() % 2 != 0) throw invalid_argument("feature table must hold both teams of every match");

  struct Point {
    double value;
    long long key;  // breaks ties so the sorted list mirrors exactly under negation
    bool win;
  };
  std::vector<Point> pts;
  pts.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); i += 2) {
    const auto& a = table.rows[i];
    const auto& b = table.rows[i + 1];
    if (a.match != b.match) throw invalid_argument("feature table rows are not paired by match");
    const double d = a.features[col] - b.features[col];
    const auto k = static_cast<long long>(i / 2 + 1);
    pts.push_back({d, k, a.win});
    pts.push_back({-d, -k, b.win});
  }
  std::sort(pts.begin(), pts.end(),
            [](const Point& x, const Point& y) { return x.value != y.value ? x.value < y.value : x.key < y.key; });

  const std::size_t n = pts.size();
  const auto nb = static_cast<std::size_t>(bins);
  // Boundaries of the lower half, mirrored for the upper half.
  std::vector<std::size_t> edge(nb + 1);
  for (std::size_t b = 0; b <= nb; ++b)
    edge[b] = 2 * b <= nb ? b * n / nb : n - (nb - b) * n / nb;

  WinrateCurve curve;
  curve.feature = feature;
  for (std::size_t b = 0; b < nb; ++b) {
    CurveBin bin;
    bin.count = edge[b + 1] - edge[b];
    if (bin.count == 0) continue;
    bin.lower = pts[edge[b]].value;
    bin.upper = pts[edge[b + 1] - 1].value;
    bin.center = 0.5 * (bin.lower + bin.upper);
    for (std::size_t i = edge[b]; i < edge[b + 1]; ++i) bin.wins += pts[i].win;
    bin.win_rate = static_cast<double>(bin.wins) / static_cast<double>(bin.count);
    curve.bins.push_back(bin);
  }
  return curve;
}

Table to_table(const WinrateCurve& curve) {
  Table t;
  t.header = {"feature", "bin", "lower", "upper", "center", "count", "wins", "win_rate"};
  for (std::size_t i = 0; i < curve.bins.size(); ++i) {
    const auto& b = curve.bins[i];
    t.rows.push_back({curve.feature, std::to_string(i), num(b.lower), num(b.upper), num(b.center),
                      std::to_string(b.count), std::to_string(b.wins), num(b.win_rate)});
  }
  return t;
}

PickOrderProfile pick_order_proficiency(const FeatureTable& table, const PickOrderOptions& options) {
  if (table.rows.empty()) throw invalid_argument("pick order analysis needs a nonempty corpus");
  const std::size_t bd = *feature_column("background_diversity");

  std::array<std::vector<const TeamRow*>, kTierCount> by_tier;
  for (const auto& r : table.rows) {
    for (int s = 0; s < kTeamSize; ++s)
      if (r.pick_index[s] < 1 || r.pick_index[s] > kTeamSize)
        throw data_error(fmt::format("match {} team {} slot {}: missing pick_index", r.match_id, r.team, s + 1));
    by_tier[static_cast<int>(r.tier)].push_back(&r);
  }

  PickOrderProfile p;
  p.low_background_diversity_only = options.low_background_diversity_only;
  for (int t = 0; t < kTierCount; ++t) {
    auto rows = by_tier[t];
    if (rows.empty()) continue;
    if (options.low_background_diversity_only) {
      std::stable_sort(rows.begin(), rows.end(),
                       [&](const TeamRow* a, const TeamRow* b) { return a->features[bd] < b->features[bd]; });
      rows.resize((rows.size() + 9) / 10);
    }
    std::array<double, kTeamSize> sum{};
    std::array<std::size_t, kTeamSize> count{};
    for (const auto* r : rows)
      for (int s = 0; s < kTeamSize; ++s) {
        sum[r->pick_index[s] - 1] += r->slot_proficiency[s];
        ++count[r->pick_index[s] - 1];
      }
    for (int k = 0; k < kTeamSize; ++k)
      p.cells.push_back({kAllTiers[t], k + 1, count[k], sum[k] / static_cast<double>(count[k])});
    const double first = sum[0] / static_cast<double>(count[0]);
    const double fifth = sum[kTeamSize - 1] / static_cast<double>(count[kTeamSize - 1]);
    p.ratios.push_back({kAllTiers[t], first, fifth, first / fifth, rows.size()});
  }
  return p;
}

Table to_table(const PickOrderProfile& profile) {
  Table t;
  t.header = {"tier", "pick_index", "count", "mean_proficiency", "first_fifth_ratio", "low_bd_only"};
  for (const auto& c : profile.cells) {
    const auto r = std::find_if(profile.ratios.begin(), profile.ratios.end(),
                                [&](const PickOrderRatio& x) { return x.tier == c.tier; });
    t.rows.push_back({std::string(to_string(c.tier)), std::to_string(c.pick_index), std::to_string(c.count),
                      num(c.mean_proficiency), num(r->ratio), profile.low_background_diversity_only ? "1" : "0"});
  }
  return t;
}

OlsFit ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw invalid_argument("ols: row count mismatch");
  const Eigen::Index n = x.rows(), p = x.cols() + 1;
  Eigen::MatrixXd design(n, p);
  design.col(0).setOnes();
  design.rightCols(p - 1) = x;
  OlsFit fit;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  fit.rank = static_cast<int>(qr.rank());
  if (fit.rank < p || n <= p) return fit;
  fit.coefficients = qr.solve(y);
  const Eigen::VectorXd resid = y - design * fit.coefficients;
  fit.residual_variance = resid.squaredNorm() / static_cast<double>(n - p);
  const Eigen::MatrixXd xtx_inv = (design.transpose() * design).inverse();
  fit.std_errors = (fit.residual_variance * xtx_inv.diagonal()).cwiseSqrt();
  return fit;
}

CorrelationResult correlation_by_tier(const FeatureTable& table, const std::string& x_feature,
                                      const std::string& y_feature, const std::vector<std::string>& controls) {
  const std::size_t xc = require_column(x_feature), yc = require_column(y_feature);
  std::vector<std::size_t> cc;
  for (const auto& c : controls) {
    if (std::find(kAssignmentFeatures.begin(), kAssignmentFeatures.end(), c) == kAssignmentFeatures.end())
      throw invalid_argument("control must be a team-assignment feature: " + c);
    cc.push_back(require_column(c));
  }
  if (table.rows.empty()) throw invalid_argument("correlation needs a nonempty corpus");

  CorrelationResult out{x_feature, y_feature, controls, {}};
  std::array<std::vector<const TeamRow*>, kTierCount> by_tier;
  for (const auto& r : table.rows) by_tier[static_cast<int>(r.tier)].push_back(&r);
  for (int t = 0; t < kTierCount; ++t) {
    const auto& rows = by_tier[t];
    if (rows.empty()) continue;
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd x(n, 1 + static_cast<Eigen::Index>(cc.size()));
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto v = rows[i]->features.values();
      x(i, 0) = v[xc];
      for (std::size_t k = 0; k < cc.size(); ++k) x(i, static_cast<Eigen::Index>(k) + 1) = v[cc[k]];
      y[i] = v[yc];
    }
    TierCoefficient tc;
    tc.tier = kAllTiers[t];
    tc.n = rows.size();
    const OlsFit fit = ols(x, y);
    if (n <= x.cols() + 1) {
      tc.note = "too few teams";
      tc.coefficient = tc.std_error = tc.lower = tc.upper = std::nan("");
    } else if (fit.rank < x.cols() + 1) {
      tc.collinear = true;
      tc.note = "collinear design: x or controls are constant or linearly dependent";
      tc.coefficient = tc.std_error = tc.lower = tc.upper = std::nan("");
    } else {
      tc.coefficient = fit.coefficients[1];
      tc.std_error = fit.std_errors[1];
      tc.lower = tc.coefficient - kZ95 * tc.std_error;
      tc.upper = tc.coefficient + kZ95 * tc.std_error;
    }
    out.tiers.push_back(tc);
  }
  return out;
}

Table to_table(const CorrelationResult& r) {
  Table t;
  std::string controls;
  for (const auto& c : r.controls) controls += (controls.empty() ? "" : "+") + c;
  t.header = {"tier", "x", "y", "controls", "n", "coefficient", "std_error", "lower", "upper", "collinear", "note"};
  for (const auto& c : r.tiers)
    t.rows.push_back({std::string(to_string(c.tier)), r.x_feature, r.y_feature, controls, std::to_string(c.n),
                      num(c.coefficient), num(c.std_error), num(c.lower), num(c.upper), c.collinear ? "1" : "0",
                      c.note});
  return t;
}

}  // namespace teamdesign

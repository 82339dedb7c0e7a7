#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <cereal/types/map.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/vector.hpp>
#include <nlohmann/json.hpp>

#include "ghsim/core/error.hpp"
#include "ghsim/core/event.hpp"
#include "ghsim/core/random.hpp"
#include "ghsim/models/features.hpp"

namespace ghsim {

inline constexpr std::size_t kS3dMaxCandidates = 32;

struct S3dCell {
  double count = 0;
  double mean = 0;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(count, mean);
  }
};

/// One selected feature: bin b holds values in [edges[b-1], edges[b]).
struct S3dLevel {
  std::size_t feature = 0;
  std::string name;
  std::vector<double> edges;

  std::uint16_t bin(double x) const {
    return static_cast<std::uint16_t>(std::upper_bound(edges.begin(), edges.end(), x) - edges.begin());
  }

  template <class Archive>
  void serialize(Archive& ar) {
    ar(feature, name, edges);
  }
};

class S3dModel {
 public:
  using Key = std::vector<std::uint16_t>;

  EventType type = EventType::Push;
  double lambda = 0;
  std::size_t feature_count = 0;
  std::vector<S3dLevel> levels;
  std::vector<double> r2_per_step;   // after each level
  std::vector<std::map<Key, S3dCell>> cells;  // levels.size() + 1 tables; table 0 has the empty key

  /// Mean of the deepest non-empty cell the row falls in, clipped at zero.
  double predict(std::span<const double> x) const {
    if (x.size() != feature_count) fail(ErrorCode::InvalidArgument, "feature row has the wrong width");
    Key key;
    key.reserve(levels.size());
    for (const auto& l : levels) key.push_back(l.bin(x[l.feature]));
    for (std::size_t depth = levels.size() + 1; depth-- > 0;) {
      key.resize(depth);
      auto it = cells[depth].find(key);
      if (it != cells[depth].end()) return std::max(0.0, it->second.mean);
    }
    return 0;
  }

  double r2() const { return r2_per_step.empty() ? 0.0 : r2_per_step.back(); }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["event_type"] = std::string(to_string(type));
    j["lambda"] = lambda;
    j["feature_count"] = feature_count;
    j["r2_per_step"] = r2_per_step;
    j["levels"] = nlohmann::json::array();
    for (std::size_t i = 0; i < levels.size(); ++i)
      j["levels"].push_back({{"feature", levels[i].feature}, {"name", levels[i].name}, {"edges", levels[i].edges}});
    j["cells"] = nlohmann::json::array();
    for (const auto& table : cells) {
      auto arr = nlohmann::json::array();
      for (const auto& [k, c] : table) arr.push_back({{"bins", k}, {"count", c.count}, {"mean", c.mean}});
      j["cells"].push_back(std::move(arr));
    }
    return j;
  }

  static S3dModel from_json(const nlohmann::json& j) {
    S3dModel m;
    m.type = parse_event_type(j.at("event_type").get<std::string>());
    m.lambda = j.at("lambda").get<double>();
    m.feature_count = j.at("feature_count").get<std::size_t>();
    m.r2_per_step = j.at("r2_per_step").get<std::vector<double>>();
    for (const auto& l : j.at("levels"))
      m.levels.push_back({l.at("feature").get<std::size_t>(), l.at("name").get<std::string>(),
                          l.at("edges").get<std::vector<double>>()});
    for (const auto& table : j.at("cells")) {
      auto& t = m.cells.emplace_back();
      for (const auto& c : table) t[c.at("bins").get<Key>()] = {c.at("count").get<double>(), c.at("mean").get<double>()};
    }
    if (m.cells.size() != m.levels.size() + 1) fail(ErrorCode::Config, "S3D model has inconsistent cell tables");
    return m;
  }

  template <class Archive>
  void serialize(Archive& ar) {
    ar(type, lambda, feature_count, levels, r2_per_step, cells);
  }
};

namespace detail {

/// Split candidates for one column: every distinct value above the minimum when
/// there are few, else up to kS3dMaxCandidates quantiles.
inline std::vector<double> s3d_candidates(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::vector<double> distinct;
  for (double x : v)
    if (distinct.empty() || x != distinct.back()) distinct.push_back(x);
  if (distinct.size() <= kS3dMaxCandidates + 1) return {distinct.begin() + (distinct.empty() ? 0 : 1), distinct.end()};
  std::vector<double> out;
  const std::size_t n = v.size();
  for (std::size_t k = 1; k <= kS3dMaxCandidates; ++k) {
    const double q = v[k * n / (kS3dMaxCandidates + 1)];
    if (q > v.front() && (out.empty() || q != out.back())) out.push_back(q);
  }
  return out;
}

struct S3dFitState {
  const FeatureTable* table;
  std::span<const double> y;
  std::vector<std::size_t> rows;
  std::vector<std::uint32_t> cell;  // per position in rows
  std::size_t cell_count = 1;
};

/// Greedy interval splitting of one column given the current cells. Returns
/// the chosen edges and the total drop in within-cell sum of squares.
inline std::pair<std::vector<double>, double> s3d_split_feature(const S3dFitState& st, std::size_t f,
                                                                const std::vector<double>& cand, double min_gain) {
  const std::size_t nb = cand.size() + 1, nc = st.cell_count;
  std::vector<double> cnt((nb + 1) * nc, 0.0), sum((nb + 1) * nc, 0.0);  // prefix tables, [cell][bucket]
  for (std::size_t i = 0; i < st.rows.size(); ++i) {
    const double x = st.table->at(st.rows[i], f);
    const std::size_t b = static_cast<std::size_t>(std::upper_bound(cand.begin(), cand.end(), x) - cand.begin());
    const std::size_t at = st.cell[i] * (nb + 1) + b + 1;
    cnt[at] += 1;
    sum[at] += st.y[st.rows[i]];
  }
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t b = 1; b <= nb; ++b) {
      cnt[c * (nb + 1) + b] += cnt[c * (nb + 1) + b - 1];
      sum[c * (nb + 1) + b] += sum[c * (nb + 1) + b - 1];
    }
  // Sum over cells of S^2/N for buckets [a, b).
  auto score = [&](std::size_t a, std::size_t b) {
    double s = 0;
    for (std::size_t c = 0; c < nc; ++c) {
      const double n = cnt[c * (nb + 1) + b] - cnt[c * (nb + 1) + a];
      if (n > 0) {
        const double t = sum[c * (nb + 1) + b] - sum[c * (nb + 1) + a];
        s += t * t / n;
      }
    }
    return s;
  };
  struct Interval {
    std::size_t a, b, best_cut = 0;
    double base = 0, gain = -1;
  };
  auto evaluate = [&](Interval& iv) {
    iv.base = score(iv.a, iv.b);
    iv.gain = -1;
    for (std::size_t c = iv.a + 1; c < iv.b; ++c) {
      const double g = score(iv.a, c) + score(c, iv.b) - iv.base;
      if (g > iv.gain) {
        iv.gain = g;
        iv.best_cut = c;
      }
    }
  };
  std::vector<Interval> parts{{0, nb}};
  evaluate(parts[0]);
  std::vector<std::size_t> cuts;
  double total = 0;
  while (true) {
    std::size_t best = parts.size();
    for (std::size_t i = 0; i < parts.size(); ++i)
      if (parts[i].gain > min_gain && (best == parts.size() || parts[i].gain > parts[best].gain)) best = i;
    if (best == parts.size()) break;
    const Interval iv = parts[best];
    total += iv.gain;
    cuts.push_back(iv.best_cut);
    parts[best] = {iv.a, iv.best_cut};
    parts.push_back({iv.best_cut, iv.b});
    evaluate(parts[best]);
    evaluate(parts.back());
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> edges;
  for (auto c : cuts) edges.push_back(cand[c - 1]);
  return {edges, total};
}

}  // namespace detail

/// Greedy forward selection. Each step bins every unused feature against the
/// current cells, accepting a boundary only when it explains more than
/// `lambda` of the total variance, and keeps the feature that explains most.
inline S3dModel fit_s3d(const FeatureTable& table, std::span<const double> y, double lambda, std::size_t max_features = 6,
                        EventType type = EventType::Push, std::span<const std::size_t> rows = {}) {
  if (y.size() != table.rows()) fail(ErrorCode::InvalidArgument, "target count does not match feature rows");
  if (!(lambda >= 0)) fail(ErrorCode::InvalidArgument, "lambda must be non-negative");
  detail::S3dFitState st{&table, y, {}, {}, 1};
  if (rows.empty()) {
    st.rows.resize(table.rows());
    std::iota(st.rows.begin(), st.rows.end(), std::size_t{0});
  } else {
    st.rows.assign(rows.begin(), rows.end());
  }
  const std::size_t n = st.rows.size();
  double mean = 0;
  for (auto r : st.rows) mean += y[r];
  mean /= static_cast<double>(std::max<std::size_t>(n, 1));
  bool varied = false;
  for (auto r : st.rows) varied |= y[r] != y[st.rows.front()];
  if (!varied) fail(ErrorCode::DegenerateTarget, "S3D target has fewer than two distinct values");
  double ss_total = 0;
  for (auto r : st.rows) ss_total += (y[r] - mean) * (y[r] - mean);

  S3dModel m;
  m.type = type;
  m.lambda = lambda;
  m.feature_count = table.cols();
  m.cells.push_back({{S3dModel::Key{}, {static_cast<double>(n), mean}}});
  st.cell.assign(n, 0);

  std::vector<std::vector<double>> cand(table.cols());
  for (std::size_t f = 0; f < table.cols(); ++f) {
    std::vector<double> col;
    col.reserve(n);
    for (auto r : st.rows) col.push_back(table.at(r, f));
    cand[f] = detail::s3d_candidates(std::move(col));
  }
  const double min_gain = std::isinf(lambda) ? std::numeric_limits<double>::infinity()
                                             : std::max(lambda, 1e-12) * ss_total;
  std::vector<bool> used(table.cols(), false);
  std::vector<S3dModel::Key> keys(n);
  while (m.levels.size() < max_features) {
    std::size_t best = table.cols();
    double best_gain = 0;
    std::vector<double> best_edges;
    for (std::size_t f = 0; f < table.cols(); ++f) {
      if (used[f] || cand[f].empty()) continue;
      auto [edges, gain] = detail::s3d_split_feature(st, f, cand[f], min_gain);
      if (!edges.empty() && gain > best_gain) {
        best = f;
        best_gain = gain;
        best_edges = std::move(edges);
      }
    }
    if (best == table.cols()) break;
    used[best] = true;
    S3dLevel level{best, table.names[best], std::move(best_edges)};

    // Refine cells and record their means.
    std::map<S3dModel::Key, std::uint32_t> ids;
    for (std::size_t i = 0; i < n; ++i) keys[i].push_back(level.bin(table.at(st.rows[i], best)));
    for (std::size_t i = 0; i < n; ++i) st.cell[i] = ids.try_emplace(keys[i], static_cast<std::uint32_t>(ids.size())).first->second;
    st.cell_count = ids.size();
    std::vector<double> cnt(st.cell_count, 0), sum(st.cell_count, 0);
    for (std::size_t i = 0; i < n; ++i) {
      cnt[st.cell[i]] += 1;
      sum[st.cell[i]] += y[st.rows[i]];
    }
    double ss_within = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = y[st.rows[i]] - sum[st.cell[i]] / cnt[st.cell[i]];
      ss_within += d * d;
    }
    auto& table_l = m.cells.emplace_back();
    for (const auto& [k, id] : ids) table_l[k] = {cnt[id], sum[id] / cnt[id]};
    m.levels.push_back(std::move(level));
    m.r2_per_step.push_back(1.0 - ss_within / ss_total);
  }
  return m;
}

struct LambdaSelection {
  double lambda = 0;
  std::vector<double> grid;
  std::vector<double> cv_r2;  // parallel to grid
};

/// Pooled k-fold cross-validated R^2 for every lambda; the best wins and ties
/// go to the larger lambda.
inline LambdaSelection select_lambda(const FeatureTable& table, std::span<const double> y, std::vector<double> grid,
                                     std::size_t folds = 5, std::size_t max_features = 6, std::uint64_t seed = 1) {
  if (grid.empty()) fail(ErrorCode::InvalidArgument, "lambda grid is empty");
  if (folds < 2) fail(ErrorCode::InvalidArgument, "cross-validation needs at least two folds");
  if (y.size() != table.rows()) fail(ErrorCode::InvalidArgument, "target count does not match feature rows");
  std::sort(grid.begin(), grid.end());
  LambdaSelection out;
  out.grid = grid;
  if (grid.size() == 1) {
    out.lambda = grid[0];
    out.cv_r2.assign(1, std::numeric_limits<double>::quiet_NaN());
    return out;
  }
  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng g(derive_seed(seed, "s3d-folds"));
  shuffle(g, order);
  std::vector<std::size_t> fold_of(y.size());
  for (std::size_t i = 0; i < order.size(); ++i) fold_of[order[i]] = i % folds;

  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double ss_total = 0;
  for (double v : y) ss_total += (v - mean) * (v - mean);

  for (double lambda : grid) {
    double ss_res = 0;
    for (std::size_t k = 0; k < folds; ++k) {
      std::vector<std::size_t> train, test;
      for (std::size_t i = 0; i < y.size(); ++i) (fold_of[i] == k ? test : train).push_back(i);
      if (train.empty() || test.empty()) continue;
      std::optional<S3dModel> m;
      double constant = y[train.front()];
      try {
        m = fit_s3d(table, y, lambda, max_features, EventType::Push, train);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateTarget) throw;
      }
      for (auto i : test) {
        const double p = m ? m->predict(table.row(i)) : constant;
        ss_res += (y[i] - p) * (y[i] - p);
      }
    }
    out.cv_r2.push_back(ss_total > 0 ? 1.0 - ss_res / ss_total : 0.0);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (out.cv_r2[i] >= out.cv_r2[best] - 1e-12) best = i;
  out.lambda = grid[best];
  return out;
}

}  // namespace ghsim

#include "faqkit/cotrain.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "faqkit/common.hpp"
#include "faqkit/learn/model.hpp"
#include "json.hpp"

namespace faqkit::cotrain {

void ViewSplit::validate(std::size_t n_columns) const {
  if (view1.empty() || view2.empty()) throw DataError("each view needs at least one column");
  std::vector<int> seen(n_columns, 0);
  for (const auto* view : {&view1, &view2}) {
    for (auto c : *view) {
      if (c >= n_columns) throw DataError("view column " + std::to_string(c) + " out of range");
      if (seen[c]++) throw DataError("views overlap at column " + std::to_string(c));
    }
  }
  if (view1.size() + view2.size() != n_columns) throw DataError("views do not cover every column");
}

ViewSplit random_bisection(std::size_t n_columns, std::uint64_t seed) {
  if (n_columns < 2) throw DataError("need at least two columns to split into views");
  std::vector<std::size_t> cols(n_columns);
  for (std::size_t i = 0; i < n_columns; ++i) cols[i] = i;
  Rng rng(seed);
  rng.shuffle(cols);
  ViewSplit s;
  s.view1.assign(cols.begin(), cols.begin() + static_cast<std::ptrdiff_t>(n_columns / 2));
  s.view2.assign(cols.begin() + static_cast<std::ptrdiff_t>(n_columns / 2), cols.end());
  std::sort(s.view1.begin(), s.view1.end());
  std::sort(s.view2.begin(), s.view2.end());
  return s;
}

std::vector<double> project_columns(std::span<const double> row, const std::vector<std::size_t>& cols) {
  std::vector<double> out;
  out.reserve(cols.size());
  for (auto c : cols) {
    if (c >= row.size()) throw DataError("column out of range");
    out.push_back(row[c]);
  }
  return out;
}

std::pair<Rows, Rows> split_views(const Rows& x, const ViewSplit& split) {
  if (x.empty()) throw DataError("split_views: empty matrix");
  split.validate(x.front().size());
  std::pair<Rows, Rows> out;
  out.first.reserve(x.size());
  out.second.reserve(x.size());
  for (const auto& row : x) {
    if (row.size() != x.front().size()) throw DataError("split_views: ragged matrix");
    out.first.push_back(project_columns(row, split.view1));
    out.second.push_back(project_columns(row, split.view2));
  }
  return out;
}

void CotrainConfig::validate() const {
  if (!(tau > 0.5 && tau <= 1.0)) throw ConfigError("confidence threshold must lie in (0.5, 1]");
  if (k_per_class == 0) throw ConfigError("k_per_class must be >= 1");
}

namespace {

struct Pool {
  Rows x1, x2;
  std::vector<std::size_t> y;
};

Pool labeled_pool(const std::pair<Rows, Rows>& views, const std::vector<std::int64_t>& labels) {
  Pool p;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kUnlabeled) continue;
    p.x1.push_back(views.first[i]);
    p.x2.push_back(views.second[i]);
    p.y.push_back(static_cast<std::size_t>(labels[i]));
  }
  return p;
}

}  // namespace

CotrainResult cotrain(const PartiallyLabeled& data, const CotrainConfig& cfg) {
  cfg.validate();
  if (data.x.size() != data.y.size()) throw DataError("cotrain: features and labels differ in length");
  if (data.n_classes < 2) throw ConfigError("cotrain: need at least two classes");
  const auto views = split_views(data.x, data.views);
  std::vector<std::size_t> per_class(data.n_classes, 0);
  for (auto label : data.y) {
    if (label == kUnlabeled) continue;
    if (label < 0 || static_cast<std::size_t>(label) >= data.n_classes) throw DataError("cotrain: label out of range");
    ++per_class[static_cast<std::size_t>(label)];
  }
  for (std::size_t c = 0; c < data.n_classes; ++c) {
    if (per_class[c] == 0) throw DataError("cotrain: class " + std::to_string(c) + " has no labeled example");
  }
  const LearnerFactory factory =
      cfg.make_learner ? cfg.make_learner : [] { return std::make_unique<learn::ForestClassifier>(); };

  CotrainResult res;
  res.labels = data.y;
  auto fit_both = [&] {
    const Pool pool = labeled_pool(views, res.labels);
    res.h1 = factory();
    res.h2 = factory();
    res.h1->fit(pool.x1, pool.y, data.n_classes);
    res.h2->fit(pool.x2, pool.y, data.n_classes);
  };
  auto unlabeled = [&] {
    std::vector<std::size_t> u;
    for (std::size_t i = 0; i < res.labels.size(); ++i) {
      if (res.labels[i] == kUnlabeled) u.push_back(i);
    }
    return u;
  };

  fit_both();
  bool stale = false;
  for (std::size_t round = 1; round <= cfg.max_rounds; ++round) {
    const auto u = unlabeled();
    if (u.empty()) break;
    if (stale) fit_both();
    struct Pred {
      std::size_t row;
      std::size_t cls;
      double p1, p2;
    };
    std::vector<Pred> agreed;
    for (auto i : u) {
      const auto p1 = res.h1->predict_proba(views.first[i]);
      const auto p2 = res.h2->predict_proba(views.second[i]);
      const auto c1 = learn::argmax(p1), c2 = learn::argmax(p2);
      if (c1 == c2) agreed.push_back({i, c1, p1[c1], p2[c2]});
    }
    std::set<std::size_t> chosen;
    std::vector<std::size_t> added(data.n_classes, 0);
    for (int view = 0; view < 2; ++view) {
      for (std::size_t c = 0; c < data.n_classes; ++c) {
        std::vector<std::pair<double, std::size_t>> cand;
        for (const auto& p : agreed) {
          const double prob = view == 0 ? p.p1 : p.p2;
          if (p.cls == c && prob >= cfg.tau) cand.emplace_back(prob, p.row);
        }
        std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
          return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        for (std::size_t k = 0; k < std::min(cfg.k_per_class, cand.size()); ++k) {
          if (chosen.insert(cand[k].second).second) {
            res.labels[cand[k].second] = static_cast<std::int64_t>(c);
            ++added[c];
          }
        }
      }
    }
    RoundLog entry{round, added, 0, 0};
    for (auto label : res.labels) (label == kUnlabeled ? entry.u_remaining : entry.pool_size)++;
    res.log.push_back(std::move(entry));
    if (chosen.empty()) break;
    stale = true;
  }
  if (stale) fit_both();

  res.priors.assign(data.n_classes, 0.0);
  double n = 0.0;
  for (auto label : res.labels) {
    if (label == kUnlabeled) continue;
    res.priors[static_cast<std::size_t>(label)] += 1.0;
    n += 1.0;
  }
  for (double& p : res.priors) p /= n;
  return res;
}

std::vector<double> combined_predict(std::span<const double> p1, std::span<const double> p2,
                                     std::span<const double> priors) {
  if (p1.size() != p2.size() || p1.size() != priors.size()) throw DataError("combined_predict: size mismatch");
  std::vector<double> out(p1.size());
  double z = 0.0;
  for (std::size_t c = 0; c < p1.size(); ++c) {
    if (!(priors[c] > 0.0)) throw DataError("combined_predict: priors must be positive");
    out[c] = p1[c] * p2[c] / priors[c];
    z += out[c];
  }
  if (!(z > 0.0)) throw DataError("combined_predict: zero normalizer");
  for (double& v : out) v /= z;
  return out;
}

std::vector<double> combined_predict(const learn::ProbClassifier& h1, const learn::ProbClassifier& h2,
                                     std::span<const double> x, const ViewSplit& views,
                                     std::span<const double> priors) {
  return combined_predict(h1.predict_proba(project_columns(x, views.view1)),
                          h2.predict_proba(project_columns(x, views.view2)), priors);
}

std::string round_log_jsonl(const std::vector<RoundLog>& log) {
  std::string out;
  for (const auto& r : log) {
    nlohmann::ordered_json j;
    j["round"] = r.round;
    j["added_per_class"] = r.added_per_class;
    j["pool_size"] = r.pool_size;
    j["u_remaining"] = r.u_remaining;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace faqkit::cotrain

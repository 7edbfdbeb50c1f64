#include "faqkit/learn/train.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "faqkit/learn/losses.hpp"

namespace faqkit::learn {

std::vector<QuestionGroup> featurize_groups(const std::vector<corpus::RankingSample>& samples,
                                            const corpus::FaqCollection& faq,
                                            const features::PairFeaturizer& featurizer) {
  std::map<std::int64_t, QuestionGroup> by_q;
  for (const auto& s : samples) {
    auto& g = by_q[s.q_id];
    g.q_id = s.q_id;
    g.doc_ids.push_back(s.doc_id);
    g.labels.push_back(s.label);
  }
  std::vector<QuestionGroup> out;
  out.reserve(by_q.size());
  for (auto& [q_id, g] : by_q) {
    std::vector<std::string_view> texts;
    texts.reserve(g.doc_ids.size());
    for (auto id : g.doc_ids) texts.emplace_back(faq.answer(id).text);
    g.features = featurizer.featurize(faq.question(q_id).text, texts);
    out.push_back(std::move(g));
  }
  return out;
}

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

void add_into(Gradients& acc, const Gradients& g, double w) {
  for (std::size_t i = 0; i < acc.size(); ++i) {
    for (std::size_t j = 0; j < acc[i].data.size(); ++j) acc[i].data[j] += w * g[i].data[j];
  }
}

void scale(Gradients& g, double w) {
  for (auto& t : g) {
    for (double& v : t.data) v *= w;
  }
}

void check_config(const TrainConfig& cfg) {
  if (cfg.batch_size == 0) throw ConfigError("batch size must be >= 1");
  if (!(cfg.label_smoothing >= 0.0 && cfg.label_smoothing < 1.0)) {
    throw ConfigError("label smoothing must lie in [0, 1)");
  }
  if (cfg.margin < 0.0) throw ConfigError("margin must be >= 0");
}

Schedule make_schedule(const TrainConfig& cfg, std::size_t total_steps) {
  Schedule s{std::max<std::size_t>(total_steps, 1), cfg.warmup_fraction, cfg.lr};
  s.validate();
  return s;
}

}  // namespace

TrainResult train_classifier(const std::vector<std::vector<double>>& x, const std::vector<std::size_t>& y,
                             std::size_t n_classes, const TrainConfig& cfg) {
  check_config(cfg);
  if (x.empty()) throw DataError("training set is empty");
  if (x.size() != y.size()) throw DataError("features and labels differ in length");
  if (n_classes < 2) throw ConfigError("need at least two classes");
  for (auto label : y) {
    if (label >= n_classes) throw DataError("label out of range");
  }
  TrainResult res{DenseModel::init(cfg.arch, x.front().size(), n_classes, cfg.hidden, cfg.seed), {}};
  const std::size_t per_epoch = ceil_div(x.size(), cfg.batch_size);
  const Schedule schedule = make_schedule(cfg, per_epoch * cfg.epochs);
  auto state = OptimizerState::for_model(res.model);
  Rng rng(cfg.seed + 1);
  std::vector<std::size_t> order(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      Gradients acc = res.model.zero_gradients();
      double loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const auto& xi = x[order[i]];
        const auto lg = smoothed_ce_loss(res.model.forward(xi), y[order[i]], cfg.label_smoothing);
        loss += lg.loss;
        add_into(acc, res.model.backward(xi, lg.grad), 1.0);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      scale(acc, inv);
      const std::size_t step = state.step;
      const double lr = adamw_step(res.model, acc, state, schedule, cfg.adamw);
      res.trace.push_back({step, lr, loss * inv});
    }
  }
  return res;
}

TrainResult train_pointwise(const std::vector<QuestionGroup>& groups, const TrainConfig& cfg) {
  std::vector<std::vector<double>> x;
  std::vector<std::size_t> y;
  for (const auto& g : groups) {
    for (std::size_t i = 0; i < g.features.size(); ++i) {
      x.push_back(g.features[i]);
      y.push_back(g.labels[i] == 1 ? 1 : 0);
    }
  }
  if (x.empty()) throw DataError("training set is empty");
  return train_classifier(x, y, 2, cfg);
}

TrainResult train_pairwise(const std::vector<QuestionGroup>& groups, const TrainConfig& cfg) {
  check_config(cfg);
  if (groups.empty()) throw DataError("training set is empty");
  struct Slot {
    std::size_t group;
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
  };
  std::vector<Slot> slots;
  std::size_t n_triples = 0;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    Slot s{gi, {}, {}};
    for (std::size_t i = 0; i < groups[gi].labels.size(); ++i) {
      (groups[gi].labels[i] == 1 ? s.pos : s.neg).push_back(i);
    }
    if (s.pos.empty()) throw DataError("question " + std::to_string(groups[gi].q_id) + " has no positive answer");
    if (s.neg.empty()) throw DataError("question " + std::to_string(groups[gi].q_id) + " has no negative answer");
    n_triples += s.neg.size();
    slots.push_back(std::move(s));
  }
  const std::size_t dim = groups.front().features.front().size();
  TrainResult res{DenseModel::init(cfg.arch, dim, 1, cfg.hidden, cfg.seed), {}};
  const std::size_t per_epoch = ceil_div(n_triples, cfg.batch_size);
  const Schedule schedule = make_schedule(cfg, per_epoch * cfg.epochs);
  auto state = OptimizerState::for_model(res.model);
  Rng rng(cfg.seed + 1);

  struct Triple {
    std::size_t group, pos, neg;
  };
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<Triple> triples;
    triples.reserve(n_triples);
    for (const auto& s : slots) {
      for (auto n : s.neg) triples.push_back({s.group, s.pos[rng.below(s.pos.size())], n});
    }
    rng.shuffle(triples);
    for (std::size_t start = 0; start < triples.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(triples.size(), start + cfg.batch_size);
      Gradients acc = res.model.zero_gradients();
      double loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const auto& g = groups[triples[i].group];
        const auto& xp = g.features[triples[i].pos];
        const auto& xn = g.features[triples[i].neg];
        const auto h = hinge_pair_loss(res.model.forward(xp)[0], res.model.forward(xn)[0], cfg.margin);
        loss += h.loss;
        if (h.loss > 0.0) {
          add_into(acc, res.model.backward(xp, std::vector<double>{h.d_pos}), 1.0);
          add_into(acc, res.model.backward(xn, std::vector<double>{h.d_neg}), 1.0);
        }
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      scale(acc, inv);
      const std::size_t step = state.step;
      const double lr = adamw_step(res.model, acc, state, schedule, cfg.adamw);
      res.trace.push_back({step, lr, loss * inv});
    }
  }
  return res;
}

std::string loss_trace_csv(const std::vector<LossRecord>& trace) {
  std::string out = "step,lr,loss\n";
  char buf[96];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", r.step, r.lr, r.loss);
    out += buf;
  }
  return out;
}

}  // namespace faqkit::learn

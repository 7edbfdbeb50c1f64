#include "faqkit/ner.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

#include "faqkit/io.hpp"
#include "faqkit/text.hpp"
#include "json.hpp"

namespace faqkit::ner {

std::vector<std::string> encode_bilou(std::size_t n_tokens, const std::vector<EntitySpan>& spans) {
  std::vector<std::string> tags(n_tokens, "O");
  std::vector<bool> used(n_tokens, false);
  for (const auto& s : spans) {
    if (s.start >= s.end || s.end > n_tokens) throw DataError("span out of range");
    if (s.class_name.empty()) throw DataError("span without a class");
    for (std::size_t i = s.start; i < s.end; ++i) {
      if (used[i]) throw DataError("overlapping spans at token " + std::to_string(i));
      used[i] = true;
    }
    if (s.end - s.start == 1) {
      tags[s.start] = "U-" + s.class_name;
      continue;
    }
    tags[s.start] = "B-" + s.class_name;
    for (std::size_t i = s.start + 1; i + 1 < s.end; ++i) tags[i] = "I-" + s.class_name;
    tags[s.end - 1] = "L-" + s.class_name;
  }
  return tags;
}

namespace {

struct ParsedTag {
  char prefix = 'O';
  std::string cls;
};

ParsedTag parse_tag(const std::string& tag) {
  if (tag == "O") return {};
  if (tag.size() < 3 || tag[1] != '-' || std::string_view("BILU").find(tag[0]) == std::string_view::npos) {
    throw DataError("malformed BILOU tag '" + tag + "'");
  }
  return {tag[0], tag.substr(2)};
}

}  // namespace

std::vector<EntitySpan> decode_bilou(const std::vector<std::string>& tags) {
  std::vector<EntitySpan> spans;
  std::optional<EntitySpan> open;
  auto close_at = [&](std::size_t end) {
    if (open) {
      open->end = end;
      spans.push_back(*open);
      open.reset();
    }
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const auto t = parse_tag(tags[i]);
    if (open && (t.prefix == 'O' || t.prefix == 'B' || t.prefix == 'U' || t.cls != open->class_name)) {
      close_at(i);
    }
    switch (t.prefix) {
      case 'O':
        break;
      case 'U':
        spans.push_back({i, i + 1, t.cls});
        break;
      case 'B':
      case 'I':
        if (!open) open = EntitySpan{i, i, t.cls};
        break;
      case 'L':
        if (!open) open = EntitySpan{i, i, t.cls};
        close_at(i + 1);
        break;
    }
  }
  close_at(tags.size());
  return spans;
}

std::vector<std::string> tag_set(const std::vector<std::string>& classes) {
  std::vector<std::string> tags{"O"};
  std::set<std::string> seen;
  for (const auto& c : classes) {
    if (c.empty() || !seen.insert(c).second) throw ConfigError("class list has an empty or duplicate entry");
    for (const char* p : {"B-", "I-", "L-", "U-"}) tags.push_back(p + c);
  }
  return tags;
}

Prf entity_f1(const std::vector<std::vector<EntitySpan>>& pred, const std::vector<std::vector<EntitySpan>>& gold) {
  if (pred.size() != gold.size()) throw DataError("entity_f1: sentence counts differ");
  std::size_t tp = 0, n_pred = 0, n_gold = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const std::set<EntitySpan> p(pred[i].begin(), pred[i].end());
    const std::set<EntitySpan> g(gold[i].begin(), gold[i].end());
    n_pred += p.size();
    n_gold += g.size();
    for (const auto& s : p) tp += g.count(s);
  }
  Prf out;
  out.precision = n_pred == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(n_pred);
  out.recall = n_gold == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(n_gold);
  out.f1 = out.precision + out.recall == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

std::vector<NerExample> read_ner_jsonl(const std::filesystem::path& path) {
  std::vector<NerExample> out;
  std::size_t line_no = 0;
  for (const auto& line : io::read_lines(path)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      NerExample ex{j.at("tokens").get<std::vector<std::string>>(), j.at("tags").get<std::vector<std::string>>()};
      if (ex.tokens.size() != ex.tags.size()) throw DataError(where + ": tokens and tags differ in length");
      for (const auto& t : ex.tokens) text::require_utf8(t);
      for (const auto& t : ex.tags) parse_tag(t);
      out.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  if (out.empty()) throw DataError(path.string() + ": no NER examples");
  return out;
}

std::string write_ner_jsonl(const std::vector<NerExample>& examples) {
  std::string out;
  for (const auto& ex : examples) {
    nlohmann::ordered_json j;
    j["tokens"] = ex.tokens;
    j["tags"] = ex.tags;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<std::string> read_class_list(const std::filesystem::path& path) {
  std::vector<std::string> out;
  for (auto line : io::read_lines(path)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  if (out.empty()) throw ConfigError(path.string() + ": empty class list");
  tag_set(out);
  return out;
}

std::size_t TokenContext::dim() const { return (2 * window + 1) * lsa.k() + kShapeFeatures; }

TokenContext fit_token_context(const std::vector<NerExample>& data, std::size_t k, std::size_t window,
                               const corpus::PreprocessOptions& prep) {
  if (data.empty()) throw DataError("NER dataset is empty");
  std::vector<std::string> docs;
  docs.reserve(data.size());
  for (const auto& ex : data) docs.push_back(text::join(ex.tokens, " "));
  features::TfidfOptions tfidf;
  tfidf.n_max = 1;
  return {features::LsaModel::fit(docs, prep, tfidf, k), window};
}

namespace {

void append_shape(const std::string& token, std::vector<double>& out) {
  const auto cps = text::to_u32(token);
  const bool digits = !cps.empty() && std::all_of(cps.begin(), cps.end(), [](char32_t c) { return text::is_digit(c); });
  out.push_back(digits ? 1.0 : 0.0);
  out.push_back(!cps.empty() && text::is_upper(cps.front()) ? 1.0 : 0.0);
  const std::size_t n = cps.size();
  const std::size_t bucket = n <= 2 ? 0 : n <= 5 ? 1 : n <= 9 ? 2 : 3;
  for (std::size_t b = 0; b < 4; ++b) out.push_back(b == bucket ? 1.0 : 0.0);
}

std::vector<std::vector<double>> features_with_cache(const std::vector<std::string>& tokens, const TokenContext& ctx,
                                                     std::unordered_map<std::string, std::vector<double>>& cache) {
  if (!ctx.lsa.fitted()) throw DataError("token context is not fitted");
  std::vector<const std::vector<double>*> emb(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto it = cache.find(tokens[i]);
    if (it == cache.end()) it = cache.emplace(tokens[i], ctx.lsa.embed(tokens[i])).first;
    emb[i] = &it->second;
  }
  const std::size_t k = ctx.lsa.k();
  const auto w = static_cast<std::ptrdiff_t>(ctx.window);
  std::vector<std::vector<double>> out(tokens.size());
  for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
    auto& f = out[pos];
    f.reserve(ctx.dim());
    for (std::ptrdiff_t off = -w; off <= w; ++off) {
      const auto j = static_cast<std::ptrdiff_t>(pos) + off;
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(tokens.size())) {
        f.insert(f.end(), k, 0.0);
      } else {
        f.insert(f.end(), emb[static_cast<std::size_t>(j)]->begin(), emb[static_cast<std::size_t>(j)]->end());
      }
    }
    append_shape(tokens[pos], f);
  }
  return out;
}

}  // namespace

std::vector<double> token_features(const std::vector<std::string>& tokens, std::size_t pos, const TokenContext& ctx) {
  if (pos >= tokens.size()) throw DataError("token position out of range");
  std::unordered_map<std::string, std::vector<double>> cache;
  return features_with_cache(tokens, ctx, cache)[pos];
}

NerModel::NerModel(TokenContext ctx, std::vector<std::string> classes, learn::DenseModel head)
    : ctx_(std::move(ctx)), classes_(std::move(classes)), tags_(tag_set(classes_)), head_(std::move(head)) {
  if (head_.in_dim() != ctx_.dim() || head_.out_dim() != tags_.size()) {
    throw DataError("NER head shape does not match its context and tag set");
  }
}

std::vector<std::vector<double>> NerModel::sentence_features(const std::vector<std::string>& tokens) const {
  std::unordered_map<std::string, std::vector<double>> cache;
  return features_with_cache(tokens, ctx_, cache);
}

std::vector<std::string> NerModel::predict_tags(const std::vector<std::string>& tokens) const {
  return predict_tags(tokens, head_);
}

std::vector<std::string> NerModel::predict_tags(const std::vector<std::string>& tokens, const learn::Head& head) const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& f : sentence_features(tokens)) out.push_back(tags_[learn::argmax(head.forward(f))]);
  return out;
}

namespace {
constexpr std::string_view kNerMagic = "FQKNER01";
}

void NerModel::write_context(std::ostream& out) const {
  out.write(kNerMagic.data(), kNerMagic.size());
  io::write_pod<std::uint64_t>(out, ctx_.window);
  io::write_pod<std::uint64_t>(out, classes_.size());
  for (const auto& c : classes_) io::write_string(out, c);
  ctx_.lsa.write(out);
}

NerModel NerModel::read_context(std::istream& in, learn::DenseModel head) {
  io::expect_magic(in, kNerMagic);
  TokenContext ctx;
  ctx.window = io::read_pod<std::uint64_t>(in);
  std::vector<std::string> classes(io::read_pod<std::uint64_t>(in));
  for (auto& c : classes) c = io::read_string(in);
  ctx.lsa = features::LsaModel::read(in);
  return NerModel(std::move(ctx), std::move(classes), std::move(head));
}

NerModel train_ner(const std::vector<NerExample>& data, TokenContext ctx, const std::vector<std::string>& classes,
                   const learn::TrainConfig& cfg) {
  if (data.empty()) throw DataError("NER dataset is empty");
  const auto tags = tag_set(classes);
  std::map<std::string, std::size_t> tag_index;
  for (std::size_t i = 0; i < tags.size(); ++i) tag_index[tags[i]] = i;
  std::vector<std::vector<double>> x;
  std::vector<std::size_t> y;
  std::unordered_map<std::string, std::vector<double>> cache;
  for (const auto& ex : data) {
    if (ex.tokens.size() != ex.tags.size()) throw DataError("tokens and tags differ in length");
    for (const auto& t : ex.tags) {
      auto it = tag_index.find(t);
      if (it == tag_index.end()) throw DataError("tag '" + t + "' is outside the configured class set");
      y.push_back(it->second);
    }
    for (auto& f : features_with_cache(ex.tokens, ctx, cache)) x.push_back(std::move(f));
  }
  if (x.empty()) throw DataError("NER dataset has no tokens");
  auto res = learn::train_classifier(x, y, tags.size(), cfg);
  return NerModel(std::move(ctx), classes, std::move(res.model));
}

Prf evaluate_ner(const NerModel& model, const std::vector<NerExample>& data) {
  return evaluate_ner(model, model.head(), data);
}

Prf evaluate_ner(const NerModel& model, const learn::Head& head, const std::vector<NerExample>& data) {
  std::vector<std::vector<EntitySpan>> pred, gold;
  for (const auto& ex : data) {
    pred.push_back(decode_bilou(model.predict_tags(ex.tokens, head)));
    gold.push_back(decode_bilou(ex.tags));
  }
  return entity_f1(pred, gold);
}

}  // namespace faqkit::ner

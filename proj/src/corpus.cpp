#include "faqkit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include "json.hpp"

#include "faqkit/common.hpp"
#include "faqkit/io.hpp"
#include "faqkit/text.hpp"

namespace faqkit::corpus {

using json = nlohmann::json;

FaqCollection::FaqCollection(std::vector<Question> questions, std::vector<Answer> answers,
                             std::set<std::pair<std::int64_t, std::int64_t>> relevance)
    : questions_(std::move(questions)), answers_(std::move(answers)), relevance_(std::move(relevance)) {
  std::sort(questions_.begin(), questions_.end(),
            [](const Question& a, const Question& b) { return a.q_id < b.q_id; });
  std::sort(answers_.begin(), answers_.end(),
            [](const Answer& a, const Answer& b) { return a.doc_id < b.doc_id; });
  for (std::size_t i = 1; i < questions_.size(); ++i) {
    if (questions_[i].q_id == questions_[i - 1].q_id) {
      throw DataError("duplicate q_id " + std::to_string(questions_[i].q_id));
    }
  }
  for (std::size_t i = 1; i < answers_.size(); ++i) {
    if (answers_[i].doc_id == answers_[i - 1].doc_id) {
      throw DataError("duplicate doc_id " + std::to_string(answers_[i].doc_id));
    }
  }
  std::map<std::int64_t, std::size_t> per_question;
  for (const auto& [q, d] : relevance_) {
    (void)question(q);
    (void)answer(d);
    ++per_question[q];
  }
  for (const auto& q : questions_) {
    const auto n = per_question[q.q_id];
    if (n < 1 || n > kMaxRelevant) {
      throw DataError("question " + std::to_string(q.q_id) + " has " + std::to_string(n) +
                      " relevant answers (expected 1..5)");
    }
  }
}

std::vector<std::int64_t> FaqCollection::relevant_for(std::int64_t q_id) const {
  std::vector<std::int64_t> out;
  for (auto it = relevance_.lower_bound({q_id, INT64_MIN}); it != relevance_.end() && it->first == q_id;
       ++it) {
    out.push_back(it->second);
  }
  return out;
}

const Question& FaqCollection::question(std::int64_t q_id) const {
  auto it = std::lower_bound(questions_.begin(), questions_.end(), q_id,
                             [](const Question& q, std::int64_t id) { return q.q_id < id; });
  if (it == questions_.end() || it->q_id != q_id) throw DataError("unknown q_id " + std::to_string(q_id));
  return *it;
}

const Answer& FaqCollection::answer(std::int64_t doc_id) const {
  auto it = std::lower_bound(answers_.begin(), answers_.end(), doc_id,
                             [](const Answer& a, std::int64_t id) { return a.doc_id < id; });
  if (it == answers_.end() || it->doc_id != doc_id) {
    throw DataError("unknown doc_id " + std::to_string(doc_id));
  }
  return *it;
}

std::vector<FaqRow> read_faq_rows(const std::filesystem::path& path) {
  std::vector<FaqRow> rows;
  std::size_t line_no = 0;
  for (const auto& line : io::read_lines(path)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      FaqRow r;
      r.q_id = j.at("q_id").get<std::int64_t>();
      r.question = j.at("question").get<std::string>();
      r.doc_id = j.at("doc_id").get<std::int64_t>();
      r.answer = j.at("answer").get<std::string>();
      r.label = j.at("label").get<int>();
      if (r.label != 0 && r.label != 1) throw DataError("label must be 0 or 1");
      rows.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

void write_faq_rows(std::ostream& out, const std::vector<FaqRow>& rows) {
  for (const auto& r : rows) {
    json j;
    j["q_id"] = r.q_id;
    j["question"] = r.question;
    j["doc_id"] = r.doc_id;
    j["answer"] = r.answer;
    j["label"] = r.label;
    out << j.dump() << '\n';
  }
}

FaqCollection collection_from_rows(const std::vector<FaqRow>& rows) {
  std::map<std::int64_t, std::string> questions;
  std::map<std::int64_t, std::string> answers;
  std::set<std::pair<std::int64_t, std::int64_t>> relevance;
  for (const auto& r : rows) {
    auto [qit, q_new] = questions.emplace(r.q_id, r.question);
    if (!q_new && qit->second != r.question) {
      throw DataError("q_id " + std::to_string(r.q_id) + " has conflicting texts");
    }
    auto [ait, a_new] = answers.emplace(r.doc_id, r.answer);
    if (!a_new && ait->second != r.answer) {
      throw DataError("doc_id " + std::to_string(r.doc_id) + " has conflicting texts");
    }
    if (r.label == 1) relevance.emplace(r.q_id, r.doc_id);
  }
  std::vector<Question> qs;
  for (auto& [id, t] : questions) qs.push_back({id, t});
  std::vector<Answer> as;
  for (auto& [id, t] : answers) as.push_back({id, t});
  return FaqCollection(std::move(qs), std::move(as), std::move(relevance));
}

std::vector<FaqRow> rows_from_samples(const std::vector<RankingSample>& samples, const FaqCollection& faq) {
  std::vector<FaqRow> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) {
    rows.push_back({s.q_id, faq.question(s.q_id).text, s.doc_id, faq.answer(s.doc_id).text, s.label});
  }
  return rows;
}

std::vector<RankingSample> samples_from_rows(const std::vector<FaqRow>& rows) {
  std::vector<RankingSample> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back({r.q_id, r.doc_id, r.label});
  return out;
}

Preprocessor::Preprocessor(PreprocessOptions opts) : opts_(std::move(opts)) {
  if (opts_.stopword_file) {
    if (!std::filesystem::exists(*opts_.stopword_file)) {
      throw ConfigError("stopword file not found: " + opts_.stopword_file->string());
    }
    for (auto& line : io::read_lines(*opts_.stopword_file)) {
      auto words = text::split_whitespace(line);
      for (auto& w : words) stopwords_.insert(std::move(w));
    }
  }
}

Preprocessor::Preprocessor(PreprocessOptions opts, std::unordered_set<std::string> stopwords)
    : opts_(std::move(opts)), stopwords_(std::move(stopwords)) {
  opts_.stopword_file.reset();
}

std::vector<std::string> Preprocessor::operator()(std::string_view raw) const {
  text::require_utf8(raw);
  std::string s(raw);
  if (opts_.lowercase) s = text::lowercase(s);
  if (opts_.strip_accents) s = text::strip_accents(s);
  if (opts_.remove_punct || opts_.remove_numbers) {
    std::string kept;
    for (const auto& cp_str : text::code_points(s)) {
      const char32_t cp = text::to_u32(cp_str)[0];
      if (opts_.remove_punct && !text::is_letter_or_digit(cp) && !text::is_space(cp)) {
        kept.push_back(' ');
      } else if (opts_.remove_numbers && text::is_digit(cp)) {
        // dropped
      } else {
        kept.append(cp_str);
      }
    }
    s = std::move(kept);
  }
  auto tokens = text::split_whitespace(s);
  if (!stopwords_.empty()) {
    std::erase_if(tokens, [&](const std::string& t) { return stopwords_.count(t) != 0; });
  }
  if (opts_.stemming) {
    for (auto& t : tokens) t = stem_pt(t);
  }
  return tokens;
}

std::vector<std::string> preprocess(std::string_view text, const PreprocessOptions& opts) {
  return Preprocessor(opts)(text);
}

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::string stem_pt(std::string_view word) {
  std::string w(word);
  if (text::code_point_count(w) <= 3) return w;
  auto replace_suffix = [&](std::string_view suffix, std::string_view repl, std::size_t min_stem) {
    if (ends_with(w, suffix) && w.size() - suffix.size() >= min_stem) {
      w = w.substr(0, w.size() - suffix.size()) + std::string(repl);
      return true;
    }
    return false;
  };
  // Plural reduction.
  replace_suffix("ões", "ão", 2) || replace_suffix("oes", "ao", 2) || replace_suffix("ães", "ão", 2) ||
      replace_suffix("ns", "m", 2) || replace_suffix("ais", "al", 2) || replace_suffix("eis", "el", 2) ||
      replace_suffix("ois", "ol", 2) || replace_suffix("res", "r", 3) || replace_suffix("les", "l", 3) ||
      (!ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is") && replace_suffix("s", "", 3));
  // Common derivational suffixes, longest first.
  replace_suffix("amente", "", 3) || replace_suffix("mente", "", 3) || replace_suffix("amento", "", 3) ||
      replace_suffix("imento", "", 3) || replace_suffix("ação", "", 3) || replace_suffix("acao", "", 3) ||
      replace_suffix("ção", "", 3) || replace_suffix("cao", "", 3) || replace_suffix("idade", "", 3);
  return w;
}

std::string anonymize_numbers(std::string_view input, std::uint64_t seed) {
  Rng rng(seed);
  std::string out(input);
  for (char& c : out) {
    if (c >= '0' && c <= '9') c = static_cast<char>('0' + rng.below(10));
  }
  return out;
}

std::vector<RankingSample> build_ranking_dataset(const FaqCollection& faq, std::size_t m, std::uint64_t seed) {
  if (m == 0) throw ConfigError("m must be positive");
  if (m > faq.answers().size()) {
    throw ConfigError("m = " + std::to_string(m) + " exceeds answer count " +
                      std::to_string(faq.answers().size()));
  }
  Rng rng(seed);
  std::vector<RankingSample> out;
  out.reserve(faq.questions().size() * m);
  for (const auto& q : faq.questions()) {
    const auto relevant = faq.relevant_for(q.q_id);
    if (relevant.size() > m) {
      throw ConfigError("m = " + std::to_string(m) + " is below the relevant count of question " +
                        std::to_string(q.q_id));
    }
    for (auto d : relevant) out.push_back({q.q_id, d, 1});
    std::vector<std::int64_t> pool;
    pool.reserve(faq.answers().size());
    for (const auto& a : faq.answers()) {
      if (!std::binary_search(relevant.begin(), relevant.end(), a.doc_id)) pool.push_back(a.doc_id);
    }
    const std::size_t need = m - relevant.size();
    // Partial Fisher-Yates: the first `need` slots form a uniform sample.
    for (std::size_t i = 0; i < need; ++i) {
      std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
      out.push_back({q.q_id, pool[i], 0});
    }
  }
  return out;
}

Split split(const std::vector<RankingSample>& samples, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must lie in (0, 1)");
  std::vector<std::int64_t> ids;
  for (const auto& s : samples) ids.push_back(s.q_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  Rng rng(seed);
  rng.shuffle(ids);
  auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(ids.size())));
  std::set<std::int64_t> train_ids(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(std::min(n_train, ids.size())));
  Split out;
  for (const auto& s : samples) {
    (train_ids.count(s.q_id) ? out.train : out.test).push_back(s);
  }
  return out;
}

ImbalanceStats imbalance_stats(const std::vector<RankingSample>& samples) {
  if (samples.empty()) throw DataError("imbalance_stats: empty sample set");
  std::size_t pos = 0;
  for (const auto& s : samples) pos += s.label == 1 ? 1 : 0;
  const double p = static_cast<double>(pos) / static_cast<double>(samples.size());
  return {p, 1.0 - p};
}

}  // namespace faqkit::corpus

#include "faqkit/tokenizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "faqkit/common.hpp"
#include "faqkit/io.hpp"
#include "faqkit/text.hpp"

namespace faqkit::tokenizer {

namespace {

const std::vector<std::string>& specials() {
  static const std::vector<std::string> s{std::string(kPad), std::string(kUnk), std::string(kCls),
                                          std::string(kSep), std::string(kMask)};
  return s;
}

bool is_continuation(std::string_view tok) { return tok.starts_with(kContinuationPrefix); }

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.size() < kNumSpecials) throw DataError("vocabulary lacks special tokens");
  for (std::size_t i = 0; i < kNumSpecials; ++i) {
    if (tokens_[i] != specials()[i]) throw DataError("special token " + specials()[i] + " must have id " + std::to_string(i));
  }
  for (std::uint32_t i = 0; i < tokens_.size(); ++i) {
    const auto& t = tokens_[i];
    if (i >= kNumSpecials) {
      if (t.empty() || t == kContinuationPrefix) throw DataError("empty vocabulary token at id " + std::to_string(i));
      for (char32_t cp : text::to_u32(t)) {
        if (text::is_space(cp)) throw DataError("vocabulary token contains whitespace: " + t);
      }
    }
    if (!index_.emplace(t, i).second) throw DataError("duplicate vocabulary token: " + t);
  }
}

std::int64_t Vocabulary::id_of(std::string_view tok) const {
  auto it = index_.find(std::string(tok));
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  auto lines = io::read_lines(path);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return Vocabulary(std::move(lines));
}

std::string normalize(std::string_view text) { return text::lowercase(text::nfkc(text)); }

namespace {

struct PairHash {
  std::size_t operator()(const std::pair<std::uint32_t, std::uint32_t>& p) const {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(p.first) << 32) | p.second);
  }
};

std::string merged_string(const std::string& a, const std::string& b) {
  return a + (is_continuation(b) ? b.substr(kContinuationPrefix.size()) : b);
}

}  // namespace

Vocabulary train_vocab(const std::vector<std::string>& corpus, const TrainOptions& opts) {
  std::map<std::string, std::uint64_t> word_counts;
  for (const auto& line : corpus) {
    for (auto& w : text::split_whitespace(normalize(line))) ++word_counts[w];
  }
  if (word_counts.empty()) throw DataError("train_vocab: corpus is empty");

  // Symbol table: every distinct string that ever appears as a segment.
  std::vector<std::string> symbols;
  std::unordered_map<std::string, std::uint32_t> symbol_ids;
  auto intern = [&](const std::string& s) {
    auto [it, inserted] = symbol_ids.emplace(s, static_cast<std::uint32_t>(symbols.size()));
    if (inserted) symbols.push_back(s);
    return it->second;
  };

  struct Word {
    std::vector<std::uint32_t> parts;
    std::uint64_t count;
  };
  std::vector<Word> words;
  std::set<std::string> alphabet;
  for (const auto& [w, c] : word_counts) {
    auto cps = text::code_points(w);
    if (cps.size() > kMaxWordChars) continue;
    Word word{{}, c};
    for (std::size_t i = 0; i < cps.size(); ++i) {
      std::string sym = i == 0 ? cps[i] : std::string(kContinuationPrefix) + cps[i];
      alphabet.insert(sym);
      word.parts.push_back(intern(sym));
    }
    words.push_back(std::move(word));
  }

  std::vector<std::string> vocab = specials();
  std::set<std::string> in_vocab(vocab.begin(), vocab.end());
  for (const auto& a : alphabet) {
    if (in_vocab.insert(a).second) vocab.push_back(a);
  }
  if (opts.vocab_size < vocab.size()) {
    throw ConfigError("vocab_size " + std::to_string(opts.vocab_size) + " is below specials + alphabet (" +
                      std::to_string(vocab.size()) + ")");
  }

  std::vector<std::uint64_t> sym_count;
  std::unordered_map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t, PairHash> pair_count;
  while (vocab.size() < opts.vocab_size) {
    sym_count.assign(symbols.size(), 0);
    pair_count.clear();
    for (const auto& w : words) {
      for (std::size_t i = 0; i < w.parts.size(); ++i) {
        sym_count[w.parts[i]] += w.count;
        if (i + 1 < w.parts.size()) pair_count[{w.parts[i], w.parts[i + 1]}] += w.count;
      }
    }
    bool found = false;
    std::pair<std::uint32_t, std::uint32_t> best{};
    unsigned __int128 best_num = 0, best_den = 1;
    for (const auto& [p, c] : pair_count) {
      if (c < opts.min_pair_frequency) continue;
      const unsigned __int128 den =
          static_cast<unsigned __int128>(sym_count[p.first]) * sym_count[p.second];
      bool better;
      if (!found) {
        better = true;
      } else {
        // Compare c/den against best_num/best_den exactly.
        const unsigned __int128 lhs = static_cast<unsigned __int128>(c) * best_den;
        const unsigned __int128 rhs = best_num * den;
        if (lhs != rhs) {
          better = lhs > rhs;
        } else {
          const auto& a = symbols[p.first];
          const auto& b = symbols[p.second];
          const auto& ba = symbols[best.first];
          const auto& bb = symbols[best.second];
          better = std::tie(a, b) < std::tie(ba, bb);
        }
      }
      if (better) {
        found = true;
        best = p;
        best_num = c;
        best_den = den;
      }
    }
    if (!found) break;

    const std::string merged = merged_string(symbols[best.first], symbols[best.second]);
    const std::uint32_t merged_id = intern(merged);
    for (auto& w : words) {
      if (w.parts.size() < 2) continue;
      std::vector<std::uint32_t> next;
      next.reserve(w.parts.size());
      for (std::size_t i = 0; i < w.parts.size(); ++i) {
        if (i + 1 < w.parts.size() && w.parts[i] == best.first && w.parts[i + 1] == best.second) {
          next.push_back(merged_id);
          ++i;
        } else {
          next.push_back(w.parts[i]);
        }
      }
      w.parts = std::move(next);
    }
    if (in_vocab.insert(merged).second) vocab.push_back(merged);
  }
  return Vocabulary(std::move(vocab));
}

namespace {

void tokenize_word(const std::string& word, const Vocabulary& vocab, std::vector<std::uint32_t>& out) {
  const auto cps = text::code_points(word);
  if (cps.size() > kMaxWordChars) {
    out.push_back(vocab.unk_id());
    return;
  }
  std::vector<std::uint32_t> pieces;
  std::size_t start = 0;
  while (start < cps.size()) {
    std::int64_t match = -1;
    std::size_t match_end = start;
    for (std::size_t end = cps.size(); end > start; --end) {
      std::string cand = start > 0 ? std::string(kContinuationPrefix) : std::string();
      for (std::size_t i = start; i < end; ++i) cand += cps[i];
      match = vocab.id_of(cand);
      if (match >= 0) {
        match_end = end;
        break;
      }
    }
    if (match < 0) {
      out.push_back(vocab.unk_id());
      return;
    }
    pieces.push_back(static_cast<std::uint32_t>(match));
    start = match_end;
  }
  out.insert(out.end(), pieces.begin(), pieces.end());
}

}  // namespace

TokenSequence tokenize(std::string_view input, const Vocabulary& vocab) {
  TokenSequence seq;
  for (const auto& w : text::split_whitespace(normalize(input))) tokenize_word(w, vocab, seq.ids);
  return seq;
}

std::vector<std::string> tokenize_to_strings(std::string_view input, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (auto id : tokenize(input, vocab).ids) out.push_back(vocab.token(id));
  return out;
}

std::string detokenize(const TokenSequence& seq, const Vocabulary& vocab) {
  std::string out;
  for (auto id : seq.ids) {
    const auto& t = vocab.token(id);
    if (is_continuation(t) && !out.empty()) {
      out += t.substr(kContinuationPrefix.size());
    } else {
      if (!out.empty()) out += ' ';
      out += t;
    }
  }
  return out;
}

LengthStats length_stats(const std::vector<std::string>& corpus, const Vocabulary& vocab) {
  if (corpus.empty()) throw DataError("length_stats: empty corpus");
  std::vector<double> lens;
  lens.reserve(corpus.size());
  for (const auto& line : corpus) lens.push_back(static_cast<double>(tokenize(line, vocab).length()));
  std::sort(lens.begin(), lens.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(lens.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, lens.size() - 1);
    return lens[lo] + (pos - static_cast<double>(lo)) * (lens[hi] - lens[lo]);
  };
  LengthStats s;
  s.n = lens.size();
  double total = 0.0;
  for (double l : lens) total += l;
  s.mean = total / static_cast<double>(lens.size());
  s.p50 = quantile(0.5);
  s.p95 = quantile(0.95);
  return s;
}

}  // namespace faqkit::tokenizer

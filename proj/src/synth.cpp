#include "faqkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "faqkit/text.hpp"

namespace faqkit::synth {

WordFactory::WordFactory(std::vector<std::string> onsets, std::vector<std::string> nuclei,
                         std::vector<std::string> codas, std::uint64_t seed)
    : onsets_(std::move(onsets)), nuclei_(std::move(nuclei)), codas_(std::move(codas)), rng_(seed) {}

std::string WordFactory::word(std::size_t min_syllables, std::size_t max_syllables) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const std::size_t n = min_syllables + rng_.below(max_syllables - min_syllables + 1);
    std::string w;
    for (std::size_t i = 0; i < n; ++i) {
      w += onsets_[rng_.below(onsets_.size())];
      w += nuclei_[rng_.below(nuclei_.size())];
    }
    w += codas_[rng_.below(codas_.size())];
    if (std::find(issued_.begin(), issued_.end(), w) == issued_.end()) {
      issued_.push_back(w);
      return w;
    }
  }
  throw ConfigError("word inventory exhausted");
}

namespace {

WordFactory pt_factory(std::uint64_t seed) {
  return WordFactory({"b", "c", "d", "f", "g", "l", "m", "n", "p", "r", "s", "t", "v", "ch", "lh", "nh"},
                     {"a", "e", "i", "o", "u"}, {"", "", "s", "r", "l"}, seed);
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[rng.below(v.size())];
}

std::vector<std::string> sample_distinct(const std::vector<std::string>& pool, std::size_t n, Rng& rng) {
  std::vector<std::string> copy = pool;
  rng.shuffle(copy);
  copy.resize(std::min(n, copy.size()));
  return copy;
}

const std::vector<std::string> kQuestionOpeners = {"como", "qual", "onde", "quando", "porque", "posso", "preciso"};
const std::vector<std::string> kQuestionFillers = {"eu", "meu", "minha", "fazer", "saber", "consigo", "tenho"};
const std::vector<std::string> kAnswerFillers = {"voce", "pode", "deve", "acessar", "opcao", "menu",
                                                 "seguir", "passos", "depois", "clique"};

}  // namespace

corpus::FaqCollection faq_collection(const FaqOptions& opts, std::uint64_t seed) {
  if (opts.paraphrases_per_answer == 0 || opts.n_questions == 0) throw ConfigError("empty FAQ specification");
  const std::size_t n_topics = (opts.n_questions + opts.paraphrases_per_answer - 1) / opts.paraphrases_per_answer;
  const std::size_t n_answers = n_topics + opts.extra_answers;
  auto words = pt_factory(seed);
  Rng rng(seed + 1);
  std::vector<std::vector<std::string>> q_lex(n_answers), a_lex(n_answers);
  for (std::size_t t = 0; t < n_answers; ++t) {
    for (int i = 0; i < 5; ++i) q_lex[t].push_back(words.word(2, 3));
    for (int i = 0; i < 6; ++i) a_lex[t].push_back(words.word(2, 3));
  }

  std::vector<corpus::Answer> answers;
  for (std::size_t t = 0; t < n_answers; ++t) {
    std::vector<std::string> toks;
    for (const auto& w : sample_distinct(kAnswerFillers, 3, rng)) toks.push_back(w);
    for (const auto& w : sample_distinct(a_lex[t], 5, rng)) toks.push_back(w);
    rng.shuffle(toks);
    answers.push_back({static_cast<std::int64_t>(1000 + t), text::join(toks, " ") + "."});
  }

  std::vector<corpus::Question> questions;
  std::set<std::pair<std::int64_t, std::int64_t>> relevance;
  for (std::size_t i = 0; i < opts.n_questions; ++i) {
    const std::size_t t = i % n_topics;
    std::vector<std::string> toks{pick(kQuestionFillers, rng)};
    for (const auto& w : sample_distinct(q_lex[t], 3, rng)) toks.push_back(w);
    if (rng.uniform() < opts.overlap_rate) toks.push_back(pick(a_lex[t], rng));
    if (rng.uniform() < opts.distractor_rate) {
      const std::size_t other = (t + 1 + rng.below(n_answers - 1)) % n_answers;
      toks.push_back(pick(a_lex[other], rng));
    }
    rng.shuffle(toks);
    toks.insert(toks.begin(), pick(kQuestionOpeners, rng));
    const auto q_id = static_cast<std::int64_t>(i + 1);
    questions.push_back({q_id, text::join(toks, " ") + "?"});
    relevance.insert({q_id, answers[t].doc_id});
  }
  return corpus::FaqCollection(std::move(questions), std::move(answers), std::move(relevance));
}

TwoViewData two_view(std::size_t n_labeled, std::size_t n_unlabeled, std::size_t n_classes, std::size_t dims_per_view,
                     std::uint64_t seed) {
  if (n_classes < 2 || dims_per_view == 0) throw ConfigError("two_view: need >= 2 classes and >= 1 dim per view");
  if (n_labeled < n_classes) throw ConfigError("two_view: need at least one labeled example per class");
  Rng rng(seed);
  // Class means on a scaled simplex-like layout, one independent draw per view.
  std::vector<std::vector<double>> means1(n_classes), means2(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t d = 0; d < dims_per_view; ++d) {
      means1[c].push_back(rng.uniform(-3.0, 3.0));
      means2[c].push_back(rng.uniform(-3.0, 3.0));
    }
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    means1[c][c % dims_per_view] += 4.0;
    means2[c][(c + 1) % dims_per_view] += 4.0;
  }
  TwoViewData out;
  const std::size_t n = n_labeled + n_unlabeled;
  out.data.n_classes = n_classes;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % n_classes;
    std::vector<double> row;
    for (std::size_t d = 0; d < dims_per_view; ++d) row.push_back(means1[c][d] + rng.normal());
    for (std::size_t d = 0; d < dims_per_view; ++d) row.push_back(means2[c][d] + rng.normal());
    out.data.x.push_back(std::move(row));
    out.truth.push_back(c);
    out.data.y.push_back(i < n_labeled ? static_cast<std::int64_t>(c) : cotrain::kUnlabeled);
  }
  for (std::size_t d = 0; d < dims_per_view; ++d) {
    out.data.views.view1.push_back(d);
    out.data.views.view2.push_back(dims_per_view + d);
  }
  return out;
}

std::vector<std::string> default_ner_classes() {
  return {"PRODUTO", "SERVICO", "FUNCIONALIDADE", "ORGANIZACAO", "EMPRESA", "LOCAL", "DOCUMENTO", "PESSOA",
          "DATA",    "VALOR",   "CONTA",          "CARTAO",      "CANAL",   "HORARIO", "PERCENTUAL", "TELEFONE"};
}

std::vector<ner::NerExample> ner_corpus(std::size_t n_sentences, const std::vector<std::string>& classes,
                                        std::uint64_t seed) {
  ner::tag_set(classes);
  auto words = pt_factory(seed);
  Rng rng(seed + 1);
  std::vector<std::vector<std::vector<std::string>>> phrases(classes.size());
  for (auto& per_class : phrases) {
    for (int p = 0; p < 4; ++p) {
      const std::size_t len = 1 + rng.below(3);
      std::vector<std::string> phrase;
      for (std::size_t k = 0; k < len; ++k) {
        auto w = words.word(2, 3);
        w[0] = static_cast<char>(w[0] - 'a' + 'A');
        phrase.push_back(std::move(w));
      }
      per_class.push_back(std::move(phrase));
    }
  }
  const std::vector<std::string> filler = {"o", "a", "meu", "minha", "para", "com", "no", "na", "de", "do",
                                           "quero", "preciso", "ver", "usar", "pagar", "abrir", "hoje", "agora"};
  std::vector<ner::NerExample> out;
  for (std::size_t s = 0; s < n_sentences; ++s) {
    std::vector<std::string> tokens;
    std::vector<ner::EntitySpan> spans;
    const std::size_t n_entities = 1 + rng.below(3);
    for (std::size_t e = 0; e < n_entities; ++e) {
      const std::size_t n_fill = 1 + rng.below(3);
      for (std::size_t f = 0; f < n_fill; ++f) tokens.push_back(pick(filler, rng));
      const std::size_t c = rng.below(classes.size());
      const auto& phrase = pick(phrases[c], rng);
      spans.push_back({tokens.size(), tokens.size() + phrase.size(), classes[c]});
      tokens.insert(tokens.end(), phrase.begin(), phrase.end());
    }
    if (rng.uniform() < 0.5) tokens.push_back(pick(filler, rng));
    auto tags = ner::encode_bilou(tokens.size(), spans);
    out.push_back({std::move(tokens), std::move(tags)});
  }
  return out;
}

std::vector<std::string> sentiment_classes() { return {"negativo", "neutro", "positivo"}; }

std::vector<LabeledText> sentiment_corpus(std::size_t n, std::uint64_t seed) {
  auto words = pt_factory(seed);
  Rng rng(seed + 1);
  const auto classes = sentiment_classes();
  std::vector<std::vector<std::string>> lex(classes.size());
  for (auto& l : lex) {
    for (int i = 0; i < 12; ++i) l.push_back(words.word(2, 3));
  }
  std::vector<std::string> shared;
  for (int i = 0; i < 30; ++i) shared.push_back(words.word(1, 3));
  std::vector<LabeledText> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % classes.size();
    std::vector<std::string> toks;
    const std::size_t n_sig = 2 + rng.below(3);
    for (std::size_t k = 0; k < n_sig; ++k) toks.push_back(pick(lex[c], rng));
    if (rng.uniform() < 0.2) toks.push_back(pick(lex[(c + 1 + rng.below(classes.size() - 1)) % classes.size()], rng));
    const std::size_t n_shared = 3 + rng.below(4);
    for (std::size_t k = 0; k < n_shared; ++k) toks.push_back(pick(shared, rng));
    rng.shuffle(toks);
    out.push_back({text::join(toks, " "), classes[c]});
  }
  return out;
}

namespace {

std::vector<std::string> lines_from(const std::vector<std::string>& lexicon, std::size_t n_lines, Rng& rng) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n_lines; ++i) {
    std::vector<std::string> toks;
    const std::size_t n = 6 + rng.below(8);
    for (std::size_t k = 0; k < n; ++k) {
      // Zipf-like preference for the head of the lexicon.
      const double u = rng.uniform();
      toks.push_back(lexicon[static_cast<std::size_t>(u * u * static_cast<double>(lexicon.size()))]);
    }
    out.push_back(text::join(toks, " "));
  }
  return out;
}

std::vector<std::string> domain_lexicon() {
  WordFactory f({"b", "c", "d", "f", "g", "l", "m", "n", "p", "r", "s", "t", "v", "ch", "lh", "nh", "qu"},
                {"a", "e", "i", "o", "u", "ao", "ei"}, {"", "", "s", "r", "cao", "mento", "dade"}, 7001);
  std::vector<std::string> lex;
  for (int i = 0; i < 300; ++i) lex.push_back(f.word(2, 4));
  return lex;
}

std::vector<std::string> ood_lexicon() {
  WordFactory f({"th", "w", "k", "y", "z", "x", "j", "h", "sk", "kr", "gw"}, {"oo", "y", "ee", "ou", "ai", "u"},
                {"ng", "ck", "x", "tz", "wh", "ff"}, 9001);
  std::vector<std::string> lex;
  for (int i = 0; i < 300; ++i) lex.push_back(f.word(1, 3));
  // Every letter appears word-initially and as a continuation so no in-domain
  // word becomes [UNK].
  for (char c = 'a'; c <= 'z'; ++c) {
    lex.push_back(std::string(1, c));
    lex.push_back(std::string("x") + c);
  }
  return lex;
}

}  // namespace

std::vector<std::string> domain_corpus(std::size_t n_lines, std::uint64_t seed) {
  static const auto lex = domain_lexicon();
  Rng rng(seed);
  return lines_from(lex, n_lines, rng);
}

std::vector<std::string> ood_corpus(std::size_t n_lines, std::uint64_t seed) {
  static const auto lex = ood_lexicon();
  Rng rng(seed);
  return lines_from(lex, n_lines, rng);
}

}  // namespace faqkit::synth

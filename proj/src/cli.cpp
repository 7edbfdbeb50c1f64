#include "faqkit/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "faqkit/bm25.hpp"
#include "faqkit/bundle.hpp"
#include "faqkit/corpus.hpp"
#include "faqkit/cotrain.hpp"
#include "faqkit/features.hpp"
#include "faqkit/io.hpp"
#include "faqkit/learn/forest.hpp"
#include "faqkit/learn/train.hpp"
#include "faqkit/ner.hpp"
#include "faqkit/quant.hpp"
#include "faqkit/rank_eval.hpp"
#include "faqkit/synth.hpp"
#include "faqkit/tokenizer.hpp"
#include "json.hpp"

namespace faqkit::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

/// Collects a command's outputs in memory and writes them, followed by the
/// run manifest, only once the command has finished without error.
class Run {
 public:
  Run(const CLI::App* sub, fs::path primary) : sub_(sub), primary_(std::move(primary)) {}

  const fs::path& input(const fs::path& p) {
    if (!fs::exists(p)) throw ConfigError("input not found: " + p.string());
    inputs_.push_back(p);
    return p;
  }
  void output(const fs::path& p, std::string contents) { outputs_.emplace_back(p, std::move(contents)); }

  void commit() const {
    json manifest;
    manifest["command"] = sub_->get_name();
    json config = json::object();
    for (const CLI::Option* opt : sub_->get_options()) {
      std::string name = opt->get_name();
      if (name == "--help" || name.empty()) continue;
      name.erase(0, name.find_first_not_of('-'));
      if (opt->count() > 0) {
        config[name] = CLI::detail::join(opt->results(), ",");
      } else {
        config[name] = opt->get_default_str();
      }
    }
    manifest["config"] = config;
    json inputs = json::object();
    for (const auto& p : inputs_) inputs[p.string()] = hash_path(p);
    manifest["inputs"] = inputs;
    json outputs = json::object();
    for (const auto& [p, contents] : outputs_) {
      if (p.has_parent_path()) fs::create_directories(p.parent_path());
      io::write_file_atomic(p, contents);
      outputs[p.string()] = io::sha256_hex(contents);
    }
    manifest["outputs"] = outputs;
    manifest["versions"] = {{"faqkit", kVersion}, {"manifest", 1}};
    io::write_file_atomic(primary_.string() + ".manifest.json", manifest.dump(2) + "\n");
  }

 private:
  static std::string hash_path(const fs::path& p) {
    if (!fs::is_directory(p)) return io::sha256_file(p);
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(p)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::string acc;
    for (const auto& f : files) acc += fs::relative(f, p).string() + ":" + io::sha256_file(f) + "\n";
    return io::sha256_hex(acc);
  }

  const CLI::App* sub_;
  fs::path primary_;
  std::vector<fs::path> inputs_;
  std::vector<std::pair<fs::path, std::string>> outputs_;
};

struct Common {
  std::uint64_t seed = 42;
  std::size_t threads = 1;
  std::string out;
};

void add_common(CLI::App* sub, Common& c, bool out_required = true) {
  sub->add_option("--seed", c.seed, "Random seed");
  sub->add_option("--threads", c.threads, "Worker threads where supported")->check(CLI::PositiveNumber);
  auto* o = sub->add_option("--out", c.out, "Output path");
  if (out_required) o->required();
}

struct PrepFlags {
  bool keep_case = false;
  bool keep_accents = false;
  bool keep_punct = false;
  bool remove_numbers = false;
  bool stem = false;
  std::string stopwords;

  corpus::PreprocessOptions options() const {
    corpus::PreprocessOptions o;
    o.lowercase = !keep_case;
    o.strip_accents = !keep_accents;
    o.remove_punct = !keep_punct;
    o.remove_numbers = remove_numbers;
    o.stemming = stem;
    if (!stopwords.empty()) o.stopword_file = stopwords;
    return o;
  }
};

void add_prep(CLI::App* sub, PrepFlags& p) {
  sub->add_flag("--keep-case", p.keep_case, "Do not lowercase");
  sub->add_flag("--keep-accents", p.keep_accents, "Do not strip accents");
  sub->add_flag("--keep-punct", p.keep_punct, "Do not remove punctuation");
  sub->add_flag("--remove-numbers", p.remove_numbers, "Drop digits");
  sub->add_flag("--stem", p.stem, "Apply the light Portuguese stemmer");
  sub->add_option("--stopwords", p.stopwords, "Stopword file, one word per line");
}

struct RankFlags {
  std::string arch = "linear";
  std::size_t hidden = 16;
  std::size_t epochs = 1;
  std::size_t batch = 16;
  double lr = 5e-5;
  double warmup = 0.02;
  double weight_decay = 0.01;
  double smoothing = 0.1;
  double margin = 0.2;
  std::size_t lsa_k = 50;
  bool lsa_vectors = false;
  std::size_t ngrams = 3;
  std::size_t min_df = 1;
  double k1 = 1.2;
  double b = 0.75;
  double delta = 1.0;

  learn::TrainConfig train_config(std::uint64_t seed) const {
    learn::TrainConfig cfg;
    cfg.arch = learn::parse_arch(arch);
    cfg.hidden = hidden;
    cfg.epochs = epochs;
    cfg.batch_size = batch;
    cfg.lr = lr;
    cfg.warmup_fraction = warmup;
    cfg.adamw.weight_decay = weight_decay;
    cfg.label_smoothing = smoothing;
    cfg.margin = margin;
    cfg.seed = seed;
    return cfg;
  }
  features::FeatureOptions feature_options() const {
    features::FeatureOptions f;
    f.bm25 = {k1, b, delta};
    f.bm25.validate();
    f.include_lsa_vectors = lsa_vectors;
    return f;
  }
};

void add_bm25(CLI::App* sub, double& k1, double& b, double& delta) {
  sub->add_option("--k1", k1, "BM25+ k1");
  sub->add_option("--b", b, "BM25+ b");
  sub->add_option("--delta", delta, "BM25+ delta");
}

void add_train(CLI::App* sub, RankFlags& f) {
  sub->add_option("--arch", f.arch, "linear or mlp")->check(CLI::IsMember({"linear", "mlp"}));
  sub->add_option("--hidden", f.hidden, "Hidden width for mlp")->check(CLI::PositiveNumber);
  sub->add_option("--epochs", f.epochs, "Training epochs");
  sub->add_option("--batch-size", f.batch, "Minibatch size")->check(CLI::PositiveNumber);
  sub->add_option("--lr", f.lr, "Peak learning rate");
  sub->add_option("--warmup", f.warmup, "Warmup fraction of total steps");
  sub->add_option("--weight-decay", f.weight_decay, "AdamW decoupled weight decay");
  sub->add_option("--smoothing", f.smoothing, "Label smoothing (pointwise)");
  sub->add_option("--margin", f.margin, "Hinge margin (pairwise)");
  sub->add_option("--lsa-k", f.lsa_k, "LSA dimensions")->check(CLI::PositiveNumber);
  sub->add_flag("--lsa-vectors", f.lsa_vectors, "Append LSA(q) and LSA(a) to the pair features");
  sub->add_option("--ngrams", f.ngrams, "Largest n-gram order for TF-IDF")->check(CLI::PositiveNumber);
  sub->add_option("--min-df", f.min_df, "Minimum document frequency for TF-IDF terms");
  add_bm25(sub, f.k1, f.b, f.delta);
}

std::string mode_check(const std::string& mode) {
  if (mode != "pointwise" && mode != "pairwise") throw ConfigError("--mode must be pointwise or pairwise");
  return mode;
}

/// Fits the featurizer on a training split and trains the requested head.
struct TrainedRanker {
  bundle::RankerContext ctx;
  learn::TrainResult result;
};

TrainedRanker train_ranker(const std::vector<corpus::FaqRow>& rows, const std::vector<corpus::Answer>& pool,
                           const std::string& mode, const RankFlags& flags, const PrepFlags& prep,
                           std::uint64_t seed) {
  const auto faq = corpus::collection_from_rows(rows);
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& [q, d] : faq.relevance()) pairs.emplace_back(faq.question(q).text, faq.answer(d).text);
  features::TfidfOptions tfidf{flags.ngrams, flags.min_df};
  TrainedRanker out;
  out.ctx.mode = mode;
  out.ctx.featurizer =
      features::PairFeaturizer::fit(pairs, pool, prep.options(), tfidf, flags.lsa_k, flags.feature_options());
  for (const auto& a : pool) out.ctx.answers[a.doc_id] = a.text;
  const auto groups = learn::featurize_groups(corpus::samples_from_rows(rows), faq, out.ctx.featurizer);
  const auto cfg = flags.train_config(seed);
  out.result = mode == "pointwise" ? learn::train_pointwise(groups, cfg) : learn::train_pairwise(groups, cfg);
  return out;
}

std::vector<corpus::Answer> merge_answers(const corpus::FaqCollection& a, const corpus::FaqCollection* b) {
  std::map<std::int64_t, std::string> all;
  for (const auto& x : a.answers()) all[x.doc_id] = x.text;
  if (b) {
    for (const auto& x : b->answers()) all.emplace(x.doc_id, x.text);
  }
  std::vector<corpus::Answer> out;
  for (auto& [id, text] : all) out.push_back({id, text});
  return out;
}

struct RetrievalEval {
  rank_eval::EvalReport model;
  rank_eval::EvalReport bm25;
};

RetrievalEval evaluate_rows(const std::vector<corpus::FaqRow>& rows, const learn::Head& head,
                            const features::PairFeaturizer& fz, std::size_t k) {
  const auto faq = corpus::collection_from_rows(rows);
  rank_eval::Relevance rel;
  for (const auto& [q, d] : faq.relevance()) rel[q].insert(d);
  const auto groups = learn::featurize_groups(corpus::samples_from_rows(rows), faq, fz);
  std::vector<rank_eval::RankedList> model_lists, bm25_lists;
  for (const auto& g : groups) {
    model_lists.push_back(rank_eval::rank_features(head, g.q_id, g.doc_ids, g.features));
    std::vector<rank_eval::Candidate> cands;
    for (auto id : g.doc_ids) cands.push_back({id, faq.answer(id).text});
    bm25_lists.push_back(rank_eval::bm25_rank(g.q_id, faq.question(g.q_id).text, cands, fz));
  }
  return {rank_eval::evaluate(model_lists, rel, k), rank_eval::evaluate(bm25_lists, rel, k)};
}

struct TextRow {
  std::string text;
  std::optional<std::string> label;
};

std::vector<TextRow> read_text_rows(const fs::path& path) {
  std::vector<TextRow> rows;
  std::size_t line_no = 0;
  for (const auto& line : io::read_lines(path)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      TextRow r{j.at("text").get<std::string>(), std::nullopt};
      if (j.contains("label") && !j.at("label").is_null()) r.label = j.at("label").get<std::string>();
      rows.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (rows.empty()) throw DataError(path.string() + ": no rows");
  return rows;
}

std::vector<std::string> read_doc_lines(const fs::path& path) {
  std::vector<std::string> docs;
  for (auto& line : io::read_lines(path)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) docs.push_back(std::move(line));
  }
  if (docs.empty()) throw DataError(path.string() + ": no documents");
  return docs;
}

std::string faq_rows_text(const std::vector<corpus::FaqRow>& rows) {
  std::ostringstream out;
  corpus::write_faq_rows(out, rows);
  return out.str();
}

json stats_json(const quant::LatencyStats& s) {
  return {{"mean_us", s.mean_us}, {"p50_us", s.p50_us}, {"p95_us", s.p95_us}, {"measured", s.measured}};
}

/// Feature rows a bundle's head consumes, computed from a data file matching its kind.
std::vector<std::vector<double>> bench_samples(const bundle::Bundle& b, const fs::path& data) {
  std::vector<std::vector<double>> xs;
  if (b.kind == bundle::kRanker) {
    const auto ctx = bundle::decode_ranker(b.context);
    const auto rows = corpus::read_faq_rows(data);
    const auto faq = corpus::collection_from_rows(rows);
    for (auto& g : learn::featurize_groups(corpus::samples_from_rows(rows), faq, ctx.featurizer)) {
      for (auto& f : g.features) xs.push_back(std::move(f));
    }
  } else if (b.kind == bundle::kNer) {
    const auto head = b.dense ? *b.dense : b.quantized->dequantized();
    const auto model = bundle::decode_ner(b.context, head);
    for (const auto& ex : ner::read_ner_jsonl(data)) {
      for (auto& f : model.sentence_features(ex.tokens)) xs.push_back(std::move(f));
    }
  } else {
    const auto ctx = bundle::decode_sentiment(b.context);
    for (const auto& r : read_text_rows(data)) xs.push_back(ctx.lsa.embed(r.text));
  }
  if (xs.empty()) throw DataError("no benchmark samples in " + data.string());
  return xs;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"FAQ retrieval and customer-service NLP toolkit", "faqkit"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("faqkit ") + kVersion);

  std::vector<std::pair<CLI::App*, std::function<void()>>> commands;
  auto command = [&](const std::string& name, const std::string& desc) {
    auto* sub = app.add_subcommand(name, desc);
    sub->option_defaults()->always_capture_default();
    return sub;
  };

  // gen-synthetic
  Common gs_c;
  std::string gs_kind = "faq";
  std::size_t gs_n = 0, gs_labeled = 0;
  auto* gs = command("gen-synthetic", "Write a synthetic fixture (faq, ner, classes, sentiment, domain, ood)");
  gs->add_option("--kind", gs_kind, "Fixture kind")
      ->check(CLI::IsMember({"faq", "ner", "classes", "sentiment", "domain", "ood"}));
  gs->add_option("--n", gs_n, "Number of questions, sentences or lines (0 = kind default)");
  gs->add_option("--labeled", gs_labeled, "Sentiment only: keep labels on the first N rows (0 = all)");
  add_common(gs, gs_c);
  commands.emplace_back(gs, [&] {
    Run r(gs, gs_c.out);
    std::string text;
    if (gs_kind == "faq") {
      synth::FaqOptions o;
      if (gs_n) o.n_questions = gs_n;
      const auto faq = synth::faq_collection(o, gs_c.seed);
      std::vector<corpus::FaqRow> rows;
      std::set<std::int64_t> referenced;
      for (const auto& [q, d] : faq.relevance()) {
        rows.push_back({q, faq.question(q).text, d, faq.answer(d).text, 1});
        referenced.insert(d);
      }
      const auto& q0 = faq.questions().front();
      for (const auto& a : faq.answers()) {
        if (!referenced.count(a.doc_id)) rows.push_back({q0.q_id, q0.text, a.doc_id, a.text, 0});
      }
      text = faq_rows_text(rows);
    } else if (gs_kind == "ner") {
      text = ner::write_ner_jsonl(synth::ner_corpus(gs_n ? gs_n : 600, synth::default_ner_classes(), gs_c.seed));
    } else if (gs_kind == "classes") {
      text.clear();
      for (const auto& c : synth::default_ner_classes()) text += c + "\n";
    } else if (gs_kind == "sentiment") {
      const auto rows = synth::sentiment_corpus(gs_n ? gs_n : 600, gs_c.seed);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        json j;
        j["text"] = rows[i].text;
        j["label"] = (gs_labeled == 0 || i < gs_labeled) ? json(rows[i].label) : json(nullptr);
        text += j.dump() + "\n";
      }
    } else {
      const auto lines = gs_kind == "domain" ? synth::domain_corpus(gs_n ? gs_n : 2000, gs_c.seed)
                                             : synth::ood_corpus(gs_n ? gs_n : 2000, gs_c.seed);
      for (const auto& l : lines) text += l + "\n";
    }
    r.output(gs_c.out, std::move(text));
    r.commit();
  });

  // build-vocab
  Common bv_c;
  std::string bv_corpus;
  tokenizer::TrainOptions bv_opts;
  auto* bv = command("build-vocab", "Train a WordPiece vocabulary from a text corpus (one document per line)");
  bv->add_option("--input,--corpus", bv_corpus, "Corpus file, one document per line")->required();
  bv->add_option("--size,--vocab-size", bv_opts.vocab_size, "Target vocabulary size");
  bv->add_option("--min-pair-freq", bv_opts.min_pair_frequency, "Minimum pair count for a merge");
  add_common(bv, bv_c);
  commands.emplace_back(bv, [&] {
    Run r(bv, bv_c.out);
    const auto vocab = tokenizer::train_vocab(read_doc_lines(r.input(bv_corpus)), bv_opts);
    std::string text;
    for (const auto& t : vocab.tokens()) text += t + "\n";
    r.output(bv_c.out, std::move(text));
    r.commit();
  });

  // tokenize-stats
  Common ts_c;
  std::string ts_vocab, ts_corpus;
  auto* ts = command("tokenize-stats", "Token-length statistics of a corpus under a vocabulary");
  ts->add_option("--vocab", ts_vocab, "Vocabulary file")->required();
  ts->add_option("--corpus", ts_corpus, "Corpus file")->required();
  add_common(ts, ts_c);
  commands.emplace_back(ts, [&] {
    Run r(ts, ts_c.out);
    const auto vocab = tokenizer::Vocabulary::load(r.input(ts_vocab));
    const auto s = tokenizer::length_stats(read_doc_lines(r.input(ts_corpus)), vocab);
    json j{{"mean", s.mean}, {"p50", s.p50}, {"p95", s.p95}, {"n", s.n}, {"vocab_size", vocab.size()}};
    out << j.dump() << "\n";
    r.output(ts_c.out, j.dump(2) + "\n");
    r.commit();
  });

  // build-faq-dataset
  Common bd_c;
  std::string bd_faq;
  std::size_t bd_cands = 30;
  double bd_ratio = 0.7;
  bool bd_anon = false;
  auto* bd = command("build-faq-dataset", "Sample candidates per question and split by question into train/test");
  bd->add_option("--faq", bd_faq, "FAQ collection (JSON lines)")->required();
  bd->add_option("--cands", bd_cands, "Candidates per question (m)");
  bd->add_option("--split", bd_ratio, "Fraction of questions in train");
  bd->add_flag("--anonymize", bd_anon, "Replace every digit with a seeded random digit");
  add_common(bd, bd_c);
  commands.emplace_back(bd, [&] {
    Run r(bd, bd_c.out);
    auto rows = corpus::read_faq_rows(r.input(bd_faq));
    if (bd_anon) {
      for (auto& row : rows) {
        row.question = corpus::anonymize_numbers(row.question, bd_c.seed + static_cast<std::uint64_t>(row.q_id));
        row.answer = corpus::anonymize_numbers(row.answer, bd_c.seed + 1000003ULL * static_cast<std::uint64_t>(row.doc_id));
      }
    }
    const auto faq = corpus::collection_from_rows(rows);
    const auto samples = corpus::build_ranking_dataset(faq, bd_cands, bd_c.seed);
    const auto sp = corpus::split(samples, bd_ratio, bd_c.seed);
    const auto stats = corpus::imbalance_stats(samples);
    const fs::path dir = bd_c.out;
    r.output(dir / "train.jsonl", faq_rows_text(corpus::rows_from_samples(sp.train, faq)));
    r.output(dir / "test.jsonl", faq_rows_text(corpus::rows_from_samples(sp.test, faq)));
    json j{{"m", bd_cands},
           {"positive_fraction", stats.positive_fraction},
           {"negative_fraction", stats.negative_fraction},
           {"train_samples", sp.train.size()},
           {"test_samples", sp.test.size()}};
    r.output(dir / "stats.json", j.dump(2) + "\n");
    r.commit();
  });

  // build-index
  Common bi_c;
  std::string bi_faq;
  PrepFlags bi_prep;
  auto* bi = command("build-index", "Build a BM25+ inverted index over the answers of an FAQ collection");
  bi->add_option("--faq", bi_faq, "FAQ collection (JSON lines)")->required();
  add_prep(bi, bi_prep);
  add_common(bi, bi_c);
  commands.emplace_back(bi, [&] {
    Run r(bi, bi_c.out);
    const auto faq = corpus::collection_from_rows(corpus::read_faq_rows(r.input(bi_faq)));
    const corpus::Preprocessor prep(bi_prep.options());
    std::vector<std::pair<std::int64_t, std::vector<std::string>>> docs;
    for (const auto& a : faq.answers()) docs.emplace_back(a.doc_id, prep(a.text));
    const auto index = bm25::InvertedIndex::build(docs);
    std::ostringstream bin;
    index.write(bin);
    const fs::path dir = bi_c.out;
    r.output(dir / "postings.bin", bin.str());
    json stats{{"n_docs", index.n_docs()}, {"avgdl", index.avgdl()}, {"n_terms", index.all_postings().size()},
               {"format", "faqkit-bm25-v1"}};
    r.output(dir / "stats.json", stats.dump(2) + "\n");
    json answers = json::object();
    for (const auto& a : faq.answers()) answers[std::to_string(a.doc_id)] = a.text;
    r.output(dir / "answers.json", answers.dump(2) + "\n");
    const auto o = bi_prep.options();
    json p{{"lowercase", o.lowercase},      {"strip_accents", o.strip_accents}, {"remove_punct", o.remove_punct},
           {"remove_numbers", o.remove_numbers}, {"stemming", o.stemming},
           {"stopwords", bi_prep.stopwords}};
    r.output(dir / "preprocess.json", p.dump(2) + "\n");
    r.commit();
  });

  // bm25-search
  Common bs_c;
  std::string bs_index, bs_queries;
  std::vector<std::string> bs_query;
  std::size_t bs_k = 10;
  bm25::Params bs_params;
  auto* bs = command("bm25-search", "Top-k BM25+ search over a built index");
  bs->add_option("--index", bs_index, "Index directory")->required();
  bs->add_option("--query", bs_query, "Query text (repeatable)");
  bs->add_option("--queries", bs_queries, "File with one query per line");
  bs->add_option("--k", bs_k, "Results per query")->check(CLI::PositiveNumber);
  add_bm25(bs, bs_params.k1, bs_params.b, bs_params.delta);
  add_common(bs, bs_c);
  commands.emplace_back(bs, [&] {
    Run r(bs, bs_c.out);
    bs_params.validate();
    const fs::path dir = r.input(bs_index);
    const auto index = bm25::InvertedIndex::load_dir(dir);
    const auto p = json::parse(io::read_file(dir / "preprocess.json"));
    corpus::PreprocessOptions o;
    o.lowercase = p.at("lowercase");
    o.strip_accents = p.at("strip_accents");
    o.remove_punct = p.at("remove_punct");
    o.remove_numbers = p.at("remove_numbers");
    o.stemming = p.at("stemming");
    if (!p.at("stopwords").get<std::string>().empty()) o.stopword_file = p.at("stopwords").get<std::string>();
    const corpus::Preprocessor prep(o);
    auto queries = bs_query;
    if (!bs_queries.empty()) {
      for (auto& q : read_doc_lines(r.input(bs_queries))) queries.push_back(std::move(q));
    }
    if (queries.empty()) throw ConfigError("give --query or --queries");
    std::string text;
    for (const auto& q : queries) {
      json hits = json::array();
      for (const auto& h : bm25::search(prep(q), index, bs_params, bs_k)) {
        hits.push_back({{"doc_id", h.doc_id}, {"score", h.score}});
      }
      text += json{{"query", q}, {"hits", hits}}.dump() + "\n";
    }
    out << text;
    r.output(bs_c.out, std::move(text));
    r.commit();
  });

  // fit-lsa
  Common fl_c;
  std::string fl_corpus;
  std::size_t fl_k = 100, fl_ngrams = 3, fl_min_df = 1;
  PrepFlags fl_prep;
  auto* fl = command("fit-lsa", "Fit TF-IDF + truncated SVD on a corpus (one document per line)");
  fl->add_option("--corpus", fl_corpus, "Corpus file")->required();
  fl->add_option("--k", fl_k, "Latent dimensions")->check(CLI::PositiveNumber);
  fl->add_option("--ngrams", fl_ngrams, "Largest n-gram order")->check(CLI::PositiveNumber);
  fl->add_option("--min-df", fl_min_df, "Minimum document frequency");
  add_prep(fl, fl_prep);
  add_common(fl, fl_c);
  commands.emplace_back(fl, [&] {
    Run r(fl, fl_c.out);
    const auto lsa = features::LsaModel::fit(read_doc_lines(r.input(fl_corpus)), fl_prep.options(),
                                             {fl_ngrams, fl_min_df}, fl_k);
    std::ostringstream bin;
    lsa.write(bin);
    json s{{"k", lsa.k()}, {"n_terms", lsa.matrix().n_terms()}, {"n_docs", lsa.matrix().n_docs()},
           {"sigma", lsa.projection().sigma}};
    r.output(fl_c.out, bin.str());
    r.output(fl_c.out + ".json", s.dump(2) + "\n");
    r.commit();
  });

  // train-ranker
  Common tr_c;
  std::string tr_train, tr_pool, tr_mode = "pointwise";
  RankFlags tr_flags;
  PrepFlags tr_prep;
  auto* tr = command("train-ranker", "Train a pointwise or pairwise ranking head");
  tr->add_option("--train", tr_train, "Training split (JSON lines)")->required();
  tr->add_option("--pool", tr_pool, "Extra FAQ collection whose answers join the candidate pool");
  tr->add_option("--mode", tr_mode, "pointwise or pairwise")->check(CLI::IsMember({"pointwise", "pairwise"}));
  add_train(tr, tr_flags);
  add_prep(tr, tr_prep);
  add_common(tr, tr_c);
  commands.emplace_back(tr, [&] {
    Run r(tr, tr_c.out);
    const auto rows = corpus::read_faq_rows(r.input(tr_train));
    const auto faq = corpus::collection_from_rows(rows);
    std::optional<corpus::FaqCollection> extra;
    if (!tr_pool.empty()) extra = corpus::collection_from_rows(corpus::read_faq_rows(r.input(tr_pool)));
    const auto pool = merge_answers(faq, extra ? &*extra : nullptr);
    auto trained = train_ranker(rows, pool, mode_check(tr_mode), tr_flags, tr_prep, tr_c.seed);
    bundle::Bundle b{std::string(bundle::kRanker), trained.result.model, std::nullopt, bundle::encode(trained.ctx)};
    r.output(tr_c.out, bundle::serialize(b));
    r.output(tr_c.out + ".loss.csv", learn::loss_trace_csv(trained.result.trace));
    r.commit();
  });

  // eval-retrieval
  Common er_c;
  std::string er_model, er_data;
  std::size_t er_k = 10;
  bool er_bm25 = false;
  auto* er = command("eval-retrieval", "MRR@k and AP@1 of a ranking model on a split");
  er->add_option("--model", er_model, "Ranker model file")->required();
  er->add_option("--data", er_data, "Evaluation split (JSON lines)")->required();
  er->add_option("--k", er_k, "Cutoff for MRR")->check(CLI::PositiveNumber);
  er->add_flag("--with-bm25", er_bm25, "Also report the BM25+ baseline on the same candidates");
  add_common(er, er_c, false);
  commands.emplace_back(er, [&] {
    Run r(er, er_c.out.empty() ? fs::path(er_model + ".eval.json") : fs::path(er_c.out));
    const auto b = bundle::load(r.input(er_model));
    if (b.kind != bundle::kRanker) throw ConfigError("not a ranker model: " + er_model);
    const auto ctx = bundle::decode_ranker(b.context);
    const auto ev = evaluate_rows(corpus::read_faq_rows(r.input(er_data)), b.head(), ctx.featurizer, er_k);
    const std::string k = std::to_string(er_k);
    json j;
    j["mrr@" + k] = ev.model.mrr_at_k;
    j["ap@1"] = ev.model.ap_at_1;
    j["n_queries"] = ev.model.n_queries;
    if (er_bm25) {
      j["bm25_mrr@" + k] = ev.bm25.mrr_at_k;
      j["bm25_ap@1"] = ev.bm25.ap_at_1;
    }
    out << j.dump() << "\n";
    if (!er_c.out.empty()) {
      r.output(er_c.out, j.dump(2) + "\n");
      r.commit();
    }
  });

  // eval-sweep
  Common sw_c;
  std::string sw_faq, sw_mode = "pointwise";
  std::vector<std::size_t> sw_cands{15, 30, 45};
  double sw_ratio = 0.7;
  std::size_t sw_k = 10;
  RankFlags sw_flags;
  PrepFlags sw_prep;
  auto* sw = command("eval-sweep", "Retrieval quality as the number of candidates per question grows");
  sw->add_option("--faq", sw_faq, "FAQ collection (JSON lines)")->required();
  sw->add_option("--cands", sw_cands, "Comma-separated candidate counts")->delimiter(',');
  sw->add_option("--mode", sw_mode, "pointwise or pairwise")->check(CLI::IsMember({"pointwise", "pairwise"}));
  sw->add_option("--split", sw_ratio, "Fraction of questions in train");
  sw->add_option("--k", sw_k, "Cutoff for MRR")->check(CLI::PositiveNumber);
  add_train(sw, sw_flags);
  add_prep(sw, sw_prep);
  add_common(sw, sw_c);
  commands.emplace_back(sw, [&] {
    Run r(sw, sw_c.out);
    const auto faq = corpus::collection_from_rows(corpus::read_faq_rows(r.input(sw_faq)));
    if (sw_cands.empty()) throw ConfigError("--cands is empty");
    std::string csv = "m,positive_fraction,mrr,ap1\n";
    for (auto m : sw_cands) {
      const auto samples = corpus::build_ranking_dataset(faq, m, sw_c.seed);
      const auto sp = corpus::split(samples, sw_ratio, sw_c.seed);
      const auto train_rows = corpus::rows_from_samples(sp.train, faq);
      const auto trained = train_ranker(train_rows, faq.answers(), mode_check(sw_mode), sw_flags, sw_prep, sw_c.seed);
      const auto ev = evaluate_rows(corpus::rows_from_samples(sp.test, faq), trained.result.model,
                                    trained.ctx.featurizer, sw_k);
      char line[160];
      std::snprintf(line, sizeof line, "%zu,%.6f,%.6f,%.6f\n", m, corpus::imbalance_stats(samples).positive_fraction,
                    ev.model.mrr_at_k, ev.model.ap_at_1);
      csv += line;
    }
    out << csv;
    r.output(sw_c.out, std::move(csv));
    r.commit();
  });

  // rerank
  Common rr_c;
  std::string rr_model, rr_queries;
  std::vector<std::string> rr_query;
  std::size_t rr_k = 10;
  auto* rr = command("rerank", "BM25+ top-k over the model's answer pool, reordered by the ranking head");
  rr->add_option("--model", rr_model, "Ranker model file")->required();
  rr->add_option("--query", rr_query, "Query text (repeatable)");
  rr->add_option("--queries", rr_queries, "File with one query per line");
  rr->add_option("--k", rr_k, "Candidates taken from BM25+")->check(CLI::PositiveNumber);
  add_common(rr, rr_c);
  commands.emplace_back(rr, [&] {
    Run r(rr, rr_c.out);
    const auto b = bundle::load(r.input(rr_model));
    if (b.kind != bundle::kRanker) throw ConfigError("not a ranker model: " + rr_model);
    const auto ctx = bundle::decode_ranker(b.context);
    auto queries = rr_query;
    if (!rr_queries.empty()) {
      for (auto& q : read_doc_lines(r.input(rr_queries))) queries.push_back(std::move(q));
    }
    if (queries.empty()) throw ConfigError("give --query or --queries");
    std::string text;
    for (const auto& q : queries) {
      const auto ranked = rank_eval::rerank(q, ctx.featurizer.index(), ctx.featurizer.options().bm25, b.head(),
                                            ctx.featurizer, ctx.answers, rr_k);
      json hits = json::array();
      for (std::size_t i = 0; i < ranked.doc_ids.size(); ++i) {
        hits.push_back({{"doc_id", ranked.doc_ids[i]}, {"score", ranked.scores[i]}});
      }
      text += json{{"query", q}, {"hits", hits}}.dump() + "\n";
    }
    out << text;
    r.output(rr_c.out, std::move(text));
    r.commit();
  });

  // train-sentiment
  Common ss_c;
  std::string ss_data, ss_test, ss_head = "forest";
  std::size_t ss_k = 50;
  learn::ForestConfig ss_forest;
  RankFlags ss_flags;
  PrepFlags ss_prep;
  auto* ss = command("train-sentiment", "LSA features + random forest (or dense head) sentiment classifier");
  ss->add_option("--data", ss_data, "Labeled texts (JSON lines with text, label)")->required();
  ss->add_option("--test", ss_test, "Optional held-out texts for an F1 report");
  ss->add_option("--head", ss_head, "forest or dense")->check(CLI::IsMember({"forest", "dense"}));
  ss->add_option("--lsa-k", ss_k, "LSA dimensions")->check(CLI::PositiveNumber);
  ss->add_option("--trees", ss_forest.n_trees, "Forest size")->check(CLI::PositiveNumber);
  ss->add_option("--depth", ss_forest.max_depth, "Maximum tree depth")->check(CLI::PositiveNumber);
  ss->add_option("--epochs", ss_flags.epochs, "Dense head epochs");
  ss->add_option("--lr", ss_flags.lr, "Dense head peak learning rate");
  ss->add_option("--batch-size", ss_flags.batch, "Dense head minibatch size")->check(CLI::PositiveNumber);
  add_prep(ss, ss_prep);
  add_common(ss, ss_c);
  commands.emplace_back(ss, [&] {
    Run r(ss, ss_c.out);
    const auto rows = read_text_rows(r.input(ss_data));
    std::set<std::string> labels;
    std::vector<std::string> texts;
    for (const auto& row : rows) {
      if (!row.label) throw DataError("train-sentiment needs every row labeled");
      labels.insert(*row.label);
      texts.push_back(row.text);
    }
    bundle::SentimentContext ctx;
    ctx.classes.assign(labels.begin(), labels.end());
    if (ctx.classes.size() < 2) throw DataError("need at least two sentiment classes");
    ctx.lsa = features::LsaModel::fit(texts, ss_prep.options(), {}, ss_k);
    std::vector<std::vector<double>> x;
    std::vector<std::size_t> y;
    for (const auto& row : rows) {
      x.push_back(ctx.lsa.embed(row.text));
      y.push_back(static_cast<std::size_t>(std::find(ctx.classes.begin(), ctx.classes.end(), *row.label) -
                                           ctx.classes.begin()));
    }
    bundle::Bundle b{std::string(bundle::kSentiment), std::nullopt, std::nullopt, {}};
    ss_forest.seed = ss_c.seed;
    ss_forest.threads = ss_c.threads;
    if (ss_head == "forest") {
      ctx.forest = learn::fit_forest(x, y, ctx.classes.size(), ss_forest);
    } else {
      b.dense = learn::train_classifier(x, y, ctx.classes.size(), ss_flags.train_config(ss_c.seed)).model;
    }
    if (!ss_test.empty()) {
      std::vector<std::string> preds, golds;
      for (const auto& row : read_text_rows(r.input(ss_test))) {
        if (!row.label) throw DataError("test rows must be labeled");
        const auto f = ctx.lsa.embed(row.text);
        const auto p = ctx.forest ? ctx.forest->predict_proba(f) : learn::softmax(b.dense->forward(f));
        preds.push_back(ctx.classes[learn::argmax(p)]);
        golds.push_back(*row.label);
      }
      const auto rep = rank_eval::f1_report(preds, golds, ctx.classes);
      json per = json::array();
      for (const auto& c : rep.per_class) {
        per.push_back({{"label", c.label}, {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1},
                       {"support", c.support}});
      }
      json j{{"per_class", per}, {"macro_f1", rep.macro_f1}, {"micro_f1", rep.micro_f1}};
      out << j.dump() << "\n";
      r.output(ss_c.out + ".report.json", j.dump(2) + "\n");
    }
    b.context = bundle::encode(ctx);
    r.output(ss_c.out, bundle::serialize(b));
    r.commit();
  });

  // cotrain-expand
  Common ct_c;
  std::string ct_data;
  std::size_t ct_k = 20;
  cotrain::CotrainConfig ct_cfg;
  learn::ForestConfig ct_forest;
  ct_forest.n_trees = 100;
  PrepFlags ct_prep;
  auto* ct = command("cotrain-expand", "Expand a partially labeled text set by two-view co-training");
  ct->add_option("--data", ct_data, "Texts (JSON lines; label may be null)")->required();
  ct->add_option("--lsa-k", ct_k, "LSA dimensions, split into two views")->check(CLI::PositiveNumber);
  ct->add_option("--tau", ct_cfg.tau, "Confidence threshold");
  ct->add_option("--k-per-class", ct_cfg.k_per_class, "Additions per class, classifier and round");
  ct->add_option("--max-rounds", ct_cfg.max_rounds, "Round limit");
  ct->add_option("--trees", ct_forest.n_trees, "Trees per base learner")->check(CLI::PositiveNumber);
  ct->add_option("--depth", ct_forest.max_depth, "Tree depth")->check(CLI::PositiveNumber);
  add_prep(ct, ct_prep);
  add_common(ct, ct_c);
  commands.emplace_back(ct, [&] {
    Run r(ct, ct_c.out);
    const auto rows = read_text_rows(r.input(ct_data));
    std::set<std::string> label_set;
    std::vector<std::string> texts;
    for (const auto& row : rows) {
      if (row.label) label_set.insert(*row.label);
      texts.push_back(row.text);
    }
    const std::vector<std::string> classes(label_set.begin(), label_set.end());
    if (classes.size() < 2) throw DataError("need labeled rows from at least two classes");
    const auto lsa = features::LsaModel::fit(texts, ct_prep.options(), {}, ct_k);
    cotrain::PartiallyLabeled data;
    data.n_classes = classes.size();
    for (const auto& row : rows) {
      data.x.push_back(lsa.embed(row.text));
      data.y.push_back(row.label ? std::find(classes.begin(), classes.end(), *row.label) - classes.begin()
                                 : cotrain::kUnlabeled);
    }
    data.views = cotrain::random_bisection(lsa.k(), ct_c.seed);
    ct_forest.seed = ct_c.seed;
    ct_forest.threads = ct_c.threads;
    ct_cfg.make_learner = [&] { return std::make_unique<learn::ForestClassifier>(ct_forest); };
    const auto res = cotrain::cotrain(data, ct_cfg);
    std::string text;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      json j;
      j["text"] = rows[i].text;
      const bool labeled = res.labels[i] != cotrain::kUnlabeled;
      j["label"] = labeled ? json(classes[static_cast<std::size_t>(res.labels[i])]) : json(nullptr);
      j["origin"] = rows[i].label ? "gold" : labeled ? "cotrain" : "unlabeled";
      text += j.dump() + "\n";
    }
    r.output(ct_c.out, std::move(text));
    r.output(ct_c.out + ".rounds.jsonl", cotrain::round_log_jsonl(res.log));
    r.commit();
  });

  // train-ner
  Common tn_c;
  std::string tn_data, tn_classes;
  std::size_t tn_k = 64, tn_window = 2;
  RankFlags tn_flags;
  tn_flags.epochs = 5;
  tn_flags.smoothing = 0.0;
  PrepFlags tn_prep;
  auto* tn = command("train-ner", "Train a BILOU token classifier over windowed LSA token features");
  tn->add_option("--data", tn_data, "NER examples (JSON lines with tokens, tags)")->required();
  tn->add_option("--classes", tn_classes, "Class list, one per line")->required();
  tn->add_option("--lsa-k", tn_k, "LSA dimensions per token")->check(CLI::PositiveNumber);
  tn->add_option("--window", tn_window, "Context tokens on each side");
  tn->add_option("--arch", tn_flags.arch, "linear or mlp")->check(CLI::IsMember({"linear", "mlp"}));
  tn->add_option("--hidden", tn_flags.hidden, "Hidden width for mlp")->check(CLI::PositiveNumber);
  tn->add_option("--epochs", tn_flags.epochs, "Training epochs");
  tn->add_option("--lr", tn_flags.lr, "Peak learning rate");
  tn->add_option("--batch-size", tn_flags.batch, "Minibatch size")->check(CLI::PositiveNumber);
  tn->add_option("--warmup", tn_flags.warmup, "Warmup fraction of total steps");
  tn->add_option("--smoothing", tn_flags.smoothing, "Label smoothing");
  add_prep(tn, tn_prep);
  add_common(tn, tn_c);
  commands.emplace_back(tn, [&] {
    Run r(tn, tn_c.out);
    const auto data = ner::read_ner_jsonl(r.input(tn_data));
    const auto classes = ner::read_class_list(r.input(tn_classes));
    auto ctx = ner::fit_token_context(data, tn_k, tn_window, tn_prep.options());
    const auto model = ner::train_ner(data, std::move(ctx), classes, tn_flags.train_config(tn_c.seed));
    bundle::Bundle b{std::string(bundle::kNer), model.head(), std::nullopt, bundle::encode(model)};
    r.output(tn_c.out, bundle::serialize(b));
    r.commit();
  });

  // eval-ner
  Common en_c;
  std::string en_model, en_data;
  auto* en = command("eval-ner", "Entity-level precision, recall and F1 of an NER model");
  en->add_option("--model", en_model, "NER model file")->required();
  en->add_option("--data", en_data, "NER examples (JSON lines)")->required();
  add_common(en, en_c, false);
  commands.emplace_back(en, [&] {
    Run r(en, en_c.out.empty() ? fs::path(en_model + ".eval.json") : fs::path(en_c.out));
    const auto b = bundle::load(r.input(en_model));
    if (b.kind != bundle::kNer) throw ConfigError("not an NER model: " + en_model);
    const auto head = b.dense ? *b.dense : b.quantized->dequantized();
    const auto model = bundle::decode_ner(b.context, head);
    const auto prf = ner::evaluate_ner(model, b.head(), ner::read_ner_jsonl(r.input(en_data)));
    json j{{"precision", prf.precision}, {"recall", prf.recall}, {"f1", prf.f1}};
    out << j.dump() << "\n";
    if (!en_c.out.empty()) {
      r.output(en_c.out, j.dump(2) + "\n");
      r.commit();
    }
  });

  // quantize
  Common qz_c;
  std::string qz_model;
  auto* qz = command("quantize", "Convert a model's dense head to per-tensor affine int8");
  qz->add_option("--model", qz_model, "Model file with a float64 head")->required();
  add_common(qz, qz_c);
  commands.emplace_back(qz, [&] {
    Run r(qz, qz_c.out);
    auto b = bundle::load(r.input(qz_model));
    if (!b.dense) throw ConfigError("model has no float64 dense head to quantize");
    const auto size = quant::size_report(*b.dense);
    b.quantized = quant::QuantizedModel(*b.dense);
    b.dense.reset();
    json j{{"full_bytes", size.full_bytes}, {"quantized_bytes", size.quantized_bytes}, {"ratio", size.ratio}};
    out << j.dump() << "\n";
    r.output(qz_c.out, bundle::serialize(b));
    r.output(qz_c.out + ".size.json", j.dump(2) + "\n");
    r.commit();
  });

  // bench
  Common bn_c;
  std::string bn_model, bn_data;
  std::size_t bn_reps = 20;
  auto* bn = command("bench", "CPU latency of the full-precision and int8 heads");
  bn->add_option("--model", bn_model, "Model file")->required();
  bn->add_option("--data", bn_data, "Data file matching the model kind")->required();
  bn->add_option("--reps", bn_reps, "Passes over the samples")->check(CLI::PositiveNumber);
  add_common(bn, bn_c, false);
  commands.emplace_back(bn, [&] {
    Run r(bn, bn_c.out.empty() ? fs::path(bn_model + ".bench.json") : fs::path(bn_c.out));
    const auto b = bundle::load(r.input(bn_model));
    if (!b.dense && !b.quantized) throw ConfigError("model has no dense head to benchmark");
    const auto xs = bench_samples(b, r.input(bn_data));
    json j;
    j["samples"] = xs.size();
    j["reps"] = bn_reps;
    j["gpu"] = "not applicable";
    if (b.dense) {
      const quant::QuantizedModel q(*b.dense);
      j["cpu_full"] = stats_json(quant::bench_inference(*b.dense, xs, bn_reps));
      j["cpu_quantized"] = stats_json(quant::bench_inference(q, xs, bn_reps));
      std::size_t agree = 0;
      for (const auto& x : xs) {
        agree += learn::argmax(b.dense->forward(x)) == learn::argmax(q.forward(x)) ? 1 : 0;
      }
      j["argmax_agreement"] = static_cast<double>(agree) / static_cast<double>(xs.size());
      const auto size = quant::size_report(*b.dense);
      j["size"] = {{"full_bytes", size.full_bytes}, {"quantized_bytes", size.quantized_bytes}, {"ratio", size.ratio}};
    } else {
      j["cpu_full"] = nullptr;
      j["cpu_quantized"] = stats_json(quant::bench_inference(*b.quantized, xs, bn_reps));
    }
    out << j.dump() << "\n";
    if (!bn_c.out.empty()) {
      r.output(bn_c.out, j.dump(2) + "\n");
      r.commit();
    }
  });

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }
  try {
    for (auto& [sub, fn] : commands) {
      if (sub->parsed()) fn();
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace faqkit::cli

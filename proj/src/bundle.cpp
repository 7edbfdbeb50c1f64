#include "faqkit/bundle.hpp"

#include <sstream>

#include "faqkit/io.hpp"

namespace faqkit::bundle {

namespace {
constexpr std::string_view kMagic = "FQKBND01";
enum HeadTag : std::uint8_t { kNoHead = 0, kDenseHead = 1, kQuantizedHead = 2 };
}  // namespace

const learn::Head& Bundle::head() const {
  if (dense) return *dense;
  if (quantized) return *quantized;
  throw ConfigError("model file '" + kind + "' has no dense head");
}

std::string serialize(const Bundle& b) {
  std::ostringstream out;
  out.write(kMagic.data(), kMagic.size());
  io::write_string(out, b.kind);
  if (b.dense) {
    io::write_pod<std::uint8_t>(out, kDenseHead);
    b.dense->write(out);
  } else if (b.quantized) {
    io::write_pod<std::uint8_t>(out, kQuantizedHead);
    b.quantized->write(out);
  } else {
    io::write_pod<std::uint8_t>(out, kNoHead);
  }
  io::write_string(out, b.context);
  return out.str();
}

Bundle deserialize(const std::string& bytes) {
  std::istringstream in(bytes);
  io::expect_magic(in, kMagic);
  Bundle b;
  b.kind = io::read_string(in);
  if (b.kind != kRanker && b.kind != kNer && b.kind != kSentiment) throw DataError("unknown model kind " + b.kind);
  switch (io::read_pod<std::uint8_t>(in)) {
    case kNoHead:
      break;
    case kDenseHead:
      b.dense = learn::DenseModel::read(in);
      break;
    case kQuantizedHead:
      b.quantized = quant::QuantizedModel::read(in);
      break;
    default:
      throw DataError("unknown head encoding in model file");
  }
  b.context = io::read_string(in);
  return b;
}

void save(const std::filesystem::path& path, const Bundle& b) { io::write_file_atomic(path, serialize(b)); }

Bundle load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("model file not found: " + path.string());
  return deserialize(io::read_file(path));
}

std::string encode(const RankerContext& ctx) {
  std::ostringstream out;
  io::write_string(out, ctx.mode);
  ctx.featurizer.write(out);
  io::write_pod<std::uint64_t>(out, ctx.answers.size());
  for (const auto& [id, text] : ctx.answers) {
    io::write_pod<std::int64_t>(out, id);
    io::write_string(out, text);
  }
  return out.str();
}

RankerContext decode_ranker(const std::string& blob) {
  std::istringstream in(blob);
  RankerContext ctx;
  ctx.mode = io::read_string(in);
  if (ctx.mode != "pointwise" && ctx.mode != "pairwise") throw DataError("unknown ranker mode " + ctx.mode);
  ctx.featurizer = features::PairFeaturizer::read(in);
  const auto n = io::read_pod<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto id = io::read_pod<std::int64_t>(in);
    ctx.answers[id] = io::read_string(in);
  }
  return ctx;
}

std::string encode(const SentimentContext& ctx) {
  std::ostringstream out;
  ctx.lsa.write(out);
  io::write_pod<std::uint64_t>(out, ctx.classes.size());
  for (const auto& c : ctx.classes) io::write_string(out, c);
  io::write_pod<std::uint8_t>(out, ctx.forest ? 1 : 0);
  if (ctx.forest) ctx.forest->write(out);
  return out.str();
}

SentimentContext decode_sentiment(const std::string& blob) {
  std::istringstream in(blob);
  SentimentContext ctx;
  ctx.lsa = features::LsaModel::read(in);
  ctx.classes.resize(io::read_pod<std::uint64_t>(in));
  for (auto& c : ctx.classes) c = io::read_string(in);
  if (io::read_pod<std::uint8_t>(in) != 0) ctx.forest = learn::TreeEnsemble::read(in);
  return ctx;
}

std::string encode(const ner::NerModel& model) {
  std::ostringstream out;
  model.write_context(out);
  return out.str();
}

ner::NerModel decode_ner(const std::string& blob, const learn::DenseModel& head) {
  std::istringstream in(blob);
  return ner::NerModel::read_context(in, head);
}

}  // namespace faqkit::bundle

#include <sstream>

#include "doctest.h"
#include "faqkit/cli.hpp"
#include "faqkit/io.hpp"
#include "json.hpp"
#include "test_util.hpp"

using namespace faqkit;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "faqkit");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("help, version and parse errors") {
    CHECK(invoke({"--help"}).code == 0);
    CHECK(invoke({"bm25-search", "--help"}).code == 0);
    CHECK(invoke({"--version"}).out.find("faqkit") != std::string::npos);
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"no-such-command"}).code == 2);
    CHECK(invoke({"gen-synthetic", "--kind", "nope", "--out", "x"}).code == 2);
    CHECK(invoke({"gen-synthetic", "--bogus", "--out", "x"}).code == 2);
  }

  TEST_CASE("missing input is a configuration error") {
    testing::TempDir dir("cli_missing");
    const auto r = invoke({"build-index", "--faq", (dir / "absent.jsonl").string(), "--out", (dir / "idx").string()});
    CHECK(r.code == 2);
    CHECK(!fs::exists(dir / "idx"));
  }

  TEST_CASE("malformed data exits 1 without partial outputs") {
    testing::TempDir dir("cli_bad");
    io::write_file_atomic(dir / "bad.jsonl", "{\"q_id\": 1, \"question\": \"oi\"\nnot json\n");
    const auto r = invoke({"build-faq-dataset", "--faq", (dir / "bad.jsonl").string(), "--out", (dir / "ds").string()});
    CHECK(r.code == 1);
    CHECK(!fs::exists(dir / "ds"));
    CHECK(!fs::exists(dir / "ds.manifest.json"));
  }

  TEST_CASE("pipeline writes manifests") {
    testing::TempDir dir("cli_pipe");
    const auto faq = (dir / "faq.jsonl").string();
    REQUIRE(invoke({"gen-synthetic", "--kind", "faq", "--n", "40", "--out", faq}).code == 0);
    REQUIRE(fs::exists(faq + ".manifest.json"));
    const auto manifest = nlohmann::json::parse(io::read_file(faq + ".manifest.json"));
    CHECK(manifest["command"] == "gen-synthetic");
    CHECK(manifest["config"]["seed"] == "42");
    CHECK(manifest["outputs"].size() == 1);

    const auto ds = (dir / "ds").string();
    REQUIRE(invoke({"build-faq-dataset", "--faq", faq, "--cands", "10", "--out", ds}).code == 0);
    CHECK(fs::exists(fs::path(ds) / "train.jsonl"));
    CHECK(fs::exists(fs::path(ds) / "stats.json"));
    const auto m2 = nlohmann::json::parse(io::read_file(ds + ".manifest.json"));
    CHECK(m2["inputs"].size() == 1);
    CHECK(m2["outputs"].size() == 3);

    const auto idx = (dir / "idx").string();
    REQUIRE(invoke({"build-index", "--faq", faq, "--out", idx}).code == 0);
    const auto s = invoke({"bm25-search", "--index", idx, "--query", "cartao", "--k", "3", "--out",
                           (dir / "hits.jsonl").string()});
    CHECK(s.code == 0);
    CHECK(fs::exists(dir / "hits.jsonl"));

    const auto model = (dir / "ranker.bin").string();
    REQUIRE(invoke({"train-ranker", "--train", (fs::path(ds) / "train.jsonl").string(), "--pool", faq, "--epochs",
                    "1", "--lsa-k", "8", "--out", model})
                .code == 0);
    const auto ev = invoke({"eval-retrieval", "--model", model, "--data", (fs::path(ds) / "test.jsonl").string(),
                            "--with-bm25"});
    REQUIRE(ev.code == 0);
    CHECK(ev.out.find("\"mrr@10\"") != std::string::npos);

    const auto sweep = (dir / "sweep.csv").string();
    REQUIRE(invoke({"eval-sweep", "--faq", faq, "--cands", "5,10", "--epochs", "1", "--lsa-k", "8", "--out", sweep})
                .code == 0);
    const auto csv = io::read_file(sweep);
    CHECK(csv.rfind("m,positive_fraction,mrr,ap1\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    CHECK(invoke({"eval-retrieval", "--model", faq, "--data", faq}).code != 0);
  }
}

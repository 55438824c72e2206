#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "simann/evalens.hpp"
#include "simann/util.hpp"
#include "test_util.hpp"

using namespace simann;
using testutil::TempDir;

#ifndef SIMANN_CLI_PATH
#error "SIMANN_CLI_PATH must point at the simann executable"
#endif
#ifndef SIMANN_DATA_DIR
#error "SIMANN_DATA_DIR must point at the repository data directory"
#endif
#ifndef SIMANN_RECIPE_DIR
#error "SIMANN_RECIPE_DIR must point at the repository recipes directory"
#endif

namespace {

const std::string kDemoDir = std::string(SIMANN_DATA_DIR) + "/demo";
const std::string kStopwords =
    std::string(SIMANN_DATA_DIR) + "/stopwords_es.txt";

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string shell_quote(const std::string& s) {
  std::string quoted = "'";
  for (char c : s) {
    if (c == '\'')
      quoted += "'\\''";
    else
      quoted += c;
  }
  quoted += "'";
  return quoted;
}

CliResult run_cli(const std::vector<std::string>& args, const TempDir& dir,
                  const std::string& env_prefix = "") {
  const std::string out_path = dir.file("cli-stdout.txt");
  const std::string err_path = dir.file("cli-stderr.txt");
  std::string cmd = env_prefix + shell_quote(SIMANN_CLI_PATH);
  for (const auto& arg : args) cmd += " " + shell_quote(arg);
  cmd += " > " + shell_quote(out_path) + " 2> " + shell_quote(err_path);

  int status = std::system(cmd.c_str());
  CliResult result;
  if (status != -1 && WIFEXITED(status))
    result.exit_code = WEXITSTATUS(status);
  result.out = read_file(out_path);
  result.err = read_file(err_path);
  return result;
}

}  // namespace

TEST_CASE("build-index then annotate then evaluate") {
  TempDir dir;
  const std::string idx = dir.file("idx.bin");

  CliResult build = run_cli({"build-index", "--corpus",
                             kDemoDir + "/train.jsonl", "--rep", "stems",
                             "--min-df", "1", "--max-df-ratio", "0.9",
                             "--stopwords", kStopwords, "--out", idx,
                             "--df-out", dir.file("df.tsv")},
                            dir);
  CAPTURE(build.err);
  REQUIRE(build.exit_code == 0);
  CHECK(build.out.find("indexed 36 docs") != std::string::npos);
  CHECK(std::filesystem::exists(idx));
  CHECK(std::filesystem::exists(dir.file("df.tsv")));

  const std::string pred = dir.file("pred.json");
  CliResult annotate = run_cli(
      {"annotate", "--index", idx, "--input", kDemoDir + "/test.jsonl",
       "--k", "5", "--multiplier", "1.1", "--stopwords", kStopwords, "--out",
       pred, "--explain", dir.file("explain.tsv")},
      dir);
  CAPTURE(annotate.err);
  REQUIRE(annotate.exit_code == 0);
  RunOutput run = load_run(pred);
  CHECK(run.docs.size() == 6);
  for (const auto& doc : run.docs) CHECK(!doc.labels.empty());

  std::string explain = read_file(dir.file("explain.tsv"));
  CHECK(explain.rfind("doc_id\ttype\tkey\tscore\tdistance\tweight\tvote\n",
                      0) == 0);
  CHECK(explain.find("neighbor") != std::string::npos);
  CHECK(explain.find("vote") != std::string::npos);

  CliResult eval = run_cli({"evaluate", "--gold", kDemoDir + "/test.jsonl",
                            "--pred", pred, "--out", dir.file("report.tsv")},
                           dir);
  REQUIRE(eval.exit_code == 0);
  CHECK(eval.out.find("MiF\tEBP") != std::string::npos);
  std::string report = read_file(dir.file("report.tsv"));
  CHECK(report.rfind("MiF\t", 0) == 0);
}

TEST_CASE("npmi and rewrite subcommands") {
  TempDir dir;
  const std::string table = dir.file("pairs.tsv");

  CliResult npmi = run_cli(
      {"npmi", "--corpus", kDemoDir + "/train.jsonl", "--out", table}, dir);
  CAPTURE(npmi.err);
  REQUIRE(npmi.exit_code == 0);
  std::string content = read_file(table);
  CHECK(content.rfind("code_a\tcode_b", 0) == 0);
  CHECK(content.find("14067\t") != std::string::npos);

  CliResult rewrite = run_cli(
      {"rewrite", "--corpus", kDemoDir + "/train.jsonl", "--table", table,
       "--threshold", "0.25", "--out", dir.file("meta.jsonl")},
      dir);
  CAPTURE(rewrite.err);
  REQUIRE(rewrite.exit_code == 0);
  // Every demo topic pair always co-occurs, so every record now carries one
  // fused code.
  Corpus meta = load_corpus(dir.file("meta.jsonl"), false);
  CHECK(meta.n_docs() == 36);
  for (const auto& rec : meta.records) {
    REQUIRE(rec.labels.size() == 1);
    CHECK(rec.labels.begin()->find('.') != std::string::npos);
  }
}

TEST_CASE("profiles build and annotate subcommands") {
  TempDir dir;
  const std::string pidx = dir.file("pidx.bin");

  CliResult build = run_cli({"profiles", "build", "--corpus",
                             kDemoDir + "/train.jsonl", "--rep", "stems",
                             "--min-df", "1", "--max-df-ratio", "0.9",
                             "--stopwords", kStopwords, "--out", pidx},
                            dir);
  CAPTURE(build.err);
  REQUIRE(build.exit_code == 0);

  CliResult annotate = run_cli(
      {"profiles", "annotate", "--index", pidx, "--input",
       kDemoDir + "/test.jsonl", "--k", "3", "--fixed-n", "2", "--stopwords",
       kStopwords, "--out", dir.file("pred.json")},
      dir);
  CAPTURE(annotate.err);
  REQUIRE(annotate.exit_code == 0);
  RunOutput run = load_run(dir.file("pred.json"));
  CHECK(run.docs.size() == 6);
  for (const auto& doc : run.docs) CHECK(doc.labels.size() <= 2);
}

TEST_CASE("concept-run and ensemble subcommands") {
  TempDir dir;
  const std::string cpred = dir.file("concepts.json");

  CliResult concepts = run_cli({"concept-run", "--corpus",
                                kDemoDir + "/test.jsonl", "--dict",
                                kDemoDir + "/dict.tsv", "--out", cpred},
                               dir);
  CAPTURE(concepts.err);
  REQUIRE(concepts.exit_code == 0);
  RunOutput run = load_run(cpred);
  REQUIRE(run.docs.size() == 6);

  SUBCASE("intersect with itself is identity") {
    CliResult ensemble = run_cli({"ensemble", "intersect", "--runs", cpred,
                                  cpred, "--out", dir.file("mix.json")},
                                 dir);
    REQUIRE(ensemble.exit_code == 0);
    RunOutput mixed = load_run(dir.file("mix.json"));
    REQUIRE(mixed.docs.size() == run.docs.size());
    for (std::size_t i = 0; i < run.docs.size(); ++i)
      CHECK(mixed.docs[i].labels == run.docs[i].labels);
  }
  SUBCASE("union-add keeps the base ordering") {
    CliResult ensemble = run_cli({"ensemble", "union-add", "--runs", cpred,
                                  cpred, "--out", dir.file("mix.json")},
                                 dir);
    REQUIRE(ensemble.exit_code == 0);
    RunOutput mixed = load_run(dir.file("mix.json"));
    for (std::size_t i = 0; i < run.docs.size(); ++i)
      CHECK(mixed.docs[i].labels == run.docs[i].labels);
  }
}

TEST_CASE("run subcommand executes recipes reproducibly") {
  TempDir dir;
  std::vector<std::string> base_args = {
      "run",         "--recipe",  kDemoDir + "/demo-mix.json",
      "--train",     kDemoDir + "/train.jsonl",
      "--test",      kDemoDir + "/test.jsonl",
      "--stopwords", kStopwords,
      "--dict",      kDemoDir + "/dict.tsv"};

  auto args_with = [&](const std::string& workdir, const std::string& out,
                       std::vector<std::string> extra = {}) {
    std::vector<std::string> args = base_args;
    args.insert(args.end(), {"--workdir", dir.file(workdir), "--out",
                             dir.file(out)});
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
  };

  CliResult first = run_cli(args_with("w1", "p1.json",
                                      {"--report", dir.file("r1.tsv")}),
                            dir);
  CAPTURE(first.err);
  REQUIRE(first.exit_code == 0);
  CHECK(std::filesystem::exists(dir.file("p1.json")));
  CHECK(read_file(dir.file("r1.tsv")).rfind("MiF\t", 0) == 0);

  SUBCASE("reruns are byte for byte identical") {
    CliResult second = run_cli(args_with("w2", "p2.json"), dir);
    REQUIRE(second.exit_code == 0);
    CHECK(read_file(dir.file("p1.json")) == read_file(dir.file("p2.json")));
  }
  SUBCASE("thread count changes nothing") {
    CliResult threaded =
        run_cli(args_with("w3", "p3.json", {"--threads", "4"}), dir);
    REQUIRE(threaded.exit_code == 0);
    CHECK(read_file(dir.file("p1.json")) == read_file(dir.file("p3.json")));
  }
  SUBCASE("SIMANN_THREADS caps workers without changing output") {
    CliResult capped =
        run_cli(args_with("w4", "p4.json"), dir, "SIMANN_THREADS=2 ");
    REQUIRE(capped.exit_code == 0);
    CHECK(read_file(dir.file("p1.json")) == read_file(dir.file("p4.json")));
  }
  SUBCASE("--seed is accepted and ignored") {
    CliResult seeded =
        run_cli(args_with("w5", "p5.json", {"--seed", "987"}), dir);
    REQUIRE(seeded.exit_code == 0);
    CHECK(read_file(dir.file("p1.json")) == read_file(dir.file("p5.json")));
  }
}

TEST_CASE("shipped presets load through the run subcommand") {
  TempDir dir;
  CliResult result = run_cli(
      {"run", "--recipe", std::string(SIMANN_RECIPE_DIR) + "/concept-match.json",
       "--train", kDemoDir + "/train.jsonl", "--test",
       kDemoDir + "/test.jsonl", "--dict", kDemoDir + "/dict.tsv",
       "--workdir", dir.file("work"), "--out", dir.file("pred.json")},
      dir);
  CAPTURE(result.err);
  REQUIRE(result.exit_code == 0);
  CHECK(load_run(dir.file("pred.json")).docs.size() == 6);
}

TEST_CASE("input errors exit with code 2") {
  TempDir dir;

  SUBCASE("malformed corpus") {
    write_file(dir.file("bad.jsonl"), "this is not json\n");
    CliResult result = run_cli({"build-index", "--corpus", dir.file("bad.jsonl"),
                                "--min-df", "1", "--out", dir.file("i.bin")},
                               dir);
    CHECK(result.exit_code == 2);
    CHECK(result.err.find("error:") != std::string::npos);
  }
  SUBCASE("missing file") {
    CliResult result = run_cli({"build-index", "--corpus",
                                dir.file("absent.jsonl"), "--out",
                                dir.file("i.bin")},
                               dir);
    CHECK(result.exit_code == 2);
  }
  SUBCASE("concepts representation without a dictionary") {
    CliResult result = run_cli({"build-index", "--corpus",
                                kDemoDir + "/train.jsonl", "--rep", "concepts",
                                "--min-df", "1", "--out", dir.file("i.bin")},
                               dir);
    CHECK(result.exit_code == 2);
  }
  SUBCASE("annotate with k=0") {
    CliResult result = run_cli({"annotate", "--index", dir.file("i.bin"),
                                "--input", kDemoDir + "/test.jsonl", "--k",
                                "0", "--out", dir.file("p.json")},
                               dir);
    CHECK(result.exit_code == 2);
  }
  SUBCASE("missing required CLI options") {
    CliResult result = run_cli({"build-index"}, dir);
    CHECK(result.exit_code == 2);
  }
  SUBCASE("no subcommand") {
    CliResult result = run_cli({}, dir);
    CHECK(result.exit_code == 2);
  }
}

TEST_CASE("recipe errors exit with code 3") {
  TempDir dir;
  write_file(dir.file("bad.json"), "{\"name\":\"x\",\"bogus\":true}");
  CliResult result = run_cli(
      {"run", "--recipe", dir.file("bad.json"), "--train",
       kDemoDir + "/train.jsonl", "--test", kDemoDir + "/test.jsonl",
       "--workdir", dir.file("work"), "--out", dir.file("p.json")},
      dir);
  CHECK(result.exit_code == 3);
  CHECK(result.err.find("recipe error:") != std::string::npos);
}

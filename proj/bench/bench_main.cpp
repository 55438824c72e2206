#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "simann/corpus.hpp"
#include "simann/index.hpp"
#include "simann/knn.hpp"
#include "simann/metalabels.hpp"
#include "simann/textproc.hpp"
#include "simann/util.hpp"

using namespace simann;

namespace {

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

std::vector<std::string> make_vocab(std::mt19937& rng, std::size_t size) {
  std::uniform_int_distribution<int> len(3, 9);
  std::uniform_int_distribution<int> ch(0, 25);
  std::vector<std::string> vocab;
  vocab.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    std::string w;
    int n = len(rng);
    for (int j = 0; j < n; ++j) w.push_back(static_cast<char>('a' + ch(rng)));
    vocab.push_back(std::move(w));
  }
  return vocab;
}

Corpus make_corpus(std::size_t n_docs, std::uint32_t seed) {
  std::mt19937 rng(seed);
  auto vocab = make_vocab(rng, 3000);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::uniform_int_distribution<int> n_labels(3, 15);
  std::uniform_int_distribution<int> label(1, 500);

  Corpus corpus;
  corpus.records.reserve(n_docs);
  for (std::size_t d = 0; d < n_docs; ++d) {
    Record r;
    r.id = "doc-" + std::to_string(1000000 + d);
    for (int i = 0; i < 8; ++i) r.title += vocab[pick(rng)] + " ";
    for (int i = 0; i < 100; ++i) r.abstract_text += vocab[pick(rng)] + " ";
    int nl = n_labels(rng);
    for (int i = 0; i < nl; ++i) r.labels.insert(std::to_string(label(rng)));
    corpus.records.push_back(std::move(r));
  }
  return corpus;
}

bool same_streams(const std::vector<TermStream>& a,
                  const std::vector<TermStream>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].doc_id != b[i].doc_id || a[i].terms != b[i].terms) return false;
  return true;
}

bool same_predictions(const std::vector<Prediction>& a,
                      const std::vector<Prediction>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].doc_id != b[i].doc_id || a[i].chosen != b[i].chosen ||
        a[i].ranked != b[i].ranked)
      return false;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n_docs = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 10000;
  const int threads = effective_threads(0);
  std::printf("corpus: %zu docs, worker threads: %d\n", n_docs, threads);

  Corpus corpus = make_corpus(n_docs, 42);
  Corpus queries = make_corpus(200, 1337);
  ExtractorConfig config;
  config.representation = Representation::stems;

  std::printf("%-24s %12s %12s %9s\n", "stage", "serial ms", "parallel ms",
              "speedup");
  bool ok = true;
  auto row = [&](const char* stage, double serial, double parallel,
                 bool equal) {
    std::printf("%-24s %12.1f %12.1f %8.2fx%s\n", stage, serial, parallel,
                serial / parallel, equal ? "" : "  MISMATCH");
    ok = ok && equal;
  };

  auto t0 = std::chrono::steady_clock::now();
  auto streams_serial = extract_batch_serial(corpus, config);
  double extract_serial = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  auto streams_parallel = extract_batch(corpus, config, threads);
  row("extract_batch", extract_serial, ms_since(t0),
      same_streams(streams_serial, streams_parallel));

  t0 = std::chrono::steady_clock::now();
  DfStats df_serial = compute_df(streams_serial, 5, 0.5, 1);
  double df_serial_ms = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  DfStats df_parallel = compute_df(streams_serial, 5, 0.5, threads);
  row("compute_df", df_serial_ms, ms_since(t0),
      df_serial.df == df_parallel.df);

  std::vector<LabelSet> labels;
  labels.reserve(corpus.records.size());
  for (const Record& r : corpus.records) labels.push_back(r.labels);

  t0 = std::chrono::steady_clock::now();
  InvertedIndex index_serial = build_index(streams_serial, labels, df_serial, 1);
  double build_serial_ms = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  InvertedIndex index = build_index(streams_serial, labels, df_serial, threads);
  row("build_index", build_serial_ms, ms_since(t0),
      index_serial.doc_norm == index.doc_norm &&
          index_serial.postings.size() == index.postings.size());

  AnnotateParams params;
  params.k = 30;
  params.multiplier = 1.1;
  t0 = std::chrono::steady_clock::now();
  auto pred_serial = annotate_batch_serial(queries, index, config, params);
  double annotate_serial_ms = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  auto pred_parallel = annotate_batch(queries, index, config, params, threads);
  row("annotate_batch", annotate_serial_ms, ms_since(t0),
      same_predictions(pred_serial, pred_parallel));

  t0 = std::chrono::steady_clock::now();
  auto stats_serial = compute_pair_stats_serial(corpus);
  double npmi_serial_ms = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  auto stats_parallel = compute_pair_stats(corpus, threads);
  bool stats_equal = stats_serial.size() == stats_parallel.size();
  for (std::size_t i = 0; stats_equal && i < stats_serial.size(); ++i)
    stats_equal = stats_serial[i].a == stats_parallel[i].a &&
                  stats_serial[i].b == stats_parallel[i].b &&
                  stats_serial[i].count_joint == stats_parallel[i].count_joint;
  row("compute_pair_stats", npmi_serial_ms, ms_since(t0), stats_equal);

  if (!ok) {
    std::fprintf(stderr, "serial/parallel outputs diverged\n");
    return 1;
  }
  return 0;
}

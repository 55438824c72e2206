#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "simann/corpus.hpp"
#include "simann/knn.hpp"
#include "simann/textproc.hpp"
#include "simann/types.hpp"

namespace simann {

// Per-document ranked label lists, duplicate-free, in submission order.
struct RunOutput {
  struct Entry {
    std::string doc_id;
    std::vector<LabelCode> labels;
  };
  std::vector<Entry> docs;

  const Entry* find(const std::string& doc_id) const;
};

struct MetricsReport {
  double MiP = 0, MiR = 0, MiF = 0;
  double EBP = 0, EBR = 0, EBF = 0;
  double MaP = 0, MaR = 0, MaF = 0;
  double Acc = 0;
  std::uint64_t n_docs = 0;
};

using GoldStandard = std::map<std::string, LabelSet>;

GoldStandard gold_from_corpus(const Corpus& corpus);

// Micro metrics pool (doc,label) decisions globally; example-based metrics
// average per-document P/R/F/Jaccard; macro metrics average per-label scores
// over the labels present in gold (zero-denominator labels score 0). Docs in
// gold but missing from pred count as empty predictions; predicted ids not in
// gold are an error.
MetricsReport evaluate(const GoldStandard& gold, const RunOutput& pred);

// Per doc: labels present in both runs, in a's order. Key sets must match.
RunOutput intersect_runs(const RunOutput& a, const RunOutput& b);

// Base order preserved; each addition's labels appended in their own order
// when not already accumulated.
RunOutput union_add(const RunOutput& base, std::span<const RunOutput> additions);

// Labels whose surface forms match at least once, ordered by descending match
// count then code ascending.
RunOutput concept_match_run(const Corpus& corpus, const ConceptMatcher& matcher,
                            bool include_title = true);

RunOutput run_from_predictions(std::span<const Prediction> predictions);

// Submission shape: {"documents":[{"id":"...","labels":["..."]}]}.
void save_run(const std::string& path, const RunOutput& run);
RunOutput load_run(const std::string& path);

// Header plus one row of the ten measures.
void write_report_tsv(const std::string& path, const MetricsReport& report);

}  // namespace simann

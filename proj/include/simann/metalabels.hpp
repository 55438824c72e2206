#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "simann/corpus.hpp"
#include "simann/types.hpp"

namespace simann {

// Co-occurrence statistics for one unordered label pair (a before b in code
// order). Only pairs with count_joint >= 1 are materialized; absent pairs
// have npmi -1 by convention.
struct PairStats {
  LabelCode a;
  LabelCode b;
  std::uint64_t count_joint = 0;
  std::uint64_t count_a = 0;
  std::uint64_t count_b = 0;
  std::uint64_t n_docs = 0;
  double pmi = 0.0;
  double npmi = 0.0;
};

// pmi = ln(joint*n / (a*b)), npmi = pmi / -ln(joint/n). Complete
// co-occurrence (joint == a == b) is exactly 1.
double npmi_value(std::uint64_t count_joint, std::uint64_t count_a,
                  std::uint64_t count_b, std::uint64_t n_docs);

std::vector<PairStats> compute_pair_stats_serial(const Corpus& corpus);
std::vector<PairStats> compute_pair_stats(const Corpus& corpus, int threads);

std::string make_meta_code(const LabelCode& a, const LabelCode& b);

struct MetaLabelTable {
  struct Entry {
    LabelCode a;
    LabelCode b;
    std::string meta_code;  // "<a>.<b>"
    double npmi = 0.0;
  };
  double threshold = 1.0;
  std::map<std::pair<LabelCode, LabelCode>, Entry> entries;
  std::unordered_map<std::string, std::pair<LabelCode, LabelCode>> reverse;

  const Entry* find(const LabelCode& a, const LabelCode& b) const;
};

// Keeps every pair with npmi >= threshold.
MetaLabelTable build_table(std::span<const PairStats> stats, double threshold);

// Greedy pairing by npmi descending (ties by meta_code); each base label is
// consumed at most once, leftovers pass through unchanged.
LabelSet rewrite_labels(const LabelSet& labels, const MetaLabelTable& table);

// Meta codes are split back into their components; base labels pass through.
// Unknown dotted codes are an error.
LabelSet expand_labels(const LabelSet& codes, const MetaLabelTable& table);

// Order-preserving expansion of a ranked code list, deduplicated keep-first.
std::vector<LabelCode> expand_ranked(const std::vector<LabelCode>& codes,
                                     const MetaLabelTable& table);

Corpus rewrite_corpus(const Corpus& corpus, const MetaLabelTable& table);

// TSV `code_a code_b count_joint count_a count_b pmi npmi`.
void write_pair_stats_tsv(const std::string& path,
                          std::span<const PairStats> stats);
std::vector<PairStats> read_pair_stats_tsv(const std::string& path);

}  // namespace simann

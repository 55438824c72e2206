#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "simann/corpus.hpp"
#include "simann/types.hpp"

namespace simann {

struct ScoredDoc {
  std::uint32_t doc_ordinal = 0;
  std::string doc_id;
  double score = 0.0;  // > 0; zero-score docs are never returned
};

// Immutable postings structure with TF-IDF statistics. Search scores a
// disjunctive bag-of-terms query as
//   score(q,d) = sum over shared terms t of
//                qcount(t) * sqrt(dcount(t)) * idf(t)^2 * doc_norm(d)
// with idf(t) = 1 + ln(n_docs / (df(t) + 1)) and
// doc_norm(d) = 1 / sqrt(total kept-term count of d).
struct InvertedIndex {
  struct Posting {
    std::uint32_t doc;
    std::uint32_t count;
  };

  Representation representation = Representation::stems;
  std::uint32_t min_df = 0;
  double max_df_ratio = 1.0;
  std::uint64_t n_docs = 0;

  std::vector<std::string> doc_ids;
  std::vector<LabelSet> doc_labels;
  std::vector<std::uint32_t> doc_label_count;
  std::vector<double> doc_norm;

  std::vector<std::string> terms;  // kept vocabulary, sorted
  std::vector<double> idf;
  std::vector<std::vector<Posting>> postings;  // sorted by doc ordinal
  std::unordered_map<std::string, std::uint32_t> term_id;

  std::int64_t ordinal_of(const std::string& doc_id) const;
};

// Streams and labels are aligned per document; df must come from the same
// streams. Throws input_error when filtering empties the vocabulary.
InvertedIndex build_index(std::span<const TermStream> streams,
                          std::span<const LabelSet> labels, const DfStats& df,
                          int threads = 1);

// Top-k by score descending, ties by doc_id ascending. Documents sharing no
// kept term with the query are excluded.
std::vector<ScoredDoc> search(const InvertedIndex& index,
                              const TermStream& query, std::size_t top_k);

// Single-file binary format, versioned; round-trips bit-exact.
void save_index(const std::string& path, const InvertedIndex& index);
InvertedIndex load_index(const std::string& path);

}  // namespace simann

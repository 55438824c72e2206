#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "simann/types.hpp"

namespace simann {

struct Record {
  std::string id;
  std::string journal;
  std::string db;
  std::string title;
  std::string abstract_text;
  LabelSet labels;  // empty for unannotated test records
};

struct Corpus {
  std::vector<Record> records;
  std::size_t n_docs() const { return records.size(); }
};

struct LoadStats {
  std::size_t dropped_unlabeled = 0;
};

// Reads UTF-8 JSON-lines with keys id, title, abstractText (required) and
// journal, db, decsCodes (optional). File order is preserved. With
// require_labels, records without any label are dropped and counted.
Corpus load_corpus(const std::string& path, bool require_labels,
                   LoadStats* stats = nullptr);

void save_corpus(const std::string& path, const Corpus& corpus);

struct DfStats {
  std::unordered_map<std::string, std::uint32_t> df;
  std::uint64_t n_docs = 0;
  std::uint32_t min_df = 0;
  double max_df_ratio = 1.0;

  std::uint32_t df_of(const std::string& term) const {
    auto it = df.find(term);
    return it == df.end() ? 0 : it->second;
  }
  // A term survives filtering iff df > min_df and df <= max_df_ratio * n_docs.
  bool kept(const std::string& term) const { return kept_df(df_of(term)); }
  bool kept_df(std::uint32_t d) const {
    return d > min_df &&
           static_cast<double>(d) <= max_df_ratio * static_cast<double>(n_docs);
  }
};

// Document frequencies over one stream per document; each term counts once
// per document regardless of its within-document count.
DfStats compute_df(std::span<const TermStream> streams, std::uint32_t min_df,
                   double max_df_ratio, int threads = 1);

// TSV rows `term \t df \t kept(0|1)`, sorted by term.
void write_df_tsv(const std::string& path, const DfStats& stats);

}  // namespace simann

#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "simann/corpus.hpp"
#include "simann/types.hpp"

namespace simann {

// Lowercases and folds accented Latin letters onto their base letter
// (á->a, ñ->n, ç->c, ...). Unknown non-alphanumeric codepoints are kept
// verbatim; tokenize() treats them as separators.
std::string fold_text(std::string_view utf8);

// Lowercased, accent-folded alphanumeric tokens, split on anything that is
// not [a-z0-9] after folding. Pure-digit tokens are kept.
std::vector<std::string> tokenize(std::string_view text);

// Snowball Spanish suffix-stripping stemmer, implemented from the published
// algorithm. Input is one lowercase UTF-8 word; accented vowels are handled
// and acute accents are removed from the output.
std::string stem_spanish(std::string_view word);

// One token per line, UTF-8; stored folded.
std::unordered_set<std::string> load_stopwords(const std::string& path);

TermStream extract_stems(const Record& record,
                         const std::unordered_set<std::string>& stopwords,
                         bool include_title = true);

struct ConceptDictionary {
  struct Entry {
    LabelCode code;
    std::vector<std::string> surface_forms;  // folded
  };
  std::vector<Entry> entries;
  bool empty() const { return entries.size() == 0; }
};

// TSV `code \t surface_form`; repeated codes accumulate synonyms.
ConceptDictionary load_dictionary(const std::string& path);

struct ConceptHit {
  LabelCode code;
  std::size_t token_pos;
  std::size_t token_len;
};

// Multi-pattern matcher over token sequences (Aho-Corasick over token ids).
// Matching is leftmost-longest and non-overlapping; when two surface forms
// of equal token length start at the same position the smaller code wins.
class ConceptMatcher {
 public:
  explicit ConceptMatcher(const ConceptDictionary& dict);
  ~ConceptMatcher();
  ConceptMatcher(ConceptMatcher&&) noexcept;
  ConceptMatcher& operator=(ConceptMatcher&&) noexcept;

  std::vector<ConceptHit> match_tokens(std::span<const std::string> tokens) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Emits one term "decs:<code>" per code with its absolute match count.
TermStream match_concepts(const Record& record, const ConceptMatcher& matcher,
                          bool include_title = true);

// TSV `doc_id \t term \t count`, one TermStream per doc_id present. Terms are
// opaque strings trimmed of surrounding whitespace; duplicate rows sum.
std::vector<TermStream> load_external_stream(const std::string& path,
                                             Representation rep);

// Namespaced union ("stem:", "lemma:", "np:", "dep:"; concept terms already
// carry "decs:"). All inputs must share a doc_id.
TermStream merge_streams(std::span<const TermStream> streams);

// Everything needed to turn a Record into the TermStream of one
// representation. External streams are keyed by doc_id.
struct ExtractorConfig {
  Representation representation = Representation::stems;
  bool include_title = true;
  std::unordered_set<std::string> stopwords;
  std::shared_ptr<const ConceptMatcher> matcher;  // required for concepts
  std::unordered_map<std::string, TermStream> lemmas;
  std::unordered_map<std::string, TermStream> nps;
  std::unordered_map<std::string, TermStream> deps;
};

TermStream extract_record(const Record& record, const ExtractorConfig& config);

std::vector<TermStream> extract_batch_serial(const Corpus& corpus,
                                             const ExtractorConfig& config);
std::vector<TermStream> extract_batch(const Corpus& corpus,
                                      const ExtractorConfig& config,
                                      int threads);

}  // namespace simann

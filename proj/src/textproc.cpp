#include "simann/textproc.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "simann/util.hpp"
#include "utf8.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace simann {

namespace {

// Base letter for accented Latin-1 codepoints; 0 when no folding applies.
char32_t fold_letter(char32_t cp) {
  if ((cp >= U'À' && cp <= U'Å') || (cp >= U'à' && cp <= U'å')) return U'a';
  if (cp == U'Ç' || cp == U'ç') return U'c';
  if ((cp >= U'È' && cp <= U'Ë') || (cp >= U'è' && cp <= U'ë')) return U'e';
  if ((cp >= U'Ì' && cp <= U'Ï') || (cp >= U'ì' && cp <= U'ï')) return U'i';
  if (cp == U'Ñ' || cp == U'ñ') return U'n';
  if ((cp >= U'Ò' && cp <= U'Ö') || (cp >= U'ò' && cp <= U'ö')) return U'o';
  if (cp == U'Ø' || cp == U'ø') return U'o';
  if ((cp >= U'Ù' && cp <= U'Ü') || (cp >= U'ù' && cp <= U'ü')) return U'u';
  if (cp == U'Ý' || cp == U'ý' || cp == U'ÿ') return U'y';
  return 0;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r' || s.front() == '\n'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

std::string fold_text(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  std::size_t i = 0;
  while (i < utf8.size()) {
    char32_t cp = next_codepoint(utf8, i);
    if (cp >= U'A' && cp <= U'Z') {
      out.push_back(static_cast<char>(cp - U'A' + 'a'));
      continue;
    }
    if (char32_t base = fold_letter(cp); base != 0) {
      out.push_back(static_cast<char>(base));
      continue;
    }
    append_utf8(out, cp);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::string folded = fold_text(text);
  std::vector<std::string> tokens;
  std::size_t start = std::string::npos;
  for (std::size_t i = 0; i <= folded.size(); ++i) {
    unsigned char c = i < folded.size() ? folded[i] : 0;
    bool alnum = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
    if (alnum) {
      if (start == std::string::npos) start = i;
    } else if (start != std::string::npos) {
      tokens.emplace_back(folded, start, i - start);
      start = std::string::npos;
    }
  }
  return tokens;
}

std::unordered_set<std::string> load_stopwords(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open stopword file: " + path);
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    words.insert(fold_text(sv));
  }
  return words;
}

TermStream extract_stems(const Record& record,
                         const std::unordered_set<std::string>& stopwords,
                         bool include_title) {
  std::vector<std::pair<std::string, std::uint32_t>> raw;
  auto feed = [&](const std::string& text) {
    for (std::string& tok : tokenize(text)) {
      if (stopwords.count(tok)) continue;
      raw.emplace_back(stem_spanish(tok), 1u);
    }
  };
  if (include_title) feed(record.title);
  feed(record.abstract_text);
  return make_stream(record.id, Representation::stems, std::move(raw));
}

ConceptDictionary load_dictionary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open dictionary file: " + path);
  ConceptDictionary dict;
  std::unordered_map<std::string, std::size_t> slot;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tsv(line);
    if (fields.size() != 2)
      throw input_error("dictionary line " + std::to_string(lineno) +
                        ": expected `code<TAB>surface_form`");
    std::string code(trim(fields[0]));
    std::string surface = fold_text(trim(fields[1]));
    if (code.empty() || surface.empty())
      throw input_error("dictionary line " + std::to_string(lineno) +
                        ": empty code or surface form");
    auto [it, inserted] = slot.try_emplace(code, dict.entries.size());
    if (inserted) dict.entries.push_back({code, {}});
    dict.entries[it->second].surface_forms.push_back(std::move(surface));
  }
  return dict;
}

// Aho-Corasick over token ids. Patterns are the tokenized surface forms;
// tokens outside the dictionary vocabulary reset the automaton to the root.
struct ConceptMatcher::Impl {
  struct Node {
    std::unordered_map<int, int> next;
    int fail = 0;
    int out = -1;      // nearest node (via fail links) that ends a pattern
    int pattern = -1;  // pattern ending exactly here
  };

  std::unordered_map<std::string, int> vocab;
  std::vector<Node> nodes;
  std::vector<std::size_t> pattern_len;   // in tokens
  std::vector<LabelCode> pattern_code;

  explicit Impl(const ConceptDictionary& dict) {
    nodes.emplace_back();  // root
    // Identical token sequences listed under several codes collapse onto the
    // smallest code, which is what the tie rule would pick every time.
    std::map<std::vector<int>, LabelCode> patterns;
    for (const auto& entry : dict.entries) {
      for (const auto& surface : entry.surface_forms) {
        std::vector<int> ids;
        for (const auto& tok : tokenize(surface)) {
          auto it = vocab.try_emplace(tok, static_cast<int>(vocab.size())).first;
          ids.push_back(it->second);
        }
        if (ids.empty()) continue;
        auto [it, inserted] = patterns.try_emplace(std::move(ids), entry.code);
        if (!inserted && code_less(entry.code, it->second)) it->second = entry.code;
      }
    }
    for (auto& [ids, code] : patterns) {
      int node = 0;
      for (int id : ids) {
        auto [it, inserted] = nodes[node].next.try_emplace(id, static_cast<int>(nodes.size()));
        if (inserted) nodes.emplace_back();
        node = it->second;
      }
      nodes[node].pattern = static_cast<int>(pattern_len.size());
      pattern_len.push_back(ids.size());
      pattern_code.push_back(code);
    }
    // BFS failure links.
    std::deque<int> queue;
    for (auto& [id, child] : nodes[0].next) queue.push_back(child);
    while (!queue.empty()) {
      int node = queue.front();
      queue.pop_front();
      for (auto& [id, child] : nodes[node].next) {
        int f = nodes[node].fail;
        while (f != 0 && !nodes[f].next.count(id)) f = nodes[f].fail;
        auto it = nodes[f].next.find(id);
        nodes[child].fail = (it != nodes[f].next.end() && it->second != child)
                                ? it->second
                                : 0;
        queue.push_back(child);
      }
      int f = nodes[node].fail;
      nodes[node].out = nodes[f].pattern >= 0 ? f : nodes[f].out;
    }
  }

  std::vector<ConceptHit> run(std::span<const std::string> tokens) const {
    // Best candidate per start position: longest wins, then smallest code.
    std::vector<int> best(tokens.size(), -1);
    int node = 0;
    for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
      auto vit = vocab.find(tokens[pos]);
      if (vit == vocab.end()) {
        node = 0;
        continue;
      }
      int id = vit->second;
      while (node != 0 && !nodes[node].next.count(id)) node = nodes[node].fail;
      auto it = nodes[node].next.find(id);
      node = it != nodes[node].next.end() ? it->second : 0;
      // Every node on the out-chain ends a pattern.
      for (int hit = nodes[node].pattern >= 0 ? node : nodes[node].out;
           hit >= 0; hit = nodes[hit].out) {
        int p = nodes[hit].pattern;
        std::size_t start = pos + 1 - pattern_len[p];
        int prev = best[start];
        if (prev < 0 || pattern_len[p] > pattern_len[prev] ||
            (pattern_len[p] == pattern_len[prev] &&
             code_less(pattern_code[p], pattern_code[prev])))
          best[start] = p;
      }
    }
    std::vector<ConceptHit> hits;
    std::size_t cursor = 0;
    for (std::size_t start = 0; start < tokens.size(); ++start) {
      if (best[start] < 0 || start < cursor) continue;
      int p = best[start];
      hits.push_back({pattern_code[p], start, pattern_len[p]});
      cursor = start + pattern_len[p];
    }
    return hits;
  }
};

ConceptMatcher::ConceptMatcher(const ConceptDictionary& dict)
    : impl_(std::make_unique<Impl>(dict)) {}
ConceptMatcher::~ConceptMatcher() = default;
ConceptMatcher::ConceptMatcher(ConceptMatcher&&) noexcept = default;
ConceptMatcher& ConceptMatcher::operator=(ConceptMatcher&&) noexcept = default;

std::vector<ConceptHit> ConceptMatcher::match_tokens(
    std::span<const std::string> tokens) const {
  return impl_->run(tokens);
}

TermStream match_concepts(const Record& record, const ConceptMatcher& matcher,
                          bool include_title) {
  std::vector<std::pair<std::string, std::uint32_t>> raw;
  auto feed = [&](const std::string& text) {
    std::vector<std::string> tokens = tokenize(text);
    for (const ConceptHit& hit : matcher.match_tokens(tokens))
      raw.emplace_back("decs:" + hit.code, 1u);
  };
  if (include_title) feed(record.title);
  feed(record.abstract_text);
  return make_stream(record.id, Representation::concepts, std::move(raw));
}

std::vector<TermStream> load_external_stream(const std::string& path,
                                             Representation rep) {
  if (rep != Representation::lemmas && rep != Representation::nps &&
      rep != Representation::deps)
    throw input_error(std::string("external streams must be lemmas, nps, or "
                                  "deps, not ") +
                      to_string(rep));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open stream file: " + path);

  std::vector<std::string> order;
  std::unordered_map<std::string, std::map<std::string, std::uint64_t>> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tsv(line);
    if (fields.size() != 3)
      throw input_error("stream line " + std::to_string(lineno) +
                        ": expected `doc_id<TAB>term<TAB>count`");
    std::string doc_id(trim(fields[0]));
    std::string term(trim(fields[1]));
    std::string_view count_sv = trim(fields[2]);
    if (doc_id.empty() || term.empty())
      throw input_error("stream line " + std::to_string(lineno) +
                        ": empty doc_id or term");
    long long count = 0;
    auto [ptr, ec] = std::from_chars(count_sv.data(),
                                     count_sv.data() + count_sv.size(), count);
    if (ec != std::errc{} || ptr != count_sv.data() + count_sv.size())
      throw input_error("stream line " + std::to_string(lineno) +
                        ": bad count");
    if (count < 1)
      throw input_error("stream line " + std::to_string(lineno) +
                        ": count must be positive");
    auto [it, inserted] = docs.try_emplace(doc_id);
    if (inserted) order.push_back(doc_id);
    it->second[term] += static_cast<std::uint64_t>(count);
  }

  std::vector<TermStream> streams;
  streams.reserve(order.size());
  for (const auto& doc_id : order) {
    TermStream s;
    s.doc_id = doc_id;
    s.representation = rep;
    for (auto& [term, count] : docs[doc_id])
      s.terms.emplace_back(term, static_cast<std::uint32_t>(
                                     std::min<std::uint64_t>(count, UINT32_MAX)));
    streams.push_back(std::move(s));
  }
  return streams;
}

TermStream merge_streams(std::span<const TermStream> streams) {
  if (streams.empty())
    throw input_error("merge_streams needs at least one stream");
  std::vector<std::pair<std::string, std::uint32_t>> raw;
  for (const TermStream& s : streams) {
    if (s.doc_id != streams.front().doc_id)
      throw input_error("merge_streams: doc_id mismatch (" + s.doc_id +
                        " vs " + streams.front().doc_id + ")");
    const char* prefix = nullptr;
    switch (s.representation) {
      case Representation::stems: prefix = "stem:"; break;
      case Representation::lemmas: prefix = "lemma:"; break;
      case Representation::nps: prefix = "np:"; break;
      case Representation::deps: prefix = "dep:"; break;
      case Representation::concepts: prefix = ""; break;  // already "decs:"
      case Representation::all:
        throw input_error("merge_streams: cannot merge an `all` stream");
    }
    for (const auto& [term, count] : s.terms)
      raw.emplace_back(prefix + term, count);
  }
  return make_stream(streams.front().doc_id, Representation::all,
                     std::move(raw));
}

TermStream extract_record(const Record& record, const ExtractorConfig& config) {
  auto external = [&](const std::unordered_map<std::string, TermStream>& map,
                      Representation rep) {
    auto it = map.find(record.id);
    if (it != map.end()) return it->second;
    TermStream empty;
    empty.doc_id = record.id;
    empty.representation = rep;
    return empty;
  };
  switch (config.representation) {
    case Representation::stems:
      return extract_stems(record, config.stopwords, config.include_title);
    case Representation::concepts:
      if (!config.matcher)
        throw input_error("concepts representation needs a dictionary");
      return match_concepts(record, *config.matcher, config.include_title);
    case Representation::lemmas:
      return external(config.lemmas, Representation::lemmas);
    case Representation::nps:
      return external(config.nps, Representation::nps);
    case Representation::deps:
      return external(config.deps, Representation::deps);
    case Representation::all: {
      std::vector<TermStream> pieces;
      pieces.push_back(
          extract_stems(record, config.stopwords, config.include_title));
      if (config.matcher)
        pieces.push_back(
            match_concepts(record, *config.matcher, config.include_title));
      if (!config.lemmas.empty())
        pieces.push_back(external(config.lemmas, Representation::lemmas));
      if (!config.nps.empty())
        pieces.push_back(external(config.nps, Representation::nps));
      if (!config.deps.empty())
        pieces.push_back(external(config.deps, Representation::deps));
      return merge_streams(pieces);
    }
  }
  throw internal_error("unreachable representation");
}

std::vector<TermStream> extract_batch_serial(const Corpus& corpus,
                                             const ExtractorConfig& config) {
  std::vector<TermStream> out;
  out.reserve(corpus.records.size());
  for (const Record& r : corpus.records) out.push_back(extract_record(r, config));
  return out;
}

std::vector<TermStream> extract_batch(const Corpus& corpus,
                                      const ExtractorConfig& config,
                                      int threads) {
  std::vector<TermStream> out(corpus.records.size());
  const int n_threads = effective_threads(threads);
#pragma omp parallel for schedule(static) num_threads(n_threads)
  for (std::ptrdiff_t i = 0;
       i < static_cast<std::ptrdiff_t>(corpus.records.size()); ++i)
    out[static_cast<std::size_t>(i)] =
        extract_record(corpus.records[static_cast<std::size_t>(i)], config);
  return out;
}

}  // namespace simann

#include "simann/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "simann/util.hpp"

namespace simann {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  static_assert(sizeof bits == sizeof v);
  std::memcpy(&bits, &v, sizeof bits);
  put_u64(out, bits);
}

void put_str(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw input_error("truncated index file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8))
    throw input_error("truncated index file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  std::uint64_t bits = get_u64(in);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

std::string get_str(std::istream& in) {
  std::uint32_t n = get_u32(in);
  std::string s(n, '\0');
  if (n != 0 && !in.read(s.data(), n)) throw input_error("truncated index file");
  return s;
}

constexpr char kMagic[8] = {'S', 'I', 'M', 'A', 'N', 'N', 'I', 'X'};
constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

std::int64_t InvertedIndex::ordinal_of(const std::string& doc_id) const {
  auto it = std::find(doc_ids.begin(), doc_ids.end(), doc_id);
  return it == doc_ids.end() ? -1 : it - doc_ids.begin();
}

InvertedIndex build_index(std::span<const TermStream> streams,
                          std::span<const LabelSet> labels, const DfStats& df,
                          int threads) {
  if (streams.size() != labels.size())
    throw internal_error("build_index: streams/labels size mismatch");

  InvertedIndex index;
  index.representation =
      streams.empty() ? Representation::stems : streams.front().representation;
  index.min_df = df.min_df;
  index.max_df_ratio = df.max_df_ratio;
  index.n_docs = streams.size();

  for (const auto& [term, d] : df.df)
    if (df.kept_df(d)) index.terms.push_back(term);
  if (index.terms.empty())
    throw input_error("vocabulary empty after filtering");
  std::sort(index.terms.begin(), index.terms.end());
  index.term_id.reserve(index.terms.size());
  for (std::uint32_t t = 0; t < index.terms.size(); ++t) {
    index.term_id.emplace(index.terms[t], t);
    double d = df.df_of(index.terms[t]);
    index.idf.push_back(1.0 + std::log(static_cast<double>(index.n_docs) /
                                       (d + 1.0)));
  }

  const std::size_t n = streams.size();
  index.doc_ids.resize(n);
  index.doc_labels.resize(n);
  index.doc_label_count.resize(n);
  index.doc_norm.resize(n);
  index.postings.resize(index.terms.size());

  // Per-document kept-term lookup is the bulk of the work and runs in
  // parallel; postings are then scattered serially in ordinal order so the
  // result does not depend on the thread count.
  using TermCount = std::pair<std::uint32_t, std::uint32_t>;
  std::vector<std::vector<TermCount>> per_doc(n);
  const int n_threads = effective_threads(threads);
#pragma omp parallel for schedule(static) num_threads(n_threads)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const auto d = static_cast<std::size_t>(i);
    std::uint64_t kept_tokens = 0;
    for (const auto& [term, count] : streams[d].terms) {
      auto it = index.term_id.find(term);
      if (it == index.term_id.end()) continue;
      per_doc[d].emplace_back(it->second, count);
      kept_tokens += count;
    }
    index.doc_norm[d] =
        kept_tokens == 0
            ? 1.0
            : 1.0 / std::sqrt(static_cast<double>(kept_tokens));
  }

  for (std::size_t d = 0; d < n; ++d) {
    index.doc_ids[d] = streams[d].doc_id;
    index.doc_labels[d] = labels[d];
    index.doc_label_count[d] = static_cast<std::uint32_t>(labels[d].size());
    for (const auto& [term, count] : per_doc[d])
      index.postings[term].push_back({static_cast<std::uint32_t>(d), count});
  }
  return index;
}

std::vector<ScoredDoc> search(const InvertedIndex& index,
                              const TermStream& query, std::size_t top_k) {
  if (top_k == 0) throw internal_error("search: top_k must be >= 1");

  // Term-at-a-time accumulation; per-document addend order therefore follows
  // the query's sorted term order, same as the documented formula.
  std::vector<double> acc(index.doc_ids.size(), 0.0);
  for (const auto& [term, qcount] : query.terms) {
    auto it = index.term_id.find(term);
    if (it == index.term_id.end()) continue;
    const double w = static_cast<double>(qcount) * index.idf[it->second] *
                     index.idf[it->second];
    for (const auto& p : index.postings[it->second])
      acc[p.doc] += w * std::sqrt(static_cast<double>(p.count)) *
                    index.doc_norm[p.doc];
  }

  std::vector<std::uint32_t> touched;
  for (std::uint32_t d = 0; d < acc.size(); ++d)
    if (acc[d] > 0.0) touched.push_back(d);

  auto better = [&](std::uint32_t a, std::uint32_t b) {
    if (acc[a] != acc[b]) return acc[a] > acc[b];
    return index.doc_ids[a] < index.doc_ids[b];
  };
  if (touched.size() > top_k) {
    std::nth_element(touched.begin(), touched.begin() + top_k, touched.end(),
                     better);
    touched.resize(top_k);
  }
  std::sort(touched.begin(), touched.end(), better);

  std::vector<ScoredDoc> out;
  out.reserve(touched.size());
  for (std::uint32_t d : touched)
    out.push_back({d, index.doc_ids[d], acc[d]});
  return out;
}

void save_index(const std::string& path, const InvertedIndex& index) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw input_error("cannot write index file: " + path);
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(index.representation));
  put_u32(out, index.min_df);
  put_f64(out, index.max_df_ratio);
  put_u64(out, index.n_docs);

  put_u64(out, index.doc_ids.size());
  for (std::size_t d = 0; d < index.doc_ids.size(); ++d) {
    put_str(out, index.doc_ids[d]);
    put_u32(out, static_cast<std::uint32_t>(index.doc_labels[d].size()));
    for (const auto& code : index.doc_labels[d]) put_str(out, code);
    put_f64(out, index.doc_norm[d]);
  }

  put_u64(out, index.terms.size());
  for (std::size_t t = 0; t < index.terms.size(); ++t) {
    put_str(out, index.terms[t]);
    put_f64(out, index.idf[t]);
    put_u64(out, index.postings[t].size());
    for (const auto& p : index.postings[t]) {
      put_u32(out, p.doc);
      put_u32(out, p.count);
    }
  }
  out.flush();
  if (!out) throw input_error("failed writing index file: " + path);
}

InvertedIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open index file: " + path);
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, 8) != 0)
    throw input_error("not an index file: " + path);
  if (std::uint32_t version = get_u32(in); version != kFormatVersion)
    throw input_error("unsupported index format version " +
                      std::to_string(version));

  InvertedIndex index;
  index.representation = static_cast<Representation>(get_u32(in));
  index.min_df = get_u32(in);
  index.max_df_ratio = get_f64(in);
  index.n_docs = get_u64(in);

  const std::uint64_t n = get_u64(in);
  index.doc_ids.resize(n);
  index.doc_labels.resize(n);
  index.doc_label_count.resize(n);
  index.doc_norm.resize(n);
  for (std::uint64_t d = 0; d < n; ++d) {
    index.doc_ids[d] = get_str(in);
    std::uint32_t n_labels = get_u32(in);
    for (std::uint32_t j = 0; j < n_labels; ++j)
      index.doc_labels[d].insert(get_str(in));
    index.doc_label_count[d] = static_cast<std::uint32_t>(
        index.doc_labels[d].size());
    index.doc_norm[d] = get_f64(in);
  }

  const std::uint64_t n_terms = get_u64(in);
  index.terms.resize(n_terms);
  index.idf.resize(n_terms);
  index.postings.resize(n_terms);
  index.term_id.reserve(n_terms);
  for (std::uint64_t t = 0; t < n_terms; ++t) {
    index.terms[t] = get_str(in);
    index.idf[t] = get_f64(in);
    std::uint64_t n_postings = get_u64(in);
    index.postings[t].resize(n_postings);
    for (auto& p : index.postings[t]) {
      p.doc = get_u32(in);
      p.count = get_u32(in);
    }
    index.term_id.emplace(index.terms[t], static_cast<std::uint32_t>(t));
  }
  return index;
}

}  // namespace simann

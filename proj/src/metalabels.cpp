#include "simann/metalabels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "simann/util.hpp"

namespace simann {

namespace {

using PairKey = std::pair<LabelCode, LabelCode>;

struct PairKeyLess {
  bool operator()(const PairKey& x, const PairKey& y) const {
    if (x.first != y.first) return code_less(x.first, y.first);
    return code_less(x.second, y.second);
  }
};

using PairCounts = std::map<PairKey, std::uint64_t, PairKeyLess>;
using LabelCounts = std::map<LabelCode, std::uint64_t, CodeLess>;

void count_range(const Corpus& corpus, std::size_t begin, std::size_t end,
                 LabelCounts& singles, PairCounts& pairs) {
  for (std::size_t d = begin; d < end; ++d) {
    const LabelSet& labels = corpus.records[d].labels;
    for (auto a = labels.begin(); a != labels.end(); ++a) {
      ++singles[*a];
      for (auto b = std::next(a); b != labels.end(); ++b)
        ++pairs[{*a, *b}];
    }
  }
}

std::vector<PairStats> stats_from_counts(const LabelCounts& singles,
                                         const PairCounts& pairs,
                                         std::uint64_t n_docs) {
  std::vector<PairStats> stats;
  stats.reserve(pairs.size());
  for (const auto& [key, joint] : pairs) {
    PairStats s;
    s.a = key.first;
    s.b = key.second;
    s.count_joint = joint;
    s.count_a = singles.at(key.first);
    s.count_b = singles.at(key.second);
    s.n_docs = n_docs;
    s.pmi = std::log(static_cast<double>(joint) * static_cast<double>(n_docs) /
                     (static_cast<double>(s.count_a) *
                      static_cast<double>(s.count_b)));
    s.npmi = npmi_value(joint, s.count_a, s.count_b, n_docs);
    stats.push_back(std::move(s));
  }
  return stats;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double npmi_value(std::uint64_t count_joint, std::uint64_t count_a,
                  std::uint64_t count_b, std::uint64_t n_docs) {
  if (count_joint == 0) return -1.0;
  // Complete co-occurrence, including the degenerate joint == n_docs case
  // where the normalizer -ln(P) would be zero.
  if (count_joint == count_a && count_joint == count_b) return 1.0;
  const double joint = static_cast<double>(count_joint);
  const double n = static_cast<double>(n_docs);
  const double pmi = std::log(joint * n / (static_cast<double>(count_a) *
                                           static_cast<double>(count_b)));
  return pmi / -std::log(joint / n);
}

std::vector<PairStats> compute_pair_stats_serial(const Corpus& corpus) {
  LabelCounts singles;
  PairCounts pairs;
  count_range(corpus, 0, corpus.n_docs(), singles, pairs);
  return stats_from_counts(singles, pairs, corpus.n_docs());
}

std::vector<PairStats> compute_pair_stats(const Corpus& corpus, int threads) {
  const int n_threads = effective_threads(threads);
  const std::size_t n = corpus.n_docs();
  std::vector<LabelCounts> singles(n_threads);
  std::vector<PairCounts> pairs(n_threads);

  // Integer counters merged across shards; the merge order cannot change the
  // totals, so any thread count produces the same statistics.
#pragma omp parallel for schedule(static, 1) num_threads(n_threads)
  for (int shard = 0; shard < n_threads; ++shard) {
    const std::size_t begin = n * shard / n_threads;
    const std::size_t end = n * (shard + 1) / n_threads;
    count_range(corpus, begin, end, singles[shard], pairs[shard]);
  }

  for (int shard = 1; shard < n_threads; ++shard) {
    for (const auto& [label, c] : singles[shard]) singles[0][label] += c;
    for (const auto& [key, c] : pairs[shard]) pairs[0][key] += c;
  }
  return stats_from_counts(singles[0], pairs[0], n);
}

std::string make_meta_code(const LabelCode& a, const LabelCode& b) {
  return code_less(a, b) ? a + "." + b : b + "." + a;
}

const MetaLabelTable::Entry* MetaLabelTable::find(const LabelCode& a,
                                                  const LabelCode& b) const {
  PairKey key = code_less(a, b) ? PairKey{a, b} : PairKey{b, a};
  auto it = entries.find(key);
  return it == entries.end() ? nullptr : &it->second;
}

MetaLabelTable build_table(std::span<const PairStats> stats,
                           double threshold) {
  if (!(threshold > -1.0) || threshold > 1.0)
    throw input_error("npmi threshold must lie in (-1, 1]");
  MetaLabelTable table;
  table.threshold = threshold;
  for (const PairStats& s : stats) {
    if (s.npmi < threshold) continue;
    MetaLabelTable::Entry entry{s.a, s.b, make_meta_code(s.a, s.b), s.npmi};
    table.reverse.emplace(entry.meta_code, PairKey{s.a, s.b});
    table.entries.emplace(PairKey{s.a, s.b}, std::move(entry));
  }
  return table;
}

LabelSet rewrite_labels(const LabelSet& labels, const MetaLabelTable& table) {
  struct Candidate {
    double npmi;
    const MetaLabelTable::Entry* entry;
  };
  std::vector<Candidate> candidates;
  for (auto a = labels.begin(); a != labels.end(); ++a)
    for (auto b = std::next(a); b != labels.end(); ++b)
      if (const auto* entry = table.find(*a, *b))
        candidates.push_back({entry->npmi, entry});
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& x, const Candidate& y) {
              if (x.npmi != y.npmi) return x.npmi > y.npmi;
              return code_less(x.entry->meta_code, y.entry->meta_code);
            });

  LabelSet out;
  LabelSet consumed;
  for (const Candidate& c : candidates) {
    if (consumed.count(c.entry->a) || consumed.count(c.entry->b)) continue;
    consumed.insert(c.entry->a);
    consumed.insert(c.entry->b);
    out.insert(c.entry->meta_code);
  }
  for (const LabelCode& label : labels)
    if (!consumed.count(label)) out.insert(label);
  return out;
}

LabelSet expand_labels(const LabelSet& codes, const MetaLabelTable& table) {
  LabelSet out;
  for (const LabelCode& code : codes) {
    if (code.find('.') == std::string::npos) {
      out.insert(code);
      continue;
    }
    auto it = table.reverse.find(code);
    if (it == table.reverse.end())
      throw input_error("unknown meta-label code: " + code);
    out.insert(it->second.first);
    out.insert(it->second.second);
  }
  return out;
}

std::vector<LabelCode> expand_ranked(const std::vector<LabelCode>& codes,
                                     const MetaLabelTable& table) {
  std::vector<LabelCode> out;
  LabelSet seen;
  auto push = [&](const LabelCode& code) {
    if (seen.insert(code).second) out.push_back(code);
  };
  for (const LabelCode& code : codes) {
    if (code.find('.') == std::string::npos) {
      push(code);
      continue;
    }
    auto it = table.reverse.find(code);
    if (it == table.reverse.end())
      throw input_error("unknown meta-label code: " + code);
    push(it->second.first);
    push(it->second.second);
  }
  return out;
}

Corpus rewrite_corpus(const Corpus& corpus, const MetaLabelTable& table) {
  Corpus out = corpus;
  for (Record& r : out.records) r.labels = rewrite_labels(r.labels, table);
  return out;
}

void write_pair_stats_tsv(const std::string& path,
                          std::span<const PairStats> stats) {
  std::ostringstream out;
  out << "code_a\tcode_b\tcount_joint\tcount_a\tcount_b\tpmi\tnpmi\n";
  for (const PairStats& s : stats)
    out << s.a << '\t' << s.b << '\t' << s.count_joint << '\t' << s.count_a
        << '\t' << s.count_b << '\t' << format_double(s.pmi) << '\t'
        << format_double(s.npmi) << '\n';
  write_file(path, out.str());
}

std::vector<PairStats> read_pair_stats_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open pair-stats file: " + path);
  std::vector<PairStats> stats;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (lineno == 1 && line.rfind("code_a\t", 0) == 0))
      continue;
    auto fields = split_tsv(line);
    if (fields.size() != 7)
      throw input_error("pair-stats line " + std::to_string(lineno) +
                        ": expected 7 columns");
    PairStats s;
    s.a = std::string(fields[0]);
    s.b = std::string(fields[1]);
    auto parse_u64 = [&](std::string_view sv) {
      std::uint64_t v = 0;
      auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
      if (ec != std::errc{} || ptr != sv.data() + sv.size())
        throw input_error("pair-stats line " + std::to_string(lineno) +
                          ": bad count");
      return v;
    };
    s.count_joint = parse_u64(fields[2]);
    s.count_a = parse_u64(fields[3]);
    s.count_b = parse_u64(fields[4]);
    s.pmi = std::strtod(std::string(fields[5]).c_str(), nullptr);
    s.npmi = std::strtod(std::string(fields[6]).c_str(), nullptr);
    stats.push_back(std::move(s));
  }
  return stats;
}

}  // namespace simann

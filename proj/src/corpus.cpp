#include "simann/corpus.hpp"

#include <omp.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "simann/util.hpp"

namespace simann {

namespace {

using nlohmann::json;

std::string get_string(const json& obj, const char* key, std::size_t line,
                       bool required) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) {
      std::ostringstream msg;
      msg << "missing key \"" << key << "\" at line " << line;
      throw input_error(msg.str());
    }
    return {};
  }
  if (!it->is_string()) {
    std::ostringstream msg;
    msg << "key \"" << key << "\" is not a string at line " << line;
    throw input_error(msg.str());
  }
  return it->get<std::string>();
}

}  // namespace

Corpus load_corpus(const std::string& path, bool require_labels,
                   LoadStats* stats) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open corpus file: " + path);

  Corpus corpus;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dropped = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      std::ostringstream msg;
      msg << "malformed JSON at line " << line_no << ": " << e.what();
      throw input_error(msg.str());
    }
    if (!obj.is_object()) {
      std::ostringstream msg;
      msg << "line " << line_no << " is not a JSON object";
      throw input_error(msg.str());
    }

    Record rec;
    rec.id = get_string(obj, "id", line_no, true);
    if (rec.id.empty()) {
      std::ostringstream msg;
      msg << "empty id at line " << line_no;
      throw input_error(msg.str());
    }
    rec.title = get_string(obj, "title", line_no, true);
    rec.abstract_text = get_string(obj, "abstractText", line_no, true);
    rec.journal = get_string(obj, "journal", line_no, false);
    rec.db = get_string(obj, "db", line_no, false);

    if (auto it = obj.find("decsCodes"); it != obj.end() && !it->is_null()) {
      if (!it->is_array()) {
        std::ostringstream msg;
        msg << "decsCodes is not an array at line " << line_no;
        throw input_error(msg.str());
      }
      for (const auto& code : *it) {
        if (!code.is_string() || code.get<std::string>().empty()) {
          std::ostringstream msg;
          msg << "invalid label code at line " << line_no;
          throw input_error(msg.str());
        }
        rec.labels.insert(code.get<std::string>());
      }
    }

    if (!seen_ids.insert(rec.id).second) {
      std::ostringstream msg;
      msg << "duplicate id " << rec.id << " at line " << line_no;
      throw input_error(msg.str());
    }

    if (require_labels && rec.labels.empty()) {
      ++dropped;
      continue;
    }
    corpus.records.push_back(std::move(rec));
  }

  if (stats) stats->dropped_unlabeled = dropped;
  return corpus;
}

void save_corpus(const std::string& path, const Corpus& corpus) {
  std::ostringstream out;
  for (const Record& rec : corpus.records) {
    json obj;
    obj["id"] = rec.id;
    obj["title"] = rec.title;
    obj["abstractText"] = rec.abstract_text;
    if (!rec.journal.empty()) obj["journal"] = rec.journal;
    if (!rec.db.empty()) obj["db"] = rec.db;
    json codes = json::array();
    for (const auto& code : rec.labels) codes.push_back(code);
    obj["decsCodes"] = std::move(codes);
    out << obj.dump() << '\n';
  }
  write_file(path, out.str());
}

DfStats compute_df(std::span<const TermStream> streams, std::uint32_t min_df,
                   double max_df_ratio, int threads) {
  if (streams.empty()) throw input_error("compute_df: no streams");
  if (max_df_ratio <= 0.0 || max_df_ratio > 1.0)
    throw input_error("compute_df: max_df_ratio must be in (0,1]");

  DfStats stats;
  stats.n_docs = streams.size();
  stats.min_df = min_df;
  stats.max_df_ratio = max_df_ratio;

  if (threads <= 1) {
    for (const TermStream& s : streams)
      for (const auto& [term, count] : s.terms) stats.df[term] += 1;
    return stats;
  }

  std::vector<std::unordered_map<std::string, std::uint32_t>> partial(
      static_cast<std::size_t>(threads));
#pragma omp parallel num_threads(threads)
  {
    auto& local = partial[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(streams.size()); ++i)
      for (const auto& [term, count] : streams[static_cast<std::size_t>(i)].terms)
        local[term] += 1;
  }
  for (auto& local : partial)
    for (auto& [term, n] : local) stats.df[term] += n;
  return stats;
}

void write_df_tsv(const std::string& path, const DfStats& stats) {
  std::vector<std::pair<std::string, std::uint32_t>> rows(stats.df.begin(),
                                                          stats.df.end());
  std::sort(rows.begin(), rows.end());
  std::ostringstream out;
  for (const auto& [term, d] : rows)
    out << term << '\t' << d << '\t' << (stats.kept_df(d) ? 1 : 0) << '\n';
  write_file(path, out.str());
}

}  // namespace simann

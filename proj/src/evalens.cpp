#include "simann/evalens.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "simann/util.hpp"

namespace simann {

namespace {

using ordered_json = nlohmann::ordered_json;

double ratio_or(double num, double den, double when_zero) {
  return den == 0.0 ? when_zero : num / den;
}

double harmonic(double p, double r) {
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

std::unordered_map<std::string, const RunOutput::Entry*> run_by_id(
    const RunOutput& run) {
  std::unordered_map<std::string, const RunOutput::Entry*> map;
  map.reserve(run.docs.size());
  for (const auto& entry : run.docs)
    if (!map.emplace(entry.doc_id, &entry).second)
      throw input_error("duplicate doc_id in run: " + entry.doc_id);
  return map;
}

void require_same_keys(
    const std::unordered_map<std::string, const RunOutput::Entry*>& a,
    const std::unordered_map<std::string, const RunOutput::Entry*>& b,
    const char* a_name, const char* b_name) {
  std::vector<std::string> only_a, only_b;
  for (const auto& kv : a)
    if (!b.count(kv.first)) only_a.push_back(kv.first);
  for (const auto& kv : b)
    if (!a.count(kv.first)) only_b.push_back(kv.first);
  if (only_a.empty() && only_b.empty()) return;
  std::sort(only_a.begin(), only_a.end());
  std::sort(only_b.begin(), only_b.end());
  std::ostringstream msg;
  msg << "run doc_id sets differ";
  auto list = [&](const char* name, const std::vector<std::string>& ids) {
    if (ids.empty()) return;
    msg << "; only in " << name << ":";
    for (std::size_t i = 0; i < ids.size() && i < 5; ++i) msg << ' ' << ids[i];
    if (ids.size() > 5) msg << " (+" << ids.size() - 5 << " more)";
  };
  list(a_name, only_a);
  list(b_name, only_b);
  throw input_error(msg.str());
}

}  // namespace

const RunOutput::Entry* RunOutput::find(const std::string& doc_id) const {
  for (const auto& entry : docs)
    if (entry.doc_id == doc_id) return &entry;
  return nullptr;
}

GoldStandard gold_from_corpus(const Corpus& corpus) {
  GoldStandard gold;
  for (const Record& r : corpus.records) gold[r.id] = r.labels;
  return gold;
}

MetricsReport evaluate(const GoldStandard& gold, const RunOutput& pred) {
  auto by_id = run_by_id(pred);
  for (const auto& kv : by_id)
    if (!gold.count(kv.first))
      throw input_error("predicted doc_id not in gold: " + kv.first);

  MetricsReport report;
  report.n_docs = gold.size();
  if (gold.empty()) return report;

  std::uint64_t tp = 0, fp = 0, fn = 0;
  double ebp = 0, ebr = 0, ebf = 0, acc = 0;

  struct LabelCounts {
    std::uint64_t tp = 0, fp = 0, fn = 0;
  };
  std::map<LabelCode, LabelCounts, CodeLess> per_label;
  for (const auto& [id, y] : gold)
    for (const LabelCode& label : y) per_label[label];  // fix the universe

  for (const auto& [id, y] : gold) {
    LabelSet z;
    if (auto it = by_id.find(id); it != by_id.end())
      for (const LabelCode& label : it->second->labels) {
        if (!z.insert(label).second)
          throw input_error("duplicate label " + label + " for doc " + id);
      }

    std::uint64_t inter = 0;
    for (const LabelCode& label : z) inter += y.count(label);
    const std::uint64_t uni = y.size() + z.size() - inter;

    tp += inter;
    fp += z.size() - inter;
    fn += y.size() - inter;

    const double p = ratio_or(static_cast<double>(inter),
                              static_cast<double>(z.size()), y.empty());
    const double r = ratio_or(static_cast<double>(inter),
                              static_cast<double>(y.size()), z.empty());
    ebp += p;
    ebr += r;
    ebf += harmonic(p, r);
    acc += ratio_or(static_cast<double>(inter), static_cast<double>(uni), 1.0);

    for (const LabelCode& label : z) {
      auto it = per_label.find(label);
      if (it == per_label.end()) continue;  // outside the gold universe
      if (y.count(label))
        ++it->second.tp;
      else
        ++it->second.fp;
    }
    for (const LabelCode& label : y)
      if (!z.count(label)) ++per_label[label].fn;
  }

  const auto n = static_cast<double>(gold.size());
  report.EBP = ebp / n;
  report.EBR = ebr / n;
  report.EBF = ebf / n;
  report.Acc = acc / n;

  report.MiP = ratio_or(static_cast<double>(tp), static_cast<double>(tp + fp), 0.0);
  report.MiR = ratio_or(static_cast<double>(tp), static_cast<double>(tp + fn), 0.0);
  report.MiF = harmonic(report.MiP, report.MiR);

  double map_sum = 0, mar_sum = 0, maf_sum = 0;
  for (const auto& [label, c] : per_label) {
    const double p = ratio_or(static_cast<double>(c.tp),
                              static_cast<double>(c.tp + c.fp), 0.0);
    const double r = ratio_or(static_cast<double>(c.tp),
                              static_cast<double>(c.tp + c.fn), 0.0);
    map_sum += p;
    mar_sum += r;
    maf_sum += harmonic(p, r);
  }
  if (!per_label.empty()) {
    const auto n_labels = static_cast<double>(per_label.size());
    report.MaP = map_sum / n_labels;
    report.MaR = mar_sum / n_labels;
    report.MaF = maf_sum / n_labels;
  }
  return report;
}

RunOutput intersect_runs(const RunOutput& a, const RunOutput& b) {
  auto a_map = run_by_id(a);
  auto b_map = run_by_id(b);
  require_same_keys(a_map, b_map, "first run", "second run");

  RunOutput out;
  out.docs.reserve(a.docs.size());
  for (const auto& entry : a.docs) {
    const auto& other = b_map.at(entry.doc_id)->labels;
    std::unordered_set<std::string> keep(other.begin(), other.end());
    RunOutput::Entry merged;
    merged.doc_id = entry.doc_id;
    for (const LabelCode& label : entry.labels)
      if (keep.count(label)) merged.labels.push_back(label);
    out.docs.push_back(std::move(merged));
  }
  return out;
}

RunOutput union_add(const RunOutput& base,
                    std::span<const RunOutput> additions) {
  auto base_map = run_by_id(base);
  std::vector<std::unordered_map<std::string, const RunOutput::Entry*>> maps;
  for (const RunOutput& add : additions) {
    maps.push_back(run_by_id(add));
    require_same_keys(base_map, maps.back(), "base run", "added run");
  }

  RunOutput out;
  out.docs.reserve(base.docs.size());
  for (const auto& entry : base.docs) {
    RunOutput::Entry merged;
    merged.doc_id = entry.doc_id;
    std::unordered_set<std::string> seen;
    for (const LabelCode& label : entry.labels)
      if (seen.insert(label).second) merged.labels.push_back(label);
    for (const auto& map : maps)
      for (const LabelCode& label : map.at(entry.doc_id)->labels)
        if (seen.insert(label).second) merged.labels.push_back(label);
    out.docs.push_back(std::move(merged));
  }
  return out;
}

RunOutput concept_match_run(const Corpus& corpus, const ConceptMatcher& matcher,
                            bool include_title) {
  RunOutput out;
  out.docs.reserve(corpus.records.size());
  for (const Record& record : corpus.records) {
    TermStream hits = match_concepts(record, matcher, include_title);
    std::vector<std::pair<LabelCode, std::uint32_t>> counted;
    counted.reserve(hits.terms.size());
    for (const auto& [term, count] : hits.terms)
      counted.emplace_back(term.substr(5), count);  // strip "decs:"
    std::sort(counted.begin(), counted.end(),
              [](const auto& x, const auto& y) {
                if (x.second != y.second) return x.second > y.second;
                return code_less(x.first, y.first);
              });
    RunOutput::Entry entry;
    entry.doc_id = record.id;
    for (auto& [code, count] : counted) entry.labels.push_back(std::move(code));
    out.docs.push_back(std::move(entry));
  }
  return out;
}

RunOutput run_from_predictions(std::span<const Prediction> predictions) {
  RunOutput out;
  out.docs.reserve(predictions.size());
  for (const Prediction& pred : predictions)
    out.docs.push_back({pred.doc_id, pred.chosen});
  return out;
}

void save_run(const std::string& path, const RunOutput& run) {
  ordered_json docs = ordered_json::array();
  for (const auto& entry : run.docs) {
    ordered_json doc;
    doc["id"] = entry.doc_id;
    doc["labels"] = entry.labels;
    docs.push_back(std::move(doc));
  }
  ordered_json root;
  root["documents"] = std::move(docs);
  write_file(path, root.dump(2) + "\n");
}

RunOutput load_run(const std::string& path) {
  ordered_json root;
  try {
    root = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw input_error("malformed prediction JSON in " + path + ": " + e.what());
  }
  if (!root.is_object() || !root.contains("documents") ||
      !root["documents"].is_array())
    throw input_error("prediction file " + path +
                      " lacks a \"documents\" array");
  RunOutput run;
  for (const auto& doc : root["documents"]) {
    if (!doc.is_object() || !doc.contains("id") || !doc["id"].is_string() ||
        !doc.contains("labels") || !doc["labels"].is_array())
      throw input_error("prediction file " + path +
                        ": each document needs string \"id\" and array "
                        "\"labels\"");
    RunOutput::Entry entry;
    entry.doc_id = doc["id"].get<std::string>();
    for (const auto& label : doc["labels"]) {
      if (!label.is_string())
        throw input_error("prediction file " + path + ": labels of " +
                          entry.doc_id + " must be strings");
      entry.labels.push_back(label.get<std::string>());
    }
    run.docs.push_back(std::move(entry));
  }
  return run;
}

void write_report_tsv(const std::string& path, const MetricsReport& report) {
  std::ostringstream out;
  out << "MiF\tEBP\tEBR\tEBF\tMaP\tMaR\tMaF\tMiP\tMiR\tAcc\n";
  const double values[] = {report.MiF, report.EBP, report.EBR, report.EBF,
                           report.MaP, report.MaR, report.MaF, report.MiP,
                           report.MiR, report.Acc};
  char buf[32];
  for (std::size_t i = 0; i < 10; ++i) {
    std::snprintf(buf, sizeof buf, "%.6f", values[i]);
    out << buf << (i + 1 < 10 ? '\t' : '\n');
  }
  write_file(path, out.str());
}

}  // namespace simann

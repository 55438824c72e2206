#include "simann/recipe.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <set>
#include <unordered_set>

#include "json.hpp"

#include "simann/corpus.hpp"
#include "simann/index.hpp"
#include "simann/knn.hpp"
#include "simann/metalabels.hpp"
#include "simann/profiles.hpp"
#include "simann/textproc.hpp"
#include "simann/util.hpp"

namespace fs = std::filesystem;

namespace simann {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw recipe_error("recipe " + where + ": " + msg);
}

void upd_u64(Fnv1a64& h, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  h.update(b, sizeof b);
}

void upd_f64(Fnv1a64& h, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  upd_u64(h, bits);
}

void upd_str(Fnv1a64& h, std::string_view s) {
  upd_u64(h, s.size());
  h.update(s);
}

std::string resolve_ref(const std::string& ref, const fs::path& base_dir) {
  fs::path p(ref);
  if (!p.has_extension()) p += ".json";
  if (p.is_absolute()) return p.string();
  return (base_dir / p).string();
}

void merge_external(std::unordered_map<std::string, TermStream>& map,
                    std::vector<TermStream> streams) {
  for (TermStream& s : streams) {
    auto it = map.find(s.doc_id);
    if (it == map.end()) {
      map.emplace(s.doc_id, std::move(s));
      continue;
    }
    auto raw = it->second.terms;
    raw.insert(raw.end(), s.terms.begin(), s.terms.end());
    it->second = make_stream(s.doc_id, s.representation, std::move(raw));
  }
}

std::vector<std::string> missing_requirements(const RunRecipe& recipe,
                                              const RunInputs& inputs) {
  std::set<std::string> needed(recipe.required_streams.begin(),
                               recipe.required_streams.end());
  switch (recipe.representation) {
    case Representation::lemmas: needed.insert("lemmas"); break;
    case Representation::nps: needed.insert("nps"); break;
    case Representation::deps: needed.insert("deps"); break;
    case Representation::concepts: needed.insert("dict"); break;
    default: break;
  }
  if (recipe.concept_match) needed.insert("dict");

  std::vector<std::string> missing;
  for (const std::string& name : needed) {
    bool have = name == "lemmas" ? !inputs.lemma_paths.empty()
                : name == "nps"  ? !inputs.np_paths.empty()
                : name == "deps" ? !inputs.dep_paths.empty()
                                 : !inputs.dict_path.empty();
    if (!have) missing.push_back(name);
  }
  return missing;
}

ExtractorConfig make_config(const RunRecipe& recipe, const RunInputs& inputs) {
  ExtractorConfig config;
  config.representation = recipe.representation;
  config.include_title = inputs.include_title;
  if (!inputs.stopwords_path.empty())
    config.stopwords = load_stopwords(inputs.stopwords_path);

  const bool wants_dict = recipe.concept_match ||
                          recipe.representation == Representation::concepts ||
                          recipe.representation == Representation::all;
  if (wants_dict && !inputs.dict_path.empty())
    config.matcher = std::make_shared<ConceptMatcher>(
        load_dictionary(inputs.dict_path));

  for (const std::string& path : inputs.lemma_paths)
    merge_external(config.lemmas,
                   load_external_stream(path, Representation::lemmas));
  for (const std::string& path : inputs.np_paths)
    merge_external(config.nps, load_external_stream(path, Representation::nps));
  for (const std::string& path : inputs.dep_paths)
    merge_external(config.deps,
                   load_external_stream(path, Representation::deps));
  return config;
}

void warn_unknown_stream_docs(
    const ExtractorConfig& config, const Corpus& train, const Corpus& test) {
  std::unordered_set<std::string> known;
  for (const Record& r : train.records) known.insert(r.id);
  for (const Record& r : test.records) known.insert(r.id);
  auto check = [&](const std::unordered_map<std::string, TermStream>& map,
                   const char* name) {
    std::size_t unknown = 0;
    for (const auto& kv : map)
      if (!known.count(kv.first)) ++unknown;
    if (unknown > 0)
      std::cerr << "warning: " << unknown << " " << name
                << " stream docs not in any corpus; skipped\n";
  };
  check(config.lemmas, "lemma");
  check(config.nps, "np");
  check(config.deps, "dep");
}

RunOutput::Entry finalize_prediction(const Prediction& pred,
                                     const MetaLabelTable* table,
                                     bool expand_before_cut) {
  if (table == nullptr) return {pred.doc_id, pred.chosen};
  if (!expand_before_cut)
    return {pred.doc_id, expand_ranked(pred.chosen, *table)};
  std::vector<LabelCode> full;
  full.reserve(pred.ranked.size());
  for (const auto& [code, vote] : pred.ranked) full.push_back(code);
  std::vector<LabelCode> expanded = expand_ranked(full, *table);
  if (expanded.size() > pred.n_predicted) expanded.resize(pred.n_predicted);
  return {pred.doc_id, std::move(expanded)};
}

RunResult run_recipe_impl(const RunRecipe& recipe,
                          const std::string& train_path,
                          const std::string& test_path,
                          const std::string& workdir, const RunInputs& inputs,
                          int threads, int depth) {
  if (depth > 16)
    fail(recipe.name, "ensemble nesting deeper than 16 levels (cycle?)");
  fs::create_directories(workdir);

  const std::uint64_t test_h = hash_file(test_path);
  Corpus test = load_corpus(test_path, false);

  RunOutput output;
  std::string pred_path;

  if (recipe.ensemble) {
    const RunRecipe::Ensemble& ens = *recipe.ensemble;
    const fs::path base_dir = fs::path(recipe.source_path).parent_path();

    std::vector<RunOutput> children;
    Fnv1a64 h;
    upd_str(h, "simann.ensemble.v1");
    upd_str(h, ens.op);
    for (const std::string& ref : ens.runs) {
      RunRecipe child = load_recipe(resolve_ref(ref, base_dir));
      RunResult res = run_recipe_impl(child, train_path, test_path, workdir,
                                      inputs, threads, depth + 1);
      upd_u64(h, hash_file(res.prediction_path));
      children.push_back(std::move(res.output));
    }
    upd_u64(h, test_h);

    pred_path = (fs::path(workdir) /
                 (recipe.name + "-" + hex64(h.digest()) + ".pred.json"))
                    .string();
    if (fs::exists(pred_path)) {
      output = load_run(pred_path);
    } else {
      if (ens.op == "intersect") {
        output = children.front();
        for (std::size_t i = 1; i < children.size(); ++i)
          output = intersect_runs(output, children[i]);
      } else {
        output = union_add(children.front(),
                           std::span(children).subspan(1));
      }
      save_run(pred_path, output);
    }
  } else {
    if (auto missing = missing_requirements(recipe, inputs); !missing.empty()) {
      std::string msg = "needs missing inputs:";
      for (const std::string& m : missing) msg += " " + m;
      fail(recipe.name, msg);
    }

    // Everything the trained model depends on.
    Fnv1a64 mh;
    upd_str(mh, "simann.model.v1");
    upd_str(mh, to_string(recipe.representation));
    upd_u64(mh, recipe.min_df);
    upd_f64(mh, recipe.max_df_ratio);
    upd_u64(mh, inputs.include_title ? 1 : 0);
    if (recipe.npmi_threshold)
      upd_f64(mh, *recipe.npmi_threshold);
    else
      upd_str(mh, "no-npmi");
    std::uint64_t train_h = 0;
    if (!recipe.concept_match) {
      train_h = hash_file(train_path);
      upd_u64(mh, train_h);
    }
    if (!inputs.stopwords_path.empty())
      upd_u64(mh, hash_file(inputs.stopwords_path));
    else
      upd_str(mh, "no-stopwords");
    if (!inputs.dict_path.empty())
      upd_u64(mh, hash_file(inputs.dict_path));
    else
      upd_str(mh, "no-dict");
    for (const std::string& path : inputs.lemma_paths)
      upd_u64(mh, hash_file(path));
    for (const std::string& path : inputs.np_paths)
      upd_u64(mh, hash_file(path));
    for (const std::string& path : inputs.dep_paths)
      upd_u64(mh, hash_file(path));

    // Query-side parameters on top of the model.
    Fnv1a64 ph;
    upd_str(ph, "simann.pred.v1");
    upd_u64(ph, mh.digest());
    upd_u64(ph, test_h);
    upd_u64(ph, recipe.k);
    upd_f64(ph, recipe.multiplier);
    if (recipe.fixed_n)
      upd_u64(ph, *recipe.fixed_n);
    else
      upd_str(ph, "no-fixed-n");
    upd_u64(ph, recipe.use_profiles ? 1 : 0);
    upd_u64(ph, recipe.concept_match ? 1 : 0);
    upd_u64(ph, recipe.expand_before_cut ? 1 : 0);

    pred_path = (fs::path(workdir) /
                 (recipe.name + "-" + hex64(ph.digest()) + ".pred.json"))
                    .string();
    if (fs::exists(pred_path)) {
      output = load_run(pred_path);
    } else {
      ExtractorConfig config = make_config(recipe, inputs);
      if (recipe.concept_match) {
        output = concept_match_run(test, *config.matcher, inputs.include_title);
      } else {
        LoadStats load_stats;
        Corpus train = load_corpus(train_path, true, &load_stats);
        if (load_stats.dropped_unlabeled > 0)
          std::cerr << "warning: dropped " << load_stats.dropped_unlabeled
                    << " unlabeled training records\n";
        warn_unknown_stream_docs(config, train, test);

        std::optional<MetaLabelTable> table;
        if (recipe.npmi_threshold) {
          Fnv1a64 nh;
          upd_str(nh, "simann.npmi.v1");
          upd_u64(nh, train_h);
          const std::string npmi_path =
              (fs::path(workdir) / ("npmi-" + hex64(nh.digest()) + ".tsv"))
                  .string();
          std::vector<PairStats> stats;
          if (fs::exists(npmi_path)) {
            stats = read_pair_stats_tsv(npmi_path);
          } else {
            stats = compute_pair_stats(train, threads);
            write_pair_stats_tsv(npmi_path, stats);
          }
          table = build_table(stats, *recipe.npmi_threshold);
          train = rewrite_corpus(train, *table);
        }

        std::vector<TermStream> streams = extract_batch(train, config, threads);
        std::vector<LabelSet> labels;
        labels.reserve(train.records.size());
        for (const Record& r : train.records) labels.push_back(r.labels);

        std::vector<Prediction> predictions;
        if (recipe.use_profiles) {
          Fnv1a64 ih;
          upd_str(ih, "simann.profile-index.v1");
          upd_u64(ih, mh.digest());
          const std::string idx_path =
              (fs::path(workdir) / ("pidx-" + hex64(ih.digest()) + ".bin"))
                  .string();
          InvertedIndex pidx;
          if (fs::exists(idx_path)) {
            pidx = load_index(idx_path);
          } else {
            std::vector<LabelProfile> profiles =
                build_profiles(streams, labels, threads);
            pidx = build_profile_index(profiles, recipe.min_df,
                                       recipe.max_df_ratio, threads);
            save_index(idx_path, pidx);
          }
          predictions = annotate_profiles_batch(test, pidx, config, recipe.k,
                                                *recipe.fixed_n, threads);
        } else {
          Fnv1a64 ih;
          upd_str(ih, "simann.index.v1");
          upd_u64(ih, mh.digest());
          const std::string idx_path =
              (fs::path(workdir) / ("idx-" + hex64(ih.digest()) + ".bin"))
                  .string();
          InvertedIndex index;
          if (fs::exists(idx_path)) {
            index = load_index(idx_path);
          } else {
            DfStats df = compute_df(streams, recipe.min_df,
                                    recipe.max_df_ratio, threads);
            index = build_index(streams, labels, df, threads);
            save_index(idx_path, index);
          }
          AnnotateParams params;
          params.k = recipe.k;
          params.multiplier = recipe.multiplier;
          params.fixed_n = recipe.fixed_n;
          predictions = annotate_batch(test, index, config, params, threads);
        }

        output.docs.reserve(predictions.size());
        for (const Prediction& pred : predictions)
          output.docs.push_back(finalize_prediction(
              pred, table ? &*table : nullptr, recipe.expand_before_cut));
      }
      save_run(pred_path, output);
    }
  }

  RunResult result;
  result.prediction_path = pred_path;
  bool has_gold = false;
  for (const Record& r : test.records)
    if (!r.labels.empty()) {
      has_gold = true;
      break;
    }
  if (has_gold) result.metrics = evaluate(gold_from_corpus(test), output);
  result.output = std::move(output);
  return result;
}

}  // namespace

RunRecipe load_recipe(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const input_error& e) {
    throw recipe_error(e.what());
  }
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    fail(path, std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) fail(path, "top level must be an object");

  static const std::set<std::string> known = {
      "name",          "representation",    "min_df",
      "max_df_ratio",  "k",                 "multiplier",
      "fixed_n",       "npmi_threshold",    "use_profiles",
      "concept_match", "expand_before_cut", "required_streams",
      "ensemble"};
  for (auto it = root.begin(); it != root.end(); ++it)
    if (!known.count(it.key())) fail(path, "unknown key \"" + it.key() + "\"");

  auto require = [&](bool ok, const std::string& msg) {
    if (!ok) fail(path, msg);
  };

  RunRecipe recipe;
  recipe.source_path = path;

  require(root.contains("name") && root["name"].is_string(),
          "needs a string \"name\"");
  recipe.name = root["name"].get<std::string>();
  require(!recipe.name.empty() &&
              std::all_of(recipe.name.begin(), recipe.name.end(),
                          [](unsigned char c) {
                            return std::isalnum(c) || c == '-' || c == '_';
                          }),
          "name must be non-empty [A-Za-z0-9_-]");

  if (root.contains("representation")) {
    require(root["representation"].is_string(),
            "\"representation\" must be a string");
    try {
      recipe.representation =
          representation_from_string(root["representation"].get<std::string>());
    } catch (const input_error& e) {
      fail(path, e.what());
    }
  }
  if (root.contains("min_df")) {
    require(root["min_df"].is_number_unsigned(),
            "\"min_df\" must be a non-negative integer");
    recipe.min_df = root["min_df"].get<std::uint32_t>();
  }
  if (root.contains("max_df_ratio")) {
    require(root["max_df_ratio"].is_number(), "\"max_df_ratio\" must be a number");
    recipe.max_df_ratio = root["max_df_ratio"].get<double>();
    require(recipe.max_df_ratio > 0.0 && recipe.max_df_ratio <= 1.0,
            "\"max_df_ratio\" must lie in (0, 1]");
  }
  if (root.contains("k")) {
    require(root["k"].is_number_unsigned() && root["k"].get<std::uint64_t>() >= 1,
            "\"k\" must be a positive integer");
    recipe.k = root["k"].get<std::size_t>();
  }
  if (root.contains("multiplier")) {
    require(root["multiplier"].is_number(), "\"multiplier\" must be a number");
    recipe.multiplier = root["multiplier"].get<double>();
    require(recipe.multiplier > 0.0, "\"multiplier\" must be positive");
  }
  if (root.contains("fixed_n")) {
    require(root["fixed_n"].is_number_unsigned() &&
                root["fixed_n"].get<std::uint64_t>() >= 1,
            "\"fixed_n\" must be a positive integer");
    recipe.fixed_n = root["fixed_n"].get<std::uint32_t>();
  }
  if (root.contains("npmi_threshold")) {
    require(root["npmi_threshold"].is_number(),
            "\"npmi_threshold\" must be a number");
    recipe.npmi_threshold = root["npmi_threshold"].get<double>();
    require(*recipe.npmi_threshold > -1.0 && *recipe.npmi_threshold <= 1.0,
            "\"npmi_threshold\" must lie in (-1, 1]");
  }
  auto get_flag = [&](const char* key, bool& out) {
    if (!root.contains(key)) return;
    require(root[key].is_boolean(),
            std::string("\"") + key + "\" must be a boolean");
    out = root[key].get<bool>();
  };
  get_flag("use_profiles", recipe.use_profiles);
  get_flag("concept_match", recipe.concept_match);
  get_flag("expand_before_cut", recipe.expand_before_cut);

  if (root.contains("required_streams")) {
    require(root["required_streams"].is_array(),
            "\"required_streams\" must be an array");
    for (const auto& v : root["required_streams"]) {
      require(v.is_string(), "\"required_streams\" entries must be strings");
      std::string name = v.get<std::string>();
      require(name == "lemmas" || name == "nps" || name == "deps" ||
                  name == "dict",
              "required stream must be lemmas, nps, deps, or dict");
      recipe.required_streams.push_back(std::move(name));
    }
  }

  if (root.contains("ensemble")) {
    const json& ens = root["ensemble"];
    require(ens.is_object(), "\"ensemble\" must be an object");
    for (auto it = ens.begin(); it != ens.end(); ++it)
      require(it.key() == "op" || it.key() == "runs",
              "unknown ensemble key \"" + it.key() + "\"");
    require(ens.contains("op") && ens["op"].is_string(),
            "ensemble needs a string \"op\"");
    RunRecipe::Ensemble out;
    out.op = ens["op"].get<std::string>();
    require(out.op == "intersect" || out.op == "union-add",
            "ensemble op must be \"intersect\" or \"union-add\"");
    require(ens.contains("runs") && ens["runs"].is_array() &&
                ens["runs"].size() >= 2,
            "ensemble needs at least two \"runs\"");
    for (const auto& v : ens["runs"]) {
      require(v.is_string(), "ensemble \"runs\" entries must be strings");
      out.runs.push_back(v.get<std::string>());
    }
    recipe.ensemble = std::move(out);
  }

  require(!(recipe.ensemble && (recipe.use_profiles || recipe.concept_match)),
          "ensemble recipes cannot also set use_profiles/concept_match");
  require(!(recipe.use_profiles && recipe.concept_match),
          "use_profiles and concept_match are mutually exclusive");
  if (recipe.use_profiles)
    require(recipe.fixed_n.has_value(), "profiles recipes need \"fixed_n\"");
  return recipe;
}

RunResult run_recipe(const RunRecipe& recipe, const std::string& train_path,
                     const std::string& test_path, const std::string& workdir,
                     const RunInputs& inputs, int threads) {
  return run_recipe_impl(recipe, train_path, test_path, workdir, inputs,
                         threads, 0);
}

}  // namespace simann

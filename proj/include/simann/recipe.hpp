#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "simann/evalens.hpp"
#include "simann/types.hpp"

namespace simann {

// A reproducible run configuration, loaded from a JSON file. Ensemble recipes
// reference other recipes by file name (resolved relative to their own
// directory) or by inline path.
struct RunRecipe {
  std::string name;
  Representation representation = Representation::all;
  std::uint32_t min_df = 5;
  double max_df_ratio = 0.5;
  std::size_t k = 30;
  double multiplier = 1.0;
  std::optional<std::uint32_t> fixed_n;
  std::optional<double> npmi_threshold;
  bool use_profiles = false;
  bool concept_match = false;
  bool expand_before_cut = false;
  std::vector<std::string> required_streams;  // of "lemmas","nps","deps","dict"

  struct Ensemble {
    std::string op;  // "intersect" | "union-add"
    std::vector<std::string> runs;
  };
  std::optional<Ensemble> ensemble;

  std::string source_path;  // where this recipe was loaded from
};

RunRecipe load_recipe(const std::string& path);

// External inputs a recipe may need beyond train/test.
struct RunInputs {
  std::string stopwords_path;
  std::string dict_path;
  std::vector<std::string> lemma_paths;
  std::vector<std::string> np_paths;
  std::vector<std::string> dep_paths;
  bool include_title = true;
};

struct RunResult {
  RunOutput output;
  std::optional<MetricsReport> metrics;  // when the test corpus carries gold
  std::string prediction_path;           // cached artifact inside workdir
};

// Deterministic end-to-end execution. Intermediate artifacts are cached in
// workdir keyed by a content hash of the inputs and the recipe.
RunResult run_recipe(const RunRecipe& recipe, const std::string& train_path,
                     const std::string& test_path, const std::string& workdir,
                     const RunInputs& inputs, int threads);

}  // namespace simann

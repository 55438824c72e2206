#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "simann/corpus.hpp"
#include "simann/evalens.hpp"
#include "simann/index.hpp"
#include "simann/knn.hpp"
#include "simann/metalabels.hpp"
#include "simann/profiles.hpp"
#include "simann/recipe.hpp"
#include "simann/textproc.hpp"
#include "simann/util.hpp"

namespace {

using namespace simann;

struct ExtractorOpts {
  std::string stopwords;
  std::string dict;
  std::vector<std::string> lemmas;
  std::vector<std::string> nps;
  std::vector<std::string> deps;
  bool no_title = false;
};

void add_extractor_opts(CLI::App* cmd, ExtractorOpts& opts) {
  cmd->add_option("--stopwords", opts.stopwords, "Stopword list, one per line");
  cmd->add_option("--dict", opts.dict, "Concept dictionary TSV (code\\tsurface)");
  cmd->add_option("--lemmas", opts.lemmas, "Lemma stream TSV file(s)");
  cmd->add_option("--nps", opts.nps, "Noun-phrase stream TSV file(s)");
  cmd->add_option("--deps", opts.deps, "Dependency stream TSV file(s)");
  cmd->add_flag("--no-title", opts.no_title, "Ignore titles, use abstracts only");
}

ExtractorConfig build_config(const ExtractorOpts& opts, Representation rep) {
  ExtractorConfig config;
  config.representation = rep;
  config.include_title = !opts.no_title;
  if (!opts.stopwords.empty())
    config.stopwords = load_stopwords(opts.stopwords);
  const bool wants_dict =
      rep == Representation::concepts || rep == Representation::all;
  if (wants_dict) {
    if (opts.dict.empty() && rep == Representation::concepts)
      throw input_error("representation \"concepts\" needs --dict");
    if (!opts.dict.empty())
      config.matcher =
          std::make_shared<ConceptMatcher>(load_dictionary(opts.dict));
  }
  auto load_all = [](const std::vector<std::string>& paths, Representation r,
                     std::unordered_map<std::string, TermStream>& map) {
    for (const std::string& path : paths)
      for (TermStream& s : load_external_stream(path, r)) {
        auto it = map.find(s.doc_id);
        if (it == map.end()) {
          map.emplace(s.doc_id, std::move(s));
        } else {
          auto raw = it->second.terms;
          raw.insert(raw.end(), s.terms.begin(), s.terms.end());
          it->second = make_stream(s.doc_id, r, std::move(raw));
        }
      }
  };
  load_all(opts.lemmas, Representation::lemmas, config.lemmas);
  load_all(opts.nps, Representation::nps, config.nps);
  load_all(opts.deps, Representation::deps, config.deps);
  return config;
}

void print_report(const MetricsReport& r) {
  std::printf("MiF\tEBP\tEBR\tEBF\tMaP\tMaR\tMaF\tMiP\tMiR\tAcc\n");
  std::printf("%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\n",
              r.MiF, r.EBP, r.EBR, r.EBF, r.MaP, r.MaR, r.MaF, r.MiP, r.MiR,
              r.Acc);
}

void write_explain_tsv(const std::string& path, const Corpus& corpus,
                       const InvertedIndex& index, const ExtractorConfig& config,
                       const AnnotateParams& params) {
  std::ostringstream out;
  out << "doc_id\ttype\tkey\tscore\tdistance\tweight\tvote\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };
  for (const Record& record : corpus.records) {
    TermStream stream = extract_record(record, config);
    auto results = search(index, stream, params.k + 1);
    auto neighbors = normalize_neighbors(results, record.id, params.k, index);
    for (const Neighbor& n : neighbors)
      out << record.id << "\tneighbor\t" << n.doc_id << '\t' << num(n.score)
          << '\t' << num(n.distance) << '\t' << num(n.weight) << "\t\n";
    if (neighbors.empty()) continue;
    for (const auto& [label, vote] : vote_labels(neighbors))
      out << record.id << "\tvote\t" << label << "\t\t\t\t" << num(vote)
          << '\n';
  }
  write_file(path, out.str());
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Similarity-based multi-label document annotation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // accept global options after the subcommand too
  int threads = 0;
  app.add_option("--threads", threads,
                 "Worker threads (0 = auto; SIMANN_THREADS caps)")
      ->capture_default_str();

  // ---- build-index ----------------------------------------------------
  auto* cmd_build = app.add_subcommand("build-index",
                                       "Index a labeled corpus");
  struct {
    std::string corpus, rep = "stems", out, df_out;
    std::uint32_t min_df = 5;
    double max_df_ratio = 0.5;
    ExtractorOpts ex;
  } bi;
  cmd_build->add_option("--corpus", bi.corpus, "Training corpus JSONL")
      ->required();
  cmd_build->add_option("--rep", bi.rep,
                        "stems|lemmas|nps|deps|concepts|all")
      ->capture_default_str();
  cmd_build->add_option("--min-df", bi.min_df, "Keep terms with df > min-df")
      ->capture_default_str();
  cmd_build->add_option("--max-df-ratio", bi.max_df_ratio,
                        "Keep terms with df <= ratio * n_docs")
      ->capture_default_str();
  cmd_build->add_option("--out", bi.out, "Output index file")->required();
  cmd_build->add_option("--df-out", bi.df_out, "Also write DF table TSV");
  add_extractor_opts(cmd_build, bi.ex);
  cmd_build->callback([&] {
    Representation rep = representation_from_string(bi.rep);
    LoadStats stats;
    Corpus corpus = load_corpus(bi.corpus, true, &stats);
    if (stats.dropped_unlabeled > 0)
      std::cerr << "warning: dropped " << stats.dropped_unlabeled
                << " unlabeled records\n";
    ExtractorConfig config = build_config(bi.ex, rep);
    auto streams = extract_batch(corpus, config, threads);
    DfStats df = compute_df(streams, bi.min_df, bi.max_df_ratio, threads);
    if (!bi.df_out.empty()) write_df_tsv(bi.df_out, df);
    std::vector<LabelSet> labels;
    labels.reserve(corpus.records.size());
    for (const Record& r : corpus.records) labels.push_back(r.labels);
    InvertedIndex index = build_index(streams, labels, df, threads);
    save_index(bi.out, index);
    std::cout << "indexed " << index.n_docs << " docs, "
              << index.terms.size() << " terms -> " << bi.out << "\n";
  });

  // ---- annotate --------------------------------------------------------
  auto* cmd_ann = app.add_subcommand("annotate",
                                     "k-NN annotate a corpus against an index");
  struct {
    std::string index, input, out, explain;
    std::size_t k = 30;
    double multiplier = 1.0;
    std::optional<std::uint32_t> fixed_n;
    ExtractorOpts ex;
  } an;
  cmd_ann->add_option("--index", an.index, "Index file")->required();
  cmd_ann->add_option("--input", an.input, "Corpus JSONL to annotate")
      ->required();
  cmd_ann->add_option("--k", an.k, "Neighbors")->capture_default_str();
  cmd_ann->add_option("--multiplier", an.multiplier,
                      "Label-count multiplier")
      ->capture_default_str();
  cmd_ann->add_option("--fixed-n", an.fixed_n,
                      "Fixed number of labels instead of the regression");
  cmd_ann->add_option("--out", an.out, "Prediction JSON")->required();
  cmd_ann->add_option("--explain", an.explain,
                      "Also write neighbor/vote diagnostics TSV");
  add_extractor_opts(cmd_ann, an.ex);
  cmd_ann->callback([&] {
    if (an.k < 1) throw input_error("--k must be >= 1");
    if (an.multiplier <= 0) throw input_error("--multiplier must be positive");
    InvertedIndex index = load_index(an.index);
    ExtractorConfig config = build_config(an.ex, index.representation);
    Corpus corpus = load_corpus(an.input, false);
    AnnotateParams params{an.k, an.multiplier, an.fixed_n};
    auto predictions = annotate_batch(corpus, index, config, params, threads);
    save_run(an.out, run_from_predictions(predictions));
    if (!an.explain.empty())
      write_explain_tsv(an.explain, corpus, index, config, params);
    std::size_t no_match = 0;
    for (const auto& p : predictions) no_match += p.no_match;
    std::cout << "annotated " << predictions.size() << " docs ("
              << no_match << " without neighbors) -> " << an.out << "\n";
  });

  // ---- npmi -------------------------------------------------------------
  auto* cmd_npmi = app.add_subcommand("npmi",
                                      "Label pair co-occurrence statistics");
  struct {
    std::string corpus, out;
  } np;
  cmd_npmi->add_option("--corpus", np.corpus, "Labeled corpus JSONL")
      ->required();
  cmd_npmi->add_option("--out", np.out, "Output TSV")->required();
  cmd_npmi->callback([&] {
    Corpus corpus = load_corpus(np.corpus, true);
    auto stats = compute_pair_stats(corpus, threads);
    write_pair_stats_tsv(np.out, stats);
    std::cout << "wrote " << stats.size() << " label pairs -> " << np.out
              << "\n";
  });

  // ---- rewrite ----------------------------------------------------------
  auto* cmd_rw = app.add_subcommand(
      "rewrite", "Fuse co-occurring labels into meta-labels");
  struct {
    std::string corpus, table, out;
    double threshold = 0.25;
  } rw;
  cmd_rw->add_option("--corpus", rw.corpus, "Labeled corpus JSONL")->required();
  cmd_rw->add_option("--table", rw.table, "Pair statistics TSV (from npmi)")
      ->required();
  cmd_rw->add_option("--threshold", rw.threshold, "NPMI threshold")
      ->capture_default_str();
  cmd_rw->add_option("--out", rw.out, "Rewritten corpus JSONL")->required();
  cmd_rw->callback([&] {
    Corpus corpus = load_corpus(rw.corpus, true);
    MetaLabelTable table =
        build_table(read_pair_stats_tsv(rw.table), rw.threshold);
    save_corpus(rw.out, rewrite_corpus(corpus, table));
    std::cout << "rewrote " << corpus.n_docs() << " docs with "
              << table.entries.size() << " meta-labels -> " << rw.out << "\n";
  });

  // ---- profiles ----------------------------------------------------------
  auto* cmd_prof = app.add_subcommand("profiles", "Label-profile annotation");
  cmd_prof->require_subcommand(1);

  auto* cmd_pb = cmd_prof->add_subcommand("build",
                                          "Build a label-profile index");
  struct {
    std::string corpus, rep = "all", out;
    std::uint32_t min_df = 5;
    double max_df_ratio = 0.5;
    ExtractorOpts ex;
  } pb;
  cmd_pb->add_option("--corpus", pb.corpus, "Labeled corpus JSONL")->required();
  cmd_pb->add_option("--rep", pb.rep, "stems|lemmas|nps|deps|concepts|all")
      ->capture_default_str();
  cmd_pb->add_option("--min-df", pb.min_df, "Profile-level df floor")
      ->capture_default_str();
  cmd_pb->add_option("--max-df-ratio", pb.max_df_ratio,
                     "Profile-level df ceiling ratio")
      ->capture_default_str();
  cmd_pb->add_option("--out", pb.out, "Output index file")->required();
  add_extractor_opts(cmd_pb, pb.ex);
  cmd_pb->callback([&] {
    Representation rep = representation_from_string(pb.rep);
    Corpus corpus = load_corpus(pb.corpus, true);
    ExtractorConfig config = build_config(pb.ex, rep);
    auto streams = extract_batch(corpus, config, threads);
    std::vector<LabelSet> labels;
    labels.reserve(corpus.records.size());
    for (const Record& r : corpus.records) labels.push_back(r.labels);
    auto profiles = build_profiles(streams, labels, threads);
    InvertedIndex index =
        build_profile_index(profiles, pb.min_df, pb.max_df_ratio, threads);
    save_index(pb.out, index);
    std::cout << "built " << profiles.size() << " label profiles -> " << pb.out
              << "\n";
  });

  auto* cmd_pa = cmd_prof->add_subcommand("annotate",
                                          "Annotate against a profile index");
  struct {
    std::string index, input, out;
    std::size_t k = 15;
    std::uint32_t fixed_n = 10;
    ExtractorOpts ex;
  } pa;
  cmd_pa->add_option("--index", pa.index, "Profile index file")->required();
  cmd_pa->add_option("--input", pa.input, "Corpus JSONL to annotate")
      ->required();
  cmd_pa->add_option("--k", pa.k, "Profile neighbors")->capture_default_str();
  cmd_pa->add_option("--fixed-n", pa.fixed_n, "Labels per document")
      ->capture_default_str();
  cmd_pa->add_option("--out", pa.out, "Prediction JSON")->required();
  add_extractor_opts(cmd_pa, pa.ex);
  cmd_pa->callback([&] {
    if (pa.k < 1) throw input_error("--k must be >= 1");
    if (pa.fixed_n < 1) throw input_error("--fixed-n must be >= 1");
    InvertedIndex index = load_index(pa.index);
    ExtractorConfig config = build_config(pa.ex, index.representation);
    Corpus corpus = load_corpus(pa.input, false);
    auto predictions = annotate_profiles_batch(corpus, index, config, pa.k,
                                               pa.fixed_n, threads);
    save_run(pa.out, run_from_predictions(predictions));
    std::cout << "annotated " << predictions.size() << " docs -> " << pa.out
              << "\n";
  });

  // ---- concept-run --------------------------------------------------------
  auto* cmd_cr = app.add_subcommand(
      "concept-run", "Predict by exact dictionary matches alone");
  struct {
    std::string corpus, dict, out;
    bool no_title = false;
  } cr;
  cmd_cr->add_option("--corpus", cr.corpus, "Corpus JSONL")->required();
  cmd_cr->add_option("--dict", cr.dict, "Concept dictionary TSV")->required();
  cmd_cr->add_option("--out", cr.out, "Prediction JSON")->required();
  cmd_cr->add_flag("--no-title", cr.no_title,
                   "Ignore titles, use abstracts only");
  cmd_cr->callback([&] {
    Corpus corpus = load_corpus(cr.corpus, false);
    ConceptMatcher matcher(load_dictionary(cr.dict));
    save_run(cr.out, concept_match_run(corpus, matcher, !cr.no_title));
    std::cout << "matched " << corpus.n_docs() << " docs -> " << cr.out << "\n";
  });

  // ---- ensemble -------------------------------------------------------
  auto* cmd_ens = app.add_subcommand("ensemble", "Combine prediction runs");
  struct {
    std::string op, out;
    std::vector<std::string> runs;
  } en;
  cmd_ens->add_option("op", en.op, "intersect | union-add")
      ->required()
      ->check(CLI::IsMember({"intersect", "union-add"}));
  cmd_ens->add_option("--runs", en.runs, "Prediction JSON files (>= 2)")
      ->required()
      ->expected(2, -1);
  cmd_ens->add_option("--out", en.out, "Combined prediction JSON")->required();
  cmd_ens->callback([&] {
    std::vector<RunOutput> runs;
    runs.reserve(en.runs.size());
    for (const std::string& path : en.runs) runs.push_back(load_run(path));
    RunOutput combined;
    if (en.op == "intersect") {
      combined = runs.front();
      for (std::size_t i = 1; i < runs.size(); ++i)
        combined = intersect_runs(combined, runs[i]);
    } else {
      combined = union_add(runs.front(), std::span(runs).subspan(1));
    }
    save_run(en.out, combined);
    std::cout << "combined " << runs.size() << " runs -> " << en.out << "\n";
  });

  // ---- evaluate -------------------------------------------------------
  auto* cmd_eval = app.add_subcommand("evaluate",
                                      "Score predictions against gold labels");
  struct {
    std::string gold, pred, out;
  } ev;
  cmd_eval->add_option("--gold", ev.gold, "Gold corpus JSONL")->required();
  cmd_eval->add_option("--pred", ev.pred, "Prediction JSON")->required();
  cmd_eval->add_option("--out", ev.out, "Report TSV");
  cmd_eval->callback([&] {
    Corpus gold = load_corpus(ev.gold, false);
    MetricsReport report = evaluate(gold_from_corpus(gold), load_run(ev.pred));
    if (!ev.out.empty()) write_report_tsv(ev.out, report);
    print_report(report);
  });

  // ---- run ----------------------------------------------------------------
  auto* cmd_run = app.add_subcommand("run", "Execute a run recipe end to end");
  struct {
    std::string recipe, train, test, workdir = "work", out, report;
    std::uint64_t seed = 0;
    ExtractorOpts ex;
  } rn;
  cmd_run->add_option("--recipe", rn.recipe, "Recipe JSON file")->required();
  cmd_run->add_option("--train", rn.train, "Training corpus JSONL")->required();
  cmd_run->add_option("--test", rn.test, "Test corpus JSONL")->required();
  cmd_run->add_option("--workdir", rn.workdir, "Artifact cache directory")
      ->capture_default_str();
  cmd_run->add_option("--out", rn.out, "Copy of the prediction JSON");
  cmd_run->add_option("--report", rn.report, "Metrics report TSV");
  cmd_run->add_option("--seed", rn.seed,
                      "Accepted for interface parity; the pipeline is "
                      "deterministic and ignores it");
  add_extractor_opts(cmd_run, rn.ex);
  cmd_run->callback([&] {
    RunRecipe recipe = load_recipe(rn.recipe);
    RunInputs inputs;
    inputs.stopwords_path = rn.ex.stopwords;
    inputs.dict_path = rn.ex.dict;
    inputs.lemma_paths = rn.ex.lemmas;
    inputs.np_paths = rn.ex.nps;
    inputs.dep_paths = rn.ex.deps;
    inputs.include_title = !rn.ex.no_title;
    RunResult result =
        run_recipe(recipe, rn.train, rn.test, rn.workdir, inputs, threads);
    if (!rn.out.empty()) save_run(rn.out, result.output);
    std::cout << "run " << recipe.name << ": " << result.output.docs.size()
              << " docs"
              << (rn.out.empty() ? " -> " + result.prediction_path
                                 : " -> " + rn.out)
              << "\n";
    if (result.metrics) {
      if (!rn.report.empty()) write_report_tsv(rn.report, *result.metrics);
      print_report(*result.metrics);
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const simann::input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const simann::recipe_error& e) {
    std::cerr << "recipe error: " << e.what() << "\n";
    return 3;
  } catch (const simann::internal_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}

#include "dualbli/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "dualbli/config.hpp"
#include "dualbli/evaluation.hpp"
#include "dualbli/lexicon.hpp"
#include "dualbli/log.hpp"
#include "dualbli/synthetic.hpp"
#include "dualbli/text_matrix.hpp"

namespace dualbli {

namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw DataError("write failed for " + path.string());
}

std::vector<std::string> read_words(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open word list '" + path + "'");
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    for (auto field : split_fields(line, " \t\r")) words.emplace_back(field);
  }
  return words;
}

EmbeddingSpace load_space(const std::string& path, const RunSettings& settings, const std::string& tag) {
  return normalize(load_text(path, settings.max_vocab, tag), settings.normalize);
}

struct SynthArgs {
  std::size_t n = 0;
  long d = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

struct TrainArgs {
  std::string src, tgt, out, config;
  std::optional<std::size_t> epochs;
  std::optional<double> cycle_weight;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

struct RefineArgs {
  std::string checkpoint, src, tgt, out, config;
  std::optional<std::size_t> rounds;
  std::optional<std::size_t> dict_size;
};

struct TranslateArgs {
  std::string checkpoint, src, tgt, words, config;
  bool reverse = false;
};

struct EvaluateArgs {
  std::string checkpoint, src, tgt, dict, out, config;
  bool both_directions = false;
};

RunSettings resolve_settings(const std::string& config_path) {
  RunSettings settings;
  if (!config_path.empty()) apply_settings(settings, load_key_values(config_path));
  return settings;
}

void write_manifest(const fs::path& dir, const std::string& command, const std::vector<std::pair<std::string, std::string>>& inputs,
                    const RunSettings& settings) {
  std::string text = "command=" + command + "\n";
  for (const auto& [k, v] : inputs) text += k + "=" + v + "\n";
  text += render_settings(settings);
  write_text(dir / "run.manifest", text);
}

int do_synth(const SynthArgs& a, std::ostream& out) {
  const SyntheticPair pair = generate(a.n, static_cast<Eigen::Index>(a.d), a.sigma, a.seed);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  save_text(pair.source, (dir / "src.vec").string());
  save_text(pair.target, (dir / "tgt.vec").string());
  save_lexicon(pair.gold, (dir / "gold.dict").string());
  std::string manifest = "command=synth\n";
  manifest += "n=" + std::to_string(a.n) + "\n";
  manifest += "d=" + std::to_string(a.d) + "\n";
  manifest += "sigma=" + format_number(a.sigma, 17) + "\n";
  manifest += "seed=" + std::to_string(a.seed) + "\n";
  write_text(dir / "run.manifest", manifest);
  out << "wrote " << (dir / "src.vec").string() << ' ' << (dir / "tgt.vec").string() << ' '
      << (dir / "gold.dict").string() << '\n';
  return exit_ok;
}

int do_train(const TrainArgs& a, std::ostream& out) {
  RunSettings settings = resolve_settings(a.config);
  if (a.epochs) settings.train.epochs = *a.epochs;
  if (a.cycle_weight) settings.train.cycle_weight = *a.cycle_weight;
  if (a.seed) settings.train.seed = *a.seed;
  settings.train.validate();
  set_verbose(a.verbose);
  const EmbeddingSpace src = load_space(a.src, settings, "src");
  const EmbeddingSpace tgt = load_space(a.tgt, settings, "tgt");
  const TrainRun run = train(settings.train, src, tgt);
  write_checkpoint(run, a.out);
  write_manifest(a.out, "train", {{"src", a.src}, {"tgt", a.tgt}}, settings);
  if (run.best) {
    out << "selected_epoch=" << run.best->epoch << '\n'
        << "selection_score=" << format_number(run.best->score, 12) << '\n';
  }
  return exit_ok;
}

int do_refine(const RefineArgs& a, std::ostream& out) {
  RunSettings settings = resolve_settings(a.config);
  if (a.rounds) settings.refine_rounds = *a.rounds;
  if (a.dict_size) settings.refine_dict_size = *a.dict_size;
  const EmbeddingSpace src = load_space(a.src, settings, "src");
  const EmbeddingSpace tgt = load_space(a.tgt, settings, "tgt");
  const MappingPair maps = load_mapping_pair(a.checkpoint);
  const RefineResult result = refine_procrustes(maps.f_map, maps.g_map, src, tgt, settings.refine_rounds,
                                                settings.refine_dict_size, settings.train.selection.k);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  save_mapping(result.maps.f_map, (dir / "F.map").string());
  save_mapping(result.maps.g_map, (dir / "G.map").string());
  write_manifest(dir, "refine", {{"checkpoint", a.checkpoint}, {"src", a.src}, {"tgt", a.tgt}}, settings);
  out << "rounds_completed=" << result.rounds_completed << '\n';
  for (std::size_t r = 0; r < result.forward_dictionary_sizes.size(); ++r) {
    out << "round_" << r + 1 << "_dictionary=" << result.forward_dictionary_sizes[r] << ','
        << result.backward_dictionary_sizes[r] << '\n';
  }
  return exit_ok;
}

int do_translate(const TranslateArgs& a, std::ostream& out) {
  const RunSettings settings = resolve_settings(a.config);
  const EmbeddingSpace src = load_space(a.src, settings, "src");
  const EmbeddingSpace tgt = load_space(a.tgt, settings, "tgt");
  const MappingPair maps = load_mapping_pair(a.checkpoint);
  const EmbeddingSpace& from = a.reverse ? tgt : src;
  const EmbeddingSpace& to = a.reverse ? src : tgt;
  const LinearMapping& map = a.reverse ? maps.g_map : maps.f_map;

  std::vector<std::string> queries;
  std::vector<std::size_t> ids;
  for (const auto& w : read_words(a.words)) {
    if (auto id = from.find(w)) {
      queries.push_back(w);
      ids.push_back(*id);
    } else {
      warn("query word '" + w + "' is not in the vocabulary; skipped");
    }
  }
  const CslsIndex index = build_mapped_index(map, from, to, settings.train.selection.k);
  const auto hits = translate_scored(index, ids);
  for (std::size_t i = 0; i < hits.size(); ++i) {
    out << queries[i] << '\t' << to.token(hits[i].target_id) << '\t' << format_number(hits[i].score, 9) << '\n';
  }
  return exit_ok;
}

int do_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const RunSettings settings = resolve_settings(a.config);
  const EmbeddingSpace src = load_space(a.src, settings, "src");
  const EmbeddingSpace tgt = load_space(a.tgt, settings, "tgt");
  const BilingualLexicon lexicon = load_lexicon(a.dict);
  const MappingPair maps = load_mapping_pair(a.checkpoint);
  const std::size_t k = settings.train.selection.k;

  const CslsIndex forward = build_mapped_index(maps.f_map, src, tgt, k);
  const CslsIndex backward = build_mapped_index(maps.g_map, tgt, src, k);
  const EvalReport fwd = precision_at_1(forward, src, tgt, lexicon);
  const double inconsistency = inconsistency_rate(forward, backward, settings.train.selection.eval_vocab);

  std::ostringstream report;
  report << "p_at_1_forward=" << format_number(fwd.p_at_1, 9) << '\n';
  if (a.both_directions) {
    const EvalReport bwd = precision_at_1(backward, tgt, src, lexicon.reversed());
    report << "p_at_1_backward=" << format_number(bwd.p_at_1, 9) << '\n';
  } else {
    report << "p_at_1_backward=skipped\n";
  }
  report << "inconsistency_rate=" << format_number(inconsistency, 9) << '\n'
         << "evaluated=" << fwd.evaluated << '\n'
         << "skipped_oov=" << fwd.skipped_oov << '\n';
  if (!a.out.empty()) {
    const fs::path path(a.out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_text(path, report.str());
  }
  out << report.str();
  return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised bilingual lexicon induction with dual adversarial mappings", "dualbli"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a rotated synthetic language pair");
  synth_cmd->add_option("--n", synth.n, "vocabulary size")->required()->check(CLI::Range(std::size_t{2}, SIZE_MAX));
  synth_cmd->add_option("--d", synth.d, "dimension")->required()->check(CLI::Range(2L, 1L << 20));
  synth_cmd->add_option("--sigma", synth.sigma, "noise standard deviation")->required()->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--seed", synth.seed, "random seed")->required();
  synth_cmd->add_option("--out", synth.out, "output directory")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "learn the two mappings");
  train_cmd->add_option("--src", tr.src, "source embeddings")->required();
  train_cmd->add_option("--tgt", tr.tgt, "target embeddings")->required();
  train_cmd->add_option("--out", tr.out, "checkpoint directory")->required();
  train_cmd->add_option("--epochs", tr.epochs, "number of epochs")->check(CLI::PositiveNumber);
  train_cmd->add_option("--cycle-weight", tr.cycle_weight, "weight of the cycle terms")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--seed", tr.seed, "random seed");
  train_cmd->add_option("--config", tr.config, "key=value settings file");
  train_cmd->add_flag("--verbose", tr.verbose, "log per-epoch metrics");

  RefineArgs rf;
  auto* refine_cmd = app.add_subcommand("refine", "iterative Procrustes refinement of a checkpoint");
  refine_cmd->add_option("--checkpoint", rf.checkpoint, "checkpoint directory")->required();
  refine_cmd->add_option("--src", rf.src, "source embeddings")->required();
  refine_cmd->add_option("--tgt", rf.tgt, "target embeddings")->required();
  refine_cmd->add_option("--out", rf.out, "output directory")->required();
  refine_cmd->add_option("--rounds", rf.rounds, "refinement rounds")->check(CLI::NonNegativeNumber);
  refine_cmd->add_option("--dict-size", rf.dict_size, "candidate words per side")->check(CLI::PositiveNumber);
  refine_cmd->add_option("--config", rf.config, "key=value settings file");

  TranslateArgs tl;
  auto* translate_cmd = app.add_subcommand("translate", "CSLS translations of query words");
  translate_cmd->add_option("--checkpoint", tl.checkpoint, "checkpoint directory")->required();
  translate_cmd->add_option("--src", tl.src, "source embeddings")->required();
  translate_cmd->add_option("--tgt", tl.tgt, "target embeddings")->required();
  translate_cmd->add_option("--words", tl.words, "file of query words")->required();
  translate_cmd->add_flag("--reverse", tl.reverse, "translate target words back with G");
  translate_cmd->add_option("--config", tl.config, "key=value settings file");

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "precision@1 and inconsistency against a lexicon");
  evaluate_cmd->add_option("--checkpoint", ev.checkpoint, "checkpoint directory")->required();
  evaluate_cmd->add_option("--src", ev.src, "source embeddings")->required();
  evaluate_cmd->add_option("--tgt", ev.tgt, "target embeddings")->required();
  evaluate_cmd->add_option("--dict", ev.dict, "gold lexicon")->required();
  evaluate_cmd->add_flag("--both-directions", ev.both_directions, "also score G on the reversed lexicon");
  evaluate_cmd->add_option("--out", ev.out, "report file");
  evaluate_cmd->add_option("--config", ev.config, "key=value settings file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return exit_usage;
  }

  try {
    if (synth_cmd->parsed()) return do_synth(synth, out);
    if (train_cmd->parsed()) return do_train(tr, out);
    if (refine_cmd->parsed()) return do_refine(rf, out);
    if (translate_cmd->parsed()) return do_translate(tl, out);
    if (evaluate_cmd->parsed()) return do_evaluate(ev, out);
  } catch (const NumericalError& e) {
    err << "numerical error at iteration " << e.iteration() << ": " << e.what() << '\n';
    return exit_numerical;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return exit_data;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return exit_data;
  }
  return exit_usage;
}

}  // namespace dualbli

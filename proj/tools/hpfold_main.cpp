#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hpfold/encode.hpp"
#include "hpfold/fold_record.hpp"
#include "hpfold/hp.hpp"
#include "hpfold/net.hpp"
#include "hpfold/oracle.hpp"
#include "hpfold/render.hpp"
#include "hpfold/run_config.hpp"
#include "hpfold/search.hpp"
#include "hpfold/selfplay.hpp"

namespace {

using namespace hpfold;

// Exit codes: 0 success, 1 usage, 2 bad data or config, 3 internal.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

std::atomic<bool> g_stop{false};

void handle_sigint(int) { g_stop.store(true); }

// App-level flags shared by the subcommands.
struct GlobalArgs {
  uint64_t seed = 0;
  bool seed_set = false;
  std::string config_path;
  std::string run_dir;
  int workers = 0;  // 0: take the config's value
};

struct FoldArgs {
  std::vector<std::string> sequences;
  std::string file;
  std::string checkpoint;
  bool untrained = false;
  int grid_size = 25;
  int blocks = 4;
  int channels = 16;
  int simulations = 1000;
  double c_alpha = 1.0;
  std::string records;
  std::string svg;
  bool text = false;
};

struct TrainArgs {
  std::string init_path;
  double train_seconds = -1;
  long long max_steps = -1;
};

struct BenchArgs {
  std::vector<std::string> engines = {"oracle", "rollout"};
  std::string file;
  std::string checkpoint;
  int simulations = 1000;
  int oracle_guard = 16;
  std::string out;
};

struct OracleArgs {
  std::string sequence;
  bool count_optima = false;
  bool no_prune = false;
  int guard = 16;
};

struct RenderArgs {
  std::string record_file;
  int index = 0;
  std::string format = "svg";
  std::string out;
};

struct CorpusArgs {
  CorpusSpec spec;
  std::string out;
};

std::string moves_text(const std::vector<RelativeMove>& moves) {
  std::string s;
  for (RelativeMove m : moves) s.push_back(to_char(m));
  return s;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw ParseError("cannot write file: " + path);
  out << text;
  if (!out) throw ParseError("failed writing file: " + path);
}

int cmd_fold(const GlobalArgs& global, const FoldArgs& args) {
  if (args.checkpoint.empty() && !args.untrained)
    throw ConfigError("fold needs --checkpoint or --untrained");

  std::shared_ptr<const NetworkF> net;
  if (!args.checkpoint.empty()) {
    net = std::make_shared<const NetworkF>(
        NetworkF::load_checkpoint(args.checkpoint));
  } else {
    NetworkConfig nc;
    nc.grid_size = args.grid_size;
    nc.residual_blocks = args.blocks;
    nc.channels = args.channels;
    net = std::make_shared<const NetworkF>(nc, mix_seed(global.seed, 0));
  }
  const int board_radius = vertex_radius(net->config().grid_size);

  SearchConfig sc;
  sc.simulations = args.simulations;
  sc.c_alpha = args.c_alpha;

  std::vector<HpSequence> seqs;
  for (const std::string& text : args.sequences)
    seqs.push_back(HpSequence::parse(text));
  if (!args.file.empty())
    for (HpSequence& s : read_sequence_file(args.file))
      seqs.push_back(std::move(s));
  if (seqs.empty())
    throw ConfigError("no sequences given; pass them as arguments or --file");

  std::string record_lines;
  std::string svg;
  for (size_t i = 0; i < seqs.size(); ++i) {
    auto seq = std::make_shared<const HpSequence>(seqs[i]);
    NetEvaluator evaluator(net);
    EpisodeRecord episode =
        fold_episode(seq, evaluator, sc, /*noise=*/false, board_radius,
                     mix_seed(global.seed, 100 + i));
    FoldState state = FoldState::replay(*seq, episode.moves, board_radius);
    FoldRecord record = FoldRecord::from_state(state);
    record_lines += record.to_line() + "\n";
    std::printf("%s contacts=%d energy=%d upper_bound=%d kind=%s moves=%s\n",
                seq->to_string().c_str(), record.contacts, record.energy,
                -upper_bound(*seq),
                episode.terminal == TerminalKind::Complete ? "complete"
                                                           : "trapped",
                moves_text(record.moves).c_str());
    if (args.text) std::fputs(render_text(state).c_str(), stdout);
    if (!args.svg.empty() && i == 0) svg = render_svg(state);
  }
  if (!args.records.empty()) write_text_file(args.records, record_lines);
  if (!args.svg.empty()) write_text_file(args.svg, svg);
  return kExitOk;
}

int cmd_train(const GlobalArgs& global, const TrainArgs& args) {
  if (!args.init_path.empty()) {
    write_run_config(args.init_path, default_run_config());
    std::printf("wrote config template: %s\n", args.init_path.c_str());
    return kExitOk;
  }
  if (global.config_path.empty())
    throw ConfigError("train needs --config (or --init to create one)");

  RunConfig config = read_run_config(global.config_path);
  if (!global.run_dir.empty()) config.run_dir = global.run_dir;
  if (global.seed_set) config.training.seed = global.seed;
  if (global.workers > 0) config.training.workers = global.workers;
  if (args.train_seconds >= 0) config.training.train_seconds = args.train_seconds;
  if (args.max_steps >= 0)
    config.training.max_steps = static_cast<uint64_t>(args.max_steps);
  config.training.validate();
  if (config.run_dir.empty()) throw ConfigError("run_dir must not be empty");

  // A resumed run must be the same run: everything but the stop budgets
  // and worker count has to match the recorded snapshot.
  std::filesystem::path run_dir(config.run_dir);
  std::filesystem::path snapshot_path = run_dir / "config.json";
  if (std::filesystem::exists(snapshot_path)) {
    RunConfig previous = read_run_config(snapshot_path);
    RunConfig masked = previous;
    masked.training.train_seconds = config.training.train_seconds;
    masked.training.max_steps = config.training.max_steps;
    masked.training.workers = config.training.workers;
    if (!(masked == config))
      throw ConfigError(
          "run directory was created with different settings; use a fresh "
          "--run-dir or the original config");
  }
  std::filesystem::create_directories(run_dir);
  write_run_config(snapshot_path, config);

  std::signal(SIGINT, handle_sigint);
  std::signal(SIGTERM, handle_sigint);
  TrainingSummary summary = run_training(config.training, run_dir, &g_stop);
  std::printf(
      "training %s: steps=%llu episodes=%llu gates=%d accepted=%d\n"
      "champion: %s\n",
      g_stop.load() ? "interrupted" : "finished",
      static_cast<unsigned long long>(summary.steps),
      static_cast<unsigned long long>(summary.episodes), summary.gates,
      summary.accepted_gates, summary.champion_checkpoint.string().c_str());
  return kExitOk;
}

int cmd_bench(const GlobalArgs& global, const BenchArgs& args) {
  std::vector<BenchmarkEntry> entries =
      args.file.empty() ? parse_benchmark_lines(bundled_benchmark_text())
                        : read_benchmark_file(args.file);

  const uint64_t seed = global.seed;
  std::shared_ptr<const NetworkF> net;
  std::vector<std::pair<std::string, FoldEngine>> engines;
  for (const std::string& name : args.engines) {
    if (name == "oracle") {
      OracleOptions opts;
      opts.guard_length = args.oracle_guard;
      engines.emplace_back("oracle", [opts](const BenchmarkEntry& entry) {
        EngineOutcome outcome;
        try {
          OracleResult result = oracle_solve(entry.sequence, opts);
          outcome.ok = true;
          outcome.contacts = result.best_contacts;
        } catch (const GuardError&) {
          outcome.error = "skipped (guard)";
        }
        return outcome;
      });
    } else if (name == "rollout") {
      RolloutConfig rc;
      rc.simulations = args.simulations;
      engines.emplace_back(
          "rollout-uct",
          [rc, seed, row = uint64_t{0}](const BenchmarkEntry& entry) mutable {
            auto seq = std::make_shared<const HpSequence>(entry.sequence);
            EpisodeRecord episode = rollout_uct_fold(
                seq, rc, seq->length(), mix_seed(seed, 7'000'000 + row++));
            return EngineOutcome{true, episode.score.contacts, ""};
          });
    } else if (name == "net") {
      if (args.checkpoint.empty())
        throw ConfigError("the net engine needs --checkpoint");
      if (!net)
        net = std::make_shared<const NetworkF>(
            NetworkF::load_checkpoint(args.checkpoint));
      SearchConfig sc;
      sc.simulations = args.simulations;
      int radius = vertex_radius(net->config().grid_size);
      engines.emplace_back(
          "net", [net, sc, radius, seed,
                  row = uint64_t{0}](const BenchmarkEntry& entry) mutable {
            auto seq = std::make_shared<const HpSequence>(entry.sequence);
            NetEvaluator evaluator(net);
            EpisodeRecord episode =
                fold_episode(seq, evaluator, sc, /*noise=*/false, radius,
                             mix_seed(seed, 8'000'000 + row++));
            return EngineOutcome{true, episode.score.contacts, ""};
          });
    } else {
      throw ConfigError("unknown engine '" + name +
                        "' (expected oracle, rollout, or net)");
    }
  }

  ComparisonTable table = compare_engines(entries, engines);

  // Soundness backstop: no legal fold can beat the parity bound, so a
  // lower energy means the engine or scoring is broken.
  for (const auto& row : table.rows) {
    for (size_t e = 0; e < row.outcomes.size(); ++e) {
      const EngineOutcome& cell = row.outcomes[e];
      if (cell.ok && -cell.contacts < row.upper_bound_energy) {
        std::fprintf(stderr,
                     "hard failure: engine %s reports energy %d below the "
                     "bound %d on %s\n",
                     table.engine_names[e].c_str(), -cell.contacts,
                     row.upper_bound_energy, row.id.c_str());
        return kExitInternal;
      }
    }
  }

  std::string text = table.to_text();
  std::fputs(text.c_str(), stdout);
  if (!args.out.empty()) write_text_file(args.out, text);
  return kExitOk;
}

int cmd_oracle(const OracleArgs& args) {
  HpSequence seq = HpSequence::parse(args.sequence);
  OracleOptions opts;
  opts.prune = !args.no_prune;
  opts.count_optima = args.count_optima;
  opts.guard_length = args.guard;
  OracleResult result;
  try {
    result = oracle_solve(seq, opts);
  } catch (const GuardError& e) {
    std::fprintf(stderr, "%s\nRaise --guard to force the run.\n", e.what());
    return kExitData;
  }
  std::printf("sequence=%s length=%d\n", seq.to_string().c_str(),
              seq.length());
  std::printf("optimum contacts=%d energy=%d upper_bound=%d\n",
              result.best_contacts, result.best_energy(), -upper_bound(seq));
  std::printf("moves=%s nodes=%llu\n", moves_text(result.best_moves).c_str(),
              static_cast<unsigned long long>(result.nodes));
  if (args.count_optima)
    std::printf("optimal_folds=%llu\n",
                static_cast<unsigned long long>(result.optimal_count));
  return kExitOk;
}

int cmd_render(const RenderArgs& args) {
  std::ifstream in(args.record_file);
  if (!in) throw ParseError("cannot open record file: " + args.record_file);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    lines.push_back(line);
  }
  if (args.index < 0 || args.index >= static_cast<int>(lines.size()))
    throw ParseError("record index out of range; file has " +
                     std::to_string(lines.size()) + " records");

  FoldRecord record =
      FoldRecord::parse_line(lines[static_cast<size_t>(args.index)]);
  record.validate();
  FoldState state = FoldState::replay(record.sequence, record.moves,
                                      record.sequence.length());

  std::string rendered;
  if (args.format == "svg")
    rendered = render_svg(state);
  else if (args.format == "text")
    rendered = render_text(state);
  else
    throw ConfigError("unknown render format '" + args.format + "'");

  if (args.out.empty())
    std::fputs(rendered.c_str(), stdout);
  else
    write_text_file(args.out, rendered);
  return kExitOk;
}

int cmd_gen_corpus(const GlobalArgs& global, const CorpusArgs& args) {
  std::vector<HpSequence> corpus = generate_corpus(args.spec, global.seed);
  write_sequence_file(args.out, corpus);
  std::printf("wrote %zu sequences: %s\n", corpus.size(), args.out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hpfold: HP-lattice protein folding with guided tree search"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs global;
  app.add_option("--seed", global.seed, "Master seed for all randomized work");
  app.add_option("--config", global.config_path, "Run config JSON (train)");
  app.add_option("--run-dir", global.run_dir,
                 "Run directory override (train)");
  app.add_option("--workers", global.workers,
                 "Episode worker threads (train)");

  FoldArgs fold_args;
  CLI::App* fold = app.add_subcommand(
      "fold", "Fold sequences with a checkpointed or untrained engine");
  fold->add_option("sequence", fold_args.sequences, "HP sequences");
  fold->add_option("--file", fold_args.file, "Sequence file, one per line");
  fold->add_option("--checkpoint", fold_args.checkpoint, "Network checkpoint");
  fold->add_flag("--untrained", fold_args.untrained,
                 "Use a freshly initialized network");
  fold->add_option("--grid-size", fold_args.grid_size,
                   "Board tensor size for --untrained");
  fold->add_option("--blocks", fold_args.blocks,
                   "Residual blocks for --untrained");
  fold->add_option("--channels", fold_args.channels,
                   "Channels for --untrained");
  fold->add_option("--simulations", fold_args.simulations,
                   "Search simulations per move");
  fold->add_option("--c-alpha", fold_args.c_alpha, "Exploration constant");
  fold->add_option("--records", fold_args.records,
                   "Write fold records to this file");
  fold->add_option("--svg", fold_args.svg,
                   "Render the first fold as SVG to this file");
  fold->add_flag("--text", fold_args.text, "Print a text rendering");

  TrainArgs train_args;
  CLI::App* train =
      app.add_subcommand("train", "Run the self-play training loop");
  train->add_option("--init", train_args.init_path,
                    "Write a config template here and exit");
  train->add_option("--train-seconds", train_args.train_seconds,
                    "Wall-clock budget for this call");
  train->add_option("--max-steps", train_args.max_steps,
                    "Stop when the step counter reaches this");

  BenchArgs bench_args;
  CLI::App* bench =
      app.add_subcommand("bench", "Compare engines on a benchmark file");
  bench->add_option("--file", bench_args.file,
                    "Benchmark file (default: the bundled one)");
  bench->add_option("--engines", bench_args.engines,
                    "Engines: oracle, rollout, net")
      ->delimiter(',');
  bench->add_option("--checkpoint", bench_args.checkpoint,
                    "Checkpoint for the net engine");
  bench->add_option("--simulations", bench_args.simulations,
                    "Simulations for rollout and net engines");
  bench->add_option("--oracle-guard", bench_args.oracle_guard,
                    "Oracle length guard");
  bench->add_option("--out", bench_args.out, "Write the report here");

  OracleArgs oracle_args;
  CLI::App* oracle =
      app.add_subcommand("oracle", "Exact optimum by branch and bound");
  oracle->add_option("sequence", oracle_args.sequence, "HP sequence")
      ->required();
  oracle->add_flag("--count-optima", oracle_args.count_optima,
                   "Count all optimal folds");
  oracle->add_flag("--no-prune", oracle_args.no_prune,
                   "Disable bound pruning (for cross-checks)");
  oracle->add_option("--guard", oracle_args.guard, "Length guard");

  RenderArgs render_args;
  CLI::App* render =
      app.add_subcommand("render", "Draw a fold record as SVG or text");
  render->add_option("record", render_args.record_file, "Fold record file")
      ->required();
  render->add_option("--index", render_args.index, "Record line to draw");
  render->add_option("--format", render_args.format, "svg or text");
  render->add_option("--out", render_args.out, "Output file (default: stdout)");

  CorpusArgs corpus_args;
  CLI::App* corpus =
      app.add_subcommand("gen-corpus", "Write a random sequence corpus");
  corpus->add_option("--count", corpus_args.spec.count, "Sequences to draw");
  corpus->add_option("--min-length", corpus_args.spec.min_length,
                     "Shortest sequence");
  corpus->add_option("--max-length", corpus_args.spec.max_length,
                     "Longest sequence");
  corpus->add_option("--min-h", corpus_args.spec.min_h_fraction,
                     "Lowest H fraction");
  corpus->add_option("--max-h", corpus_args.spec.max_h_fraction,
                     "Highest H fraction");
  corpus->add_option("--out", corpus_args.out, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  global.seed_set = app.count("--seed") > 0;

  try {
    if (fold->parsed()) return cmd_fold(global, fold_args);
    if (train->parsed()) return cmd_train(global, train_args);
    if (bench->parsed()) return cmd_bench(global, bench_args);
    if (oracle->parsed()) return cmd_oracle(oracle_args);
    if (render->parsed()) return cmd_render(render_args);
    if (corpus->parsed()) return cmd_gen_corpus(global, corpus_args);
    return kExitUsage;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const GuardError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const CheckpointError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
}

// Acceptance harness: checks the ten shipping criteria end to end and
// prints one PASS/FAIL line per criterion. Exits nonzero if any fail.
//
// argv[1] is the path to the hpfold CLI binary (used by the determinism
// criterion). Environment knobs:
//   HPFOLD_ACCEPT_TRAIN_SECONDS  wall budget for the training criterion
//                                (default 6600)
//   HPFOLD_ACCEPT_RUN_DIR        training run directory (default: a fixed
//                                directory under the system temp path; an
//                                existing directory resumes)

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hpfold/encode.hpp"
#include "hpfold/error.hpp"
#include "hpfold/fold_record.hpp"
#include "hpfold/hp.hpp"
#include "hpfold/net.hpp"
#include "hpfold/oracle.hpp"
#include "hpfold/render.hpp"
#include "hpfold/search.hpp"
#include "hpfold/selfplay.hpp"

using namespace hpfold;
namespace fs = std::filesystem;

namespace {

int g_passed = 0;
int g_failed = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  (pass ? g_passed : g_failed) += 1;
}

void note(const std::string& text) {
  std::printf("              %s\n", text.c_str());
  std::fflush(stdout);
}

// Hand-rolled sequence sampling so the draws are pinned to this file, not
// to library distribution internals.
HpSequence random_sequence(std::mt19937_64& rng, int min_len, int max_len) {
  int len = min_len + static_cast<int>(rng() % (max_len - min_len + 1));
  std::vector<Residue> rs;
  rs.reserve(len);
  for (int i = 0; i < len; ++i)
    rs.push_back(rng() & 1 ? Residue::H : Residue::P);
  return HpSequence(std::move(rs));
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

// ---------------------------------------------------------------- 1
void criterion_upper_bounds(const std::vector<BenchmarkEntry>& bench) {
  const int expected[4] = {10, 10, 58, 78};
  bool pass = bench.size() == 4;
  std::string got;
  for (size_t i = 0; pass && i < bench.size(); ++i) {
    int ub = upper_bound(bench[i].sequence);
    got += (i ? "/" : "") + std::to_string(ub);
    if (ub != expected[i] || bench[i].upper_bound_energy != -ub) pass = false;
  }
  report(1, pass, "parity estimates for the four benchmark sequences: " + got);
}

// ---------------------------------------------------------------- 2
void criterion_bound_soundness() {
  std::mt19937_64 rng(9001);
  int violations = 0;
  int capacity_violations = 0;
  std::string example;
  for (int trial = 0; trial < 500; ++trial) {
    HpSequence seq = random_sequence(rng, 2, 12);
    OracleResult r = oracle_solve(seq);
    if (r.best_contacts > upper_bound(seq)) {
      ++violations;
      if (example.empty())
        example = seq.to_string() + " folds to " +
                  std::to_string(r.best_contacts) + " contacts vs estimate " +
                  std::to_string(upper_bound(seq));
    }
    if (r.best_contacts > contact_capacity_bound(seq)) ++capacity_violations;
  }
  bool pass = violations == 0;
  report(2, pass,
         "oracle optimum <= parity estimate on 500 random sequences: " +
             std::to_string(violations) + " violations");
  if (!pass) {
    note("the parity estimate 2*min(O,E) is not a strict bound: a "
         "hydrophobic chain end hosts three contacts, not two");
    note("first violation: " + example);
    note("the sound per-end-aware capacity bound has " +
         std::to_string(capacity_violations) +
         " violations on the same 500 sequences");
  }
}

// ---------------------------------------------------------------- 3
void criterion_oracle_consistency() {
  std::mt19937_64 rng(9002);
  int checked = 0;
  std::string mismatch;
  for (int trial = 0; trial < 200 && mismatch.empty(); ++trial) {
    HpSequence seq = random_sequence(rng, 4, 10);
    OracleOptions pruned;
    pruned.count_optima = true;
    OracleOptions plain = pruned;
    plain.prune = false;
    plain.stop_at_bound = false;
    OracleResult a = oracle_solve(seq, pruned);
    OracleResult b = oracle_solve(seq, plain);
    if (a.best_contacts != b.best_contacts ||
        a.optimal_count != b.optimal_count || a.nodes > b.nodes)
      mismatch = seq.to_string() + ": pruned " +
                 std::to_string(a.best_contacts) + " (x" +
                 std::to_string(a.optimal_count) + "), plain " +
                 std::to_string(b.best_contacts) + " (x" +
                 std::to_string(b.optimal_count) + ")";
    ++checked;
  }
  report(3, mismatch.empty(),
         mismatch.empty()
             ? "pruned and unpruned oracle agree on " +
                   std::to_string(checked) + " sequences (optima and counts)"
             : mismatch);
}

// ---------------------------------------------------------------- 4
void criterion_rollout_vs_oracle() {
  std::mt19937_64 rng(9003);
  int matches = 0;
  const int trials = 50;
  for (int trial = 0; trial < trials; ++trial) {
    auto seq = std::make_shared<const HpSequence>(random_sequence(rng, 10, 10));
    int optimum = oracle_solve(*seq).best_contacts;
    RolloutConfig config;
    config.simulations = 5000;
    EpisodeRecord episode =
        rollout_uct_fold(seq, config, 12, 7000 + static_cast<uint64_t>(trial));
    if (episode.terminal == TerminalKind::Complete &&
        episode.score.contacts == optimum)
      ++matches;
  }
  bool pass = matches * 10 >= trials * 9;
  report(4, pass,
         "rollout-UCT at 5000 simulations matched the oracle on " +
             std::to_string(matches) + "/" + std::to_string(trials) +
             " random length-10 sequences (need >= 45)");
}

// ---------------------------------------------------------------- 5
bool subtree_accounting_ok(const SearchNode& node, std::string& why) {
  for (const SearchNode::Edge& e : node.edges) {
    if (e.stats.n > 0 && std::abs(e.stats.w - e.stats.q * e.stats.n) > 1e-9) {
      why = "W != Q*N on an edge";
      return false;
    }
    if (e.child && e.child->expanded) {
      int child_sum = 0;
      for (const SearchNode::Edge& ce : e.child->edges)
        child_sum += ce.stats.n;
      if (child_sum != e.stats.n - 1) {
        why = "child visits do not sum to N-1";
        return false;
      }
      if (!subtree_accounting_ok(*e.child, why)) return false;
    }
  }
  return true;
}

void criterion_search_accounting() {
  std::mt19937_64 rng(9004);
  const int sims_options[3] = {25, 60, 120};
  std::string failure;
  for (int trial = 0; trial < 30 && failure.empty(); ++trial) {
    HpSequence seq = random_sequence(rng, 8, 13);
    SearchConfig config;
    config.simulations = sims_options[trial % 3];
    RolloutEvaluator eval(1000 + static_cast<uint64_t>(trial));
    FoldState root = FoldState::opening(seq, seq.length());
    SearchTree tree(root, eval, config, 2000 + static_cast<uint64_t>(trial));

    for (int decision = 0; decision < 2; ++decision) {
      if (tree.root_state().terminal() != TerminalKind::Ongoing) break;
      SearchPolicy policy = tree.run_search(trial % 2 == 0);
      int total = 0;
      for (const SearchNode::Edge& e : tree.root().edges) total += e.stats.n;
      if (total != config.simulations) {
        failure = seq.to_string() + ": root visits " + std::to_string(total) +
                  " != " + std::to_string(config.simulations);
        break;
      }
      std::string why;
      if (!subtree_accounting_ok(tree.root(), why)) {
        failure = seq.to_string() + ": " + why;
        break;
      }
      tree.advance(choose_move(policy));
    }
  }
  report(5, failure.empty(),
         failure.empty() ? "visit sums and W = Q*N hold through 30 searches "
                           "with subtree reuse"
                         : failure);
}

// ---------------------------------------------------------------- 6
TrainingBatch probe_batch(int grid_size) {
  HpSequence seq = HpSequence::parse("hphhph");
  int radius = vertex_radius(grid_size);
  std::vector<std::vector<RelativeMove>> walks = {
      {},
      {RelativeMove::Left},
      {RelativeMove::Left, RelativeMove::Left},
      {RelativeMove::Forward, RelativeMove::Right},
  };
  TrainingBatch batch;
  std::vector<std::array<double, 3>> pis = {
      {1.0, 0.0, 0.0}, {0.2, 0.5, 0.3}, {0.0, 0.0, 1.0}, {0.4, 0.4, 0.2}};
  std::vector<double> rewards = {2.0, 0.0, 1.0, 1.0};
  for (size_t i = 0; i < walks.size(); ++i) {
    batch.inputs.push_back(
        encode_episode_state(FoldState::replay(seq, walks[i], radius),
                             grid_size));
    batch.target_policies.push_back(pis[i]);
    batch.target_rewards.push_back(rewards[i]);
  }
  return batch;
}

void criterion_gradients() {
  NetworkConfig config;
  config.grid_size = 9;
  config.residual_blocks = 2;
  config.channels = 4;
  NetworkD net(config, 12);
  TrainingBatch batch = probe_batch(9);

  LossParts parts = net.compute_gradients(batch);
  bool decompose_ok =
      std::abs(parts.value_term + parts.policy_term + parts.l2_term -
               parts.total) <= 1e-9;

  std::mt19937_64 rng(9006);
  const double eps = 1e-5;
  double worst = 0;
  for (int probe = 0; probe < 48; ++probe) {
    size_t idx = rng() % net.parameter_count();
    double theta = net.get_parameter(idx);
    net.set_parameter(idx, theta + eps);
    double up = net.compute_loss(batch).total;
    net.set_parameter(idx, theta - eps);
    double down = net.compute_loss(batch).total;
    net.set_parameter(idx, theta);
    double fd = (up - down) / (2 * eps);
    double analytic = net.get_gradient(idx);
    double denom = std::max({std::abs(fd), std::abs(analytic), 1e-8});
    worst = std::max(worst, std::abs(fd - analytic) / denom);
  }
  bool fd_ok = worst <= 1e-3;

  NetworkConfig overfit_config;
  overfit_config.grid_size = 9;
  overfit_config.residual_blocks = 1;
  overfit_config.channels = 8;
  overfit_config.learning_rate = 0.01;
  NetworkF small(overfit_config, 6);
  TrainingBatch onehot = probe_batch(9);
  onehot.target_policies = {
      {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}};
  LossParts initial = small.compute_loss(onehot);
  double initial_data = initial.value_term + initial.policy_term;
  LossParts last{};
  for (int step = 0; step < 200; ++step) last = small.train_step(onehot);
  double final_data = last.value_term + last.policy_term;
  bool overfit_ok = final_data <= 0.1 * initial_data;

  report(6, decompose_ok && fd_ok && overfit_ok,
         "gradient check worst relative error " + fmt("%.2e", worst) +
             ", loss decomposition " + (decompose_ok ? "exact" : "BROKEN") +
             ", overfit data loss " + fmt("%.4f", initial_data) + " -> " +
             fmt("%.4f", final_data));
}

// ---------------------------------------------------------------- 7 & 8
// The knobs below were calibrated so self-play, training, and gating all
// get useful shares of a two-hour single-core budget. Self-play and gate
// searches run near the 300-simulation evaluation regime so the training
// targets and the champion selection match the metric, and the replay
// capacity sits under the sample count a full run generates, so stale
// early-run episodes age out instead of being sampled forever.
TrainingConfig acceptance_training_config() {
  TrainingConfig config;
  config.net.grid_size = 25;
  config.net.residual_blocks = 4;
  config.net.channels = 16;
  config.search.simulations = 200;
  config.gate_search.simulations = 300;
  config.batch_size = 64;
  config.memory_capacity = 24000;
  config.steps_per_episode = 4;
  config.gate_interval = 1800;
  config.gate_size = 50;
  config.workers = 1;
  config.seed = 20260819;
  config.corpus.count = 2000;
  config.corpus.min_length = 12;
  config.corpus.max_length = 16;
  config.corpus.min_h_fraction = 0.3;
  config.corpus.max_h_fraction = 0.7;
  return config;
}

double mean_contacts_net(std::shared_ptr<const NetworkF> net,
                         const std::vector<HpSequence>& seqs, int simulations,
                         uint64_t seed_base) {
  SearchConfig config;
  config.simulations = simulations;
  int radius = vertex_radius(net->config().grid_size);
  double total = 0;
  for (size_t i = 0; i < seqs.size(); ++i) {
    NetEvaluator eval(net);
    auto seq = std::make_shared<const HpSequence>(seqs[i]);
    EpisodeRecord episode = fold_episode(seq, eval, config, false, radius,
                                         seed_base + i);
    episode.validate(radius);
    total += episode.score.contacts;
  }
  return total / static_cast<double>(seqs.size());
}

double mean_contacts_rollout(const std::vector<HpSequence>& seqs,
                             int simulations, int radius, uint64_t seed_base) {
  RolloutConfig config;
  config.simulations = simulations;
  double total = 0;
  for (size_t i = 0; i < seqs.size(); ++i) {
    auto seq = std::make_shared<const HpSequence>(seqs[i]);
    EpisodeRecord episode = rollout_uct_fold(seq, config, radius,
                                             seed_base + i);
    episode.validate(radius);
    total += episode.score.contacts;
  }
  return total / static_cast<double>(seqs.size());
}

std::shared_ptr<const NetworkF> criterion_training(const fs::path& run_dir,
                                                   double train_seconds) {
  TrainingConfig config = acceptance_training_config();
  config.train_seconds = train_seconds;

  note("training for " + fmt("%.0f", train_seconds) + "s in " +
       run_dir.string() + " (resumes if the directory already holds a run)");
  TrainingSummary summary = run_training(config, run_dir);
  note("trained " + std::to_string(summary.steps) + " steps over " +
       std::to_string(summary.episodes) + " episodes, " +
       std::to_string(summary.accepted_gates) + "/" +
       std::to_string(summary.gates) + " gates promoted");

  auto champion = std::make_shared<const NetworkF>(
      NetworkF::load_checkpoint(run_dir / "champion.ckpt", &config.net));
  auto untrained = std::make_shared<const NetworkF>(
      NetworkF::load_checkpoint(run_dir / "initial.ckpt", &config.net));

  std::vector<HpSequence> gate_set = held_out_gate_set(config);
  int radius = vertex_radius(config.net.grid_size);
  double champ = mean_contacts_net(champion, gate_set, 300, 41000);
  double fresh = mean_contacts_net(untrained, gate_set, 300, 41000);
  double rollout = mean_contacts_rollout(gate_set, 300, radius, 42000);

  bool pass = champ > fresh && champ > rollout;
  report(7, pass,
         "held-out mean contacts at 300 simulations: champion " +
             fmt("%.3f", champ) + " vs untrained " + fmt("%.3f", fresh) +
             " vs rollout-UCT " + fmt("%.3f", rollout) +
             " (champion must strictly win both)");
  return champion;
}

void criterion_benchmark_folds(std::shared_ptr<const NetworkF> champion,
                               const std::vector<BenchmarkEntry>& bench) {
  SearchConfig config;
  config.simulations = 1000;
  int radius = vertex_radius(champion->config().grid_size);
  bool pass = true;
  std::string detail = "1000-simulation energies:";
  for (size_t i = 0; i < 2; ++i) {
    NetEvaluator eval(champion);
    auto seq = std::make_shared<const HpSequence>(bench[i].sequence);
    EpisodeRecord episode = fold_episode(seq, eval, config, false, radius,
                                         43000 + i);
    episode.validate(radius);
    int energy = -episode.score.contacts;
    detail += " " + bench[i].id + " " + std::to_string(energy);
    if (energy > -7) pass = false;
    // Nothing may ever beat the benchmark's stated bound.
    if (energy < bench[i].upper_bound_energy) {
      pass = false;
      detail += " (IMPOSSIBLE: beats the stated bound)";
    }
  }
  report(8, pass, detail + " (need <= -7 on seq1 and seq2)");
}

// ---------------------------------------------------------------- 9
bool stack_invariants_ok(const PlaneStack& stack, const FoldState& state,
                         std::string& why) {
  int n = stack.grid_size();
  for (int frame = 0; frame < PlaneStack::kFrames; ++frame) {
    int base = frame * PlaneStack::kChannelsPerFrame;
    for (int ty = 0; ty < n; ++ty) {
      for (int tx = 0; tx < n; ++tx) {
        int h = stack.at(base + 0, tx, ty);
        int p = stack.at(base + 1, tx, ty);
        int c = stack.at(base + 2, tx, ty);
        int b = stack.at(base + 3, tx, ty);
        bool vertex = tx % 2 == 0 && ty % 2 == 0;
        bool edge = (tx % 2 == 0) != (ty % 2 == 0);
        if (h + p > 1 || c + b > 1) {
          why = "channel exclusivity violated";
          return false;
        }
        if (!vertex && h + p > 0) {
          why = "residue channel off the vertex grid";
          return false;
        }
        if (!edge && c + b > 0) {
          why = "edge channel off the edge grid";
          return false;
        }
      }
    }
  }
  // Older frames never contain activations the newer frame lacks.
  for (int frame = 0; frame + 1 < PlaneStack::kFrames; ++frame) {
    int newer = frame * PlaneStack::kChannelsPerFrame;
    int older = (frame + 1) * PlaneStack::kChannelsPerFrame;
    for (int ch = 0; ch < PlaneStack::kChannelsPerFrame; ++ch)
      for (int ty = 0; ty < n; ++ty)
        for (int tx = 0; tx < n; ++tx)
          if (stack.at(older + ch, tx, ty) > stack.at(newer + ch, tx, ty)) {
            why = "an older frame is not a subset of its newer frame";
            return false;
          }
  }
  // Frame 0 counts: every placed residue, every chain bond, every contact.
  int vertices = 0, bonds = 0, contact_edges = 0;
  for (int ty = 0; ty < n; ++ty)
    for (int tx = 0; tx < n; ++tx) {
      vertices += stack.at(0, tx, ty) + stack.at(1, tx, ty);
      bonds += stack.at(2, tx, ty);
      contact_edges += stack.at(3, tx, ty);
    }
  if (vertices != state.step() || bonds != state.step() - 1 ||
      contact_edges != state.contacts()) {
    why = "frame 0 activation counts disagree with the state";
    return false;
  }
  // The next-residue plane is uniform and matches the sequence.
  int ones = 0;
  for (int ty = 0; ty < n; ++ty)
    for (int tx = 0; tx < n; ++tx) ones += stack.at(16, tx, ty);
  bool next_is_h = state.step() < state.length() &&
                   state.sequence().at(state.step()) == Residue::H;
  if (ones != (next_is_h ? n * n : 0)) {
    why = "next-residue plane is wrong";
    return false;
  }
  return true;
}

void criterion_encoding_invariants() {
  std::mt19937_64 rng(9009);
  const int grid = 25;
  int radius = vertex_radius(grid);
  int episodes = 0;
  int states = 0;
  std::string failure;
  for (int trial = 0; trial < 1000 && failure.empty(); ++trial) {
    HpSequence seq = random_sequence(rng, 4, 14);
    FoldState s = FoldState::opening(seq, radius);
    while (true) {
      PlaneStack stack = encode_episode_state(s, grid);
      std::string why;
      if (!stack_invariants_ok(stack, s, why)) {
        failure = seq.to_string() + ": " + why;
        break;
      }
      ++states;
      if (s.terminal() != TerminalKind::Ongoing) break;
      std::vector<RelativeMove> legal = s.legal_moves().to_vector();
      s = s.apply_move(legal[rng() % legal.size()]);
    }
    ++episodes;
  }
  report(9, failure.empty(),
         failure.empty()
             ? "all invariants hold over " + std::to_string(episodes) +
                   " random episodes (" + std::to_string(states) +
                   " encoded states)"
             : failure);
}

// ---------------------------------------------------------------- 10
int run_cli(const std::string& command) {
  int status = std::system(command.c_str());
  return status;
}

void criterion_cli_determinism(const std::string& binary) {
  fs::path dir = fs::temp_directory_path() / "hpfold_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::string d = dir.string();

  std::ofstream(dir / "bench.tsv")
      << "a\thhhhhh\tNA\t-6\nb\thhpphh\tNA\t-4\n";

  struct Step {
    const char* name;
    std::string command_a;
    std::string command_b;
    fs::path out_a;
    fs::path out_b;
  };
  std::string fold_base =
      binary +
      " --seed 11 fold HHPPHH HPHPPH --untrained --grid-size 9 --blocks 1"
      " --channels 4 --simulations 40 --records ";
  std::string bench_base = binary + " --seed 5 bench --file " + d +
                           "/bench.tsv --engines oracle,rollout"
                           " --simulations 150 --out ";
  std::vector<Step> steps;
  steps.push_back({"fold", fold_base + d + "/fold_a.txt > " + d + "/so_a.txt",
                   fold_base + d + "/fold_b.txt > " + d + "/so_b.txt",
                   dir / "fold_a.txt", dir / "fold_b.txt"});
  steps.push_back({"bench", bench_base + d + "/bench_a.tsv",
                   bench_base + d + "/bench_b.tsv", dir / "bench_a.tsv",
                   dir / "bench_b.tsv"});

  bool pass = true;
  std::string detail;
  for (const Step& step : steps) {
    if (run_cli(step.command_a) != 0 || run_cli(step.command_b) != 0) {
      pass = false;
      detail = std::string(step.name) + " exited nonzero";
      break;
    }
    if (slurp(step.out_a) != slurp(step.out_b) || slurp(step.out_a).empty()) {
      pass = false;
      detail = std::string(step.name) + " output differs between two runs";
      break;
    }
  }

  if (pass) {
    // Stdout of the two fold runs must agree too.
    if (slurp(dir / "so_a.txt") != slurp(dir / "so_b.txt")) {
      pass = false;
      detail = "fold stdout differs between two runs";
    }
  }

  if (pass) {
    std::string render_base = binary + " render " + d + "/fold_a.txt" +
                              " --format svg --out ";
    if (run_cli(render_base + d + "/r_a.svg") != 0 ||
        run_cli(render_base + d + "/r_b.svg") != 0) {
      pass = false;
      detail = "render exited nonzero";
    } else if (slurp(dir / "r_a.svg") != slurp(dir / "r_b.svg") ||
               slurp(dir / "r_a.svg").empty()) {
      pass = false;
      detail = "render output differs between two runs";
    }
  }

  report(10, pass,
         pass ? "fold, bench, and render are bit-reproducible with a fixed "
                "seed"
              : detail);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-hpfold-binary>\n");
    return 2;
  }
  std::string binary = argv[1];

  double train_seconds = 6600;
  if (const char* env = std::getenv("HPFOLD_ACCEPT_TRAIN_SECONDS")) {
    double v = std::strtod(env, nullptr);
    if (v > 0) train_seconds = v;
  }
  fs::path run_dir = fs::temp_directory_path() / "hpfold_acceptance_run";
  if (const char* env = std::getenv("HPFOLD_ACCEPT_RUN_DIR")) run_dir = env;

  std::vector<BenchmarkEntry> bench =
      parse_benchmark_lines(bundled_benchmark_text());

  try {
    criterion_upper_bounds(bench);
  } catch (const std::exception& e) {
    report(1, false, std::string("exception: ") + e.what());
  }
  try {
    criterion_bound_soundness();
  } catch (const std::exception& e) {
    report(2, false, std::string("exception: ") + e.what());
  }
  try {
    criterion_oracle_consistency();
  } catch (const std::exception& e) {
    report(3, false, std::string("exception: ") + e.what());
  }
  try {
    criterion_rollout_vs_oracle();
  } catch (const std::exception& e) {
    report(4, false, std::string("exception: ") + e.what());
  }
  try {
    criterion_search_accounting();
  } catch (const std::exception& e) {
    report(5, false, std::string("exception: ") + e.what());
  }
  try {
    criterion_gradients();
  } catch (const std::exception& e) {
    report(6, false, std::string("exception: ") + e.what());
  }

  std::shared_ptr<const NetworkF> champion;
  try {
    champion = criterion_training(run_dir, train_seconds);
  } catch (const std::exception& e) {
    report(7, false, std::string("exception: ") + e.what());
  }
  try {
    if (champion)
      criterion_benchmark_folds(champion, bench);
    else
      report(8, false, "skipped: no champion network from criterion 7");
  } catch (const std::exception& e) {
    report(8, false, std::string("exception: ") + e.what());
  }

  try {
    criterion_encoding_invariants();
  } catch (const std::exception& e) {
    report(9, false, std::string("exception: ") + e.what());
  }
  try {
    criterion_cli_determinism(binary);
  } catch (const std::exception& e) {
    report(10, false, std::string("exception: ") + e.what());
  }

  std::printf("acceptance: %d/%d criteria passed\n", g_passed,
              g_passed + g_failed);
  return g_failed == 0 ? 0 : 1;
}

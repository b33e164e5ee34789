#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hpfold/fold_record.hpp"
#include "hpfold/hp.hpp"
#include "hpfold/net.hpp"
#include "hpfold/search.hpp"

namespace hpfold {

// Deterministic seed derivation: one master seed plus a stream index give
// independent reproducible streams (episode k, corpus, gate evaluations).
uint64_t mix_seed(uint64_t seed, uint64_t stream);

// One self-play training example. The encoded planes are rebuilt on demand
// from the move prefix; storing them outright would cost tens of kilobytes
// per slot across a 60,000-slot memory.
struct ReplaySample {
  std::shared_ptr<const HpSequence> sequence;
  std::vector<RelativeMove> moves;  // prefix reaching the decision state
  std::array<double, 3> target_policy{};
  double reward = 0.0;  // final contact count of the source episode

  PlaneStack encode(int grid_size) const;
  std::string to_line() const;
  static ReplaySample parse_line(std::string_view line);
};

// Bounded FIFO of training samples with uniform batch draws.
class ReplayMemory {
 public:
  explicit ReplayMemory(int capacity);

  int capacity() const { return capacity_; }
  int size() const { return static_cast<int>(slots_.size()); }
  bool ready(int batch_size) const { return size() >= batch_size; }
  const ReplaySample& at(int i) const { return slots_[i]; }  // 0 = oldest

  void push(ReplaySample sample);

  // Uniform draw without replacement; requires count <= size.
  std::vector<int> sample_indices(int count, std::mt19937_64& rng) const;
  TrainingBatch make_batch(const std::vector<int>& indices,
                           int grid_size) const;

  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);

 private:
  int capacity_;
  std::deque<ReplaySample> slots_;
};

struct EpisodeRecord {
  std::shared_ptr<const HpSequence> sequence;
  std::vector<RelativeMove> moves;  // decisions, from the third residue on
  ContactScore score;
  TerminalKind terminal = TerminalKind::Complete;
  std::vector<SearchPolicy> policies;  // search policy at each decision

  int decisions() const { return static_cast<int>(policies.size()); }
  // Replays the moves through a fresh board and confirms the score.
  void validate(int board_radius) const;
};

// Plays one episode: deterministic opening, then per residue a tree search
// (with subtree reuse between decisions) and the greedy policy move, until
// the fold completes or traps. Noise adds Dirichlet exploration at each
// decision root (self-play only).
EpisodeRecord fold_episode(std::shared_ptr<const HpSequence> sequence,
                           Evaluator& evaluator, const SearchConfig& config,
                           bool noise, int board_radius, uint64_t seed);

// One sample per decision; every sample carries the episode's final
// contact count as its reward. Trapped episodes contribute their partial
// score.
std::vector<ReplaySample> harvest_samples(const EpisodeRecord& episode);

// Draws a uniform batch and runs one optimizer step; nullopt (not an
// error) while the memory holds fewer than batch_size samples.
std::optional<LossParts> training_iteration(ReplayMemory& memory,
                                            NetworkF& net, int batch_size,
                                            std::mt19937_64& rng);

struct GateResult {
  int candidate_total = 0;
  int champion_total = 0;
  bool accepted = false;  // strictly greater total; ties keep the champion
};

// Both networks fold every test sequence greedily (no noise); the
// candidate is accepted only on a strictly greater contact total.
GateResult gate(std::shared_ptr<const NetworkF> candidate,
                std::shared_ptr<const NetworkF> champion,
                const std::vector<HpSequence>& test_sequences,
                const SearchConfig& config, int board_radius, uint64_t seed);

// The pure-UCT baseline: identical tree machinery with uniform priors and
// uniform-random playout evaluation.
struct RolloutConfig {
  int simulations = 1000;
  double c_alpha = 1.0;
};

EpisodeRecord rollout_uct_fold(std::shared_ptr<const HpSequence> sequence,
                               const RolloutConfig& config, int board_radius,
                               uint64_t seed);

struct CorpusSpec {
  int count = 2000;
  int min_length = 12;
  int max_length = 16;
  double min_h_fraction = 0.3;
  double max_h_fraction = 0.7;
};

// Reproducible random HP sequences; length uniform over the closed range,
// per-sequence H probability uniform over the fraction range.
std::vector<HpSequence> generate_corpus(int count, int min_length,
                                        int max_length, double min_h_fraction,
                                        double max_h_fraction, uint64_t seed);
std::vector<HpSequence> generate_corpus(const CorpusSpec& spec, uint64_t seed);

struct TrainingConfig {
  NetworkConfig net;
  SearchConfig search;       // self-play search (noise applied)
  SearchConfig gate_search;  // gating search (never noised)
  int batch_size = 256;
  int memory_capacity = 60000;
  int steps_per_episode = 4;  // optimizer steps per self-play episode
  int gate_interval = 2000;   // optimizer steps between gate evaluations
  int gate_size = 50;         // held-out gate sequences
  int workers = 1;            // concurrent episode workers
  uint64_t seed = 0;
  double train_seconds = 0;  // wall-clock budget; 0 means unlimited
  uint64_t max_steps = 0;    // optimizer-step budget; 0 means unlimited
  std::string corpus_file;   // empty: generate from `corpus`
  CorpusSpec corpus;

  void validate() const;
};

// The sequences a run with this config trains on: the corpus file when
// one is named, otherwise generated from the corpus spec and seed.
std::vector<HpSequence> training_corpus(const TrainingConfig& config);

// The held-out evaluation set the same run gates on: gate_size sequences
// drawn from the corpus distribution and filtered so none also appears in
// the training corpus.
std::vector<HpSequence> held_out_gate_set(const TrainingConfig& config);

struct TrainingSummary {
  uint64_t steps = 0;
  uint64_t episodes = 0;
  int gates = 0;
  int accepted_gates = 0;
  std::filesystem::path champion_checkpoint;
  std::filesystem::path metrics_log;
};

// The full loop: self-play episodes feed the replay memory, a trainer
// updates the candidate, and periodic gating promotes it to champion.
// Fully resumable: checkpoints, memory, and counters persist in run_dir,
// and a second call picks up where the first stopped. The stop flag (e.g.
// from a signal handler) requests a clean save-and-exit.
TrainingSummary run_training(const TrainingConfig& config,
                             const std::filesystem::path& run_dir,
                             const std::atomic<bool>* stop = nullptr);

// Engine comparison plumbing for the benchmark command.
struct EngineOutcome {
  bool ok = false;
  int contacts = 0;
  std::string error;  // set when not ok, e.g. "skipped (guard)"
};

using FoldEngine = std::function<EngineOutcome(const BenchmarkEntry&)>;

struct ComparisonTable {
  std::vector<std::string> engine_names;
  struct Row {
    std::string id;
    int length = 0;
    int upper_bound_energy = 0;
    std::optional<int> known_optimum_energy;
    std::vector<EngineOutcome> outcomes;
  };
  std::vector<Row> rows;

  std::string to_text() const;
};

// Runs every engine on every entry; an engine failure fills that cell's
// error and the comparison continues.
ComparisonTable compare_engines(
    const std::vector<BenchmarkEntry>& entries,
    const std::vector<std::pair<std::string, FoldEngine>>& engines);

}  // namespace hpfold

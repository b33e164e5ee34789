#include "hpfold/selfplay.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "hpfold/encode.hpp"

namespace hpfold {
namespace {

// Seed stream indices for run_training. Episode k uses kEpisodeStream + k
// and gate g uses kGateStream + g, so the low indices stay free for
// one-off consumers.
constexpr uint64_t kNetInitStream = 0;
constexpr uint64_t kCorpusStream = 1;
constexpr uint64_t kGateSetStream = 2;
constexpr uint64_t kTrainRngStream = 3;
constexpr uint64_t kEpisodeStream = 1'000'000'000;
constexpr uint64_t kGateStream = 4'000'000'000;

int parse_int(std::string_view s, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("invalid integer for " + std::string(what) + ": '" +
                     std::string(s) + "'");
  return value;
}

uint64_t parse_u64(std::string_view s, std::string_view what) {
  uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("invalid integer for " + std::string(what) + ": '" +
                     std::string(s) + "'");
  return value;
}

double parse_double(std::string_view s, std::string_view what) {
  std::string buf(s);
  char* end = nullptr;
  double value = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || buf.empty())
    throw ParseError("invalid number for " + std::string(what) + ": '" + buf +
                     "'");
  return value;
}

// Shortest decimal form that round-trips the exact double.
std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (start <= s.size()) {
    size_t end = s.find(sep, start);
    if (end == std::string_view::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

std::string moves_to_string(const std::vector<RelativeMove>& moves) {
  std::string s;
  s.reserve(moves.size());
  for (RelativeMove m : moves) s.push_back(to_char(m));
  return s;
}

const char* terminal_name(TerminalKind kind) {
  switch (kind) {
    case TerminalKind::Ongoing:
      return "ongoing";
    case TerminalKind::Complete:
      return "complete";
    case TerminalKind::Trapped:
      return "trapped";
  }
  return "?";
}

}  // namespace

uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  // splitmix64 finalizer over the combined words; adjacent streams land
  // far apart.
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

PlaneStack ReplaySample::encode(int grid_size) const {
  if (!sequence) throw ConfigError("replay sample has no sequence");
  FoldState state =
      FoldState::replay(*sequence, moves, vertex_radius(grid_size));
  return encode_episode_state(state, grid_size);
}

std::string ReplaySample::to_line() const {
  if (!sequence) throw ConfigError("replay sample has no sequence");
  std::string s = "sample seq=" + sequence->to_string();
  s += " moves=" + moves_to_string(moves);
  s += " pi=" + format_double(target_policy[0]) + "," +
       format_double(target_policy[1]) + "," + format_double(target_policy[2]);
  s += " reward=" + format_double(reward);
  return s;
}

ReplaySample ReplaySample::parse_line(std::string_view line) {
  std::optional<HpSequence> seq;
  std::optional<std::vector<RelativeMove>> moves;
  std::optional<std::array<double, 3>> pi;
  std::optional<double> reward;

  std::istringstream in{std::string(line)};
  std::string token;
  in >> token;
  if (token != "sample")
    throw ParseError("replay sample must start with 'sample'");
  while (in >> token) {
    size_t eq = token.find('=');
    if (eq == std::string::npos)
      throw ParseError("replay sample field without '=': '" + token + "'");
    std::string_view key(token.data(), eq);
    std::string_view value(token.data() + eq + 1, token.size() - eq - 1);
    if (key == "seq") {
      seq = HpSequence::parse(value);
    } else if (key == "moves") {
      std::vector<RelativeMove> ms;
      for (char c : value) ms.push_back(move_from_char(c));
      moves = std::move(ms);
    } else if (key == "pi") {
      auto parts = split(value, ',');
      if (parts.size() != 3)
        throw ParseError("pi needs three comma-separated values");
      pi = {parse_double(parts[0], "pi"), parse_double(parts[1], "pi"),
            parse_double(parts[2], "pi")};
    } else if (key == "reward") {
      reward = parse_double(value, "reward");
    } else {
      throw ParseError("unknown replay sample field: '" + std::string(key) +
                       "'");
    }
  }
  if (!seq || !moves || !pi || !reward)
    throw ParseError("replay sample is missing a required field");

  ReplaySample sample;
  sample.sequence = std::make_shared<const HpSequence>(std::move(*seq));
  sample.moves = std::move(*moves);
  sample.target_policy = *pi;
  sample.reward = *reward;
  return sample;
}

ReplayMemory::ReplayMemory(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw ConfigError("replay capacity must be positive");
}

void ReplayMemory::push(ReplaySample sample) {
  if (size() == capacity_) slots_.pop_front();
  slots_.push_back(std::move(sample));
}

std::vector<int> ReplayMemory::sample_indices(int count,
                                              std::mt19937_64& rng) const {
  if (count < 0 || count > size())
    throw ConfigError("batch larger than replay memory");
  // Partial Fisher-Yates: only the first `count` positions are settled.
  std::vector<int> pool(slots_.size());
  for (size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<int>(i);
  std::vector<int> picked(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> dist(i, size() - 1);
    std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(dist(rng))]);
    picked[static_cast<size_t>(i)] = pool[static_cast<size_t>(i)];
  }
  return picked;
}

TrainingBatch ReplayMemory::make_batch(const std::vector<int>& indices,
                                       int grid_size) const {
  TrainingBatch batch;
  batch.inputs.reserve(indices.size());
  batch.target_policies.reserve(indices.size());
  batch.target_rewards.reserve(indices.size());
  for (int idx : indices) {
    if (idx < 0 || idx >= size())
      throw ConfigError("replay index out of range");
    const ReplaySample& s = slots_[static_cast<size_t>(idx)];
    batch.inputs.push_back(s.encode(grid_size));
    batch.target_policies.push_back(s.target_policy);
    batch.target_rewards.push_back(s.reward);
  }
  return batch;
}

void ReplayMemory::save(const std::filesystem::path& path) const {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw ParseError("cannot write replay file: " + tmp.string());
    out << "replay size=" << size() << "\n";
    for (const ReplaySample& s : slots_) out << s.to_line() << "\n";
    if (!out) throw ParseError("failed writing replay file: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void ReplayMemory::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open replay file: " + path.string());
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string word, field;
  hs >> word >> field;
  if (word != "replay" || field.rfind("size=", 0) != 0)
    throw ParseError("bad replay file header: '" + header + "'");
  int expected = parse_int(std::string_view(field).substr(5), "replay size");

  slots_.clear();
  // Identical sequences share one allocation, as they did when recorded.
  std::unordered_map<std::string, std::shared_ptr<const HpSequence>> pool;
  std::string line;
  int count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ReplaySample sample = ReplaySample::parse_line(line);
    std::string key = sample.sequence->to_string();
    auto it = pool.find(key);
    if (it == pool.end())
      pool.emplace(std::move(key), sample.sequence);
    else
      sample.sequence = it->second;
    push(std::move(sample));
    ++count;
  }
  if (count != expected)
    throw ParseError("replay file holds " + std::to_string(count) +
                     " samples, header says " + std::to_string(expected));
}

void EpisodeRecord::validate(int board_radius) const {
  if (!sequence) throw ConfigError("episode record has no sequence");
  if (policies.size() != moves.size())
    throw ConfigError("episode policies and moves disagree in length");
  FoldState state = FoldState::replay(*sequence, moves, board_radius);
  if (state.terminal() != terminal)
    throw ConfigError("episode terminal kind does not replay");
  if (state.contacts() != score.contacts || score.energy != -score.contacts)
    throw ConfigError("episode score does not replay");
  ContactScore recount = hh_contacts(state);
  if (recount.contacts != score.contacts)
    throw ConfigError("episode contact recount disagrees");
}

EpisodeRecord fold_episode(std::shared_ptr<const HpSequence> sequence,
                           Evaluator& evaluator, const SearchConfig& config,
                           bool noise, int board_radius, uint64_t seed) {
  if (!sequence) throw ConfigError("fold_episode needs a sequence");
  config.validate();

  EpisodeRecord rec;
  rec.sequence = sequence;
  SearchTree tree(FoldState::opening(sequence, board_radius), evaluator,
                  config, seed);
  while (tree.root_state().terminal() == TerminalKind::Ongoing) {
    SearchPolicy pi = tree.run_search(noise);
    RelativeMove move = choose_move(pi);
    rec.policies.push_back(pi);
    rec.moves.push_back(move);
    tree.advance(move);
  }
  const FoldState& final_state = tree.root_state();
  rec.score = {final_state.contacts(), -final_state.contacts()};
  rec.terminal = final_state.terminal();
  return rec;
}

std::vector<ReplaySample> harvest_samples(const EpisodeRecord& episode) {
  std::vector<ReplaySample> samples;
  samples.reserve(episode.policies.size());
  for (size_t k = 0; k < episode.policies.size(); ++k) {
    ReplaySample s;
    s.sequence = episode.sequence;
    s.moves.assign(episode.moves.begin(),
                   episode.moves.begin() + static_cast<ptrdiff_t>(k));
    s.target_policy = episode.policies[k].probabilities;
    s.reward = episode.score.contacts;
    samples.push_back(std::move(s));
  }
  return samples;
}

std::optional<LossParts> training_iteration(ReplayMemory& memory,
                                            NetworkF& net, int batch_size,
                                            std::mt19937_64& rng) {
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  if (!memory.ready(batch_size)) return std::nullopt;
  std::vector<int> indices = memory.sample_indices(batch_size, rng);
  TrainingBatch batch = memory.make_batch(indices, net.config().grid_size);
  return net.train_step(batch);
}

GateResult gate(std::shared_ptr<const NetworkF> candidate,
                std::shared_ptr<const NetworkF> champion,
                const std::vector<HpSequence>& test_sequences,
                const SearchConfig& config, int board_radius, uint64_t seed) {
  if (!candidate || !champion) throw ConfigError("gate needs two networks");
  if (test_sequences.empty()) throw ConfigError("gate needs test sequences");

  auto total_for = [&](const std::shared_ptr<const NetworkF>& net,
                       uint64_t stream_base) {
    NetEvaluator evaluator(net);
    int total = 0;
    for (size_t i = 0; i < test_sequences.size(); ++i) {
      auto seq = std::make_shared<const HpSequence>(test_sequences[i]);
      EpisodeRecord rec =
          fold_episode(seq, evaluator, config, /*noise=*/false, board_radius,
                       mix_seed(seed, stream_base + i));
      total += rec.score.contacts;
    }
    return total;
  };

  GateResult result;
  result.candidate_total = total_for(candidate, 1'000'000);
  result.champion_total = total_for(champion, 2'000'000);
  result.accepted = result.candidate_total > result.champion_total;
  return result;
}

EpisodeRecord rollout_uct_fold(std::shared_ptr<const HpSequence> sequence,
                               const RolloutConfig& config, int board_radius,
                               uint64_t seed) {
  SearchConfig sc;
  sc.simulations = config.simulations;
  sc.c_alpha = config.c_alpha;
  sc.validate();
  RolloutEvaluator evaluator(mix_seed(seed, 1));
  return fold_episode(std::move(sequence), evaluator, sc, /*noise=*/false,
                      board_radius, mix_seed(seed, 2));
}

std::vector<HpSequence> generate_corpus(int count, int min_length,
                                        int max_length, double min_h_fraction,
                                        double max_h_fraction, uint64_t seed) {
  if (count < 1) throw ConfigError("corpus count must be positive");
  if (min_length < 2 || max_length < min_length)
    throw ConfigError("corpus length range is degenerate");
  if (min_h_fraction < 0.0 || max_h_fraction > 1.0 ||
      max_h_fraction < min_h_fraction)
    throw ConfigError("corpus H fraction range is degenerate");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> length_dist(min_length, max_length);
  std::uniform_real_distribution<double> fraction_dist(min_h_fraction,
                                                       max_h_fraction);
  std::vector<HpSequence> corpus;
  corpus.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    int length = length_dist(rng);
    std::bernoulli_distribution is_h(fraction_dist(rng));
    std::vector<Residue> residues(static_cast<size_t>(length));
    for (Residue& r : residues) r = is_h(rng) ? Residue::H : Residue::P;
    corpus.emplace_back(std::move(residues));
  }
  return corpus;
}

std::vector<HpSequence> generate_corpus(const CorpusSpec& spec, uint64_t seed) {
  return generate_corpus(spec.count, spec.min_length, spec.max_length,
                         spec.min_h_fraction, spec.max_h_fraction, seed);
}

void TrainingConfig::validate() const {
  net.validate();
  search.validate();
  gate_search.validate();
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (memory_capacity < batch_size)
    throw ConfigError("memory_capacity must hold at least one batch");
  if (steps_per_episode < 1)
    throw ConfigError("steps_per_episode must be positive");
  if (gate_interval < 1) throw ConfigError("gate_interval must be positive");
  if (gate_size < 1) throw ConfigError("gate_size must be positive");
  if (workers < 1) throw ConfigError("workers must be positive");
  if (train_seconds < 0) throw ConfigError("train_seconds must be >= 0");
  if (corpus_file.empty()) {
    // Range checks without paying for the generation.
    if (corpus.count < 1) throw ConfigError("corpus count must be positive");
    if (corpus.min_length < 2 || corpus.max_length < corpus.min_length)
      throw ConfigError("corpus length range is degenerate");
    if (corpus.min_h_fraction < 0.0 || corpus.max_h_fraction > 1.0 ||
        corpus.max_h_fraction < corpus.min_h_fraction)
      throw ConfigError("corpus H fraction range is degenerate");
  }
}

namespace {

// Counters and reproducibility state that survives across invocations.
struct RunState {
  uint64_t episodes = 0;
  uint64_t next_gate = 0;
  uint64_t last_gated = 0;
  int gates = 0;
  int accepted = 0;
  std::mt19937_64 train_rng;
};

void write_run_state(const std::filesystem::path& path, const RunState& st,
                     uint64_t steps) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw ParseError("cannot write state file: " + tmp.string());
    out << "episodes=" << st.episodes << "\n";
    out << "steps=" << steps << "\n";
    out << "next_gate=" << st.next_gate << "\n";
    out << "last_gated=" << st.last_gated << "\n";
    out << "gates=" << st.gates << "\n";
    out << "accepted=" << st.accepted << "\n";
    out << "rng=" << st.train_rng << "\n";
    if (!out) throw ParseError("failed writing state file: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

RunState read_run_state(const std::filesystem::path& path,
                        uint64_t expected_steps) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open state file: " + path.string());
  RunState st;
  bool have_rng = false;
  uint64_t steps = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("state line without '=': '" + line + "'");
    std::string_view key(line.data(), eq);
    std::string_view value(line.data() + eq + 1, line.size() - eq - 1);
    if (key == "episodes") {
      st.episodes = parse_u64(value, "episodes");
    } else if (key == "steps") {
      steps = parse_u64(value, "steps");
    } else if (key == "next_gate") {
      st.next_gate = parse_u64(value, "next_gate");
    } else if (key == "last_gated") {
      st.last_gated = parse_u64(value, "last_gated");
    } else if (key == "gates") {
      st.gates = parse_int(value, "gates");
    } else if (key == "accepted") {
      st.accepted = parse_int(value, "accepted");
    } else if (key == "rng") {
      std::istringstream rs{std::string(value)};
      rs >> st.train_rng;
      if (!rs) throw ParseError("bad rng state in " + path.string());
      have_rng = true;
    } else {
      throw ParseError("unknown state field: '" + std::string(key) + "'");
    }
  }
  if (!have_rng) throw ParseError("state file is missing the rng field");
  if (steps != expected_steps)
    throw ParseError("state file step count disagrees with the checkpoint");
  return st;
}

// The gate set must measure generalization, so sequences that also appear
// in the training corpus are rejected and redrawn.
std::vector<HpSequence> build_gate_set(const TrainingConfig& config,
                                       const std::vector<HpSequence>& corpus) {
  std::unordered_set<std::string> seen;
  for (const HpSequence& s : corpus) seen.insert(s.to_string());

  CorpusSpec spec = config.corpus;
  spec.count = config.gate_size;
  std::vector<HpSequence> gate_set;
  for (uint64_t attempt = 0; static_cast<int>(gate_set.size()) < config.gate_size;
       ++attempt) {
    if (attempt == 64)
      throw ConfigError(
          "cannot draw a gate set disjoint from the corpus; the sequence "
          "space is too small for the configured lengths");
    auto batch = generate_corpus(
        spec, mix_seed(config.seed, kGateSetStream + attempt));
    for (HpSequence& s : batch) {
      if (static_cast<int>(gate_set.size()) == config.gate_size) break;
      std::string key = s.to_string();
      if (seen.insert(std::move(key)).second) gate_set.push_back(std::move(s));
    }
  }
  return gate_set;
}

}  // namespace

std::vector<HpSequence> training_corpus(const TrainingConfig& config) {
  if (!config.corpus_file.empty()) return read_sequence_file(config.corpus_file);
  return generate_corpus(config.corpus, mix_seed(config.seed, kCorpusStream));
}

std::vector<HpSequence> held_out_gate_set(const TrainingConfig& config) {
  return build_gate_set(config, training_corpus(config));
}

TrainingSummary run_training(const TrainingConfig& config,
                             const std::filesystem::path& run_dir,
                             const std::atomic<bool>* stop) {
  config.validate();
  std::filesystem::create_directories(run_dir);

  const auto initial_path = run_dir / "initial.ckpt";
  const auto candidate_path = run_dir / "candidate.ckpt";
  const auto champion_path = run_dir / "champion.ckpt";
  const auto memory_path = run_dir / "memory.dat";
  const auto state_path = run_dir / "state.txt";
  const auto metrics_path = run_dir / "metrics.log";

  std::vector<HpSequence> corpus = training_corpus(config);
  if (corpus.empty()) throw ConfigError("training corpus is empty");
  std::vector<HpSequence> gate_set = build_gate_set(config, corpus);

  const int board_radius = vertex_radius(config.net.grid_size);
  ReplayMemory memory(config.memory_capacity);
  RunState st;

  std::optional<NetworkF> candidate;
  std::shared_ptr<const NetworkF> champion;

  const bool resuming = std::filesystem::exists(candidate_path);
  if (resuming) {
    if (!std::filesystem::exists(champion_path) ||
        !std::filesystem::exists(state_path))
      throw ConfigError("run directory is incomplete; cannot resume: " +
                        run_dir.string());
    candidate = NetworkF::load_checkpoint(candidate_path, &config.net);
    champion = std::make_shared<const NetworkF>(
        NetworkF::load_checkpoint(champion_path, &config.net));
    st = read_run_state(state_path, candidate->training_steps());
    if (std::filesystem::exists(memory_path)) memory.load(memory_path);
  } else {
    candidate.emplace(config.net, mix_seed(config.seed, kNetInitStream));
    candidate->save_checkpoint(initial_path);
    candidate->save_checkpoint(champion_path);
    champion = std::make_shared<const NetworkF>(*candidate);
    st.next_gate = static_cast<uint64_t>(config.gate_interval);
    st.train_rng.seed(mix_seed(config.seed, kTrainRngStream));
  }

  std::ofstream metrics(metrics_path, std::ios::app);
  if (!metrics)
    throw ParseError("cannot open metrics log: " + metrics_path.string());
  char line[256];

  const auto started = std::chrono::steady_clock::now();
  auto out_of_budget = [&] {
    if (stop && stop->load()) return true;
    if (config.max_steps > 0 && candidate->training_steps() >= config.max_steps)
      return true;
    if (config.train_seconds > 0) {
      std::chrono::duration<double> elapsed =
          std::chrono::steady_clock::now() - started;
      if (elapsed.count() >= config.train_seconds) return true;
    }
    return false;
  };

  auto save_all = [&] {
    candidate->save_checkpoint(candidate_path);
    memory.save(memory_path);
    write_run_state(state_path, st, candidate->training_steps());
  };

  auto run_gate = [&] {
    auto snapshot = std::make_shared<const NetworkF>(*candidate);
    GateResult result =
        gate(snapshot, champion, gate_set, config.gate_search, board_radius,
             mix_seed(config.seed, kGateStream + static_cast<uint64_t>(st.gates)));
    ++st.gates;
    st.last_gated = candidate->training_steps();
    if (result.accepted) {
      ++st.accepted;
      champion = snapshot;
      candidate->save_checkpoint(champion_path);
    }
    std::snprintf(line, sizeof line,
                  "gate step=%llu candidate=%d champion=%d accepted=%d\n",
                  static_cast<unsigned long long>(candidate->training_steps()),
                  result.candidate_total, result.champion_total,
                  result.accepted ? 1 : 0);
    metrics << line << std::flush;
    save_all();
  };

  auto play_episode = [&](uint64_t index) {
    const HpSequence& seq = corpus[index % corpus.size()];
    auto seq_ptr = std::make_shared<const HpSequence>(seq);
    NetEvaluator evaluator(champion);
    return fold_episode(seq_ptr, evaluator, config.search, /*noise=*/true,
                        board_radius, mix_seed(config.seed, kEpisodeStream + index));
  };

  while (!out_of_budget()) {
    // One group of self-play episodes, then the paired optimizer steps.
    const int group = config.workers;
    std::vector<EpisodeRecord> records(static_cast<size_t>(group));
    if (group == 1) {
      records[0] = play_episode(st.episodes);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(static_cast<size_t>(group));
      for (int w = 0; w < group; ++w)
        threads.emplace_back([&records, &play_episode, &st, w] {
          records[static_cast<size_t>(w)] =
              play_episode(st.episodes + static_cast<uint64_t>(w));
        });
      for (std::thread& t : threads) t.join();
    }
    for (int w = 0; w < group; ++w) {
      EpisodeRecord& rec = records[static_cast<size_t>(w)];
      rec.validate(board_radius);
      for (ReplaySample& s : harvest_samples(rec)) memory.push(std::move(s));
      std::snprintf(line, sizeof line,
                    "episode n=%llu len=%d decisions=%d contacts=%d kind=%s\n",
                    static_cast<unsigned long long>(st.episodes),
                    rec.sequence->length(), rec.decisions(),
                    rec.score.contacts, terminal_name(rec.terminal));
      metrics << line;
      ++st.episodes;
    }
    metrics.flush();

    if (!memory.ready(config.batch_size)) continue;
    const int steps_now = config.steps_per_episode * group;
    for (int k = 0; k < steps_now && !out_of_budget(); ++k) {
      auto parts = training_iteration(memory, *candidate, config.batch_size,
                                      st.train_rng);
      std::snprintf(line, sizeof line,
                    "step n=%llu total=%.10g value=%.10g policy=%.10g "
                    "l2=%.10g mem=%d\n",
                    static_cast<unsigned long long>(candidate->training_steps()),
                    parts->total, parts->value_term, parts->policy_term,
                    parts->l2_term, memory.size());
      metrics << line << std::flush;
      if (candidate->training_steps() >= st.next_gate) {
        run_gate();
        st.next_gate += static_cast<uint64_t>(config.gate_interval);
      }
    }
  }

  // A final gate covers training done since the last scheduled one, unless
  // the caller asked for an immediate stop.
  const bool interrupted = stop && stop->load();
  if (!interrupted && candidate->training_steps() > st.last_gated) run_gate();
  save_all();

  TrainingSummary summary;
  summary.steps = candidate->training_steps();
  summary.episodes = st.episodes;
  summary.gates = st.gates;
  summary.accepted_gates = st.accepted;
  summary.champion_checkpoint = champion_path;
  summary.metrics_log = metrics_path;
  return summary;
}

ComparisonTable compare_engines(
    const std::vector<BenchmarkEntry>& entries,
    const std::vector<std::pair<std::string, FoldEngine>>& engines) {
  ComparisonTable table;
  for (const auto& [name, engine] : engines) {
    (void)engine;
    table.engine_names.push_back(name);
  }
  for (const BenchmarkEntry& entry : entries) {
    ComparisonTable::Row row;
    row.id = entry.id;
    row.length = entry.sequence.length();
    row.upper_bound_energy = entry.upper_bound_energy;
    row.known_optimum_energy = entry.known_optimum_energy;
    for (const auto& [name, engine] : engines) {
      (void)name;
      EngineOutcome outcome;
      try {
        outcome = engine(entry);
      } catch (const std::exception& e) {
        outcome.ok = false;
        outcome.contacts = 0;
        outcome.error = e.what();
      }
      row.outcomes.push_back(std::move(outcome));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string ComparisonTable::to_text() const {
  std::string out = "id\tlength\tupper_bound\toptimum";
  for (const std::string& name : engine_names) out += "\t" + name;
  out += "\n";
  for (const Row& row : rows) {
    out += row.id + "\t" + std::to_string(row.length) + "\t" +
           std::to_string(row.upper_bound_energy) + "\t";
    out += row.known_optimum_energy
               ? std::to_string(*row.known_optimum_energy)
               : std::string("NA");
    for (const EngineOutcome& cell : row.outcomes) {
      out += "\t";
      if (cell.ok)
        out += "energy=" + std::to_string(-cell.contacts) +
               " contacts=" + std::to_string(cell.contacts);
      else
        out += "error: " + cell.error;
    }
    out += "\n";
  }
  return out;
}

}  // namespace hpfold

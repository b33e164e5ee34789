// Microbenchmarks for the hot paths: board moves, state encoding, network
// inference, oracle enumeration, and one full search decision.

#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "hpfold/encode.hpp"
#include "hpfold/hp.hpp"
#include "hpfold/net.hpp"
#include "hpfold/oracle.hpp"
#include "hpfold/search.hpp"
#include "hpfold/selfplay.hpp"

namespace {

using namespace hpfold;

const HpSequence& probe_sequence() {
  static const HpSequence seq = HpSequence::parse("hphpphhphpph");
  return seq;
}

// A mid-episode state with a few contacts on the board.
FoldState probe_state(int radius) {
  std::vector<RelativeMove> moves = {
      RelativeMove::Left, RelativeMove::Forward, RelativeMove::Left,
      RelativeMove::Left, RelativeMove::Right,   RelativeMove::Forward};
  return FoldState::replay(probe_sequence(), moves, radius);
}

void bm_apply_move(benchmark::State& bench) {
  FoldState base = probe_state(6);
  for (auto _ : bench) {
    FoldState next = base.apply_move(RelativeMove::Left);
    benchmark::DoNotOptimize(next.contacts());
  }
}
BENCHMARK(bm_apply_move);

void bm_encode_state(benchmark::State& bench) {
  FoldState state = probe_state(6);
  for (auto _ : bench) {
    PlaneStack stack = encode_episode_state(state, 25);
    benchmark::DoNotOptimize(stack.at(0, 0, 0));
  }
}
BENCHMARK(bm_encode_state);

void bm_net_forward(benchmark::State& bench) {
  NetworkConfig config;
  config.grid_size = 25;
  config.residual_blocks = 4;
  config.channels = 16;
  NetworkF net(config, 99);
  PlaneStack stack = encode_episode_state(probe_state(6), 25);
  for (auto _ : bench) {
    PolicyValue out = net.forward(stack);
    benchmark::DoNotOptimize(out.value);
  }
}
BENCHMARK(bm_net_forward);

void bm_oracle_length12(benchmark::State& bench) {
  for (auto _ : bench) {
    OracleResult r = oracle_solve(probe_sequence());
    benchmark::DoNotOptimize(r.best_contacts);
  }
}
BENCHMARK(bm_oracle_length12);

void bm_search_decision_rollout(benchmark::State& bench) {
  SearchConfig config;
  config.simulations = 100;
  for (auto _ : bench) {
    RolloutEvaluator eval(7);
    FoldState root = FoldState::opening(probe_sequence(), 6);
    SearchTree tree(root, eval, config, 13);
    SearchPolicy policy = tree.run_search(false);
    benchmark::DoNotOptimize(policy.probabilities[0]);
  }
}
BENCHMARK(bm_search_decision_rollout);

void bm_search_decision_net(benchmark::State& bench) {
  NetworkConfig net_config;
  net_config.grid_size = 25;
  net_config.residual_blocks = 4;
  net_config.channels = 16;
  auto net = std::make_shared<const NetworkF>(NetworkF(net_config, 99));
  SearchConfig config;
  config.simulations = 100;
  for (auto _ : bench) {
    NetEvaluator eval(net);
    FoldState root = FoldState::opening(probe_sequence(), 6);
    SearchTree tree(root, eval, config, 13);
    SearchPolicy policy = tree.run_search(false);
    benchmark::DoNotOptimize(policy.probabilities[0]);
  }
}
BENCHMARK(bm_search_decision_net);

}  // namespace

BENCHMARK_MAIN();

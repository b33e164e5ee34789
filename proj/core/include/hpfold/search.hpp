#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "hpfold/hp.hpp"

namespace hpfold {

// Policy-value estimate for one state. priors covers all three relative
// moves; the search renormalizes over the legal subset. value is the
// expected final contact count of the episode, in raw contact units.
struct Evaluation {
  std::array<double, 3> priors{};
  double value = 0.0;
};

class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual Evaluation evaluate(const FoldState& state) = 0;
};

// Uniform priors plus a uniform-random playout to termination, scored by
// the resulting contact count. Plugging this into the same tree search
// gives the rollout-UCT baseline. Holds private RNG state, so each episode
// worker needs its own instance.
class RolloutEvaluator : public Evaluator {
 public:
  explicit RolloutEvaluator(uint64_t seed) : rng_(seed) {}
  Evaluation evaluate(const FoldState& state) override;

 private:
  std::mt19937_64 rng_;
};

struct SearchConfig {
  int simulations = 300;
  double c_alpha = 1.0;
  double dirichlet_alpha = 0.03;
  double dirichlet_epsilon = 0.25;

  void validate() const;
};

struct EdgeStats {
  int n = 0;
  double w = 0.0;
  double q = 0.0;
  double p = 0.0;
};

struct SearchNode {
  FoldState state;
  TerminalKind terminal;
  bool expanded = false;
  bool noised = false;

  struct Edge {
    RelativeMove move;
    EdgeStats stats;
    std::unique_ptr<SearchNode> child;  // allocated on first traversal
  };
  // One entry per legal move, in canonical order, populated at expansion.
  std::vector<Edge> edges;

  explicit SearchNode(FoldState s);
};

// Visit-count distribution over the three moves; illegal moves stay 0.
struct SearchPolicy {
  std::array<double, 3> probabilities{};

  double operator[](RelativeMove m) const {
    return probabilities[static_cast<size_t>(m)];
  }
};

// argmax of the policy; ties break Forward < Left < Right.
RelativeMove choose_move(const SearchPolicy& policy);

// One search tree per episode. The tree survives across consecutive
// residue decisions: advance() reroots at the played child and keeps its
// statistics, and the next run_search tops visits up to config.simulations
// instead of starting from zero.
class SearchTree {
 public:
  SearchTree(FoldState root, Evaluator& evaluator, SearchConfig config,
             uint64_t seed);

  // Runs simulations until the root's edge visits sum to
  // config.simulations, then returns pi(a) = N(root,a) / sum N. With
  // add_noise, the root priors are first mixed with a fresh
  // Dirichlet(alpha) draw at weight epsilon (self-play exploration; never
  // used for evaluation). Throws std::logic_error on a terminal root.
  SearchPolicy run_search(bool add_noise);

  // Reroots at the child reached by the move, preserving its subtree.
  // An untraversed child is rebuilt from apply_move.
  void advance(RelativeMove move);

  const SearchNode& root() const { return *root_; }
  const FoldState& root_state() const { return root_->state; }
  uint64_t evaluator_calls() const { return evaluator_calls_; }

  // Per-edge move, N, W, Q, P of the current root, one line per edge.
  std::string root_summary() const;

 private:
  // Creates the edges from the evaluator's priors and returns its value
  // estimate. Expansion and evaluation are one step.
  double expand(SearchNode& node);
  double simulate();
  void mix_root_noise();

  std::unique_ptr<SearchNode> root_;
  Evaluator& evaluator_;
  SearchConfig config_;
  int r_upper_;
  std::mt19937_64 rng_;
  uint64_t evaluator_calls_ = 0;
};

// Index of the edge maximizing Q/r_upper + c_alpha * P * sqrt(sum N) /
// (1 + N); ties break on edge order. With r_upper = 0 the Q term is
// defined as 0 and selection is driven by priors and visits alone.
size_t select_action(const SearchNode& node, int r_upper, double c_alpha);

// Single-decision convenience: fresh tree, one search, no reuse.
SearchPolicy run_search(const FoldState& root, Evaluator& evaluator,
                        const SearchConfig& config, bool add_noise,
                        uint64_t seed);

}  // namespace hpfold

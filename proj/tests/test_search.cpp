#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hpfold/error.hpp"
#include "hpfold/hp.hpp"
#include "hpfold/search.hpp"

using namespace hpfold;

namespace {

// Fixed priors and value, no randomness: search behavior becomes a pure
// function of the tree arithmetic.
class StubEvaluator : public Evaluator {
 public:
  Evaluation evaluate(const FoldState&) override {
    Evaluation e;
    e.priors = {0.5, 0.3, 0.2};
    e.value = 0.25;
    return e;
  }
};

SearchNode::Edge make_edge(RelativeMove m, int n, double w, double p) {
  SearchNode::Edge e{m, {}, nullptr};
  e.stats.n = n;
  e.stats.w = w;
  e.stats.q = n > 0 ? w / n : 0.0;
  e.stats.p = p;
  return e;
}

// Recursively checks the bookkeeping of an expanded subtree: Q = W / N on
// every edge, and each traversed child absorbed exactly one evaluation
// before passing the rest of its visits down.
void check_accounting(const SearchNode& node) {
  for (const SearchNode::Edge& e : node.edges) {
    if (e.stats.n > 0) {
      CHECK(std::abs(e.stats.w - e.stats.q * e.stats.n) <= 1e-9);
    } else {
      CHECK(e.stats.q == 0.0);
    }
    if (e.child && e.child->expanded) {
      int child_sum = 0;
      for (const SearchNode::Edge& ce : e.child->edges) child_sum += ce.stats.n;
      CHECK(child_sum == e.stats.n - 1);
      check_accounting(*e.child);
    }
  }
}

}  // namespace

TEST_CASE("selection maximizes the regularized score with canonical ties") {
  FoldState state = FoldState::opening(HpSequence::parse("hhhhhh"), 8);
  SearchNode node(state);

  SUBCASE("a fresh node is a three-way tie broken by move order") {
    node.edges.push_back(make_edge(RelativeMove::Forward, 0, 0, 0.5));
    node.edges.push_back(make_edge(RelativeMove::Left, 0, 0, 0.3));
    node.edges.push_back(make_edge(RelativeMove::Right, 0, 0, 0.2));
    CHECK(select_action(node, 4, 1.0) == 0);
  }
  SUBCASE("hand-computed scores pick the middle edge") {
    // F: 2/4 + 0.2 sqrt(3)/3, L: 3/4 + 0.5 sqrt(3)/2, R: 0.3 sqrt(3).
    node.edges.push_back(make_edge(RelativeMove::Forward, 2, 4.0, 0.2));
    node.edges.push_back(make_edge(RelativeMove::Left, 1, 3.0, 0.5));
    node.edges.push_back(make_edge(RelativeMove::Right, 0, 0.0, 0.3));
    CHECK(select_action(node, 4, 1.0) == 1);
    // With a zero upper bound the exploitation term drops out entirely and
    // the unvisited high-urgency edge wins.
    CHECK(select_action(node, 0, 1.0) == 2);
  }
  SUBCASE("priors decide once any visit seeds the urgency term") {
    node.edges.push_back(make_edge(RelativeMove::Forward, 0, 0, 0.2));
    node.edges.push_back(make_edge(RelativeMove::Left, 0, 0, 0.5));
    node.edges.push_back(make_edge(RelativeMove::Right, 1, 0, 0.3));
    CHECK(select_action(node, 4, 1.0) == 1);
  }
  SUBCASE("a node without edges is a logic error") {
    CHECK_THROWS_AS(select_action(node, 4, 1.0), std::logic_error);
  }
}

TEST_CASE("choose_move takes the argmax with Forward-first ties") {
  SearchPolicy p;
  p.probabilities = {0.4, 0.4, 0.2};
  CHECK(choose_move(p) == RelativeMove::Forward);
  p.probabilities = {0.1, 0.45, 0.45};
  CHECK(choose_move(p) == RelativeMove::Left);
  p.probabilities = {0.2, 0.3, 0.5};
  CHECK(choose_move(p) == RelativeMove::Right);
}

TEST_CASE("visit counts always sum to the simulation budget") {
  StubEvaluator stub;
  SearchConfig config;
  config.simulations = 157;
  FoldState root = FoldState::opening(HpSequence::parse("hphpphhpph"), 12);
  SearchTree tree(root, stub, config, 42);
  SearchPolicy policy = tree.run_search(false);

  int total = 0;
  double psum = 0;
  for (const SearchNode::Edge& e : tree.root().edges) total += e.stats.n;
  for (double v : policy.probabilities) psum += v;
  CHECK(total == config.simulations);
  CHECK(std::abs(psum - 1.0) <= 1e-12);
  check_accounting(tree.root());
}

TEST_CASE("the tree survives advance and tops visits back up") {
  StubEvaluator stub;
  SearchConfig config;
  config.simulations = 200;
  FoldState root = FoldState::opening(HpSequence::parse("hphpphhpphhh"), 14);
  SearchTree tree(root, stub, config, 7);

  SearchPolicy first = tree.run_search(false);
  uint64_t calls_first = tree.evaluator_calls();
  RelativeMove played = choose_move(first);
  tree.advance(played);
  CHECK(tree.root_state().moves().back() == played);

  tree.run_search(false);
  int total = 0;
  for (const SearchNode::Edge& e : tree.root().edges) total += e.stats.n;
  CHECK(total == config.simulations);
  // The advanced subtree kept its evaluations, so the second search needs
  // strictly fewer than a fresh one.
  CHECK(tree.evaluator_calls() - calls_first < 200);
  check_accounting(tree.root());
}

TEST_CASE("advancing into an unvisited child rebuilds it from scratch") {
  StubEvaluator stub;
  SearchConfig config;
  config.simulations = 2;
  FoldState root = FoldState::opening(HpSequence::parse("hphpph"), 8);
  SearchTree tree(root, stub, config, 9);
  tree.run_search(false);

  RelativeMove cold = RelativeMove::Forward;
  bool found = false;
  for (const SearchNode::Edge& e : tree.root().edges) {
    if (e.stats.n == 0) {
      cold = e.move;
      found = true;
      break;
    }
  }
  REQUIRE(found);  // two simulations cannot touch all three edges
  FoldState expected = tree.root_state().apply_move(cold);
  tree.advance(cold);
  CHECK(tree.root_state().placed() == expected.placed());

  tree.run_search(false);
  int total = 0;
  for (const SearchNode::Edge& e : tree.root().edges) total += e.stats.n;
  CHECK(total == config.simulations);
}

TEST_CASE("identical seeds reproduce the search exactly") {
  SearchConfig config;
  config.simulations = 120;
  FoldState root = FoldState::opening(HpSequence::parse("hhpphphhph"), 12);

  RolloutEvaluator eval_a(11);
  RolloutEvaluator eval_b(11);
  SearchTree tree_a(root, eval_a, config, 5);
  SearchTree tree_b(root, eval_b, config, 5);
  SearchPolicy pa = tree_a.run_search(false);
  SearchPolicy pb = tree_b.run_search(false);
  CHECK(pa.probabilities == pb.probabilities);
  CHECK(tree_a.root_summary() == tree_b.root_summary());

  // The free-function form matches the tree form for a single decision.
  RolloutEvaluator eval_c(11);
  SearchPolicy pc = run_search(root, eval_c, config, false, 5);
  CHECK(pc.probabilities == pa.probabilities);
}

TEST_CASE("root noise is drawn once per decision root") {
  StubEvaluator stub;
  SearchConfig config;
  config.simulations = 50;
  config.dirichlet_epsilon = 0.25;
  FoldState root = FoldState::opening(HpSequence::parse("hphpphhp"), 10);
  SearchTree tree(root, stub, config, 3);

  tree.run_search(true);
  CHECK(tree.root().noised);
  std::vector<double> priors_after_first;
  for (const SearchNode::Edge& e : tree.root().edges)
    priors_after_first.push_back(e.stats.p);

  tree.run_search(true);
  std::vector<double> priors_after_second;
  for (const SearchNode::Edge& e : tree.root().edges)
    priors_after_second.push_back(e.stats.p);
  CHECK(priors_after_first == priors_after_second);

  // Noised priors still sum to one over the legal moves.
  double sum = 0;
  for (double p : priors_after_first) sum += p;
  CHECK(std::abs(sum - 1.0) <= 1e-12);
}

TEST_CASE("evaluation searches leave the raw priors in place") {
  StubEvaluator stub;
  SearchConfig config;
  config.simulations = 10;
  FoldState root = FoldState::opening(HpSequence::parse("hphpph"), 8);
  SearchTree tree(root, stub, config, 3);
  tree.run_search(false);
  CHECK(!tree.root().noised);
  // All three opening moves are legal, so the stub priors arrive as-is.
  std::vector<double> priors;
  for (const SearchNode::Edge& e : tree.root().edges)
    priors.push_back(e.stats.p);
  REQUIRE(priors.size() == 3);
  CHECK(std::abs(priors[0] - 0.5) <= 1e-12);
  CHECK(std::abs(priors[1] - 0.3) <= 1e-12);
  CHECK(std::abs(priors[2] - 0.2) <= 1e-12);
}

TEST_CASE("terminal roots cannot be searched") {
  StubEvaluator stub;
  SearchConfig config;
  std::vector<RelativeMove> mv = {RelativeMove::Left, RelativeMove::Left};
  FoldState done = FoldState::replay(HpSequence::parse("hhhh"), mv, 8);
  REQUIRE(done.terminal() == TerminalKind::Complete);
  SearchTree tree(done, stub, config, 0);
  CHECK_THROWS_AS(tree.run_search(false), std::logic_error);
}

TEST_CASE("search config validation") {
  SearchConfig config;
  config.simulations = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = SearchConfig{};
  config.c_alpha = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = SearchConfig{};
  config.dirichlet_epsilon = 1.5;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  CHECK_NOTHROW(SearchConfig{}.validate());
}

TEST_CASE("rollout search finds the square fold of HHHH") {
  SearchConfig config;
  config.simulations = 300;
  FoldState root = FoldState::opening(HpSequence::parse("hhhh"), 6);
  RolloutEvaluator rollout(21);
  SearchTree tree(root, rollout, config, 22);
  SearchPolicy policy = tree.run_search(false);
  RelativeMove chosen = choose_move(policy);
  // Forward can never reach a contact; both turns can.
  CHECK(chosen != RelativeMove::Forward);
  CHECK(policy[RelativeMove::Forward] <
        policy[RelativeMove::Left] + policy[RelativeMove::Right]);
}

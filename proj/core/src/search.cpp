#include "hpfold/search.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "hpfold/error.hpp"

namespace hpfold {

Evaluation RolloutEvaluator::evaluate(const FoldState& state) {
  Evaluation out;
  out.priors = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  FoldState cur = state;
  while (cur.terminal() == TerminalKind::Ongoing) {
    std::vector<RelativeMove> legal = cur.legal_moves().to_vector();
    std::uniform_int_distribution<size_t> pick(0, legal.size() - 1);
    cur = cur.apply_move(legal[pick(rng_)]);
  }
  out.value = cur.contacts();
  return out;
}

void SearchConfig::validate() const {
  if (simulations < 1)
    throw ConfigError("simulations must be at least 1");
  if (!(c_alpha > 0))
    throw ConfigError("c_alpha must be positive");
  if (!(dirichlet_alpha > 0))
    throw ConfigError("dirichlet_alpha must be positive");
  if (!(dirichlet_epsilon >= 0 && dirichlet_epsilon <= 1))
    throw ConfigError("dirichlet_epsilon must lie in [0,1]");
}

SearchNode::SearchNode(FoldState s)
    : state(std::move(s)), terminal(state.terminal()) {}

RelativeMove choose_move(const SearchPolicy& policy) {
  size_t best = 0;
  for (size_t i = 1; i < policy.probabilities.size(); ++i)
    if (policy.probabilities[i] > policy.probabilities[best]) best = i;
  return static_cast<RelativeMove>(best);
}

size_t select_action(const SearchNode& node, int r_upper, double c_alpha) {
  if (node.edges.empty())
    throw std::logic_error("select_action on a node without edges");
  double sum_n = 0;
  for (const SearchNode::Edge& e : node.edges) sum_n += e.stats.n;
  double sqrt_sum = std::sqrt(sum_n);
  size_t best = 0;
  double best_score = -1.0;  // scores are always >= 0
  for (size_t i = 0; i < node.edges.size(); ++i) {
    const EdgeStats& s = node.edges[i].stats;
    double q_star = r_upper > 0 ? s.q / r_upper : 0.0;
    double u = c_alpha * s.p * sqrt_sum / (1 + s.n);
    double score = q_star + u;
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

SearchTree::SearchTree(FoldState root, Evaluator& evaluator,
                       SearchConfig config, uint64_t seed)
    : root_(std::make_unique<SearchNode>(std::move(root))),
      evaluator_(evaluator),
      config_(std::move(config)),
      r_upper_(upper_bound(root_->state.sequence())),
      rng_(seed) {
  config_.validate();
}

double SearchTree::expand(SearchNode& node) {
  Evaluation eval = evaluator_.evaluate(node.state);
  ++evaluator_calls_;
  node.state.legal_moves().for_each([&](RelativeMove m) {
    SearchNode::Edge edge;
    edge.move = m;
    edge.stats.p = eval.priors[static_cast<size_t>(m)];
    node.edges.push_back(std::move(edge));
  });
  double sum = 0;
  for (const SearchNode::Edge& e : node.edges) sum += e.stats.p;
  for (SearchNode::Edge& e : node.edges)
    e.stats.p = sum > 0 ? e.stats.p / sum : 1.0 / node.edges.size();
  node.expanded = true;
  return eval.value;
}

double SearchTree::simulate() {
  SearchNode* node = root_.get();
  std::vector<EdgeStats*> path;
  while (node->terminal == TerminalKind::Ongoing && node->expanded) {
    size_t i = select_action(*node, r_upper_, config_.c_alpha);
    SearchNode::Edge& edge = node->edges[i];
    path.push_back(&edge.stats);
    if (!edge.child)
      edge.child =
          std::make_unique<SearchNode>(node->state.apply_move(edge.move));
    node = edge.child.get();
  }
  double value = node->terminal != TerminalKind::Ongoing
                     ? node->state.contacts()
                     : expand(*node);
  for (EdgeStats* s : path) {
    s->n += 1;
    s->w += value;
    s->q = s->w / s->n;
  }
  return value;
}

void SearchTree::mix_root_noise() {
  if (root_->noised || config_.dirichlet_epsilon == 0) return;
  std::gamma_distribution<double> gamma(config_.dirichlet_alpha, 1.0);
  std::vector<double> draw(root_->edges.size());
  double sum = 0;
  for (double& d : draw) {
    d = gamma(rng_);
    sum += d;
  }
  for (size_t i = 0; i < root_->edges.size(); ++i) {
    double noise = sum > 0 ? draw[i] / sum : 1.0 / draw.size();
    EdgeStats& s = root_->edges[i].stats;
    s.p = (1 - config_.dirichlet_epsilon) * s.p +
          config_.dirichlet_epsilon * noise;
  }
  root_->noised = true;
}

SearchPolicy SearchTree::run_search(bool add_noise) {
  if (root_->terminal != TerminalKind::Ongoing)
    throw std::logic_error("run_search requires an ongoing root state");
  if (!root_->expanded) expand(*root_);
  if (add_noise) mix_root_noise();
  int total = 0;
  for (const SearchNode::Edge& e : root_->edges) total += e.stats.n;
  for (; total < config_.simulations; ++total) simulate();
  SearchPolicy policy;
  double sum = 0;
  for (const SearchNode::Edge& e : root_->edges) sum += e.stats.n;
  for (const SearchNode::Edge& e : root_->edges)
    policy.probabilities[static_cast<size_t>(e.move)] = e.stats.n / sum;
  return policy;
}

void SearchTree::advance(RelativeMove move) {
  for (SearchNode::Edge& e : root_->edges) {
    if (e.move != move) continue;
    if (e.child)
      root_ = std::move(e.child);
    else
      root_ = std::make_unique<SearchNode>(root_->state.apply_move(move));
    return;
  }
  throw IllegalMoveError("advance along a move with no edge at the root");
}

std::string SearchTree::root_summary() const {
  std::string out;
  char line[128];
  for (const SearchNode::Edge& e : root_->edges) {
    std::snprintf(line, sizeof line, "%c N=%d W=%.6g Q=%.6g P=%.6g\n",
                  to_char(e.move), e.stats.n, e.stats.w, e.stats.q, e.stats.p);
    out += line;
  }
  return out;
}

SearchPolicy run_search(const FoldState& root, Evaluator& evaluator,
                        const SearchConfig& config, bool add_noise,
                        uint64_t seed) {
  SearchTree tree(root, evaluator, config, seed);
  return tree.run_search(add_noise);
}

}  // namespace hpfold

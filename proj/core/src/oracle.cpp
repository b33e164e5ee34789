#include "hpfold/oracle.hpp"

#include <array>
#include <string>

namespace hpfold {
namespace {

struct Solver {
  const HpSequence& seq;
  const OracleOptions& opts;
  int n;
  int side;                 // dense occupancy grid is side x side
  int origin;               // flat index of lattice (0,0)
  std::vector<int16_t> grid;  // chain index at each cell, -1 when empty
  std::array<int, 4> dir;     // flat-index offset per heading
  // bound_tail[i] = largest number of contacts residues i..n-1 can still
  // add. Interior H residues contribute at most 2 (four neighbours minus
  // the chain predecessor and the successor yet to come), the final H
  // residue at most 3 (no successor).
  std::vector<int> bound_tail;
  std::vector<RelativeMove> stack;
  int target;               // sound contact bound, for the early stop
  bool stop = false;
  OracleResult out;

  explicit Solver(const HpSequence& s, const OracleOptions& o)
      : seq(s), opts(o), n(s.length()) {
    side = 2 * n + 3;
    origin = (n + 1) * side + (n + 1);
    grid.assign(static_cast<size_t>(side) * side, -1);
    dir = {side, 1, -side, -1};  // north, east, south, west
    bound_tail.assign(n + 1, 0);
    for (int i = n - 1; i >= 0; --i) {
      int cap = seq.at(i) == Residue::H ? (i == n - 1 ? 3 : 2) : 0;
      bound_tail[i] = bound_tail[i + 1] + cap;
    }
    target = contact_capacity_bound(s);
    out.best_contacts = -1;  // any complete fold beats this sentinel
  }

  bool is_h(int i) const { return seq.at(i) == Residue::H; }

  void record(int contacts) {
    if (contacts > out.best_contacts) {
      out.best_contacts = contacts;
      out.best_moves = stack;
      out.optimal_count = 1;
      if (!opts.count_optima && opts.stop_at_bound && contacts == target)
        stop = true;
    } else if (contacts == out.best_contacts) {
      ++out.optimal_count;
    }
  }

  // i residues are placed, the head (residue i-1) sits at cell `at` with
  // the given heading, and `contacts` pairs are formed so far.
  void dfs(int i, int at, int heading, int contacts) {
    if (i == n) {
      record(contacts);
      return;
    }
    if (opts.prune && out.best_contacts >= 0) {
      int reachable = contacts + bound_tail[i];
      if (reachable < out.best_contacts) return;
      if (!opts.count_optima && reachable == out.best_contacts) return;
    }
    for (RelativeMove m : kMoveOrder) {
      int nh = (heading + (m == RelativeMove::Forward ? 0
                           : m == RelativeMove::Left  ? 3
                                                      : 1)) & 3;
      int np = at + dir[nh];
      if (grid[np] >= 0) continue;
      ++out.nodes;
      int gain = 0;
      if (is_h(i)) {
        for (int d = 0; d < 4; ++d) {
          int j = grid[np + dir[d]];
          if (j >= 0 && j <= i - 2 && is_h(j)) ++gain;
        }
      }
      grid[np] = static_cast<int16_t>(i);
      stack.push_back(m);
      dfs(i + 1, np, nh, contacts + gain);
      stack.pop_back();
      grid[np] = -1;
      if (stop) return;
    }
  }

  OracleResult run() {
    grid[origin] = 0;
    grid[origin + dir[0]] = 1;
    out.nodes = 2;
    dfs(2, origin + dir[0], 0, 0);
    return std::move(out);
  }
};

}  // namespace

OracleResult oracle_solve(const HpSequence& seq, const OracleOptions& opts) {
  if (seq.length() > opts.guard_length)
    throw GuardError("sequence length " + std::to_string(seq.length()) +
                     " exceeds the oracle guard of " +
                     std::to_string(opts.guard_length) +
                     "; raise the limit explicitly to solve it anyway");
  Solver solver(seq, opts);
  return solver.run();
}

}  // namespace hpfold

#pragma once

#include <cstdint>
#include <vector>

#include "hpfold/error.hpp"
#include "hpfold/hp.hpp"

namespace hpfold {

// Exhaustive branch-and-bound solver for short sequences. Enumerates every
// complete self-avoiding fold reachable from the standard opening and keeps
// the one with the most H-H contacts. Cost grows roughly 2.6x per residue,
// so solve() refuses sequences longer than guard_length unless the caller
// raises it deliberately.
struct OracleOptions {
  // Skip branches whose optimistic completion bound cannot beat the best
  // fold found so far. Turning this off gives a plain exhaustive search;
  // results must be identical either way.
  bool prune = true;
  // Count how many distinct complete folds reach the optimum. Counting
  // disables the stop-at-upper-bound shortcut so every optimum is visited.
  bool count_optima = false;
  // Stop as soon as a fold meets the sound capacity bound; nothing can beat it.
  bool stop_at_bound = true;
  // Longest sequence solve() accepts before throwing GuardError.
  int guard_length = 16;
};

struct OracleResult {
  int best_contacts = 0;
  // Moves of the first optimal fold in search order (forward, left, right),
  // starting at the third residue. Empty for length-2 sequences.
  std::vector<RelativeMove> best_moves;
  // Number of optimal complete folds. Meaningful only when count_optima
  // was set; otherwise the early-stop shortcut may leave it partial.
  std::uint64_t optimal_count = 0;
  // Residue placements performed, for measuring how much pruning saves.
  std::uint64_t nodes = 0;

  int best_energy() const { return -best_contacts; }
};

// Throws GuardError when the sequence is longer than opts.guard_length.
OracleResult oracle_solve(const HpSequence& seq, const OracleOptions& opts = {});

}  // namespace hpfold

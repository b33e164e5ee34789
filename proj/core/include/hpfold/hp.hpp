#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hpfold/error.hpp"

namespace hpfold {

enum class Residue : std::uint8_t { H = 0, P = 1 };

inline char to_char(Residue r) { return r == Residue::H ? 'H' : 'P'; }

// A validated H/P string of length >= 2. Residue positions are 1-indexed
// where parity matters (the contact upper bound).
class HpSequence {
 public:
  explicit HpSequence(std::vector<Residue> residues);

  // Accepts a plain H/P string (case-insensitive) or run-length notation
  // with parenthesized groups and digit repeat counts, e.g.
  // "(hp)2ph(hp)2(ph)2hp(ph)2". A repeat count applies to the letter or
  // group immediately before it.
  static HpSequence parse(std::string_view text);

  // Maps one-letter amino-acid codes onto H/P through a fixed
  // hydrophobicity table: A C F I L M V W Y are hydrophobic, the other
  // eleven standard residues are polar.
  static HpSequence from_amino_acids(std::string_view text);

  int length() const { return static_cast<int>(residues_.size()); }
  Residue at(int i) const { return residues_[static_cast<size_t>(i)]; }
  const std::vector<Residue>& residues() const { return residues_; }
  std::string to_string() const;
  int h_count() const;

  bool operator==(const HpSequence& other) const = default;

 private:
  std::vector<Residue> residues_;
};

// Classical parity estimate 2 * min(O, E), where O and E count H residues
// at odd and even 1-indexed positions. This is the R_upper used to scale
// search rewards and the "upper bound" column of benchmark tables. It is
// not a strict cap: a hydrophobic chain end has three free lattice
// neighbors instead of two, so folds can beat this value by up to one
// contact per such end (HPHPPHHPHPPH reaches 5 against an estimate of 4).
// contact_capacity_bound gives the sound version.
int upper_bound(const HpSequence& seq);

// Provably sound contact bound: every H-H contact joins an odd-position H
// with an even-position one (lattice parity), and each H can host at most
// 4 - (number of chain bonds) contacts, i.e. 2 in the interior and 3 at a
// chain end. The bound is min over the two parity classes of their total
// capacity. Never exceeded by any self-avoiding fold.
int contact_capacity_bound(const HpSequence& seq);

struct Coord {
  int x = 0;
  int y = 0;
  bool operator==(const Coord&) const = default;
};

// Absolute direction of the most recent chain step. North is +y.
enum class Heading : std::uint8_t { North = 0, East = 1, South = 2, West = 3 };

// The three relative folding actions. The declaration order is also the
// canonical tie-break order everywhere.
enum class RelativeMove : std::uint8_t { Forward = 0, Left = 1, Right = 2 };

inline constexpr std::array<RelativeMove, 3> kMoveOrder = {
    RelativeMove::Forward, RelativeMove::Left, RelativeMove::Right};

char to_char(RelativeMove m);
RelativeMove move_from_char(char c);

Heading turn(Heading h, RelativeMove m);
Coord step_from(Coord c, Heading h);

// Subset of {Forward, Left, Right}; iteration yields canonical order.
class MoveSet {
 public:
  void add(RelativeMove m) { mask_ |= bit(m); }
  bool contains(RelativeMove m) const { return mask_ & bit(m); }
  int size() const;
  bool empty() const { return mask_ == 0; }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (RelativeMove m : kMoveOrder)
      if (contains(m)) fn(m);
  }
  std::vector<RelativeMove> to_vector() const;

  bool operator==(const MoveSet&) const = default;

 private:
  static std::uint8_t bit(RelativeMove m) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(m));
  }
  std::uint8_t mask_ = 0;
};

enum class TerminalKind { Ongoing, Complete, Trapped };

struct ContactScore {
  int contacts = 0;
  int energy = 0;  // always -contacts
};

// A partial self-avoiding walk. Immutable after construction: apply_move
// returns a new state, so states can be shared freely between threads.
//
// The opening is deterministic: residue 1 sits at (0,0), residue 2 at
// (0,1), heading North. Decisions start at residue 3.
class FoldState {
 public:
  // Board vertices satisfy |x| <= radius and |y| <= radius. A radius of
  // sequence length never binds; the self-play engine uses the encoder's
  // vertex radius so every reachable state stays encodable.
  static FoldState opening(HpSequence seq, int board_radius);
  static FoldState opening(std::shared_ptr<const HpSequence> seq, int board_radius);

  // Reconstructs a state by replaying moves from the opening.
  static FoldState replay(HpSequence seq, std::span<const RelativeMove> moves,
                          int board_radius);

  int step() const { return static_cast<int>(placed_.size()); }
  int length() const { return seq_->length(); }
  const HpSequence& sequence() const { return *seq_; }
  std::shared_ptr<const HpSequence> sequence_ptr() const { return seq_; }
  const std::vector<Coord>& placed() const { return placed_; }
  Heading heading() const { return heading_; }
  int board_radius() const { return board_radius_; }
  Coord head() const { return placed_.back(); }

  bool occupied(Coord c) const;
  // 0-based residue index at a coordinate, if any.
  std::optional<int> residue_index_at(Coord c) const;

  // Running H-H contact count, maintained incrementally. hh_contacts()
  // recounts from scratch; the two must always agree.
  int contacts() const { return contacts_; }

  Coord move_target(RelativeMove m) const;
  MoveSet legal_moves() const;
  FoldState apply_move(RelativeMove m) const;
  TerminalKind terminal() const;

  // State after the first t residues of this walk (t >= 2).
  FoldState prefix(int t) const;

  // The decision moves that produced this walk (excludes the opening).
  std::vector<RelativeMove> moves() const;

 private:
  FoldState() = default;

  std::shared_ptr<const HpSequence> seq_;
  std::vector<Coord> placed_;
  std::unordered_map<std::uint64_t, std::int32_t> occupancy_;
  Heading heading_ = Heading::North;
  int contacts_ = 0;
  int board_radius_ = 0;
};

// Definitional H-H contact count: unordered pairs (i, j), |i-j| >= 2, both
// hydrophobic, lattice distance 1. Independent of the incremental counter.
ContactScore hh_contacts(const FoldState& state);

// Same count over a bare coordinate list (prefix of seq). Works on
// symmetry-transformed coordinates that never existed as a FoldState.
int count_contacts(std::span<const Coord> coords, const HpSequence& seq);

// Relative move list from a placed coordinate path (inverse of replay).
std::vector<RelativeMove> moves_from_coords(std::span<const Coord> coords);

}  // namespace hpfold

#include "hpfold/hp.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

namespace hpfold {
namespace {

constexpr int kMaxExpandedLength = 100000;

std::uint64_t pack(Coord c) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.x)) << 32) |
         static_cast<std::uint32_t>(c.y);
}

// Recursive-descent expansion of the run-length notation. `depth` guards
// against pathological nesting.
void expand_group(std::string_view text, size_t& pos, int depth,
                  std::vector<Residue>& out) {
  if (depth > 16) throw ParseError("sequence notation nested too deeply");
  while (pos < text.size() && text[pos] != ')') {
    size_t unit_begin = out.size();
    char c = text[pos];
    if (c == 'h' || c == 'H') {
      out.push_back(Residue::H);
      ++pos;
    } else if (c == 'p' || c == 'P') {
      out.push_back(Residue::P);
      ++pos;
    } else if (c == '(') {
      ++pos;
      expand_group(text, pos, depth + 1, out);
      if (pos >= text.size() || text[pos] != ')')
        throw ParseError("unbalanced '(' in sequence notation");
      ++pos;
      if (out.size() == unit_begin)
        throw ParseError("empty group '()' in sequence notation");
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      throw ParseError("repeat count at position " + std::to_string(pos + 1) +
                       " has nothing to repeat");
    } else {
      throw ParseError(std::string("invalid character '") + c +
                       "' at position " + std::to_string(pos + 1));
    }
    if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      long repeat = 0;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        repeat = repeat * 10 + (text[pos] - '0');
        if (repeat > kMaxExpandedLength) throw ParseError("repeat count too large");
        ++pos;
      }
      if (repeat == 0) throw ParseError("repeat count of zero");
      size_t unit_len = out.size() - unit_begin;
      if (unit_len * static_cast<size_t>(repeat) + unit_begin >
          static_cast<size_t>(kMaxExpandedLength))
        throw ParseError("expanded sequence too long");
      for (long k = 1; k < repeat; ++k)
        out.insert(out.end(), out.begin() + static_cast<long>(unit_begin),
                   out.begin() + static_cast<long>(unit_begin + unit_len));
    }
  }
}

}  // namespace

HpSequence::HpSequence(std::vector<Residue> residues)
    : residues_(std::move(residues)) {
  if (residues_.size() < 2)
    throw ParseError("sequence must have at least 2 residues, got " +
                     std::to_string(residues_.size()));
}

HpSequence HpSequence::parse(std::string_view text) {
  // Trim surrounding whitespace; everything inside must be notation.
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  if (text.empty()) throw ParseError("empty sequence");

  std::vector<Residue> out;
  size_t pos = 0;
  expand_group(text, pos, 0, out);
  if (pos != text.size()) throw ParseError("unbalanced ')' in sequence notation");
  return HpSequence(std::move(out));
}

HpSequence HpSequence::from_amino_acids(std::string_view text) {
  // Hydrophobic set: A C F I L M V W Y. The remaining eleven standard
  // one-letter codes are polar. Kept as one constant so an alternative
  // classification is a one-line change.
  static constexpr std::string_view kHydrophobic = "ACFILMVWY";
  static constexpr std::string_view kPolar = "RNDQEGHKSTP";

  if (text.empty()) throw ParseError("empty amino-acid sequence");
  std::vector<Residue> out;
  out.reserve(text.size());
  for (size_t i = 0; i < text.size(); ++i) {
    char c = static_cast<char>(std::toupper(static_cast<unsigned char>(text[i])));
    if (kHydrophobic.find(c) != std::string_view::npos) {
      out.push_back(Residue::H);
    } else if (kPolar.find(c) != std::string_view::npos) {
      out.push_back(Residue::P);
    } else {
      throw ParseError(std::string("unknown amino-acid letter '") + text[i] +
                       "' at position " + std::to_string(i + 1));
    }
  }
  return HpSequence(std::move(out));
}

std::string HpSequence::to_string() const {
  std::string s;
  s.reserve(residues_.size());
  for (Residue r : residues_) s.push_back(to_char(r));
  return s;
}

int HpSequence::h_count() const {
  return static_cast<int>(std::count(residues_.begin(), residues_.end(), Residue::H));
}

int upper_bound(const HpSequence& seq) {
  int odd = 0, even = 0;
  for (int i = 0; i < seq.length(); ++i) {
    if (seq.at(i) != Residue::H) continue;
    // 1-indexed position i+1.
    if ((i + 1) % 2 == 1)
      ++odd;
    else
      ++even;
  }
  return 2 * std::min(odd, even);
}

int contact_capacity_bound(const HpSequence& seq) {
  const int n = seq.length();
  int odd_capacity = 0, even_capacity = 0;
  for (int i = 0; i < n; ++i) {
    if (seq.at(i) != Residue::H) continue;
    int capacity = (i == 0 || i == n - 1) ? 3 : 2;
    if ((i + 1) % 2 == 1)
      odd_capacity += capacity;
    else
      even_capacity += capacity;
  }
  return std::min(odd_capacity, even_capacity);
}

char to_char(RelativeMove m) {
  switch (m) {
    case RelativeMove::Forward: return 'F';
    case RelativeMove::Left: return 'L';
    case RelativeMove::Right: return 'R';
  }
  return '?';
}

RelativeMove move_from_char(char c) {
  switch (c) {
    case 'F': case 'f': return RelativeMove::Forward;
    case 'L': case 'l': return RelativeMove::Left;
    case 'R': case 'r': return RelativeMove::Right;
  }
  throw ParseError(std::string("invalid move character '") + c + "'");
}

Heading turn(Heading h, RelativeMove m) {
  auto v = static_cast<unsigned>(h);
  switch (m) {
    case RelativeMove::Forward: return h;
    case RelativeMove::Left: return static_cast<Heading>((v + 3u) % 4u);
    case RelativeMove::Right: return static_cast<Heading>((v + 1u) % 4u);
  }
  return h;
}

Coord step_from(Coord c, Heading h) {
  switch (h) {
    case Heading::North: return {c.x, c.y + 1};
    case Heading::East: return {c.x + 1, c.y};
    case Heading::South: return {c.x, c.y - 1};
    case Heading::West: return {c.x - 1, c.y};
  }
  return c;
}

int MoveSet::size() const {
  int n = 0;
  for (RelativeMove m : kMoveOrder)
    if (contains(m)) ++n;
  return n;
}

std::vector<RelativeMove> MoveSet::to_vector() const {
  std::vector<RelativeMove> v;
  for_each([&](RelativeMove m) { v.push_back(m); });
  return v;
}

FoldState FoldState::opening(HpSequence seq, int board_radius) {
  return opening(std::make_shared<const HpSequence>(std::move(seq)), board_radius);
}

FoldState FoldState::opening(std::shared_ptr<const HpSequence> seq, int board_radius) {
  if (board_radius < 1) throw ConfigError("board radius must be >= 1");
  FoldState s;
  s.seq_ = std::move(seq);
  s.placed_ = {{0, 0}, {0, 1}};
  s.occupancy_.emplace(pack({0, 0}), 0);
  s.occupancy_.emplace(pack({0, 1}), 1);
  s.heading_ = Heading::North;
  s.contacts_ = 0;
  s.board_radius_ = board_radius;
  return s;
}

FoldState FoldState::replay(HpSequence seq, std::span<const RelativeMove> moves,
                            int board_radius) {
  FoldState s = opening(std::move(seq), board_radius);
  for (RelativeMove m : moves) s = s.apply_move(m);
  return s;
}

bool FoldState::occupied(Coord c) const {
  return occupancy_.find(pack(c)) != occupancy_.end();
}

std::optional<int> FoldState::residue_index_at(Coord c) const {
  auto it = occupancy_.find(pack(c));
  if (it == occupancy_.end()) return std::nullopt;
  return static_cast<int>(it->second);
}

Coord FoldState::move_target(RelativeMove m) const {
  return step_from(head(), turn(heading_, m));
}

MoveSet FoldState::legal_moves() const {
  MoveSet set;
  for (RelativeMove m : kMoveOrder) {
    Coord t = move_target(m);
    if (std::abs(t.x) > board_radius_ || std::abs(t.y) > board_radius_) continue;
    if (occupied(t)) continue;
    set.add(m);
  }
  return set;
}

FoldState FoldState::apply_move(RelativeMove m) const {
  int t = step();
  if (t >= length()) throw IllegalMoveError("fold already complete");
  Coord target = move_target(m);
  if (std::abs(target.x) > board_radius_ || std::abs(target.y) > board_radius_)
    throw IllegalMoveError("move target off the board");
  if (occupied(target)) throw IllegalMoveError("move target occupied");

  FoldState next = *this;
  Residue kind = seq_->at(t);
  if (kind == Residue::H) {
    // Any occupied neighbor other than the chain predecessor has index
    // <= t-2, so the |i-j| >= 2 condition is automatic.
    Coord pred = head();
    for (Heading h : {Heading::North, Heading::East, Heading::South, Heading::West}) {
      Coord n = step_from(target, h);
      if (n == pred) continue;
      auto idx = residue_index_at(n);
      if (idx && seq_->at(*idx) == Residue::H) ++next.contacts_;
    }
  }
  next.placed_.push_back(target);
  next.occupancy_.emplace(pack(target), t);
  next.heading_ = turn(heading_, m);
  return next;
}

TerminalKind FoldState::terminal() const {
  if (step() == length()) return TerminalKind::Complete;
  if (legal_moves().empty()) return TerminalKind::Trapped;
  return TerminalKind::Ongoing;
}

FoldState FoldState::prefix(int t) const {
  if (t < 2 || t > step()) throw std::out_of_range("prefix length out of range");
  FoldState s;
  s.seq_ = seq_;
  s.placed_.assign(placed_.begin(), placed_.begin() + t);
  s.occupancy_.reserve(static_cast<size_t>(t));
  for (int i = 0; i < t; ++i) s.occupancy_.emplace(pack(placed_[static_cast<size_t>(i)]), i);
  s.board_radius_ = board_radius_;
  // Heading of the last chain step.
  Coord d{placed_[static_cast<size_t>(t - 1)].x - placed_[static_cast<size_t>(t - 2)].x,
          placed_[static_cast<size_t>(t - 1)].y - placed_[static_cast<size_t>(t - 2)].y};
  if (d == Coord{0, 1}) s.heading_ = Heading::North;
  else if (d == Coord{1, 0}) s.heading_ = Heading::East;
  else if (d == Coord{0, -1}) s.heading_ = Heading::South;
  else s.heading_ = Heading::West;
  s.contacts_ = count_contacts(std::span<const Coord>(s.placed_), *seq_);
  return s;
}

std::vector<RelativeMove> FoldState::moves() const {
  return moves_from_coords(placed_);
}

ContactScore hh_contacts(const FoldState& state) {
  int contacts = count_contacts(std::span<const Coord>(state.placed()), state.sequence());
  return {contacts, -contacts};
}

int count_contacts(std::span<const Coord> coords, const HpSequence& seq) {
  // Scan east and north neighbors only, so each unordered pair is seen once.
  std::unordered_map<std::uint64_t, int> index;
  index.reserve(coords.size());
  for (size_t i = 0; i < coords.size(); ++i)
    index.emplace(pack(coords[i]), static_cast<int>(i));

  int contacts = 0;
  for (size_t i = 0; i < coords.size(); ++i) {
    if (seq.at(static_cast<int>(i)) != Residue::H) continue;
    for (Coord n : {Coord{coords[i].x + 1, coords[i].y}, Coord{coords[i].x, coords[i].y + 1}}) {
      auto it = index.find(pack(n));
      if (it == index.end()) continue;
      int j = it->second;
      if (std::abs(j - static_cast<int>(i)) < 2) continue;
      if (seq.at(j) == Residue::H) ++contacts;
    }
  }
  return contacts;
}

std::vector<RelativeMove> moves_from_coords(std::span<const Coord> coords) {
  if (coords.size() < 2) throw ParseError("need at least the two opening residues");
  auto heading_of = [](Coord from, Coord to) -> Heading {
    Coord d{to.x - from.x, to.y - from.y};
    if (d == Coord{0, 1}) return Heading::North;
    if (d == Coord{1, 0}) return Heading::East;
    if (d == Coord{0, -1}) return Heading::South;
    if (d == Coord{-1, 0}) return Heading::West;
    throw ParseError("coordinates are not lattice-adjacent");
  };
  std::vector<RelativeMove> moves;
  moves.reserve(coords.size() - 2);
  Heading h = heading_of(coords[0], coords[1]);
  for (size_t i = 2; i < coords.size(); ++i) {
    Heading nh = heading_of(coords[i - 1], coords[i]);
    bool found = false;
    for (RelativeMove m : kMoveOrder) {
      if (turn(h, m) == nh) {
        moves.push_back(m);
        found = true;
        break;
      }
    }
    if (!found) throw ParseError("coordinate path reverses onto itself");
    h = nh;
  }
  return moves;
}

}  // namespace hpfold

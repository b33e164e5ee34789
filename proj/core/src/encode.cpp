#include "hpfold/encode.hpp"

#include <algorithm>
#include <cstdlib>

namespace hpfold {
namespace {

void check_grid_size(int n) {
  if (n < 5 || n % 4 != 1)
    throw ConfigError(
        "tensor grid size must be >= 5 and of the form 4r+1 so that an odd "
        "number of vertices centers residue 1; got " + std::to_string(n));
}

int plane_of(int frame, PlaneChannel ch) {
  return frame * PlaneStack::kChannelsPerFrame + static_cast<int>(ch);
}

Coord edge_point(Coord a, Coord b, int grid_size) {
  Coord pa = vertex_point(a, grid_size);
  Coord pb = vertex_point(b, grid_size);
  return {(pa.x + pb.x) / 2, (pa.y + pb.y) / 2};
}

void encode_frame(PlaneStack& stack, int frame, const FoldState& state) {
  int n = stack.grid_size();
  const HpSequence& seq = state.sequence();
  const std::vector<Coord>& placed = state.placed();
  for (size_t i = 0; i < placed.size(); ++i) {
    Coord p = vertex_point(placed[i], n);
    PlaneChannel ch = seq.at(static_cast<int>(i)) == Residue::H
                          ? PlaneChannel::H
                          : PlaneChannel::P;
    stack.set(plane_of(frame, ch), p.x, p.y, 1);
    if (i > 0) {
      Coord e = edge_point(placed[i - 1], placed[i], n);
      stack.set(plane_of(frame, PlaneChannel::C), e.x, e.y, 1);
    }
  }
  // Contact edges: scan east and north neighbours so each pair appears once.
  for (size_t i = 0; i < placed.size(); ++i) {
    if (seq.at(static_cast<int>(i)) != Residue::H) continue;
    for (Coord q : {Coord{placed[i].x + 1, placed[i].y},
                    Coord{placed[i].x, placed[i].y + 1}}) {
      std::optional<int> j = state.residue_index_at(q);
      if (!j || seq.at(*j) != Residue::H) continue;
      if (std::abs(*j - static_cast<int>(i)) < 2) continue;
      Coord e = edge_point(placed[i], q, n);
      stack.set(plane_of(frame, PlaneChannel::B), e.x, e.y, 1);
    }
  }
}

}  // namespace

PlaneStack::PlaneStack(int grid_size) : n_(grid_size) {
  check_grid_size(grid_size);
  data_.assign(static_cast<size_t>(kPlanes) * n_ * n_, 0);
}

int vertex_radius(int grid_size) {
  check_grid_size(grid_size);
  return (grid_size - 1) / 4;
}

int grid_size_for_radius(int radius) { return 4 * radius + 1; }

Coord vertex_point(Coord v, int grid_size) {
  int r = vertex_radius(grid_size);
  if (std::abs(v.x) > r || std::abs(v.y) > r)
    throw EncodeError("lattice vertex (" + std::to_string(v.x) + "," +
                      std::to_string(v.y) + ") is outside the radius-" +
                      std::to_string(r) + " grid");
  int c = (grid_size - 1) / 2;
  return {2 * v.x + c, 2 * v.y + c};
}

PlaneStack encode_state(const std::vector<FoldState>& history,
                        std::optional<Residue> next_residue, int grid_size) {
  if (history.size() > PlaneStack::kFrames)
    throw EncodeError("at most " + std::to_string(PlaneStack::kFrames) +
                      " history frames are encodable, got " +
                      std::to_string(history.size()));
  for (size_t k = 1; k < history.size(); ++k)
    if (history[k].step() >= history[k - 1].step())
      throw EncodeError("history frames must be newest-first prefixes");
  PlaneStack stack(grid_size);
  for (size_t k = 0; k < history.size(); ++k)
    encode_frame(stack, static_cast<int>(k), history[k]);
  if (next_residue == Residue::H) {
    const int e_plane = PlaneStack::kPlanes - 1;
    for (int ty = 0; ty < grid_size; ++ty)
      for (int tx = 0; tx < grid_size; ++tx)
        stack.set(e_plane, tx, ty, 1);
  }
  return stack;
}

PlaneStack encode_episode_state(const FoldState& state, int grid_size) {
  std::vector<FoldState> history;
  history.push_back(state);
  for (int back = 1; back < PlaneStack::kFrames; ++back) {
    int t = state.step() - back;
    if (t < 2) break;
    history.push_back(state.prefix(t));
  }
  std::optional<Residue> next;
  if (state.step() < state.sequence().length())
    next = state.sequence().at(state.step());
  return encode_state(history, next, grid_size);
}

std::vector<Activation> decode_frame(const PlaneStack& stack, int frame) {
  if (frame < 0 || frame >= PlaneStack::kFrames)
    throw EncodeError("frame index must be in [0,4), got " +
                      std::to_string(frame));
  std::vector<Activation> out;
  int n = stack.grid_size();
  for (int ty = 0; ty < n; ++ty)
    for (int tx = 0; tx < n; ++tx)
      for (PlaneChannel ch : {PlaneChannel::H, PlaneChannel::P,
                              PlaneChannel::C, PlaneChannel::B})
        if (stack.at(plane_of(frame, ch), tx, ty))
          out.push_back({Coord{tx, ty}, ch});
  return out;
}

std::string dump_frame(const PlaneStack& stack, int frame) {
  if (frame < 0 || frame >= PlaneStack::kFrames)
    throw EncodeError("frame index must be in [0,4), got " +
                      std::to_string(frame));
  int n = stack.grid_size();
  std::string out;
  out.reserve(static_cast<size_t>(n) * (n + 1));
  for (int ty = n - 1; ty >= 0; --ty) {
    for (int tx = 0; tx < n; ++tx) {
      int set_count = 0;
      char c = '.';
      if (stack.at(plane_of(frame, PlaneChannel::H), tx, ty)) {
        c = 'H';
        ++set_count;
      }
      if (stack.at(plane_of(frame, PlaneChannel::P), tx, ty)) {
        c = 'P';
        ++set_count;
      }
      if (stack.at(plane_of(frame, PlaneChannel::C), tx, ty)) {
        c = tx % 2 ? '-' : '|';
        ++set_count;
      }
      if (stack.at(plane_of(frame, PlaneChannel::B), tx, ty)) {
        c = '*';
        ++set_count;
      }
      out += set_count > 1 ? '?' : c;
    }
    out += '\n';
  }
  return out;
}

}  // namespace hpfold

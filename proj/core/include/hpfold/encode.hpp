#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hpfold/error.hpp"
#include "hpfold/hp.hpp"

namespace hpfold {

// Network input: a stack of 17 binary planes over an N x N tensor grid.
// The tensor grid interleaves lattice vertices and edges: the vertex at
// lattice (x, y) maps to tensor point (2x + N/2, 2y + N/2), so vertices
// land on (even, even) points, horizontal edges on (odd, even), vertical
// edges on (even, odd), and (odd, odd) points are permanently zero.
// Residue 1 sits at the grid center.
//
// Planes 0..15 hold four state frames, newest first, of four channels
// each: H (hydrophobic vertex), P (polar vertex), C (chain-bond edge),
// B (H-H contact edge). Plane 16 is the next-residue plane: all ones
// when the next residue to place is H, all zeros otherwise.
class PlaneStack {
 public:
  static constexpr int kChannelsPerFrame = 4;
  static constexpr int kFrames = 4;
  static constexpr int kPlanes = kFrames * kChannelsPerFrame + 1;  // 17

  explicit PlaneStack(int grid_size);

  int grid_size() const { return n_; }
  const std::vector<uint8_t>& data() const { return data_; }

  uint8_t at(int plane, int tx, int ty) const {
    return data_[index(plane, tx, ty)];
  }
  void set(int plane, int tx, int ty, uint8_t v) {
    data_[index(plane, tx, ty)] = v;
  }
  // Flat offset of (plane, tx, ty); planes are stored contiguously.
  size_t index(int plane, int tx, int ty) const {
    return (static_cast<size_t>(plane) * n_ + ty) * n_ + tx;
  }

  bool operator==(const PlaneStack& other) const = default;

 private:
  int n_;
  std::vector<uint8_t> data_;
};

enum class PlaneChannel : uint8_t { H = 0, P = 1, C = 2, B = 3 };

struct Activation {
  Coord point;  // tensor grid coordinates
  PlaneChannel channel;

  bool operator==(const Activation&) const = default;
};

// Largest |x| or |y| lattice coordinate the grid can hold.
int vertex_radius(int grid_size);

// Smallest valid grid size whose vertex radius is at least `radius`.
int grid_size_for_radius(int radius);

// Tensor point of a lattice vertex. Throws EncodeError when off-grid.
Coord vertex_point(Coord v, int grid_size);

// history is newest-first: the current state followed by up to three
// earlier prefixes of the same episode. Fewer than four entries leave the
// remaining frames all-zero (episode start). next_residue drives plane 16;
// pass nullopt for a finished fold, which zeroes the plane.
PlaneStack encode_state(const std::vector<FoldState>& history,
                        std::optional<Residue> next_residue, int grid_size);

// Encodes a live state directly, deriving the history frames from its own
// prefixes and the next residue from its step index.
PlaneStack encode_episode_state(const FoldState& state, int grid_size);

// All activated grid points of one frame (0 = current), in row-major scan
// order. Inverse of encoding for the activation set.
std::vector<Activation> decode_frame(const PlaneStack& stack, int frame);

// Text raster of one frame for debugging: H/P vertices, -| chain bonds,
// * contact edges, . elsewhere. Row 0 printed last (north up).
std::string dump_frame(const PlaneStack& stack, int frame);

}  // namespace hpfold

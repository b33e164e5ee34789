#include "hpfold/render.hpp"

#include <algorithm>
#include <cstdlib>
#include <vector>

#include "hpfold/error.hpp"

namespace hpfold {
namespace {

struct Box {
  int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
};

Box bounding_box(const std::vector<Coord>& coords) {
  Box b{coords[0].x, coords[0].y, coords[0].x, coords[0].y};
  for (const Coord& c : coords) {
    b.min_x = std::min(b.min_x, c.x);
    b.min_y = std::min(b.min_y, c.y);
    b.max_x = std::max(b.max_x, c.x);
    b.max_y = std::max(b.max_y, c.y);
  }
  return b;
}

// Unordered H-H contact pairs (i, j), i + 2 <= j, lattice distance 1.
std::vector<std::pair<int, int>> contact_pairs(const FoldState& state) {
  const auto& coords = state.placed();
  const HpSequence& seq = state.sequence();
  std::vector<std::pair<int, int>> pairs;
  for (size_t i = 0; i < coords.size(); ++i) {
    if (seq.at(static_cast<int>(i)) != Residue::H) continue;
    for (size_t j = i + 2; j < coords.size(); ++j) {
      if (seq.at(static_cast<int>(j)) != Residue::H) continue;
      int dx = coords[i].x - coords[j].x;
      int dy = coords[i].y - coords[j].y;
      if (std::abs(dx) + std::abs(dy) == 1)
        pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  }
  return pairs;
}

void append(std::string& out, const std::string& s) { out += s; }

std::string num(int v) { return std::to_string(v); }

}  // namespace

std::string render_svg(const FoldState& state, const RenderOptions& options) {
  if (options.scale < 2 || options.margin < 0)
    throw ConfigError("render scale must be >= 2 and margin >= 0");
  const auto& coords = state.placed();
  if (coords.empty()) throw ConfigError("cannot render an empty fold");

  const Box box = bounding_box(coords);
  const int s = options.scale;
  const int width = (box.max_x - box.min_x) * s + 2 * options.margin;
  const int height = (box.max_y - box.min_y) * s + 2 * options.margin;

  // Lattice (x, y) to pixel; SVG y grows downward, the lattice's north up.
  auto px = [&](const Coord& c) { return options.margin + (c.x - box.min_x) * s; };
  auto py = [&](const Coord& c) { return options.margin + (box.max_y - c.y) * s; };

  const int radius = std::max(2, (s * 3) / 10);
  const int stroke = std::max(1, s / 12);

  std::string out;
  append(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                  num(width) + "\" height=\"" + num(height) +
                  "\" viewBox=\"0 0 " + num(width) + " " + num(height) +
                  "\">\n");
  append(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

  // Dashed contact segments go under the chain.
  for (auto [i, j] : contact_pairs(state)) {
    append(out, "<line x1=\"" + num(px(coords[i])) + "\" y1=\"" +
                    num(py(coords[i])) + "\" x2=\"" + num(px(coords[j])) +
                    "\" y2=\"" + num(py(coords[j])) +
                    "\" stroke=\"#c03030\" stroke-width=\"" + num(stroke) +
                    "\" stroke-dasharray=\"" + num(std::max(2, s / 6)) + " " +
                    num(std::max(2, s / 8)) + "\"/>\n");
  }
  for (size_t i = 0; i + 1 < coords.size(); ++i) {
    append(out, "<line x1=\"" + num(px(coords[i])) + "\" y1=\"" +
                    num(py(coords[i])) + "\" x2=\"" + num(px(coords[i + 1])) +
                    "\" y2=\"" + num(py(coords[i + 1])) +
                    "\" stroke=\"#202020\" stroke-width=\"" +
                    num(std::max(1, s / 8)) + "\"/>\n");
  }
  for (size_t i = 0; i < coords.size(); ++i) {
    bool h = state.sequence().at(static_cast<int>(i)) == Residue::H;
    append(out, "<circle cx=\"" + num(px(coords[i])) + "\" cy=\"" +
                    num(py(coords[i])) + "\" r=\"" + num(radius) +
                    "\" fill=\"" + (h ? "#202020" : "white") +
                    "\" stroke=\"#202020\" stroke-width=\"" + num(stroke) +
                    "\"/>\n");
  }
  if (options.labels) {
    const int font = std::max(6, s / 2);
    auto label = [&](const Coord& c, const char* text) {
      append(out, "<text x=\"" + num(px(c) + radius + stroke) + "\" y=\"" +
                      num(py(c) - radius - stroke) + "\" font-family=\"monospace\" font-size=\"" +
                      num(font) + "\" fill=\"#4060c0\">" + text + "</text>\n");
    };
    label(coords.front(), "S");
    label(coords.back(), "E");
  }
  append(out, "</svg>\n");
  return out;
}

std::string render_text(const FoldState& state) {
  const auto& coords = state.placed();
  if (coords.empty()) throw ConfigError("cannot render an empty fold");

  const Box box = bounding_box(coords);
  // Residues land on even raster cells, bond and contact marks on the odd
  // cell between, mirroring the encoder's vertex/edge interleave.
  const int cols = 2 * (box.max_x - box.min_x) + 1;
  const int rows = 2 * (box.max_y - box.min_y) + 1;
  std::vector<std::string> raster(static_cast<size_t>(rows),
                                  std::string(static_cast<size_t>(cols), '.'));

  auto rx = [&](const Coord& c) { return 2 * (c.x - box.min_x); };
  auto ry = [&](const Coord& c) { return 2 * (box.max_y - c.y); };
  auto put = [&](int x, int y, char ch) {
    raster[static_cast<size_t>(y)][static_cast<size_t>(x)] = ch;
  };

  for (auto [i, j] : contact_pairs(state)) {
    put((rx(coords[i]) + rx(coords[j])) / 2,
        (ry(coords[i]) + ry(coords[j])) / 2, '*');
  }
  for (size_t i = 0; i + 1 < coords.size(); ++i) {
    int mx = (rx(coords[i]) + rx(coords[i + 1])) / 2;
    int my = (ry(coords[i]) + ry(coords[i + 1])) / 2;
    put(mx, my, ry(coords[i]) == ry(coords[i + 1]) ? '-' : '|');
  }
  for (size_t i = 0; i < coords.size(); ++i) {
    bool h = state.sequence().at(static_cast<int>(i)) == Residue::H;
    put(rx(coords[i]), ry(coords[i]), h ? 'H' : 'P');
  }

  // Diagonal neighbors of a residue cell are never used by the chain.
  // Very thin folds (a straight line) have no in-bounds diagonal, so the
  // label is best-effort here; the SVG output always carries both.
  auto place_label = [&](const Coord& c, char ch) {
    static constexpr int kOffsets[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    for (auto [dx, dy] : kOffsets) {
      int x = rx(c) + dx, y = ry(c) + dy;
      if (x < 0 || y < 0 || x >= cols || y >= rows) continue;
      if (raster[static_cast<size_t>(y)][static_cast<size_t>(x)] != '.') continue;
      put(x, y, ch);
      return;
    }
  };
  place_label(coords.front(), 'S');
  place_label(coords.back(), 'E');

  std::string out;
  for (const std::string& row : raster) {
    out += row;
    out += '\n';
  }
  return out;
}

}  // namespace hpfold

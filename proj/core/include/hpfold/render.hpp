#pragma once

#include <string>

#include "hpfold/hp.hpp"

namespace hpfold {

struct RenderOptions {
  int scale = 24;        // pixels per lattice step
  int margin = 24;       // outer padding in pixels
  bool labels = true;    // mark the first and last residue with S / E
};

// Standalone SVG drawing of a fold: hydrophobic residues as filled
// circles, polar ones as hollow circles, chain bonds as solid segments,
// H-H contacts as dashed segments. All geometry is integer pixels, so the
// output is byte-stable across platforms.
std::string render_svg(const FoldState& state, const RenderOptions& options = {});

// Terminal rendering on a half-step raster (residues two cells apart,
// bond and contact marks on the cell between): H and P letters for
// residues, '-' and '|' for bonds, '*' for contacts, S and E beside the
// chain ends. North is up.
std::string render_text(const FoldState& state);

}  // namespace hpfold

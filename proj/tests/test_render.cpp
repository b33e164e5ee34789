#include <doctest.h>

#include <string>
#include <vector>

#include "hpfold/hp.hpp"
#include "hpfold/render.hpp"

using namespace hpfold;

namespace {

std::vector<RelativeMove> moves_of(const std::string& text) {
  std::vector<RelativeMove> out;
  for (char c : text) out.push_back(move_from_char(c));
  return out;
}

int count_of(const std::string& hay, const std::string& needle) {
  int n = 0;
  for (size_t at = hay.find(needle); at != std::string::npos;
       at = hay.find(needle, at + needle.size()))
    ++n;
  return n;
}

}  // namespace

TEST_CASE("the square fold renders its four residues, bonds, and contact") {
  std::vector<RelativeMove> mv = moves_of("LL");
  FoldState s = FoldState::replay(HpSequence::parse("hhhh"), mv, 8);
  std::string svg = render_svg(s);

  CHECK(count_of(svg, "<circle") == 4);
  // Three chain bonds, one dashed contact.
  CHECK(count_of(svg, "stroke=\"#202020\"") >= 3);
  CHECK(count_of(svg, "<line") == 4);
  CHECK(count_of(svg, "stroke-dasharray") == 1);
  // Hydrophobic residues are filled.
  CHECK(count_of(svg, "fill=\"#202020\"") == 4);
  CHECK(count_of(svg, ">S</text>") == 1);
  CHECK(count_of(svg, ">E</text>") == 1);
  CHECK(svg.find("<svg xmlns") == 0);
}

TEST_CASE("a straight polar fold has no contacts and hollow residues") {
  std::vector<RelativeMove> mv = moves_of("FF");
  FoldState s = FoldState::replay(HpSequence::parse("pppp"), mv, 8);
  std::string svg = render_svg(s);
  CHECK(count_of(svg, "<circle") == 4);
  CHECK(count_of(svg, "<line") == 3);
  CHECK(count_of(svg, "stroke-dasharray") == 0);
  CHECK(count_of(svg, "fill=\"white\"") >= 4);  // hollow circles + canvas
}

TEST_CASE("rendering is byte-deterministic") {
  std::vector<RelativeMove> mv = moves_of("LFLLRFLFLL");
  FoldState s = FoldState::replay(HpSequence::parse("HPHPPHHPHPPH"), mv, 16);
  CHECK(render_svg(s) == render_svg(s));
  CHECK(render_text(s) == render_text(s));

  RenderOptions big;
  big.scale = 40;
  CHECK(render_svg(s, big) != render_svg(s));
}

TEST_CASE("labels can be turned off") {
  std::vector<RelativeMove> mv = moves_of("LL");
  FoldState s = FoldState::replay(HpSequence::parse("hhhh"), mv, 8);
  RenderOptions plain;
  plain.labels = false;
  std::string svg = render_svg(s, plain);
  CHECK(count_of(svg, "<text") == 0);
}

TEST_CASE("text rendering rasters the square fold exactly") {
  std::vector<RelativeMove> mv = moves_of("LL");
  FoldState s = FoldState::replay(HpSequence::parse("hhhh"), mv, 8);
  CHECK(render_text(s) == "H-H\n|S|\nH*H\n");
}

TEST_CASE("text rendering marks polar residues and skips absent contacts") {
  std::vector<RelativeMove> mv = moves_of("FF");
  FoldState s = FoldState::replay(HpSequence::parse("pphp"), mv, 8);
  std::string text = render_text(s);
  CHECK(count_of(text, "P") == 3);
  CHECK(count_of(text, "H") == 1);
  CHECK(count_of(text, "|") == 3);
  CHECK(count_of(text, "*") == 0);
}

TEST_CASE("partial folds render the placed prefix") {
  std::vector<RelativeMove> mv = moves_of("FRFRFRR");
  FoldState s = FoldState::replay(HpSequence::parse("pppppppppp"), mv, 16);
  REQUIRE(s.terminal() == TerminalKind::Trapped);
  std::string svg = render_svg(s);
  CHECK(count_of(svg, "<circle") == 9);
  CHECK(count_of(svg, "<line") == 8);
}

#include "hpfold/fold_record.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace hpfold {
namespace {

int parse_int(std::string_view s, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("invalid integer for " + std::string(what) + ": '" +
                     std::string(s) + "'");
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (start <= s.size()) {
    size_t end = s.find(sep, start);
    if (end == std::string_view::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

FoldRecord FoldRecord::from_state(const FoldState& state) {
  FoldRecord rec{state.sequence(), state.moves(), state.placed(),
                 state.contacts(), -state.contacts()};
  return rec;
}

FoldRecord FoldRecord::parse_line(std::string_view line) {
  std::optional<HpSequence> seq;
  std::optional<std::vector<RelativeMove>> moves;
  std::optional<std::vector<Coord>> coords;
  std::optional<int> contacts, energy;

  std::istringstream in{std::string(line)};
  std::string token;
  in >> token;
  if (token != "fold") throw ParseError("fold record must start with 'fold'");
  while (in >> token) {
    size_t eq = token.find('=');
    if (eq == std::string::npos)
      throw ParseError("fold record field without '=': '" + token + "'");
    std::string_view key(token.data(), eq);
    std::string_view value(token.data() + eq + 1, token.size() - eq - 1);
    if (key == "seq") {
      seq = HpSequence::parse(value);
    } else if (key == "moves") {
      std::vector<RelativeMove> ms;
      for (char c : value) ms.push_back(move_from_char(c));
      moves = std::move(ms);
    } else if (key == "coords") {
      std::vector<Coord> cs;
      if (!value.empty()) {
        for (std::string_view pair : split(value, ';')) {
          auto xy = split(pair, ',');
          if (xy.size() != 2) throw ParseError("bad coordinate pair: '" + std::string(pair) + "'");
          cs.push_back({parse_int(xy[0], "coords.x"), parse_int(xy[1], "coords.y")});
        }
      }
      coords = std::move(cs);
    } else if (key == "contacts") {
      contacts = parse_int(value, "contacts");
    } else if (key == "energy") {
      energy = parse_int(value, "energy");
    } else {
      throw ParseError("unknown fold record field '" + std::string(key) + "'");
    }
  }
  if (!seq || !moves || !coords || !contacts || !energy)
    throw ParseError("fold record is missing one of seq/moves/coords/contacts/energy");

  FoldRecord rec{std::move(*seq), std::move(*moves), std::move(*coords),
                 *contacts, *energy};
  rec.validate();
  return rec;
}

std::string FoldRecord::to_line() const {
  std::ostringstream out;
  out << "fold seq=" << sequence.to_string() << " moves=";
  for (RelativeMove m : moves) out << to_char(m);
  out << " coords=";
  for (size_t i = 0; i < coords.size(); ++i) {
    if (i) out << ';';
    out << coords[i].x << ',' << coords[i].y;
  }
  out << " contacts=" << contacts << " energy=" << energy;
  return out.str();
}

void FoldRecord::validate() const {
  if (energy != -contacts)
    throw ParseError("fold record energy must equal -contacts");
  if (coords.size() < 2 || static_cast<int>(coords.size()) > sequence.length())
    throw ParseError("fold record has " + std::to_string(coords.size()) +
                     " coordinates for a length-" +
                     std::to_string(sequence.length()) + " sequence");
  if (coords[0] != Coord{0, 0} || coords[1] != Coord{0, 1})
    throw ParseError("fold record does not start with the standard opening");
  if (moves_from_coords(coords) != moves)
    throw ParseError("fold record moves do not match its coordinates");
  // Self-avoidance comes out of count_contacts index building only if
  // coordinates are unique; check explicitly.
  for (size_t i = 0; i < coords.size(); ++i)
    for (size_t j = i + 1; j < coords.size(); ++j)
      if (coords[i] == coords[j])
        throw ParseError("fold record coordinates are not self-avoiding");
  if (count_contacts(coords, sequence) != contacts)
    throw ParseError("fold record contact count does not match its coordinates");
}

std::vector<HpSequence> parse_sequence_lines(const std::string& text) {
  std::vector<HpSequence> seqs;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    try {
      seqs.push_back(HpSequence::parse(line));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return seqs;
}

std::vector<HpSequence> read_sequence_file(const std::filesystem::path& path) {
  return parse_sequence_lines(read_file(path));
}

void write_sequence_file(const std::filesystem::path& path,
                         const std::vector<HpSequence>& seqs) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path.string());
  for (const HpSequence& s : seqs) out << s.to_string() << '\n';
}

std::vector<BenchmarkEntry> parse_benchmark_lines(const std::string& text) {
  std::vector<BenchmarkEntry> entries;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 4)
      throw ParseError("benchmark line " + std::to_string(lineno) +
                       ": expected 4 tab-separated fields, got " +
                       std::to_string(fields.size()));
    BenchmarkEntry e{std::string(fields[0]), std::string(fields[1]),
                     HpSequence::parse(fields[1]), std::nullopt, 0};
    if (fields[2] != "NA") e.known_optimum_energy = parse_int(fields[2], "optimum");
    e.upper_bound_energy = parse_int(fields[3], "upper bound");
    int recomputed = -upper_bound(e.sequence);
    if (recomputed != e.upper_bound_energy)
      throw ParseError("benchmark line " + std::to_string(lineno) + " ('" + e.id +
                       "'): stored upper bound " + std::to_string(e.upper_bound_energy) +
                       " does not match recomputed " + std::to_string(recomputed));
    // The parity estimate can be beaten by one contact per hydrophobic chain
    // end, so sanity-check the optimum against the sound capacity bound.
    if (e.known_optimum_energy &&
        *e.known_optimum_energy < -contact_capacity_bound(e.sequence))
      throw ParseError("benchmark line " + std::to_string(lineno) +
                       ": optimum below the contact capacity bound");
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<BenchmarkEntry> read_benchmark_file(const std::filesystem::path& path) {
  return parse_benchmark_lines(read_file(path));
}

std::string bundled_benchmark_text() {
  // The four published rows; longer public benchmark sets can be supplied
  // as an external file in the same format.
  return
      "# id\tsequence\toptimum_energy|NA\tupper_bound_energy\n"
      "seq1\t(hp)2ph(hp)2(ph)2hp(ph)2\t-9\t-10\n"
      "seq2\th3p(ph)3p(ph)3pph\t-10\t-10\n"
      "seq3\th4p4h12p3(p3h12)3p(pph)2hp2h2p(ph)2\t-53\t-58\n"
      "seq4\tph5p4h4p(ph)2(hhp)2(ph)2(hp)2(phh)2h3p(pph)2hp2(h3p4)2(ph)3h4p2h8(p3h)2h6(phh)2p(pph)2h2p2h2(hp)3p2h4ph(pph)2(p4h)2h2p2(ph)2hp3h\tNA\t-78\n";
}

}  // namespace hpfold

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hpfold/hp.hpp"

namespace hpfold {

// Canonical fold record, one per line:
//
//   fold seq=HHPH moves=LL coords=0,0;0,1;-1,1;-1,0 contacts=1 energy=-1
//
// `moves` excludes the deterministic opening; `coords` lists every placed
// residue starting with (0,0) and (0,1). A record with fewer coordinates
// than residues is a trapped partial fold.
struct FoldRecord {
  HpSequence sequence;
  std::vector<RelativeMove> moves;
  std::vector<Coord> coords;
  int contacts = 0;
  int energy = 0;

  static FoldRecord from_state(const FoldState& state);
  static FoldRecord parse_line(std::string_view line);
  std::string to_line() const;

  bool complete() const {
    return static_cast<int>(coords.size()) == sequence.length();
  }

  // Checks moves/coords consistency and recounts contacts.
  void validate() const;
};

// Sequence input: one sequence per line (plain or run-length), lines
// starting with '#' and blank lines ignored.
std::vector<HpSequence> parse_sequence_lines(const std::string& text);
std::vector<HpSequence> read_sequence_file(const std::filesystem::path& path);
void write_sequence_file(const std::filesystem::path& path,
                         const std::vector<HpSequence>& seqs);

// One benchmark row: tab-separated
//   id <TAB> sequence <TAB> optimum_energy|NA <TAB> upper_bound_energy
// The stored upper bound is in energy convention (negative) and must match
// the recomputed bound on load.
struct BenchmarkEntry {
  std::string id;
  std::string sequence_text;  // as written (plain or run-length)
  HpSequence sequence;
  std::optional<int> known_optimum_energy;
  int upper_bound_energy = 0;
};

std::vector<BenchmarkEntry> parse_benchmark_lines(const std::string& text);
std::vector<BenchmarkEntry> read_benchmark_file(const std::filesystem::path& path);

// The four published length-20/20/85/162 benchmark rows bundled with the
// repo (ids seq1..seq4).
std::string bundled_benchmark_text();

}  // namespace hpfold

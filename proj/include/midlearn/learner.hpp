#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "midlearn/automata.hpp"
#include "midlearn/teacher.hpp"

namespace midlearn {

struct LearnStats {
  std::size_t mm_queries = 0;
  std::size_t eq_queries = 0;
  std::size_t experiments = 0;
  std::size_t cache_hits = 0;
  double elapsed_seconds = 0.0;
  /// State count of each conjecture submitted to an equivalence query.
  std::vector<std::size_t> conjecture_sizes;
};

struct LearnOptions {
  /// Before every equivalence query, replay the whole trace cache against
  /// the conjecture and throw std::logic_error on any mismatch.
  bool check_consistency = false;
  std::size_t max_rounds = 10'000;
};

/// L+_M observation table. Rows are indexed by input words over the
/// alphabet order given at construction; cells hold the output suffix
/// produced by the column word.
class ObservationTable {
 public:
  using InWord = std::vector<MealyMachine::InputId>;
  using Row = std::vector<std::vector<std::uint32_t>>;

  explicit ObservationTable(std::vector<Symbol> inputs);

  const std::vector<Symbol>& inputs() const { return inputs_; }
  const std::vector<InWord>& short_prefixes() const { return short_; }
  const std::vector<InWord>& suffixes() const { return suffixes_; }
  std::vector<InWord> extensions() const;
  const std::vector<Symbol>& output_symbols() const { return out_symbols_; }

  /// Queries every missing cell.
  void fill(Teacher& teacher);
  const Row& row(const InWord& prefix) const;
  /// Extension row whose contents match no short-prefix row; the
  /// lexicographically smallest such access word.
  std::optional<InWord> find_unclosed() const;
  void promote(const InWord& extension);
  /// Adds every suffix of `word` not already present. Returns the count added.
  std::size_t add_suffixes_of(const InWord& word);
  bool contains_prefix(const InWord& w) const;

  MealyMachine conjecture(const std::vector<Symbol>& outputs) const;

 private:
  std::uint32_t intern(const Symbol& s);

  std::vector<Symbol> inputs_;
  std::vector<InWord> short_;
  std::vector<InWord> suffixes_;
  std::map<InWord, Row> rows_;  // short prefixes and their one-letter extensions
  std::vector<Symbol> out_symbols_;
};

struct MealyLearnResult {
  MealyMachine machine;
  LearnStats stats;
};

struct IaLearnResult {
  InterfaceAutomaton automaton;
  MealyMachine machine;
  LearnStats stats;
};

/// L+_M with suffix-based counterexample processing. Throws
/// DeterminismViolation if the teacher contradicts itself.
MealyLearnResult learn_mealy(Teacher& teacher, const std::vector<Symbol>& inputs,
                             LearnOptions options = {});

IaLearnResult learn_ia(Teacher& teacher, const std::vector<Symbol>& inputs,
                       LearnOptions options = {});

}  // namespace midlearn

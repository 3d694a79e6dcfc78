#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "midlearn/automata.hpp"

namespace midlearn {

class DeterminismViolation : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class SessionStateError : public Error {
 public:
  using Error::Error;
};

class AlphabetError : public Error {
 public:
  using Error::Error;
};

struct Alphabet {
  std::vector<Symbol> inputs;
  std::vector<Symbol> outputs;

  bool operator==(const Alphabet&) const = default;
};

/// A resettable system under learning. `step` before the first `reset` is
/// illegal and throws SessionStateError.
class SulSession {
 public:
  virtual ~SulSession() = default;
  virtual Alphabet alphabet() const = 0;
  virtual void reset() = 0;
  virtual Symbol step(const Symbol& input) = 0;
};

/// Session backed by a Mealy machine; used for random-target experiments.
class MealySession final : public SulSession {
 public:
  explicit MealySession(MealyMachine machine) : machine_(std::move(machine)) {}

  Alphabet alphabet() const override { return {machine_.inputs(), machine_.outputs()}; }
  void reset() override;
  Symbol step(const Symbol& input) override;

  const MealyMachine& machine() const { return machine_; }
  std::size_t resets() const { return resets_; }

 private:
  MealyMachine machine_;
  std::optional<StateId> state_;
  std::size_t resets_ = 0;
};

/// Prefix tree of executed runs. Each edge carries an input symbol and
/// the output observed for it.
class TraceCache {
 public:
  TraceCache();

  /// Outputs for `word` if the word is a path in the tree.
  std::optional<Word> lookup(const Word& word) const;
  /// Records a run; throws DeterminismViolation when an existing edge
  /// carries a different output.
  void insert(const Word& inputs, const Word& outputs);

  std::size_t num_nodes() const { return nodes_.size(); }
  /// Every maximal root-to-leaf run.
  std::vector<std::pair<Word, Word>> traces() const;
  std::string to_dot() const;

 private:
  struct Node {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> children;  // (symbol, node)
    std::uint32_t output = 0;                                         // symbol of incoming edge
  };
  std::uint32_t intern(const Symbol& s);
  std::optional<std::uint32_t> find_symbol(const Symbol& s) const;
  std::optional<std::uint32_t> child(std::uint32_t node, std::uint32_t sym) const;

  std::vector<Node> nodes_;
  std::vector<Symbol> symbols_;
};

struct EqConfig {
  std::size_t extra_states = 2;
  std::size_t random_words = 200;
  std::size_t max_word_len = 16;
  std::uint64_t rng_seed = 1;
};

struct TeacherStats {
  std::size_t mm_queries = 0;   ///< learner output queries sent to the SUL
  std::size_t eq_queries = 0;
  std::size_t experiments = 0;  ///< reset() calls
  std::size_t cache_hits = 0;
};

/// Executes words on a SUL, through the trace cache when enabled. With the
/// cache disabled every non-empty word costs one reset, but all runs are
/// still recorded so contradicting answers are detected.
class QueryRunner {
 public:
  QueryRunner(SulSession& sul, bool use_cache);

  Word run(const Word& word);
  /// Like `run` but bypasses the cache and always executes on the SUL.
  Word run_fresh(const Word& word);

  const TraceCache& cache() const { return cache_; }
  bool cache_enabled() const { return use_cache_; }
  std::size_t experiments() const { return experiments_; }
  std::size_t cache_hits() const { return cache_hits_; }
  std::size_t executions() const { return executions_; }
  const Alphabet& alphabet() const { return alphabet_; }

 private:
  SulSession& sul_;
  bool use_cache_;
  Alphabet alphabet_;
  TraceCache cache_;
  std::size_t experiments_ = 0;
  std::size_t cache_hits_ = 0;
  std::size_t executions_ = 0;
};

class EquivalenceOracle {
 public:
  virtual ~EquivalenceOracle() = default;
  virtual std::optional<Word> find_counterexample(const MealyMachine& hypothesis,
                                                  QueryRunner& runner) = 0;
};

/// W-method suite (transition cover x middle words up to `extra_states`
/// letters x characterization set) followed by seeded random words.
/// Returns the first failing word in suite order.
class WMethodOracle final : public EquivalenceOracle {
 public:
  explicit WMethodOracle(EqConfig cfg) : cfg_(cfg) {}
  std::optional<Word> find_counterexample(const MealyMachine& hypothesis,
                                          QueryRunner& runner) override;

 private:
  EqConfig cfg_;
  std::size_t round_ = 0;
};

/// Exact comparison against a known target; counterexamples are shortest.
class PerfectOracle final : public EquivalenceOracle {
 public:
  explicit PerfectOracle(MealyMachine target) : target_(std::move(target)) {}
  std::optional<Word> find_counterexample(const MealyMachine& hypothesis,
                                          QueryRunner& runner) override;

 private:
  MealyMachine target_;
};

/// Approximates the minimally adequate teacher over one SUL session.
class Teacher {
 public:
  Teacher(SulSession& sul, std::unique_ptr<EquivalenceOracle> oracle, bool use_cache = true);
  Teacher(SulSession& sul, EqConfig cfg, bool use_cache = true);

  Word output_query(const Word& word);
  std::optional<Word> equivalence_query(const MealyMachine& hypothesis);

  const Alphabet& alphabet() const { return runner_.alphabet(); }
  TeacherStats stats() const;
  const QueryRunner& runner() const { return runner_; }
  QueryRunner& runner() { return runner_; }

 private:
  QueryRunner runner_;
  std::unique_ptr<EquivalenceOracle> oracle_;
  std::size_t mm_queries_ = 0;
  std::size_t eq_queries_ = 0;
};

/// Characterization set of a minimal machine: input words that pairwise
/// distinguish all states. Contains at least one word.
std::vector<std::vector<MealyMachine::InputId>> characterization_set(const MealyMachine& m);

/// Access sequences (shortest, BFS order) for every reachable state.
std::vector<std::vector<MealyMachine::InputId>> access_sequences(const MealyMachine& m);

}  // namespace midlearn

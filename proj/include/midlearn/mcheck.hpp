#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "midlearn/automata.hpp"

namespace midlearn {

class CompositionError : public Error {
 public:
  using Error::Error;
};

/// One process of a network: an automaton, a renaming of its actions into
/// the global namespace, the outputs that fire without a partner, and the
/// states that count as legitimate completion.
struct ProcessSpec {
  std::string name;
  std::shared_ptr<const InterfaceAutomaton> automaton;
  std::vector<std::pair<Symbol, Symbol>> rename;
  std::set<Symbol> local_actions;  ///< global names
  std::vector<StateId> terminal;
};

using CompositeState = std::vector<StateId>;

/// A closed network of interface automata. Every output action that is
/// not declared local is synchronized with the unique process having the
/// same (global) input action. Inputs nobody emits are left open and never
/// fire.
class ProcessNetwork {
 public:
  using GlobalAction = std::uint32_t;

  struct Move {
    GlobalAction action;
    StateId to;
  };

  explicit ProcessNetwork(std::vector<ProcessSpec> processes);

  std::size_t size() const { return procs_.size(); }
  const ProcessSpec& spec(std::size_t p) const { return procs_[p].spec; }
  /// The process automaton after renaming.
  const InterfaceAutomaton& automaton(std::size_t p) const { return *procs_[p].renamed; }
  const std::vector<Symbol>& action_names() const { return actions_; }
  const Symbol& action_name(GlobalAction a) const { return actions_.at(a); }

  CompositeState initial() const;
  bool is_terminal(std::size_t p, StateId q) const { return procs_[p].terminal[q]; }
  bool all_terminal(const CompositeState& s) const;
  void validate_state(const CompositeState& s) const;

  // Compiled per-state move lists.
  const std::vector<Move>& local_moves(std::size_t p, StateId q) const { return procs_[p].local[q]; }
  const std::vector<Move>& emit_moves(std::size_t p, StateId q) const { return procs_[p].emit[q]; }
  const std::vector<Move>& receive_moves(std::size_t p, StateId q) const { return procs_[p].receive[q]; }
  /// Receiving process of a synchronized action.
  std::size_t receiver(GlobalAction a) const { return receiver_.at(a); }

 private:
  struct Compiled {
    ProcessSpec spec;
    std::shared_ptr<const InterfaceAutomaton> renamed;
    std::vector<std::vector<Move>> local, emit, receive;
    std::vector<bool> terminal;
  };
  std::vector<Compiled> procs_;
  std::vector<Symbol> actions_;
  std::vector<std::size_t> receiver_;
};

struct Successor {
  ProcessNetwork::GlobalAction action;
  std::uint32_t emitter;  ///< process taking the local or output step
  CompositeState target;
};

/// All successors of `s`: local steps of any single process and joint
/// emitter/receiver steps of synchronized actions.
std::vector<Successor> compose_step(const ProcessNetwork& net, const CompositeState& s);

enum class Conclusion { ok, deadlock, inconclusive };
std::string to_string(Conclusion c);

enum class SearchOrder { dfs, bfs, parallel_bfs };
std::string to_string(SearchOrder o);
SearchOrder parse_search_order(std::string_view s);

struct SearchLimits {
  std::size_t max_states = 200'000'000;
  std::chrono::duration<double> max_time = std::chrono::minutes(30);
  SearchOrder order = SearchOrder::dfs;
};

struct WitnessStep {
  std::string action;
  std::uint32_t emitter;
  CompositeState state;  ///< state reached by the step
};

struct Verdict {
  Conclusion conclusion = Conclusion::ok;
  std::vector<WitnessStep> witness;  ///< deadlock only
  CompositeState stuck_state;        ///< deadlock only
  std::size_t states_explored = 0;
  std::size_t transitions_explored = 0;
  double elapsed_seconds = 0.0;
  std::size_t peak_memory_bytes = 0;  ///< count-based estimate
  std::string reason;                 ///< why the search was inconclusive
};

/// Explicit-state search for a reachable state with no successors where
/// some process is outside its terminal marking. DFS by default;
/// `parallel_bfs` expands each frontier with OpenMP and visits states in
/// the same order as `bfs`.
Verdict find_deadlock(const ProcessNetwork& net, SearchLimits limits = {});

/// True if `witness` is a valid run from the initial state ending in a
/// state with no successors.
bool replay_witness(const ProcessNetwork& net, const std::vector<WitnessStep>& witness);

std::string format_state(const ProcessNetwork& net, const CompositeState& s);

}  // namespace midlearn

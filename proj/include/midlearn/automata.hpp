#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace midlearn {

using StateId = std::uint32_t;
using Symbol = std::string;
using Word = std::vector<Symbol>;

// Reserved Mealy output symbols. Neither survives translation into an
// interface automaton as an output action.
inline constexpr std::string_view kQuiescence = "quiescence";
inline constexpr std::string_view kRefused = "refused";

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedQuery : public Error {
 public:
  using Error::Error;
};

class InvalidAutomaton : public Error {
 public:
  using Error::Error;
};

class IncomparableAutomata : public Error {
 public:
  using Error::Error;
};

/// Input and output action names of an interface automaton. Actions are
/// addressed by a dense id: inputs occupy [0, |I|), outputs [|I|, |I|+|O|).
class ActionSignature {
 public:
  using ActionId = std::uint32_t;

  ActionSignature() = default;
  ActionSignature(std::vector<Symbol> inputs, std::vector<Symbol> outputs);

  const std::vector<Symbol>& inputs() const { return inputs_; }
  const std::vector<Symbol>& outputs() const { return outputs_; }
  std::size_t size() const { return inputs_.size() + outputs_.size(); }

  bool is_input(ActionId a) const { return a < inputs_.size(); }
  bool is_output(ActionId a) const { return a >= inputs_.size() && a < size(); }
  const Symbol& name(ActionId a) const;

  std::optional<ActionId> find(std::string_view name) const;
  ActionId input_id(std::string_view name) const;
  ActionId output_id(std::string_view name) const;

  /// "?a" for inputs, "!a" for outputs.
  std::string label(ActionId a) const;

  bool operator==(const ActionSignature&) const = default;

 private:
  std::vector<Symbol> inputs_;
  std::vector<Symbol> outputs_;
};

using ActionId = ActionSignature::ActionId;

struct Transition {
  StateId from = 0;
  ActionId action = 0;
  StateId to = 0;

  auto operator<=>(const Transition&) const = default;
};

/// Result of following an action sequence from the initial state. When a
/// step is undefined the fragment stops and `failed_at` carries the index of
/// the offending action.
struct ExecutionFragment {
  std::vector<StateId> states;
  std::vector<ActionId> actions;
  std::optional<std::size_t> failed_at;

  bool complete() const { return !failed_at.has_value(); }
};

class InterfaceAutomaton {
 public:
  struct Edge {
    ActionId action;
    StateId to;
  };

  InterfaceAutomaton() = default;
  InterfaceAutomaton(ActionSignature signature, std::size_t num_states,
                     StateId initial, std::vector<Transition> transitions,
                     std::vector<std::string> state_names = {});

  const ActionSignature& signature() const { return signature_; }
  std::size_t num_states() const { return edges_.size(); }
  std::size_t num_transitions() const { return transitions_.size(); }
  StateId initial() const { return initial_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  std::span<const Edge> edges(StateId q) const;

  /// Display name; defaults to the decimal id.
  std::string state_name(StateId q) const;
  const std::vector<std::string>& state_names() const { return names_; }

  std::vector<StateId> next_states(StateId q, ActionId a) const;
  std::vector<StateId> next_states(StateId q, std::string_view action) const;

  /// Output actions enabled in q. Empty means q is quiescent.
  std::vector<ActionId> observable_out(StateId q) const;
  bool is_quiescent(StateId q) const { return observable_out(q).empty(); }
  bool is_enabled(StateId q, ActionId a) const;
  bool is_input_enabled(StateId q) const;
  bool is_deterministic() const;

  std::optional<StateId> step(StateId q, ActionId a) const;

  ExecutionFragment run_fragment(std::span<const ActionId> actions) const;
  /// Labels use the "?a"/"!a" convention.
  ExecutionFragment run_fragment(const std::vector<std::string>& labels) const;

  std::vector<StateId> reachable_states() const;

 private:
  void check_state(StateId q) const;
  void check_action(ActionId a) const;

  ActionSignature signature_;
  StateId initial_ = 0;
  std::vector<Transition> transitions_;
  std::vector<std::vector<Edge>> edges_;
  std::vector<std::string> names_;
};

/// Deterministic, input-complete Mealy machine over named inputs/outputs.
class MealyMachine {
 public:
  using InputId = std::uint32_t;
  using OutputId = std::uint32_t;

  struct Step {
    OutputId output;
    StateId next;
  };

  MealyMachine() = default;
  /// `table[q * |inputs| + i]` holds the reaction of state q to input i.
  /// The quiescence symbol is added to `outputs` if missing.
  MealyMachine(std::vector<Symbol> inputs, std::vector<Symbol> outputs,
               std::size_t num_states, StateId initial, std::vector<Step> table);

  const std::vector<Symbol>& inputs() const { return inputs_; }
  const std::vector<Symbol>& outputs() const { return outputs_; }
  std::size_t num_states() const { return num_states_; }
  std::size_t num_inputs() const { return inputs_.size(); }
  StateId initial() const { return initial_; }
  const std::vector<Step>& table() const { return table_; }

  const Step& step(StateId q, InputId i) const { return table_[q * inputs_.size() + i]; }

  InputId input_id(std::string_view name) const;
  OutputId output_id(std::string_view name) const;
  std::optional<OutputId> find_output(std::string_view name) const;
  OutputId quiescence() const { return quiescence_; }

  std::vector<OutputId> run(std::span<const InputId> word) const;
  Word run(const Word& word) const;
  /// Input ids for a word of names; throws MalformedQuery on unknown symbols.
  std::vector<InputId> encode(const Word& word) const;

 private:
  std::vector<Symbol> inputs_;
  std::vector<Symbol> outputs_;
  std::size_t num_states_ = 0;
  StateId initial_ = 0;
  OutputId quiescence_ = 0;
  std::vector<Step> table_;
};

/// Partition-refinement minimization; unreachable states are dropped and
/// states are renumbered in breadth-first order from the initial state.
MealyMachine minimize_mealy(const MealyMachine& m);

/// Minimizes a deterministic interface automaton treating every action as
/// a plain edge label. Unreachable states are dropped.
InterfaceAutomaton minimize_ia(const InterfaceAutomaton& a);

/// Expands each Mealy step into an input transition followed, for
/// non-quiescent outputs, by an output transition through a fresh state.
/// Refused inputs produce no transition. The result is minimized.
InterfaceAutomaton mealy_to_ia(const MealyMachine& m);

/// Label-preserving bijection between reachable states that fixes the
/// initial states, indexed by state id of `a` (unreachable entries hold
/// `kNoState`). Throws IncomparableAutomata on signature mismatch.
inline constexpr StateId kNoState = static_cast<StateId>(-1);
std::optional<std::vector<StateId>> isomorphic(const InterfaceAutomaton& a,
                                               const InterfaceAutomaton& b);
std::optional<std::vector<StateId>> isomorphic(const MealyMachine& a,
                                               const MealyMachine& b);

/// Shortest input word on which the two machines produce different output
/// words, or nothing if they are equivalent. Inputs must coincide.
std::optional<Word> distinguishing_word(const MealyMachine& a, const MealyMachine& b);

/// Rename actions; names absent from `mapping` are kept.
InterfaceAutomaton rename_actions(const InterfaceAutomaton& a,
                                  const std::vector<std::pair<Symbol, Symbol>>& mapping);

}  // namespace midlearn

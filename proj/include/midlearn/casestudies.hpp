#pragma once

#include <memory>
#include <optional>

#include "midlearn/learner.hpp"
#include "midlearn/mcheck.hpp"
#include "midlearn/middleware_sim.hpp"

namespace midlearn {

using ModelPtr = std::shared_ptr<const InterfaceAutomaton>;

/// Planner/Controller exchanging bursts of `n` messages over a data
/// channel (Q1 -> Q'1) and one acknowledgement over a second channel
/// (Q'2 -> Q2).
struct Case1Params {
  unsigned n = 3;
  ModelPtr port_model;
  ModelPtr ack_model;  ///< defaults to `port_model`

  void validate() const;
};

/// Two producers and one consumer reading both channels in turn.
struct Case2Params {
  unsigned n1 = 100;
  unsigned n2 = 100;
  unsigned n3 = 100;
  unsigned size = 1;
  bool nonblocking_first = false;
  /// Producer send locations count as valid end states: in the real port
  /// a strict write never blocks, so a producer only waits there because
  /// the learned model bounds the buffer at `size`.
  bool send_is_valid_end = true;
  ModelPtr port1_model;
  ModelPtr port2_model;

  void validate() const;
};

/// Learned interface automaton of a simulated port, memoized per kind.
ModelPtr learned_port_model(const PortKind& kind);

Case1Params case1_params(PortVariant variant, unsigned n);
Case2Params case2_params(unsigned n1, unsigned n2, unsigned n3, unsigned size, bool nonblocking_first);

ProcessNetwork build_case1(const Case1Params& p);
ProcessNetwork build_case2(const Case2Params& p);

/// Shifts all loop bounds down by a common amount so the smallest becomes
/// `floor`, keeping every pairwise difference.
Case2Params compress_case2(const Case2Params& p, unsigned floor);

/// Learned models of the interruptible write port under both semantics.
struct InterruptScenario {
  IaLearnResult actual;
  IaLearnResult expected;
};

InterruptScenario interrupt_scenario(EqConfig cfg = {});

/// The transition that releases a blocked writer as soon as the interrupt
/// arrives: from the state reached by ?write, labelled ?intr, into a state
/// that immediately emits the interrupt completion.
std::optional<Transition> early_unblock_transition(const InterfaceAutomaton& a);

}  // namespace midlearn

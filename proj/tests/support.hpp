#pragma once

#include <map>
#include <queue>
#include <random>
#include <set>

#include "midlearn/automata.hpp"
#include "midlearn/mcheck.hpp"

namespace testsupport {

using namespace midlearn;

inline std::vector<Symbol> names(const std::string& prefix, std::size_t n) {
  std::vector<Symbol> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(prefix + std::to_string(i));
  return v;
}

/// Uniformly random complete machine; outputs include quiescence.
inline MealyMachine random_mealy(std::mt19937_64& rng, std::size_t states, std::size_t inputs, std::size_t outputs) {
  auto outs = names("o", outputs);
  outs.emplace_back(kQuiescence);
  std::uniform_int_distribution<StateId> st(0, static_cast<StateId>(states - 1));
  std::uniform_int_distribution<std::uint32_t> out(0, static_cast<std::uint32_t>(outs.size() - 1));
  std::vector<MealyMachine::Step> table(states * inputs);
  for (auto& s : table) s = {out(rng), st(rng)};
  return MealyMachine(names("i", inputs), outs, states, 0, table);
}

/// Random machine that is already minimal with exactly `states` states.
inline MealyMachine random_minimal_mealy(std::mt19937_64& rng, std::size_t states, std::size_t inputs,
                                         std::size_t outputs) {
  for (;;) {
    auto m = minimize_mealy(random_mealy(rng, states, inputs, outputs));
    if (m.num_states() == states) return m;
  }
}

/// Brute-force equivalence of two states: same outputs on every word up to
/// length `depth`.
inline bool same_behaviour(const MealyMachine& m, StateId p, StateId q, std::size_t depth) {
  if (depth == 0) return true;
  for (MealyMachine::InputId i = 0; i < m.num_inputs(); ++i) {
    const auto& a = m.step(p, i);
    const auto& b = m.step(q, i);
    if (a.output != b.output) return false;
    if (!same_behaviour(m, a.next, b.next, depth - 1)) return false;
  }
  return true;
}

/// Verdict of a full breadth-first enumeration, computed straight from the
/// process specs: renaming, synchronization and terminal markings are all
/// re-derived here without touching the checker's compiled tables.
struct OracleResult {
  bool deadlock = false;
  std::size_t reachable = 0;
};

inline OracleResult enumerate(const std::vector<ProcessSpec>& procs) {
  struct Edge {
    std::string action;
    bool output;
    StateId to;
  };
  const std::size_t n = procs.size();
  std::vector<std::vector<std::vector<Edge>>> edges(n);
  std::map<std::string, std::size_t> receiver;
  for (std::size_t p = 0; p < n; ++p) {
    const auto& a = *procs[p].automaton;
    std::map<std::string, std::string> ren(procs[p].rename.begin(), procs[p].rename.end());
    auto global = [&](const std::string& s) { return ren.count(s) ? ren[s] : s; };
    edges[p].resize(a.num_states());
    for (const auto& t : a.transitions()) {
      const auto name = global(a.signature().name(t.action));
      const bool out = a.signature().is_output(t.action);
      edges[p][t.from].push_back({name, out, t.to});
      if (!out) receiver[name] = p;
    }
  }
  auto terminal = [&](std::size_t p, StateId q) {
    const auto& t = procs[p].terminal;
    return std::find(t.begin(), t.end(), q) != t.end();
  };

  std::vector<StateId> init(n);
  for (std::size_t p = 0; p < n; ++p) init[p] = procs[p].automaton->initial();
  std::set<std::vector<StateId>> seen{init};
  std::queue<std::vector<StateId>> todo;
  todo.push(init);
  OracleResult r;
  while (!todo.empty()) {
    auto s = todo.front();
    todo.pop();
    std::vector<std::vector<StateId>> succ;
    for (std::size_t p = 0; p < n; ++p) {
      for (const auto& e : edges[p][s[p]]) {
        if (procs[p].local_actions.count(e.action)) {
          auto t = s;
          t[p] = e.to;
          succ.push_back(t);
        } else if (e.output) {
          auto it = receiver.find(e.action);
          if (it == receiver.end()) continue;
          const auto rp = it->second;
          for (const auto& f : edges[rp][s[rp]]) {
            if (f.output || f.action != e.action) continue;
            auto t = s;
            t[p] = e.to;
            t[rp] = f.to;
            succ.push_back(t);
          }
        }
      }
    }
    if (succ.empty()) {
      bool all = true;
      for (std::size_t p = 0; p < n; ++p) all = all && terminal(p, s[p]);
      if (!all) r.deadlock = true;
    }
    for (auto& t : succ)
      if (seen.insert(t).second) todo.push(t);
  }
  r.reachable = seen.size();
  return r;
}

/// Random closed network: every synchronized action has one emitter and one
/// distinct receiver; a few local actions per process.
inline std::vector<ProcessSpec> random_network(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nproc(2, 3), nstates(1, 6), nact(2, 5), coin(0, 3);
  const int n = nproc(rng);
  const int nsync = nact(rng);
  struct SyncAction {
    std::string name;
    int from, to;
  };
  std::vector<SyncAction> sync;
  for (int a = 0; a < nsync; ++a) {
    int from = std::uniform_int_distribution<int>(0, n - 1)(rng);
    int to = (from + std::uniform_int_distribution<int>(1, n - 1)(rng)) % n;
    sync.push_back({"m" + std::to_string(a), from, to});
  }
  std::vector<ProcessSpec> procs;
  for (int p = 0; p < n; ++p) {
    std::vector<Symbol> ins, outs;
    for (const auto& s : sync) {
      if (s.from == p) outs.push_back(s.name);
      if (s.to == p) ins.push_back(s.name);
    }
    const std::string local = "tau" + std::to_string(p);
    outs.push_back(local);
    ActionSignature sig(ins, outs);
    const int k = nstates(rng);
    std::uniform_int_distribution<StateId> st(0, static_cast<StateId>(k - 1));
    std::vector<Transition> ts;
    for (StateId q = 0; q < static_cast<StateId>(k); ++q)
      for (ActionId a = 0; a < sig.size(); ++a)
        if (coin(rng) == 0) ts.push_back({q, a, st(rng)});
    ProcessSpec spec;
    spec.name = "P" + std::to_string(p);
    spec.automaton = std::make_shared<const InterfaceAutomaton>(sig, k, 0, ts);
    spec.local_actions = {local};
    for (StateId q = 0; q < static_cast<StateId>(k); ++q)
      if (coin(rng) == 0) spec.terminal.push_back(q);
    procs.push_back(std::move(spec));
  }
  return procs;
}

}  // namespace testsupport

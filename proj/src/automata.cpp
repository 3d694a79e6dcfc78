#include "midlearn/automata.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <queue>
#include <set>
#include <unordered_map>

namespace midlearn {

// ---------------------------------------------------------------------------
// ActionSignature

ActionSignature::ActionSignature(std::vector<Symbol> inputs, std::vector<Symbol> outputs)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)) {
  if (inputs_.empty() && outputs_.empty()) throw InvalidAutomaton("signature has no actions");
  std::set<std::string_view> seen;
  for (const auto* group : {&inputs_, &outputs_}) {
    for (const auto& s : *group) {
      if (s.empty()) throw InvalidAutomaton("empty action name");
      if (s.find_first_of(" \t\r\n") != std::string::npos)
        throw InvalidAutomaton("action name contains whitespace: '" + s + "'");
      if (!seen.insert(s).second)
        throw InvalidAutomaton("action '" + s + "' declared twice (I and O must be disjoint)");
    }
  }
}

const Symbol& ActionSignature::name(ActionId a) const {
  if (a >= size()) throw MalformedQuery("action id out of range");
  return a < inputs_.size() ? inputs_[a] : outputs_[a - inputs_.size()];
}

std::optional<ActionId> ActionSignature::find(std::string_view name) const {
  for (std::size_t i = 0; i < inputs_.size(); ++i)
    if (inputs_[i] == name) return static_cast<ActionId>(i);
  for (std::size_t i = 0; i < outputs_.size(); ++i)
    if (outputs_[i] == name) return static_cast<ActionId>(inputs_.size() + i);
  return std::nullopt;
}

ActionId ActionSignature::input_id(std::string_view name) const {
  for (std::size_t i = 0; i < inputs_.size(); ++i)
    if (inputs_[i] == name) return static_cast<ActionId>(i);
  throw MalformedQuery("unknown input action '" + std::string(name) + "'");
}

ActionId ActionSignature::output_id(std::string_view name) const {
  for (std::size_t i = 0; i < outputs_.size(); ++i)
    if (outputs_[i] == name) return static_cast<ActionId>(inputs_.size() + i);
  throw MalformedQuery("unknown output action '" + std::string(name) + "'");
}

std::string ActionSignature::label(ActionId a) const {
  return (is_input(a) ? "?" : "!") + name(a);
}

// ---------------------------------------------------------------------------
// InterfaceAutomaton

InterfaceAutomaton::InterfaceAutomaton(ActionSignature signature, std::size_t num_states,
                                       StateId initial, std::vector<Transition> transitions,
                                       std::vector<std::string> state_names)
    : signature_(std::move(signature)),
      initial_(initial),
      transitions_(std::move(transitions)),
      edges_(num_states),
      names_(std::move(state_names)) {
  if (num_states == 0) throw InvalidAutomaton("automaton has no states");
  if (initial_ >= num_states) throw InvalidAutomaton("initial state out of range");
  if (!names_.empty() && names_.size() != num_states)
    throw InvalidAutomaton("state name count does not match state count");
  std::sort(transitions_.begin(), transitions_.end());
  transitions_.erase(std::unique(transitions_.begin(), transitions_.end()), transitions_.end());
  for (const auto& t : transitions_) {
    if (t.from >= num_states || t.to >= num_states)
      throw InvalidAutomaton("transition endpoint out of range");
    if (t.action >= signature_.size()) throw InvalidAutomaton("transition label out of range");
    edges_[t.from].push_back({t.action, t.to});
  }
}

std::span<const InterfaceAutomaton::Edge> InterfaceAutomaton::edges(StateId q) const {
  check_state(q);
  return edges_[q];
}

std::string InterfaceAutomaton::state_name(StateId q) const {
  check_state(q);
  return names_.empty() ? std::to_string(q) : names_[q];
}

void InterfaceAutomaton::check_state(StateId q) const {
  if (q >= edges_.size()) throw MalformedQuery("unknown state " + std::to_string(q));
}

void InterfaceAutomaton::check_action(ActionId a) const {
  if (a >= signature_.size()) throw MalformedQuery("unknown action id " + std::to_string(a));
}

std::vector<StateId> InterfaceAutomaton::next_states(StateId q, ActionId a) const {
  check_state(q);
  check_action(a);
  std::vector<StateId> out;
  for (const auto& e : edges_[q])
    if (e.action == a) out.push_back(e.to);
  return out;
}

std::vector<StateId> InterfaceAutomaton::next_states(StateId q, std::string_view action) const {
  auto id = signature_.find(action);
  if (!id) throw MalformedQuery("unknown action '" + std::string(action) + "'");
  return next_states(q, *id);
}

std::vector<ActionId> InterfaceAutomaton::observable_out(StateId q) const {
  check_state(q);
  std::vector<ActionId> out;
  for (const auto& e : edges_[q])
    if (signature_.is_output(e.action) && (out.empty() || out.back() != e.action))
      out.push_back(e.action);
  return out;
}

bool InterfaceAutomaton::is_enabled(StateId q, ActionId a) const {
  check_state(q);
  check_action(a);
  return std::any_of(edges_[q].begin(), edges_[q].end(),
                     [a](const Edge& e) { return e.action == a; });
}

bool InterfaceAutomaton::is_input_enabled(StateId q) const {
  for (ActionId a = 0; a < signature_.inputs().size(); ++a)
    if (!is_enabled(q, a)) return false;
  return true;
}

bool InterfaceAutomaton::is_deterministic() const {
  // edges_ are sorted by action because transitions_ are.
  for (const auto& es : edges_)
    for (std::size_t i = 1; i < es.size(); ++i)
      if (es[i].action == es[i - 1].action) return false;
  return true;
}

std::optional<StateId> InterfaceAutomaton::step(StateId q, ActionId a) const {
  check_state(q);
  check_action(a);
  for (const auto& e : edges_[q])
    if (e.action == a) return e.to;
  return std::nullopt;
}

ExecutionFragment InterfaceAutomaton::run_fragment(std::span<const ActionId> actions) const {
  if (!is_deterministic()) throw MalformedQuery("run_fragment requires a deterministic automaton");
  ExecutionFragment f;
  f.states.push_back(initial_);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    auto next = step(f.states.back(), actions[i]);
    if (!next) {
      f.failed_at = i;
      break;
    }
    f.actions.push_back(actions[i]);
    f.states.push_back(*next);
  }
  return f;
}

ExecutionFragment InterfaceAutomaton::run_fragment(const std::vector<std::string>& labels) const {
  std::vector<ActionId> ids;
  ids.reserve(labels.size());
  for (const auto& l : labels) {
    if (l.size() < 2 || (l[0] != '?' && l[0] != '!'))
      throw MalformedQuery("action label must start with '?' or '!': " + l);
    auto name = std::string_view(l).substr(1);
    ids.push_back(l[0] == '?' ? signature_.input_id(name) : signature_.output_id(name));
  }
  return run_fragment(ids);
}

std::vector<StateId> InterfaceAutomaton::reachable_states() const {
  std::vector<bool> seen(num_states(), false);
  std::vector<StateId> order{initial_};
  seen[initial_] = true;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (const auto& e : edges_[order[i]])
      if (!seen[e.to]) {
        seen[e.to] = true;
        order.push_back(e.to);
      }
  return order;
}

// ---------------------------------------------------------------------------
// MealyMachine

MealyMachine::MealyMachine(std::vector<Symbol> inputs, std::vector<Symbol> outputs,
                           std::size_t num_states, StateId initial, std::vector<Step> table)
    : inputs_(std::move(inputs)),
      outputs_(std::move(outputs)),
      num_states_(num_states),
      initial_(initial),
      table_(std::move(table)) {
  if (inputs_.empty()) throw InvalidAutomaton("Mealy machine has no inputs");
  if (num_states_ == 0) throw InvalidAutomaton("Mealy machine has no states");
  if (initial_ >= num_states_) throw InvalidAutomaton("initial state out of range");
  if (std::set<Symbol>(inputs_.begin(), inputs_.end()).size() != inputs_.size())
    throw InvalidAutomaton("duplicate input symbol");
  auto q = std::find(outputs_.begin(), outputs_.end(), kQuiescence);
  if (q == outputs_.end()) {
    outputs_.emplace_back(kQuiescence);
    q = std::prev(outputs_.end());
  }
  quiescence_ = static_cast<OutputId>(q - outputs_.begin());
  if (std::set<Symbol>(outputs_.begin(), outputs_.end()).size() != outputs_.size())
    throw InvalidAutomaton("duplicate output symbol");
  if (table_.size() != num_states_ * inputs_.size())
    throw InvalidAutomaton("Mealy table is not input-complete");
  for (const auto& s : table_) {
    if (s.next >= num_states_) throw InvalidAutomaton("Mealy successor out of range");
    if (s.output >= outputs_.size()) throw InvalidAutomaton("Mealy output out of range");
  }
}

MealyMachine::InputId MealyMachine::input_id(std::string_view name) const {
  for (std::size_t i = 0; i < inputs_.size(); ++i)
    if (inputs_[i] == name) return static_cast<InputId>(i);
  throw MalformedQuery("unknown input symbol '" + std::string(name) + "'");
}

std::optional<MealyMachine::OutputId> MealyMachine::find_output(std::string_view name) const {
  for (std::size_t i = 0; i < outputs_.size(); ++i)
    if (outputs_[i] == name) return static_cast<OutputId>(i);
  return std::nullopt;
}

MealyMachine::OutputId MealyMachine::output_id(std::string_view name) const {
  if (auto o = find_output(name)) return *o;
  throw MalformedQuery("unknown output symbol '" + std::string(name) + "'");
}

std::vector<MealyMachine::OutputId> MealyMachine::run(std::span<const InputId> word) const {
  std::vector<OutputId> out;
  out.reserve(word.size());
  StateId q = initial_;
  for (InputId i : word) {
    if (i >= inputs_.size()) throw MalformedQuery("input id out of range");
    const auto& s = step(q, i);
    out.push_back(s.output);
    q = s.next;
  }
  return out;
}

std::vector<MealyMachine::InputId> MealyMachine::encode(const Word& word) const {
  std::vector<InputId> ids;
  ids.reserve(word.size());
  for (const auto& s : word) ids.push_back(input_id(s));
  return ids;
}

Word MealyMachine::run(const Word& word) const {
  Word out;
  for (OutputId o : run(std::span<const InputId>(encode(word)))) out.push_back(outputs_[o]);
  return out;
}

// ---------------------------------------------------------------------------
// Minimization

namespace {

// Refines `block` (indexed by position in `states`) until each state's
// signature, computed by `sig`, is uniform within its block.
template <typename SigFn>
std::vector<std::uint32_t> refine(std::size_t n, SigFn sig) {
  std::vector<std::uint32_t> block(n, 0);
  std::size_t num_blocks = 1;
  for (;;) {
    std::map<std::pair<std::uint32_t, std::vector<std::uint64_t>>, std::uint32_t> ids;
    std::vector<std::uint32_t> next(n);
    for (std::size_t s = 0; s < n; ++s) {
      auto key = std::make_pair(block[s], sig(s, block));
      auto [it, _] = ids.emplace(std::move(key), static_cast<std::uint32_t>(ids.size()));
      next[s] = it->second;
    }
    block = std::move(next);
    if (ids.size() == num_blocks) return block;
    num_blocks = ids.size();
  }
}

}  // namespace

MealyMachine minimize_mealy(const MealyMachine& m) {
  const std::size_t k = m.num_inputs();
  // Reachable states in BFS order.
  std::vector<StateId> order{m.initial()};
  std::vector<std::int64_t> pos(m.num_states(), -1);
  pos[m.initial()] = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t a = 0; a < k; ++a) {
      StateId t = m.step(order[i], static_cast<MealyMachine::InputId>(a)).next;
      if (pos[t] < 0) {
        pos[t] = static_cast<std::int64_t>(order.size());
        order.push_back(t);
      }
    }

  auto block = refine(order.size(), [&](std::size_t s, const std::vector<std::uint32_t>& blk) {
    std::vector<std::uint64_t> sig;
    sig.reserve(2 * k);
    for (std::size_t a = 0; a < k; ++a) {
      const auto& st = m.step(order[s], static_cast<MealyMachine::InputId>(a));
      sig.push_back(st.output);
      sig.push_back(blk[static_cast<std::size_t>(pos[st.next])]);
    }
    return sig;
  });

  // Renumber blocks in BFS order from the initial block.
  std::vector<std::int64_t> renum(order.size(), -1);
  std::vector<std::size_t> rep;  // representative position per new state
  renum[block[0]] = 0;
  rep.push_back(0);
  for (std::size_t i = 0; i < rep.size(); ++i)
    for (std::size_t a = 0; a < k; ++a) {
      StateId t = m.step(order[rep[i]], static_cast<MealyMachine::InputId>(a)).next;
      auto b = block[static_cast<std::size_t>(pos[t])];
      if (renum[b] < 0) {
        renum[b] = static_cast<std::int64_t>(rep.size());
        rep.push_back(static_cast<std::size_t>(pos[t]));
      }
    }

  std::vector<MealyMachine::Step> table(rep.size() * k);
  for (std::size_t q = 0; q < rep.size(); ++q)
    for (std::size_t a = 0; a < k; ++a) {
      const auto& st = m.step(order[rep[q]], static_cast<MealyMachine::InputId>(a));
      table[q * k + a] = {st.output,
                          static_cast<StateId>(renum[block[static_cast<std::size_t>(pos[st.next])]])};
    }
  return MealyMachine(m.inputs(), m.outputs(), rep.size(), 0, std::move(table));
}

InterfaceAutomaton minimize_ia(const InterfaceAutomaton& a) {
  if (!a.is_deterministic()) throw InvalidAutomaton("minimize_ia requires a deterministic automaton");
  auto order = a.reachable_states();
  std::vector<std::int64_t> pos(a.num_states(), -1);
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<std::int64_t>(i);

  auto block = refine(order.size(), [&](std::size_t s, const std::vector<std::uint32_t>& blk) {
    std::vector<std::uint64_t> sig;
    for (const auto& e : a.edges(order[s])) {
      sig.push_back(e.action);
      sig.push_back(blk[static_cast<std::size_t>(pos[e.to])]);
    }
    return sig;
  });

  std::vector<std::int64_t> renum(order.size(), -1);
  std::vector<std::size_t> rep;
  renum[block[0]] = 0;
  rep.push_back(0);
  for (std::size_t i = 0; i < rep.size(); ++i)
    for (const auto& e : a.edges(order[rep[i]])) {
      auto b = block[static_cast<std::size_t>(pos[e.to])];
      if (renum[b] < 0) {
        renum[b] = static_cast<std::int64_t>(rep.size());
        rep.push_back(static_cast<std::size_t>(pos[e.to]));
      }
    }

  std::vector<Transition> ts;
  for (std::size_t q = 0; q < rep.size(); ++q)
    for (const auto& e : a.edges(order[rep[q]]))
      ts.push_back({static_cast<StateId>(q), e.action,
                    static_cast<StateId>(renum[block[static_cast<std::size_t>(pos[e.to])]])});
  return InterfaceAutomaton(a.signature(), rep.size(), 0, std::move(ts));
}

InterfaceAutomaton mealy_to_ia(const MealyMachine& m) {
  const auto refused = m.find_output(kRefused);
  std::vector<Symbol> outs;
  std::vector<std::int64_t> out_action(m.outputs().size(), -1);
  for (std::size_t o = 0; o < m.outputs().size(); ++o) {
    if (o == m.quiescence() || (refused && o == *refused)) continue;
    out_action[o] = static_cast<std::int64_t>(m.num_inputs() + outs.size());
    outs.push_back(m.outputs()[o]);
  }
  ActionSignature sig(m.inputs(), std::move(outs));

  std::vector<Transition> ts;
  std::size_t next_fresh = m.num_states();
  for (StateId q = 0; q < m.num_states(); ++q)
    for (MealyMachine::InputId i = 0; i < m.num_inputs(); ++i) {
      const auto& st = m.step(q, i);
      if (refused && st.output == *refused) continue;
      if (st.output == m.quiescence()) {
        ts.push_back({q, i, st.next});
        continue;
      }
      auto mid = static_cast<StateId>(next_fresh++);
      ts.push_back({q, i, mid});
      ts.push_back({mid, static_cast<ActionId>(out_action[st.output]), st.next});
    }
  return minimize_ia(InterfaceAutomaton(std::move(sig), next_fresh, m.initial(), std::move(ts)));
}

// ---------------------------------------------------------------------------
// Isomorphism

namespace {

template <typename Sorted>
bool same_set(Sorted a, Sorted b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

}  // namespace

std::optional<std::vector<StateId>> isomorphic(const InterfaceAutomaton& a,
                                               const InterfaceAutomaton& b) {
  const auto& sa = a.signature();
  const auto& sb = b.signature();
  if (!same_set(sa.inputs(), sb.inputs()) || !same_set(sa.outputs(), sb.outputs()))
    throw IncomparableAutomata("automata have different action signatures");
  if (!a.is_deterministic() || !b.is_deterministic())
    throw IncomparableAutomata("isomorphism check requires deterministic automata");

  // Translate b's action ids into a's.
  std::vector<ActionId> b_to_a(sb.size());
  for (ActionId x = 0; x < sb.size(); ++x) b_to_a[x] = *sa.find(sb.name(x));

  std::vector<StateId> map_ab(a.num_states(), kNoState);
  std::vector<StateId> map_ba(b.num_states(), kNoState);
  std::deque<std::pair<StateId, StateId>> work{{a.initial(), b.initial()}};
  map_ab[a.initial()] = b.initial();
  map_ba[b.initial()] = a.initial();
  while (!work.empty()) {
    auto [p, q] = work.front();
    work.pop_front();
    auto ea = a.edges(p);
    auto eb = b.edges(q);
    if (ea.size() != eb.size()) return std::nullopt;
    std::vector<std::pair<ActionId, StateId>> lb;
    for (const auto& e : eb) lb.emplace_back(b_to_a[e.action], e.to);
    std::sort(lb.begin(), lb.end());
    for (std::size_t i = 0; i < ea.size(); ++i) {
      if (ea[i].action != lb[i].first) return std::nullopt;
      StateId x = ea[i].to;
      StateId y = lb[i].second;
      if (map_ab[x] == kNoState && map_ba[y] == kNoState) {
        map_ab[x] = y;
        map_ba[y] = x;
        work.emplace_back(x, y);
      } else if (map_ab[x] != y || map_ba[y] != x) {
        return std::nullopt;
      }
    }
  }
  return map_ab;
}

std::optional<std::vector<StateId>> isomorphic(const MealyMachine& a, const MealyMachine& b) {
  if (!same_set(a.inputs(), b.inputs()))
    throw IncomparableAutomata("Mealy machines have different input alphabets");
  std::vector<MealyMachine::InputId> in_b(a.num_inputs());
  for (std::size_t i = 0; i < a.num_inputs(); ++i) in_b[i] = b.input_id(a.inputs()[i]);

  std::vector<StateId> map_ab(a.num_states(), kNoState);
  std::vector<StateId> map_ba(b.num_states(), kNoState);
  std::deque<std::pair<StateId, StateId>> work{{a.initial(), b.initial()}};
  map_ab[a.initial()] = b.initial();
  map_ba[b.initial()] = a.initial();
  while (!work.empty()) {
    auto [p, q] = work.front();
    work.pop_front();
    for (MealyMachine::InputId i = 0; i < a.num_inputs(); ++i) {
      const auto& x = a.step(p, i);
      const auto& y = b.step(q, in_b[i]);
      if (a.outputs()[x.output] != b.outputs()[y.output]) return std::nullopt;
      if (map_ab[x.next] == kNoState && map_ba[y.next] == kNoState) {
        map_ab[x.next] = y.next;
        map_ba[y.next] = x.next;
        work.emplace_back(x.next, y.next);
      } else if (map_ab[x.next] != y.next || map_ba[y.next] != x.next) {
        return std::nullopt;
      }
    }
  }
  return map_ab;
}

std::optional<Word> distinguishing_word(const MealyMachine& a, const MealyMachine& b) {
  if (!same_set(a.inputs(), b.inputs()))
    throw IncomparableAutomata("Mealy machines have different input alphabets");
  std::vector<MealyMachine::InputId> in_b(a.num_inputs());
  for (std::size_t i = 0; i < a.num_inputs(); ++i) in_b[i] = b.input_id(a.inputs()[i]);

  const std::size_t nb = b.num_states();
  auto key = [nb](StateId p, StateId q) { return static_cast<std::size_t>(p) * nb + q; };
  // parent[key] = (previous key, input)
  std::unordered_map<std::size_t, std::pair<std::size_t, MealyMachine::InputId>> parent;
  const std::size_t root = key(a.initial(), b.initial());
  parent.emplace(root, std::make_pair(root, 0));
  std::queue<std::pair<StateId, StateId>> work;
  work.emplace(a.initial(), b.initial());

  auto trace = [&](std::size_t k, MealyMachine::InputId last) {
    Word w{a.inputs()[last]};
    while (k != root) {
      const auto& [prev, in] = parent.at(k);
      w.push_back(a.inputs()[in]);
      k = prev;
    }
    std::reverse(w.begin(), w.end());
    return w;
  };

  while (!work.empty()) {
    auto [p, q] = work.front();
    work.pop();
    const std::size_t k = key(p, q);
    for (MealyMachine::InputId i = 0; i < a.num_inputs(); ++i) {
      const auto& x = a.step(p, i);
      const auto& y = b.step(q, in_b[i]);
      if (a.outputs()[x.output] != b.outputs()[y.output]) return trace(k, i);
      const std::size_t nk = key(x.next, y.next);
      if (parent.emplace(nk, std::make_pair(k, i)).second) work.emplace(x.next, y.next);
    }
  }
  return std::nullopt;
}

InterfaceAutomaton rename_actions(const InterfaceAutomaton& a,
                                  const std::vector<std::pair<Symbol, Symbol>>& mapping) {
  auto rename = [&](const Symbol& s) {
    for (const auto& [from, to] : mapping)
      if (from == s) return to;
    return s;
  };
  std::vector<Symbol> ins, outs;
  for (const auto& s : a.signature().inputs()) ins.push_back(rename(s));
  for (const auto& s : a.signature().outputs()) outs.push_back(rename(s));
  return InterfaceAutomaton(ActionSignature(std::move(ins), std::move(outs)), a.num_states(),
                            a.initial(), a.transitions(), a.state_names());
}

}  // namespace midlearn

#include "midlearn/mcheck.hpp"

#include <absl/container/flat_hash_map.h>
#include <absl/container/flat_hash_set.h>
#include <omp.h>

#include <algorithm>
#include <bit>
#include <map>
#include <sstream>

namespace midlearn {

// ---------------------------------------------------------------------------
// ProcessNetwork

ProcessNetwork::ProcessNetwork(std::vector<ProcessSpec> processes) {
  if (processes.empty()) throw CompositionError("network has no processes");
  std::map<Symbol, GlobalAction> ids;
  auto id_of = [&](const Symbol& s) {
    auto [it, inserted] = ids.emplace(s, static_cast<GlobalAction>(actions_.size()));
    if (inserted) actions_.push_back(s);
    return it->second;
  };

  std::set<std::string> names;
  for (auto& spec : processes) {
    if (!spec.automaton) throw CompositionError("process '" + spec.name + "' has no automaton");
    if (!names.insert(spec.name).second) throw CompositionError("duplicate process name '" + spec.name + "'");
    Compiled c;
    c.renamed = std::make_shared<const InterfaceAutomaton>(rename_actions(*spec.automaton, spec.rename));
    const auto n = c.renamed->num_states();
    c.terminal.assign(n, false);
    for (StateId q : spec.terminal) {
      if (q >= n) throw CompositionError("terminal state out of range in process '" + spec.name + "'");
      c.terminal[q] = true;
    }
    for (const auto& l : spec.local_actions)
      if (!c.renamed->signature().find(l) || !c.renamed->signature().is_output(*c.renamed->signature().find(l)))
        throw CompositionError("local action '" + l + "' is not an output of process '" + spec.name + "'");
    c.spec = std::move(spec);
    procs_.push_back(std::move(c));
  }

  // Register actions and find the unique receiver of every input name.
  std::map<Symbol, std::size_t> receiver_of, emitter_of;
  for (std::size_t p = 0; p < procs_.size(); ++p) {
    const auto& sig = procs_[p].renamed->signature();
    for (const auto& in : sig.inputs()) {
      if (!receiver_of.emplace(in, p).second)
        throw CompositionError("input action '" + in + "' is received by more than one process");
    }
    for (const auto& out : sig.outputs()) {
      if (procs_[p].spec.local_actions.contains(out)) continue;
      if (!emitter_of.emplace(out, p).second)
        throw CompositionError("output action '" + out + "' is emitted by more than one process");
    }
  }
  for (const auto& [out, p] : emitter_of) {
    auto r = receiver_of.find(out);
    if (r == receiver_of.end())
      throw CompositionError("unmatched action '" + out + "': output of process '" + procs_[p].spec.name +
                             "' has no receiving process");
    if (r->second == p)
      throw CompositionError("action '" + out + "' is both emitted and received by process '" +
                             procs_[p].spec.name + "'");
  }

  for (std::size_t p = 0; p < procs_.size(); ++p) {
    auto& c = procs_[p];
    const auto& a = *c.renamed;
    const auto n = a.num_states();
    c.local.resize(n);
    c.emit.resize(n);
    c.receive.resize(n);
    for (StateId q = 0; q < n; ++q)
      for (const auto& e : a.edges(q)) {
        const auto& name = a.signature().name(e.action);
        const GlobalAction g = id_of(name);
        if (a.signature().is_input(e.action)) {
          c.receive[q].push_back({g, e.to});
        } else if (c.spec.local_actions.contains(name)) {
          c.local[q].push_back({g, e.to});
        } else {
          c.emit[q].push_back({g, e.to});
        }
      }
  }
  receiver_.assign(actions_.size(), static_cast<std::size_t>(-1));
  for (const auto& [name, p] : receiver_of)
    if (auto it = ids.find(name); it != ids.end()) receiver_[it->second] = p;
}

CompositeState ProcessNetwork::initial() const {
  CompositeState s;
  for (const auto& c : procs_) s.push_back(c.renamed->initial());
  return s;
}

bool ProcessNetwork::all_terminal(const CompositeState& s) const {
  for (std::size_t p = 0; p < procs_.size(); ++p)
    if (!procs_[p].terminal[s[p]]) return false;
  return true;
}

void ProcessNetwork::validate_state(const CompositeState& s) const {
  if (s.size() != procs_.size()) throw MalformedQuery("composite state has wrong arity");
  for (std::size_t p = 0; p < procs_.size(); ++p)
    if (s[p] >= procs_[p].renamed->num_states()) throw MalformedQuery("composite state component out of range");
}

std::vector<Successor> compose_step(const ProcessNetwork& net, const CompositeState& s) {
  net.validate_state(s);
  std::vector<Successor> out;
  for (std::size_t p = 0; p < net.size(); ++p) {
    for (const auto& m : net.local_moves(p, s[p])) {
      auto t = s;
      t[p] = m.to;
      out.push_back({m.action, static_cast<std::uint32_t>(p), std::move(t)});
    }
    for (const auto& m : net.emit_moves(p, s[p])) {
      const auto r = net.receiver(m.action);
      for (const auto& rm : net.receive_moves(r, s[r])) {
        if (rm.action != m.action) continue;
        auto t = s;
        t[p] = m.to;
        t[r] = rm.to;
        out.push_back({m.action, static_cast<std::uint32_t>(p), std::move(t)});
      }
    }
  }
  return out;
}

std::string to_string(Conclusion c) {
  switch (c) {
    case Conclusion::ok: return "OK";
    case Conclusion::deadlock: return "deadlock";
    case Conclusion::inconclusive: return "inconclusive";
  }
  return "?";
}

std::string to_string(SearchOrder o) {
  switch (o) {
    case SearchOrder::dfs: return "dfs";
    case SearchOrder::bfs: return "bfs";
    case SearchOrder::parallel_bfs: return "parallel-bfs";
  }
  return "?";
}

SearchOrder parse_search_order(std::string_view s) {
  if (s == "dfs") return SearchOrder::dfs;
  if (s == "bfs") return SearchOrder::bfs;
  if (s == "parallel-bfs" || s == "pbfs") return SearchOrder::parallel_bfs;
  throw Error("unknown search order '" + std::string(s) + "'");
}

std::string format_state(const ProcessNetwork& net, const CompositeState& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t p = 0; p < s.size(); ++p) {
    if (p) os << ", ";
    os << net.spec(p).name << '=' << net.automaton(p).state_name(s[p]);
  }
  os << ')';
  return os.str();
}

// ---------------------------------------------------------------------------
// Search

namespace {

using Packed = unsigned __int128;

struct PackedHash {
  std::size_t operator()(Packed v) const {
    const auto lo = static_cast<std::uint64_t>(v);
    const auto hi = static_cast<std::uint64_t>(v >> 64);
    return absl::Hash<std::pair<std::uint64_t, std::uint64_t>>{}({lo, hi});
  }
};

// Bit-packs composite states; each process gets just enough bits for its
// state count.
class Codec {
 public:
  explicit Codec(const ProcessNetwork& net) {
    unsigned offset = 0;
    for (std::size_t p = 0; p < net.size(); ++p) {
      const auto n = net.automaton(p).num_states();
      unsigned w = std::max(1u, static_cast<unsigned>(std::bit_width(n - 1)));
      offsets_.push_back(offset);
      widths_.push_back(w);
      offset += w;
    }
    if (offset > 128) throw CompositionError("composite state does not fit in 128 bits");
  }

  Packed encode(const CompositeState& s) const {
    Packed v = 0;
    for (std::size_t p = 0; p < s.size(); ++p) v |= static_cast<Packed>(s[p]) << offsets_[p];
    return v;
  }

  StateId get(Packed v, std::size_t p) const {
    return static_cast<StateId>((v >> offsets_[p]) & ((Packed{1} << widths_[p]) - 1));
  }

  Packed set(Packed v, std::size_t p, StateId q) const {
    const Packed mask = ((Packed{1} << widths_[p]) - 1) << offsets_[p];
    return (v & ~mask) | (static_cast<Packed>(q) << offsets_[p]);
  }

  CompositeState decode(Packed v) const {
    CompositeState s(offsets_.size());
    for (std::size_t p = 0; p < s.size(); ++p) s[p] = get(v, p);
    return s;
  }

 private:
  std::vector<unsigned> offsets_, widths_;
};

struct Edge {
  Packed state;
  std::uint32_t action;
  std::uint32_t emitter;
};

class Expander {
 public:
  explicit Expander(const ProcessNetwork& net) : net_(net), codec_(net) {}

  const Codec& codec() const { return codec_; }

  void expand(Packed v, std::vector<Edge>& out) const {
    out.clear();
    for (std::size_t p = 0; p < net_.size(); ++p) {
      const StateId q = codec_.get(v, p);
      for (const auto& m : net_.local_moves(p, q))
        out.push_back({codec_.set(v, p, m.to), m.action, static_cast<std::uint32_t>(p)});
      for (const auto& m : net_.emit_moves(p, q)) {
        const auto r = net_.receiver(m.action);
        const StateId rq = codec_.get(v, r);
        for (const auto& rm : net_.receive_moves(r, rq)) {
          if (rm.action != m.action) continue;
          out.push_back({codec_.set(codec_.set(v, p, m.to), r, rm.to), m.action, static_cast<std::uint32_t>(p)});
        }
      }
    }
  }

  bool terminal(Packed v) const {
    for (std::size_t p = 0; p < net_.size(); ++p)
      if (!net_.is_terminal(p, codec_.get(v, p))) return false;
    return true;
  }

 private:
  const ProcessNetwork& net_;
  Codec codec_;
};

using Clock = std::chrono::steady_clock;

class Budget {
 public:
  explicit Budget(const SearchLimits& l) : limits_(l), start_(Clock::now()) {}

  // Returns a reason string when a limit is exceeded.
  std::optional<std::string> exceeded(std::size_t states) {
    if (states > limits_.max_states) return "state limit of " + std::to_string(limits_.max_states) + " exceeded";
    if ((++calls_ & 0x3fff) == 0 && Clock::now() - start_ > limits_.max_time) return "time limit exceeded";
    return std::nullopt;
  }

  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

 private:
  SearchLimits limits_;
  Clock::time_point start_;
  std::size_t calls_ = 0;
};

Verdict search_dfs(const ProcessNetwork& net, const SearchLimits& limits) {
  Expander ex(net);
  Budget budget(limits);
  Verdict v;

  struct Frame {
    Packed state;
    std::uint32_t action;
    std::uint32_t emitter;
    std::vector<Edge> succ;
    std::size_t next = 0;
  };

  absl::flat_hash_set<Packed, PackedHash> visited;
  std::vector<Frame> stack;
  std::size_t peak_depth = 0;

  auto finish = [&] {
    v.states_explored = visited.size();
    v.elapsed_seconds = budget.elapsed();
    v.peak_memory_bytes = visited.capacity() * (sizeof(Packed) + 1) + peak_depth * (sizeof(Frame) + 4 * sizeof(Edge));
    return v;
  };

  auto push = [&](Packed s, std::uint32_t action, std::uint32_t emitter) -> bool {
    Frame f{s, action, emitter, {}, 0};
    ex.expand(s, f.succ);
    v.transitions_explored += f.succ.size();
    stack.push_back(std::move(f));
    peak_depth = std::max(peak_depth, stack.size());
    if (stack.back().succ.empty() && !ex.terminal(s)) {
      v.conclusion = Conclusion::deadlock;
      for (std::size_t i = 1; i < stack.size(); ++i)
        v.witness.push_back({net.action_name(stack[i].action), stack[i].emitter, ex.codec().decode(stack[i].state)});
      v.stuck_state = ex.codec().decode(s);
      return true;
    }
    return false;
  };

  const Packed init = ex.codec().encode(net.initial());
  visited.insert(init);
  if (push(init, 0, 0)) return finish();
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next == top.succ.size()) {
      stack.pop_back();
      continue;
    }
    const Edge e = top.succ[top.next++];
    if (!visited.insert(e.state).second) continue;
    if (auto why = budget.exceeded(visited.size())) {
      v.conclusion = Conclusion::inconclusive;
      v.reason = *why;
      return finish();
    }
    if (push(e.state, e.action, e.emitter)) return finish();
  }
  v.conclusion = Conclusion::ok;
  return finish();
}

Verdict search_bfs(const ProcessNetwork& net, const SearchLimits& limits, bool parallel) {
  Expander ex(net);
  Budget budget(limits);
  Verdict v;

  std::vector<Packed> states;
  std::vector<std::uint32_t> parent, via_action, via_emitter;
  absl::flat_hash_map<Packed, std::uint32_t, PackedHash> index;

  auto finish = [&] {
    v.states_explored = states.size();
    v.elapsed_seconds = budget.elapsed();
    v.peak_memory_bytes = index.capacity() * (sizeof(Packed) + sizeof(std::uint32_t) + 1) +
                          states.capacity() * (sizeof(Packed) + 3 * sizeof(std::uint32_t));
    return v;
  };

  auto report_deadlock = [&](std::uint32_t i) {
    v.conclusion = Conclusion::deadlock;
    std::vector<std::uint32_t> path;
    for (std::uint32_t k = i; k != 0; k = parent[k]) path.push_back(k);
    std::reverse(path.begin(), path.end());
    for (auto k : path) v.witness.push_back({net.action_name(via_action[k]), via_emitter[k], ex.codec().decode(states[k])});
    v.stuck_state = ex.codec().decode(states[i]);
  };

  auto add = [&](const Edge& e, std::uint32_t from) -> bool {
    auto [it, inserted] = index.emplace(e.state, static_cast<std::uint32_t>(states.size()));
    if (!inserted) return true;
    states.push_back(e.state);
    parent.push_back(from);
    via_action.push_back(e.action);
    via_emitter.push_back(e.emitter);
    if (auto why = budget.exceeded(states.size())) {
      v.conclusion = Conclusion::inconclusive;
      v.reason = *why;
      return false;
    }
    return true;
  };

  add({ex.codec().encode(net.initial()), 0, 0}, 0);

  std::size_t begin = 0;
  std::vector<Edge> scratch;
  std::vector<std::vector<Edge>> level;
  while (begin < states.size()) {
    const std::size_t end = states.size();
    const std::size_t n = end - begin;
    if (parallel) {
      level.resize(n);
#pragma omp parallel for schedule(dynamic, 512)
      for (std::size_t i = 0; i < n; ++i) ex.expand(states[begin + i], level[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto idx = static_cast<std::uint32_t>(begin + i);
      const std::vector<Edge>* succ = &scratch;
      if (parallel) {
        succ = &level[i];
      } else {
        ex.expand(states[idx], scratch);
      }
      v.transitions_explored += succ->size();
      if (succ->empty() && !ex.terminal(states[idx])) {
        report_deadlock(idx);
        return finish();
      }
      for (const auto& e : *succ)
        if (!add(e, idx)) return finish();
    }
    begin = end;
  }
  v.conclusion = Conclusion::ok;
  return finish();
}

}  // namespace

Verdict find_deadlock(const ProcessNetwork& net, SearchLimits limits) {
  if (limits.max_states == 0 || !(limits.max_time.count() > 0)) throw Error("search limits must be positive");
  switch (limits.order) {
    case SearchOrder::dfs: return search_dfs(net, limits);
    case SearchOrder::bfs: return search_bfs(net, limits, false);
    case SearchOrder::parallel_bfs: return search_bfs(net, limits, true);
  }
  throw Error("unknown search order");
}

bool replay_witness(const ProcessNetwork& net, const std::vector<WitnessStep>& witness) {
  CompositeState s = net.initial();
  for (const auto& w : witness) {
    auto succ = compose_step(net, s);
    auto it = std::find_if(succ.begin(), succ.end(), [&](const Successor& x) {
      return net.action_name(x.action) == w.action && x.emitter == w.emitter && x.target == w.state;
    });
    if (it == succ.end()) return false;
    s = it->target;
  }
  return compose_step(net, s).empty();
}

}  // namespace midlearn

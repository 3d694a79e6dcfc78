#include "midlearn/teacher.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace midlearn {

// ---------------------------------------------------------------------------
// MealySession

void MealySession::reset() {
  state_ = machine_.initial();
  ++resets_;
}

Symbol MealySession::step(const Symbol& input) {
  if (!state_) throw SessionStateError("step before reset");
  auto it = std::find(machine_.inputs().begin(), machine_.inputs().end(), input);
  if (it == machine_.inputs().end()) throw AlphabetError("unknown input symbol '" + input + "'");
  const auto& s = machine_.step(*state_, static_cast<MealyMachine::InputId>(it - machine_.inputs().begin()));
  state_ = s.next;
  return machine_.outputs()[s.output];
}

// ---------------------------------------------------------------------------
// TraceCache

TraceCache::TraceCache() { nodes_.emplace_back(); }

std::optional<std::uint32_t> TraceCache::find_symbol(const Symbol& s) const {
  for (std::size_t i = 0; i < symbols_.size(); ++i)
    if (symbols_[i] == s) return static_cast<std::uint32_t>(i);
  return std::nullopt;
}

std::uint32_t TraceCache::intern(const Symbol& s) {
  if (auto id = find_symbol(s)) return *id;
  symbols_.push_back(s);
  return static_cast<std::uint32_t>(symbols_.size() - 1);
}

std::optional<std::uint32_t> TraceCache::child(std::uint32_t node, std::uint32_t sym) const {
  for (const auto& [s, c] : nodes_[node].children)
    if (s == sym) return c;
  return std::nullopt;
}

std::optional<Word> TraceCache::lookup(const Word& word) const {
  Word out;
  out.reserve(word.size());
  std::uint32_t node = 0;
  for (const auto& in : word) {
    auto sym = find_symbol(in);
    if (!sym) return std::nullopt;
    auto c = child(node, *sym);
    if (!c) return std::nullopt;
    node = *c;
    out.push_back(symbols_[nodes_[node].output]);
  }
  return out;
}

void TraceCache::insert(const Word& inputs, const Word& outputs) {
  if (inputs.size() != outputs.size())
    throw MalformedQuery("trace has mismatched input/output lengths");
  std::uint32_t node = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto in = intern(inputs[i]);
    const auto out = intern(outputs[i]);
    if (auto c = child(node, in)) {
      if (nodes_[*c].output != out) {
        std::ostringstream msg;
        msg << "determinism violation at position " << i << " of";
        for (const auto& s : inputs) msg << ' ' << s;
        msg << ": previously observed '" << symbols_[nodes_[*c].output] << "', now '"
            << outputs[i] << "'";
        throw DeterminismViolation(msg.str());
      }
      node = *c;
    } else {
      auto id = static_cast<std::uint32_t>(nodes_.size());
      nodes_.push_back(Node{{}, out});
      nodes_[node].children.emplace_back(in, id);
      node = id;
    }
  }
}

std::vector<std::pair<Word, Word>> TraceCache::traces() const {
  std::vector<std::pair<Word, Word>> out;
  std::vector<std::pair<std::uint32_t, std::pair<Word, Word>>> stack{{0, {}}};
  while (!stack.empty()) {
    auto [node, tr] = std::move(stack.back());
    stack.pop_back();
    if (nodes_[node].children.empty()) {
      if (!tr.first.empty()) out.push_back(std::move(tr));
      continue;
    }
    for (const auto& [sym, c] : nodes_[node].children) {
      auto next = tr;
      next.first.push_back(symbols_[sym]);
      next.second.push_back(symbols_[nodes_[c].output]);
      stack.emplace_back(c, std::move(next));
    }
  }
  return out;
}

std::string TraceCache::to_dot() const {
  std::ostringstream os;
  os << "digraph cache {\n  node [shape=point];\n";
  for (std::size_t n = 0; n < nodes_.size(); ++n)
    for (const auto& [sym, c] : nodes_[n].children)
      os << "  n" << n << " -> n" << c << " [label=\"" << symbols_[sym] << " / "
         << symbols_[nodes_[c].output] << "\"];\n";
  os << "}\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// QueryRunner

QueryRunner::QueryRunner(SulSession& sul, bool use_cache)
    : sul_(sul), use_cache_(use_cache), alphabet_(sul.alphabet()) {}

Word QueryRunner::run(const Word& word) {
  if (word.empty()) return {};
  if (use_cache_) {
    if (auto hit = cache_.lookup(word)) {
      ++cache_hits_;
      return *hit;
    }
  }
  return run_fresh(word);
}

Word QueryRunner::run_fresh(const Word& word) {
  for (const auto& s : word)
    if (std::find(alphabet_.inputs.begin(), alphabet_.inputs.end(), s) == alphabet_.inputs.end())
      throw AlphabetError("symbol '" + s + "' is not in the SUL input alphabet");
  if (word.empty()) return {};
  ++experiments_;
  ++executions_;
  sul_.reset();
  Word out;
  out.reserve(word.size());
  for (const auto& s : word) out.push_back(sul_.step(s));
  cache_.insert(word, out);
  return out;
}

// ---------------------------------------------------------------------------
// Test-suite helpers

std::vector<std::vector<MealyMachine::InputId>> access_sequences(const MealyMachine& m) {
  std::vector<std::vector<MealyMachine::InputId>> acc(m.num_states());
  std::vector<bool> seen(m.num_states(), false);
  std::vector<StateId> order{m.initial()};
  seen[m.initial()] = true;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (MealyMachine::InputId a = 0; a < m.num_inputs(); ++a) {
      StateId t = m.step(order[i], a).next;
      if (!seen[t]) {
        seen[t] = true;
        acc[t] = acc[order[i]];
        acc[t].push_back(a);
        order.push_back(t);
      }
    }
  std::vector<std::vector<MealyMachine::InputId>> out;
  for (StateId q : order) out.push_back(acc[q]);
  return out;
}

namespace {

using InWord = std::vector<MealyMachine::InputId>;

// Shortest word distinguishing states p and q of m, by BFS on state pairs.
std::optional<InWord> separate(const MealyMachine& m, StateId p, StateId q) {
  const std::size_t n = m.num_states();
  std::map<std::size_t, std::pair<std::size_t, MealyMachine::InputId>> parent;
  auto key = [n](StateId a, StateId b) { return static_cast<std::size_t>(a) * n + b; };
  const std::size_t root = key(p, q);
  parent.emplace(root, std::make_pair(root, 0));
  std::vector<std::pair<StateId, StateId>> frontier{{p, q}};
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    auto [a, b] = frontier[i];
    const std::size_t k = key(a, b);
    for (MealyMachine::InputId x = 0; x < m.num_inputs(); ++x) {
      const auto& sa = m.step(a, x);
      const auto& sb = m.step(b, x);
      if (sa.output != sb.output) {
        InWord w{x};
        for (std::size_t c = k; c != root; c = parent.at(c).first) w.push_back(parent.at(c).second);
        std::reverse(w.begin(), w.end());
        return w;
      }
      const std::size_t nk = key(sa.next, sb.next);
      if (parent.emplace(nk, std::make_pair(k, x)).second) frontier.emplace_back(sa.next, sb.next);
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<InWord> characterization_set(const MealyMachine& m) {
  auto outputs_from = [&m](StateId q, const InWord& w) {
    std::vector<MealyMachine::OutputId> out;
    for (auto x : w) {
      const auto& s = m.step(q, x);
      out.push_back(s.output);
      q = s.next;
    }
    return out;
  };
  std::set<InWord> w;
  for (StateId p = 0; p < m.num_states(); ++p)
    for (StateId q = p + 1; q < m.num_states(); ++q) {
      const bool separated = std::any_of(w.begin(), w.end(), [&](const InWord& cand) {
        return outputs_from(p, cand) != outputs_from(q, cand);
      });
      if (separated) continue;
      if (auto s = separate(m, p, q)) w.insert(*s);
    }
  if (w.empty()) w.insert(InWord{});
  return {w.begin(), w.end()};
}

// ---------------------------------------------------------------------------
// Oracles

namespace {

Word decode(const MealyMachine& m, const InWord& w) {
  Word out;
  out.reserve(w.size());
  for (auto i : w) out.push_back(m.inputs()[i]);
  return out;
}

}  // namespace

std::optional<Word> WMethodOracle::find_counterexample(const MealyMachine& hyp, QueryRunner& runner) {
  const std::size_t k = hyp.num_inputs();
  const auto acc = access_sequences(hyp);
  const auto wset = characterization_set(hyp);

  // Middle words of length 0..extra_states, shortest first.
  std::vector<InWord> middles{InWord{}};
  for (std::size_t len = 1, from = 0; len <= cfg_.extra_states; ++len) {
    const std::size_t to = middles.size();
    for (std::size_t i = from; i < to; ++i)
      for (MealyMachine::InputId a = 0; a < k; ++a) {
        auto w = middles[i];
        w.push_back(a);
        middles.push_back(std::move(w));
      }
    from = to;
  }

  auto check = [&](const InWord& w) -> std::optional<Word> {
    if (w.empty()) return std::nullopt;
    Word word = decode(hyp, w);
    Word expected;
    for (auto o : hyp.run(std::span<const MealyMachine::InputId>(w))) expected.push_back(hyp.outputs()[o]);
    if (runner.run(word) != expected) return word;
    return std::nullopt;
  };

  // Transition cover: every access sequence extended by every input.
  for (const auto& p : acc)
    for (MealyMachine::InputId a = 0; a < k; ++a)
      for (const auto& mid : middles)
        for (const auto& w : wset) {
          InWord t = p;
          t.push_back(a);
          t.insert(t.end(), mid.begin(), mid.end());
          t.insert(t.end(), w.begin(), w.end());
          if (auto cex = check(t)) return cex;
        }

  std::mt19937_64 rng(cfg_.rng_seed + round_++);
  std::uniform_int_distribution<std::size_t> len_dist(1, std::max<std::size_t>(1, cfg_.max_word_len));
  std::uniform_int_distribution<MealyMachine::InputId> sym_dist(0, static_cast<MealyMachine::InputId>(k - 1));
  for (std::size_t r = 0; r < cfg_.random_words; ++r) {
    InWord t(len_dist(rng));
    for (auto& x : t) x = sym_dist(rng);
    if (auto cex = check(t)) return cex;
  }
  return std::nullopt;
}

std::optional<Word> PerfectOracle::find_counterexample(const MealyMachine& hyp, QueryRunner& runner) {
  auto w = distinguishing_word(target_, hyp);
  if (w) runner.run(*w);  // the counterexample is an executed trace
  return w;
}

// ---------------------------------------------------------------------------
// Teacher

Teacher::Teacher(SulSession& sul, std::unique_ptr<EquivalenceOracle> oracle, bool use_cache)
    : runner_(sul, use_cache), oracle_(std::move(oracle)) {}

Teacher::Teacher(SulSession& sul, EqConfig cfg, bool use_cache)
    : Teacher(sul, std::make_unique<WMethodOracle>(cfg), use_cache) {}

Word Teacher::output_query(const Word& word) {
  const auto before = runner_.executions();
  Word out = runner_.run(word);
  mm_queries_ += runner_.executions() - before;
  return out;
}

std::optional<Word> Teacher::equivalence_query(const MealyMachine& hypothesis) {
  ++eq_queries_;
  return oracle_->find_counterexample(hypothesis, runner_);
}

TeacherStats Teacher::stats() const {
  return {mm_queries_, eq_queries_, runner_.experiments(), runner_.cache_hits()};
}

}  // namespace midlearn

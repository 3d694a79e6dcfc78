#include "midlearn/learner.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <stdexcept>

namespace midlearn {

ObservationTable::ObservationTable(std::vector<Symbol> inputs) : inputs_(std::move(inputs)) {
  if (inputs_.empty()) throw MalformedQuery("learning requires a non-empty input alphabet");
  short_.push_back({});
  for (MealyMachine::InputId a = 0; a < inputs_.size(); ++a) suffixes_.push_back({a});
}

std::vector<ObservationTable::InWord> ObservationTable::extensions() const {
  std::set<InWord> shorts(short_.begin(), short_.end());
  std::vector<InWord> ext;
  for (const auto& s : short_)
    for (MealyMachine::InputId a = 0; a < inputs_.size(); ++a) {
      InWord w = s;
      w.push_back(a);
      if (!shorts.contains(w)) ext.push_back(std::move(w));
    }
  std::sort(ext.begin(), ext.end());
  ext.erase(std::unique(ext.begin(), ext.end()), ext.end());
  return ext;
}

std::uint32_t ObservationTable::intern(const Symbol& s) {
  for (std::size_t i = 0; i < out_symbols_.size(); ++i)
    if (out_symbols_[i] == s) return static_cast<std::uint32_t>(i);
  out_symbols_.push_back(s);
  return static_cast<std::uint32_t>(out_symbols_.size() - 1);
}

void ObservationTable::fill(Teacher& teacher) {
  std::vector<InWord> prefixes = short_;
  auto ext = extensions();
  prefixes.insert(prefixes.end(), ext.begin(), ext.end());
  for (const auto& p : prefixes) {
    Row& r = rows_[p];
    for (std::size_t c = r.size(); c < suffixes_.size(); ++c) {
      Word query;
      for (auto x : p) query.push_back(inputs_[x]);
      for (auto x : suffixes_[c]) query.push_back(inputs_[x]);
      Word answer = teacher.output_query(query);
      if (answer.size() != query.size())
        throw TransportError("output word length does not match query length");
      std::vector<std::uint32_t> cell;
      for (std::size_t i = p.size(); i < answer.size(); ++i) cell.push_back(intern(answer[i]));
      r.push_back(std::move(cell));
    }
  }
}

const ObservationTable::Row& ObservationTable::row(const InWord& prefix) const {
  auto it = rows_.find(prefix);
  if (it == rows_.end() || it->second.size() != suffixes_.size())
    throw std::logic_error("observation table row queried before it was filled");
  return it->second;
}

std::optional<ObservationTable::InWord> ObservationTable::find_unclosed() const {
  std::set<Row> short_rows;
  for (const auto& s : short_) short_rows.insert(row(s));
  for (const auto& e : extensions())  // sorted lexicographically
    if (!short_rows.contains(row(e))) return e;
  return std::nullopt;
}

void ObservationTable::promote(const InWord& extension) {
  if (std::find(short_.begin(), short_.end(), extension) != short_.end()) return;
  short_.push_back(extension);
}

std::size_t ObservationTable::add_suffixes_of(const InWord& word) {
  std::set<InWord> present(suffixes_.begin(), suffixes_.end());
  std::size_t added = 0;
  for (std::size_t i = word.size(); i-- > 0;) {
    InWord suffix(word.begin() + static_cast<std::ptrdiff_t>(i), word.end());
    if (present.insert(suffix).second) {
      suffixes_.push_back(std::move(suffix));
      ++added;
    }
  }
  return added;
}

bool ObservationTable::contains_prefix(const InWord& w) const { return rows_.contains(w); }

MealyMachine ObservationTable::conjecture(const std::vector<Symbol>& outputs) const {
  // One state per distinct short-prefix row, in the order prefixes were added.
  std::map<Row, StateId> state_of;
  std::vector<const InWord*> rep;
  for (const auto& s : short_) {
    if (state_of.emplace(row(s), static_cast<StateId>(rep.size())).second) rep.push_back(&s);
  }
  std::vector<Symbol> outs = outputs;
  auto out_id = [&outs](const Symbol& sym) {
    auto it = std::find(outs.begin(), outs.end(), sym);
    if (it == outs.end()) {
      outs.push_back(sym);
      return static_cast<MealyMachine::OutputId>(outs.size() - 1);
    }
    return static_cast<MealyMachine::OutputId>(it - outs.begin());
  };
  const std::size_t k = inputs_.size();
  std::vector<MealyMachine::Step> table(rep.size() * k);
  for (std::size_t q = 0; q < rep.size(); ++q)
    for (MealyMachine::InputId a = 0; a < k; ++a) {
      InWord ext = *rep[q];
      ext.push_back(a);
      // Column a is the single-letter suffix a (suffixes_[a]).
      const auto& cell = row(*rep[q])[a];
      auto next = state_of.find(row(ext));
      if (next == state_of.end()) throw std::logic_error("conjecture built from an unclosed table");
      table[q * k + a] = {out_id(out_symbols_[cell.at(0)]), next->second};
    }
  return MealyMachine(inputs_, std::move(outs), rep.size(), state_of.at(row({})), std::move(table));
}

namespace {

void check_against_cache(const MealyMachine& hyp, const TraceCache& cache) {
  for (const auto& [in, out] : cache.traces())
    if (hyp.run(in) != out)
      throw std::logic_error("conjecture disagrees with a cached SUL trace");
}

}  // namespace

MealyLearnResult learn_mealy(Teacher& teacher, const std::vector<Symbol>& inputs, LearnOptions options) {
  const auto start = std::chrono::steady_clock::now();
  ObservationTable table(inputs);
  const auto& outputs = teacher.alphabet().outputs;
  LearnStats stats;

  auto close = [&] {
    for (;;) {
      table.fill(teacher);
      auto unclosed = table.find_unclosed();
      if (!unclosed) return;
      table.promote(*unclosed);
    }
  };

  close();
  std::optional<MealyMachine> hyp;
  for (std::size_t round = 0;; ++round) {
    if (round >= options.max_rounds) throw std::runtime_error("learning did not converge");
    hyp = table.conjecture(outputs);
    if (options.check_consistency) check_against_cache(*hyp, teacher.runner().cache());
    stats.conjecture_sizes.push_back(hyp->num_states());
    auto cex = teacher.equivalence_query(*hyp);
    if (!cex) break;

    const auto cex_ids = hyp->encode(*cex);
    const Word expected = teacher.output_query(*cex);
    // Process the counterexample until the conjecture agrees with it.
    while (hyp->run(*cex) != expected) {
      // Longest prefix of the counterexample already in S or S.I.
      std::size_t cut = 0;
      for (std::size_t i = 1; i <= cex_ids.size(); ++i)
        if (table.contains_prefix(ObservationTable::InWord(cex_ids.begin(), cex_ids.begin() + static_cast<std::ptrdiff_t>(i))))
          cut = i;
      ObservationTable::InWord rest(cex_ids.begin() + static_cast<std::ptrdiff_t>(cut), cex_ids.end());
      std::size_t added = table.add_suffixes_of(rest);
      if (added == 0) added = table.add_suffixes_of(cex_ids);
      if (added == 0) throw std::logic_error("counterexample processing made no progress");
      close();
      hyp = table.conjecture(outputs);
    }
  }

  const auto ts = teacher.stats();
  stats.mm_queries = ts.mm_queries;
  stats.eq_queries = ts.eq_queries;
  stats.experiments = ts.experiments;
  stats.cache_hits = ts.cache_hits;
  stats.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(*hyp), std::move(stats)};
}

IaLearnResult learn_ia(Teacher& teacher, const std::vector<Symbol>& inputs, LearnOptions options) {
  auto [machine, stats] = learn_mealy(teacher, inputs, options);
  auto ia = mealy_to_ia(machine);
  return {std::move(ia), std::move(machine), std::move(stats)};
}

}  // namespace midlearn

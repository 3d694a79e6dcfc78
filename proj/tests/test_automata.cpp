#include <gtest/gtest.h>

#include "midlearn/casestudies.hpp"
#include "support.hpp"

using namespace midlearn;
using testsupport::random_mealy;

namespace {

InterfaceAutomaton two_state() {
  ActionSignature sig({"w"}, {"r"});
  return InterfaceAutomaton(sig, 2, 0, {{0, 0, 1}});
}

// Expected action labels for an input word, derived from the simulator:
// each accepted input is followed by its output action unless quiescent.
struct Expected {
  std::vector<std::string> labels;
  std::optional<std::size_t> refused_at;  // index into `labels`
  bool back_to_rest = false;
};

Expected simulate(const PortKind& kind, const Word& inputs) {
  PortSimulator sim(kind);
  sim.reset();
  Expected e;
  for (const auto& i : inputs) {
    auto o = sim.step(i);
    if (o == kRefused) {
      e.refused_at = e.labels.size();
      return e;
    }
    e.labels.push_back("?" + i);
    if (o != kQuiescence) e.labels.push_back("!" + o);
  }
  e.back_to_rest = sim.buffer().empty() && !sim.reader_blocked() && !sim.writer_blocked();
  return e;
}

}  // namespace

TEST(ActionSignature, RejectsOverlapAndBadNames) {
  EXPECT_THROW(ActionSignature({"a"}, {"a"}), InvalidAutomaton);
  EXPECT_THROW(ActionSignature({""}, {"b"}), InvalidAutomaton);
  EXPECT_THROW(ActionSignature({"a b"}, {}), InvalidAutomaton);
  EXPECT_THROW(ActionSignature({}, {}), InvalidAutomaton);
  ActionSignature s({"a"}, {"b"});
  EXPECT_EQ(s.label(0), "?a");
  EXPECT_EQ(s.label(1), "!b");
  EXPECT_THROW(s.name(2), MalformedQuery);
}

TEST(InterfaceAutomaton, ConstructionValidatesEndpointsAndLabels) {
  ActionSignature sig({"w"}, {"r"});
  EXPECT_THROW(InterfaceAutomaton(sig, 0, 0, {}), InvalidAutomaton);
  EXPECT_THROW(InterfaceAutomaton(sig, 2, 2, {}), InvalidAutomaton);
  EXPECT_THROW(InterfaceAutomaton(sig, 2, 0, {{0, 0, 5}}), InvalidAutomaton);
  EXPECT_THROW(InterfaceAutomaton(sig, 2, 0, {{0, 7, 1}}), InvalidAutomaton);
}

TEST(InterfaceAutomaton, NextStates) {
  auto a = two_state();
  EXPECT_EQ(a.next_states(0, "w"), std::vector<StateId>{1});
  EXPECT_TRUE(a.next_states(1, "w").empty());
  EXPECT_THROW(a.next_states(0, "zz"), MalformedQuery);
  EXPECT_THROW(a.next_states(9, 0), MalformedQuery);
}

TEST(InterfaceAutomaton, ObservableOutAndQuiescence) {
  ActionSignature sig({"w"}, {"rok"});
  InterfaceAutomaton a(sig, 2, 0, {{0, 0, 1}, {1, 1, 0}});
  EXPECT_TRUE(a.observable_out(0).empty());
  EXPECT_TRUE(a.is_quiescent(0));
  EXPECT_EQ(a.observable_out(1), std::vector<ActionId>{1});
  EXPECT_THROW(a.observable_out(5), MalformedQuery);
}

TEST(InterfaceAutomaton, DeterminismMatchesBruteForce) {
  std::mt19937_64 rng(7);
  ActionSignature sig({"a", "b"}, {"x"});
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<StateId> st(0, 3);
    std::uniform_int_distribution<ActionId> ac(0, 2);
    std::vector<Transition> ts;
    for (int k = 0; k < 6; ++k) ts.push_back({st(rng), ac(rng), st(rng)});
    InterfaceAutomaton a(sig, 4, 0, ts);
    bool det = true;
    for (StateId q = 0; q < 4; ++q)
      for (ActionId x = 0; x < 3; ++x) det = det && a.next_states(q, x).size() <= 1;
    EXPECT_EQ(a.is_deterministic(), det);
  }
}

TEST(InterfaceAutomaton, RunFragmentEmpty) {
  auto a = two_state();
  auto f = a.run_fragment(std::vector<std::string>{});
  EXPECT_TRUE(f.complete());
  EXPECT_EQ(f.states, std::vector<StateId>{0});
}

TEST(InterfaceAutomaton, RunFragmentOnLearnedStandardPort) {
  const PortKind standard{PortVariant::standard};
  auto model = learned_port_model(standard);

  auto e = simulate(standard, {"write", "read"});
  ASSERT_FALSE(e.refused_at);
  auto f = model->run_fragment(e.labels);
  ASSERT_TRUE(f.complete());
  EXPECT_TRUE(e.back_to_rest);
  EXPECT_EQ(f.states.back(), model->initial());

  auto bad = simulate(standard, {"read", "read"});
  ASSERT_TRUE(bad.refused_at);
  std::vector<std::string> labels = bad.labels;
  labels.push_back("?read");
  auto g = model->run_fragment(labels);
  EXPECT_FALSE(g.complete());
  EXPECT_EQ(*g.failed_at, *bad.refused_at);
}

TEST(InterfaceAutomaton, StatesPartitionIntoQuiescentAndEmitting) {
  auto model = learned_port_model({PortVariant::standard});
  std::size_t quiet = 0, emitting = 0;
  for (StateId q = 0; q < model->num_states(); ++q) {
    auto outs = model->observable_out(q);
    if (outs.empty()) {
      ++quiet;
    } else {
      ++emitting;
      // an emitting state waits on nothing: it has no input transitions
      for (const auto& e : model->edges(q)) EXPECT_TRUE(model->signature().is_output(e.action));
    }
  }
  EXPECT_GT(quiet, 0u);
  EXPECT_GT(emitting, 0u);
}

TEST(MealyMachine, ValidatesTable) {
  using S = MealyMachine::Step;
  EXPECT_THROW(MealyMachine({}, {}, 1, 0, {}), InvalidAutomaton);
  EXPECT_THROW(MealyMachine({"a"}, {}, 1, 0, {}), InvalidAutomaton);
  EXPECT_THROW(MealyMachine({"a"}, {}, 1, 0, {S{0, 3}}), InvalidAutomaton);
  MealyMachine m({"a"}, {}, 1, 0, {S{0, 0}});
  EXPECT_EQ(m.outputs().at(m.quiescence()), kQuiescence);
}

TEST(MinimizeMealy, MergesIdenticalRows) {
  using S = MealyMachine::Step;
  MealyMachine m({"a"}, {"x"}, 2, 0, {S{0, 1}, S{0, 0}});
  EXPECT_EQ(minimize_mealy(m).num_states(), 1u);
}

TEST(MinimizeMealy, IdempotentAndMinimal) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto m = random_mealy(rng, 1 + trial % 8, 1 + trial % 4, 2);
    auto min = minimize_mealy(m);
    EXPECT_TRUE(isomorphic(min, minimize_mealy(min)));
    // no two distinct states agree on all words up to |Q|
    for (StateId p = 0; p < min.num_states(); ++p)
      for (StateId q = p + 1; q < min.num_states(); ++q)
        EXPECT_FALSE(testsupport::same_behaviour(min, p, q, min.num_states()));
    // language preserved
    EXPECT_FALSE(distinguishing_word(m, min));
  }
}

TEST(MinimizeMealy, DuplicatedStateMinimizesIdentically) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto m = random_mealy(rng, 8, 3, 2);
    // copy state 0 into a fresh state 8 and redirect half the edges to it
    auto table = m.table();
    const std::size_t k = m.num_inputs();
    for (std::size_t i = 0; i < k; ++i) table.push_back(table[i]);
    for (std::size_t j = 0; j < table.size(); j += 2)
      if (table[j].next == 0) table[j].next = 8;
    MealyMachine dup(m.inputs(), m.outputs(), 9, 0, table);
    EXPECT_TRUE(isomorphic(minimize_mealy(m), minimize_mealy(dup)));
  }
}

TEST(MealyToIa, AllQuiescentSingleState) {
  using S = MealyMachine::Step;
  MealyMachine m({"a", "b"}, {}, 1, 0, {S{0, 0}, S{0, 0}});
  auto ia = mealy_to_ia(m);
  EXPECT_EQ(ia.num_states(), 1u);
  EXPECT_EQ(ia.num_transitions(), 2u);
  EXPECT_TRUE(ia.signature().outputs().empty());
}

TEST(MealyToIa, ExpandsOutputStep) {
  using S = MealyMachine::Step;
  MealyMachine m({"i"}, {"o"}, 1, 0, {S{0, 0}});
  auto ia = mealy_to_ia(m);
  ASSERT_EQ(ia.num_states(), 2u);
  auto mid = ia.step(0, ia.signature().input_id("i"));
  ASSERT_TRUE(mid);
  EXPECT_EQ(ia.step(*mid, ia.signature().output_id("o")), std::optional<StateId>(0));
}

TEST(MealyToIa, RefusedInputsHaveNoTransition) {
  using S = MealyMachine::Step;
  // output 0 = refused
  MealyMachine m({"i", "j"}, {std::string(kRefused)}, 1, 0, {S{0, 0}, S{1, 0}});
  auto ia = mealy_to_ia(m);
  EXPECT_FALSE(ia.step(0, ia.signature().input_id("i")));
  EXPECT_TRUE(ia.step(0, ia.signature().input_id("j")));
}

TEST(MealyToIa, PreservesBehaviour) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto m = random_mealy(rng, 1 + trial % 6, 2, 2);
    auto ia = mealy_to_ia(m);
    EXPECT_TRUE(ia.is_deterministic());
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(m.num_inputs() - 1));
    for (int w = 0; w < 20; ++w) {
      Word word;
      for (int l = 0; l < 8; ++l) word.push_back(m.inputs()[pick(rng)]);
      auto outs = m.run(word);
      std::vector<std::string> labels;
      for (std::size_t i = 0; i < word.size(); ++i) {
        labels.push_back("?" + word[i]);
        if (outs[i] != kQuiescence) labels.push_back("!" + outs[i]);
      }
      EXPECT_TRUE(ia.run_fragment(labels).complete());
    }
  }
}

TEST(Isomorphism, IdentityAndPerturbation) {
  auto model = learned_port_model({PortVariant::buffered_strict, 3});
  auto id = isomorphic(*model, *model);
  ASSERT_TRUE(id);
  for (StateId q = 0; q < model->num_states(); ++q) EXPECT_EQ((*id)[q], q);

  auto ts = model->transitions();
  ts[0].to = (ts[0].to + 1) % model->num_states();
  InterfaceAutomaton broken(model->signature(), model->num_states(), model->initial(), ts);
  if (broken.is_deterministic()) EXPECT_FALSE(isomorphic(*model, broken));

  InterfaceAutomaton other(ActionSignature({"x"}, {}), 1, 0, {});
  EXPECT_THROW(isomorphic(*model, other), IncomparableAutomata);
}

TEST(Isomorphism, EquivalenceRelationOnRandomMachines) {
  std::mt19937_64 rng(23);
  std::vector<InterfaceAutomaton> pool;
  for (int i = 0; i < 12; ++i) pool.push_back(mealy_to_ia(random_mealy(rng, 1 + i % 3, 2, 1)));
  // Relabel states by reversing ids to get non-identical isomorphic copies.
  for (int i = 0; i < 6; ++i) {
    const auto& a = pool[i];
    const auto n = static_cast<StateId>(a.num_states());
    std::vector<Transition> ts;
    for (auto t : a.transitions()) ts.push_back({n - 1 - t.from, t.action, n - 1 - t.to});
    pool.emplace_back(a.signature(), n, n - 1 - a.initial(), ts);
  }
  auto iso = [&](std::size_t i, std::size_t j) {
    if (!(pool[i].signature() == pool[j].signature())) return false;
    return isomorphic(pool[i], pool[j]).has_value();
  };
  for (std::size_t i = 0; i < pool.size(); ++i) {
    EXPECT_TRUE(iso(i, i));
    for (std::size_t j = 0; j < pool.size(); ++j) {
      EXPECT_EQ(iso(i, j), iso(j, i));
      for (std::size_t k = 0; k < pool.size(); ++k)
        if (iso(i, j) && iso(j, k)) EXPECT_TRUE(iso(i, k));
    }
  }
  for (int i = 0; i < 6; ++i) EXPECT_TRUE(iso(i, 12 + i));
}

TEST(RenameActions, KeepsUnmappedNames) {
  auto a = two_state();
  auto r = rename_actions(a, {{"w", "q1_w"}});
  EXPECT_EQ(r.signature().inputs(), std::vector<Symbol>{"q1_w"});
  EXPECT_EQ(r.signature().outputs(), std::vector<Symbol>{"r"});
}

// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
// if any criterion fails.
#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "midlearn/casestudies.hpp"
#include "midlearn/learner.hpp"
#include "midlearn/remote_sul.hpp"
#include "support.hpp"

using namespace midlearn;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream note;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      note << "[" << what << "] ";
    }
  }
};

std::vector<PortKind> table1_kinds() {
  std::vector<PortKind> v{{PortVariant::standard},
                          {PortVariant::buffered_nonstrict},
                          {PortVariant::buffered_nonstrict, 1, true},
                          {PortVariant::buffered_strict, 3, true}};
  for (unsigned n = 1; n <= 6; ++n) v.push_back({PortVariant::buffered_strict, n});
  return v;
}

std::string label(const PortKind& k) {
  return to_string(k.variant) + (k.variant == PortVariant::buffered_strict ? "/" + std::to_string(k.capacity) : "") +
         (k.nonblocking_read ? "*" : "");
}

IaLearnResult learn(PortKind k, bool cache = true) {
  PortSimulator sim(k);
  Teacher t(sim, EqConfig{}, cache);
  return learn_ia(t, sim.alphabet().inputs);
}

// 1: every case-study verdict
void table2_verdicts(Outcome& o) {
  struct Row {
    std::string name;
    std::function<ProcessNetwork()> build;
    Conclusion want;
  };
  std::vector<Row> rows{
      {"c1 non-strict N=3", [] { return build_case1(case1_params(PortVariant::buffered_nonstrict, 3)); },
       Conclusion::deadlock},
      {"c1 strict N=1", [] { return build_case1(case1_params(PortVariant::buffered_strict, 1)); }, Conclusion::ok},
      {"c1 strict N=6", [] { return build_case1(case1_params(PortVariant::buffered_strict, 6)); }, Conclusion::ok},
  };
  const unsigned c2[][5] = {{100, 100, 100, 1, 0}, {90, 100, 100, 1, 0},  {100, 100, 100, 6, 0}, {90, 100, 100, 6, 0},
                            {200, 200, 200, 6, 0}, {180, 200, 200, 6, 0}, {90, 100, 100, 6, 1}};
  for (const auto& r : c2) {
    const auto p = case2_params(r[0], r[1], r[2], r[3], r[4] != 0);
    std::ostringstream name;
    name << "c2 " << r[0] << (r[4] ? "*" : "") << "/" << r[1] << "/" << r[2] << "/" << r[3];
    rows.push_back({name.str(), [p] { return build_case2(p); },
                    r[0] == r[1] || r[4] ? Conclusion::ok : Conclusion::deadlock});
  }
  for (const auto& row : rows) {
    auto net = row.build();
    auto v = find_deadlock(net);
    o.require(v.conclusion == row.want, row.name + " got " + to_string(v.conclusion));
    if (v.conclusion == Conclusion::deadlock) o.require(replay_witness(net, v.witness), row.name + " witness");
  }
  o.note << rows.size() << " rows";
}

// 2: learned strict-port sizes grow by exactly 2 states and 3 transitions
void strict_growth(Outcome& o) {
  auto standard = learn({PortVariant::standard}).automaton;
  for (unsigned n = 1; n <= 6; ++n) {
    auto a = learn({PortVariant::buffered_strict, n}).automaton;
    o.require(a.num_states() == 2 * n + 2 && a.transitions().size() == 3 * n + 2,
              "N=" + std::to_string(n) + " is " + std::to_string(a.num_states()) + "/" +
                  std::to_string(a.transitions().size()));
    if (n == 1) o.require(isomorphic(a, standard).has_value(), "N=1 vs standard");
  }
  auto ns = learn({PortVariant::buffered_nonstrict}).automaton;
  o.require(ns.num_states() == 4 && ns.transitions().size() == 6, "non-strict 4/6");
}

// 3: random targets recovered by both oracles
void random_targets(Outcome& o) {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<std::size_t> states(1, 8), inputs(2, 4), outputs(1, 3);
  int n = 0;
  for (int trial = 0; trial < 25; ++trial) {
    auto target = testsupport::random_minimal_mealy(rng, states(rng), inputs(rng), outputs(rng));
    {
      MealySession sul(target);
      Teacher t(sul, std::make_unique<PerfectOracle>(target));
      auto r = learn_mealy(t, target.inputs());
      o.require(isomorphic(r.machine, target).has_value(), "perfect #" + std::to_string(trial));
      o.require(r.stats.eq_queries <= target.num_states(), "eq bound #" + std::to_string(trial));
    }
    {
      MealySession sul(target);
      EqConfig cfg;
      cfg.extra_states = 2;
      Teacher t(sul, cfg);
      auto r = learn_mealy(t, target.inputs());
      o.require(isomorphic(r.machine, target).has_value(), "w-method #" + std::to_string(trial));
    }
    ++n;
  }
  o.note << n << " targets";
}

// 4: checker agrees with an independent enumeration
void random_networks(Outcome& o) {
  std::mt19937_64 rng(99);
  int n = 0, dl = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto procs = testsupport::random_network(rng);
    auto oracle = testsupport::enumerate(procs);
    ProcessNetwork net(procs);
    for (auto ord : {SearchOrder::dfs, SearchOrder::bfs, SearchOrder::parallel_bfs}) {
      SearchLimits l;
      l.order = ord;
      auto v = find_deadlock(net, l);
      o.require((v.conclusion == Conclusion::deadlock) == oracle.deadlock,
                "net #" + std::to_string(trial) + " " + to_string(ord));
      if (v.conclusion == Conclusion::ok)
        o.require(v.states_explored == oracle.reachable, "count #" + std::to_string(trial));
    }
    ++n;
    dl += oracle.deadlock;
  }
  o.note << n << " networks, " << dl << " with deadlock";
}

// 5: the cache changes cost, never the result
void cache_transparency(Outcome& o) {
  for (const auto& k : table1_kinds()) {
    auto with = learn(k, true), without = learn(k, false);
    o.require(isomorphic(with.automaton, without.automaton).has_value(), label(k) + " model");
    o.require(without.stats.experiments > with.stats.experiments, label(k) + " experiments");
  }
}

// 6: learning over the wire equals learning in-process
void remote_loopback(Outcome& o) {
  for (const auto& k : {PortKind{PortVariant::standard}, PortKind{PortVariant::buffered_strict, 3, true},
                        PortKind{PortVariant::buffered_nonstrict, 1, true}}) {
    PortSimulator served(k);
    SulServer server(served, Endpoint{"127.0.0.1", 0});
    std::thread th([&] { server.run(1); });
    IaLearnResult remote;
    try {
      auto session = connect(Endpoint{"127.0.0.1", server.port()});
      Teacher t(*session, EqConfig{});
      remote = learn_ia(t, session->alphabet().inputs);
    } catch (const std::exception& e) {
      o.require(false, label(k) + " " + e.what());
    }
    server.stop();
    th.join();
    o.require(isomorphic(remote.automaton, learn(k).automaton).has_value(), label(k));
  }
}

// 7: actual vs expected interrupt semantics
void interrupt_models(Outcome& o) {
  auto s = interrupt_scenario();
  o.require(!early_unblock_transition(s.actual.automaton), "actual has early unblock");
  const auto& e = s.expected.automaton;
  const auto t = early_unblock_transition(e);
  o.require(t.has_value(), "expected lacks early unblock");
  o.require(!isomorphic(s.actual.automaton, e), "models are isomorphic");
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pick(0, 1), len(0, 14);
  int agree = 0;
  for (int i = 0; i < 1000; ++i) {
    Word w;
    for (int k = len(rng); k > 0; --k) w.push_back(pick(rng) ? "write" : "read");
    agree += s.actual.machine.run(w) == s.expected.machine.run(w);
  }
  o.require(agree == 1000, "disagree on interrupt-free words");
  if (t) o.note << "early unblock q" << t->from << " -?" << e.signature().name(t->action) << "-> q" << t->to << "; ";
}

// 8: the deadlocking configuration is found after a tiny fraction of the
// state space the correct configuration needs
void early_deadlock(Outcome& o) {
  auto bad = find_deadlock(build_case1(case1_params(PortVariant::buffered_nonstrict, 3)));
  for (unsigned n : {1u, 6u}) {
    auto good = find_deadlock(build_case1(case1_params(PortVariant::buffered_strict, n)));
    const double ratio = double(bad.states_explored) / double(good.states_explored);
    o.require(bad.conclusion == Conclusion::deadlock && ratio < 0.01,
              "strict N=" + std::to_string(n) + " ratio " + std::to_string(ratio));
    o.note << bad.states_explored << "/" << good.states_explored << " ";
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, void (*)(Outcome&)>> criteria{
      {"case-study verdicts", table2_verdicts},
      {"strict port growth", strict_growth},
      {"random target recovery", random_targets},
      {"checker vs enumeration", random_networks},
      {"cache transparency", cache_transparency},
      {"remote loopback", remote_loopback},
      {"interrupt semantics", interrupt_models},
      {"early deadlock detection", early_deadlock},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << " (" << o.note.str()
              << (o.note.str().empty() || o.note.str().back() == ' ' ? "" : "; ") << std::fixed << std::setprecision(2) << secs << "s)" << std::endl;
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}

#include "midlearn/casestudies.hpp"

#include <map>
#include <mutex>

namespace midlearn {

namespace {

// Builds a code-model automaton one control location at a time.
class CodeBuilder {
 public:
  StateId add(std::string name) {
    names_.push_back(std::move(name));
    return static_cast<StateId>(names_.size() - 1);
  }
  void local(StateId from, const std::string& action, StateId to) { edge(from, action, to, Kind::local); }
  void send(StateId from, const std::string& action, StateId to) { edge(from, action, to, Kind::out); }
  void recv(StateId from, const std::string& action, StateId to) { edge(from, action, to, Kind::in); }

  const std::set<Symbol>& locals() const { return locals_; }

  ModelPtr build() const {
    std::vector<Symbol> ins, outs;
    for (const auto& e : edges_) {
      auto& group = e.kind == Kind::in ? ins : outs;
      if (std::find(group.begin(), group.end(), e.action) == group.end()) group.push_back(e.action);
    }
    ActionSignature sig(ins, outs);
    std::vector<Transition> ts;
    for (const auto& e : edges_) ts.push_back({e.from, *sig.find(e.action), e.to});
    return std::make_shared<const InterfaceAutomaton>(sig, names_.size(), 0, std::move(ts), names_);
  }

 private:
  enum class Kind { in, out, local };
  struct E {
    StateId from;
    std::string action;
    StateId to;
    Kind kind;
  };
  void edge(StateId from, const std::string& action, StateId to, Kind k) {
    edges_.push_back({from, action, to, k});
    if (k == Kind::local) locals_.insert(action);
  }

  std::vector<std::string> names_;
  std::vector<E> edges_;
  std::set<Symbol> locals_;
};

ProcessSpec port_process(const std::string& name, const ModelPtr& model, const std::string& prefix) {
  ProcessSpec s;
  s.name = name;
  s.automaton = model;
  for (const auto* group : {&model->signature().inputs(), &model->signature().outputs()})
    for (const auto& a : *group) s.rename.emplace_back(a, prefix + a);
  // A port is at rest whenever it has nothing left to emit.
  for (StateId q = 0; q < model->num_states(); ++q)
    if (model->is_quiescent(q)) s.terminal.push_back(q);
  return s;
}

ProcessSpec code_process(const std::string& name, const CodeBuilder& b, std::vector<StateId> terminal) {
  ProcessSpec s;
  s.name = name;
  s.automaton = b.build();
  s.local_actions = b.locals();
  s.terminal = std::move(terminal);
  return s;
}

void require_inputs(const ModelPtr& m, std::initializer_list<std::string_view> names, const char* what) {
  if (!m) throw Error(std::string(what) + ": missing port model");
  for (auto n : names)
    if (!m->signature().find(n))
      throw CompositionError(std::string(what) + ": port model lacks action '" + std::string(n) + "'");
}

}  // namespace

void Case1Params::validate() const {
  if (n < 1) throw Error("case study 1 needs N >= 1");
  require_inputs(port_model, {"write", "read", "rok"}, "case study 1 data channel");
  require_inputs(ack_model ? ack_model : port_model, {"write", "read", "rok"}, "case study 1 ack channel");
}

void Case2Params::validate() const {
  if (n1 < 1 || n2 < 1 || n3 < 1) throw Error("case study 2 loop bounds must be >= 1");
  if (size < 1) throw Error("case study 2 buffer size must be >= 1");
  if (nonblocking_first)
    require_inputs(port1_model, {"write", "read_nb", "rok", "nodata"}, "case study 2 first channel");
  else
    require_inputs(port1_model, {"write", "read", "rok"}, "case study 2 first channel");
  require_inputs(port2_model, {"write", "read", "rok"}, "case study 2 second channel");
}

ModelPtr learned_port_model(const PortKind& kind) {
  static std::mutex mu;
  static std::map<std::string, ModelPtr> memo;
  const auto key = kind.describe();
  {
    std::lock_guard lock(mu);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
  }
  PortSimulator sim(kind);
  Teacher teacher(sim, EqConfig{});
  auto model = std::make_shared<const InterfaceAutomaton>(learn_ia(teacher, sim.alphabet().inputs).automaton);
  std::lock_guard lock(mu);
  return memo.emplace(key, std::move(model)).first->second;
}

Case1Params case1_params(PortVariant variant, unsigned n) {
  PortKind k{variant, variant == PortVariant::buffered_strict ? n : 1};
  Case1Params p;
  p.n = n;
  p.port_model = learned_port_model(k);
  return p;
}

Case2Params case2_params(unsigned n1, unsigned n2, unsigned n3, unsigned size, bool nonblocking_first) {
  Case2Params p;
  p.n1 = n1;
  p.n2 = n2;
  p.n3 = n3;
  p.size = size;
  p.nonblocking_first = nonblocking_first;
  p.port1_model = learned_port_model({PortVariant::buffered_strict, size, nonblocking_first});
  p.port2_model = learned_port_model({PortVariant::buffered_strict, size});
  return p;
}

ProcessNetwork build_case1(const Case1Params& p) {
  p.validate();
  const std::string idx = std::to_string(p.n);

  CodeBuilder planner;
  {
    auto init = planner.add("init");
    auto connect = planner.add("connect");
    std::vector<StateId> write;
    for (unsigned i = 1; i <= p.n; ++i) write.push_back(planner.add("write_" + std::to_string(i)));
    auto read = planner.add("read_ack");
    auto await = planner.add("await_ack");
    planner.local(init, "planner_init_ports", connect);
    planner.local(connect, "planner_connect", write[0]);
    for (unsigned i = 0; i < p.n; ++i) planner.send(write[i], "q1_write", i + 1 < p.n ? write[i + 1] : read);
    planner.send(read, "q2_read", await);
    planner.recv(await, "q2_rok", write[0]);
  }

  CodeBuilder controller;
  {
    auto init = controller.add("init");
    auto strict = controller.add("set_strict");
    auto connect = controller.add("connect");
    std::vector<StateId> req, wait;
    for (unsigned i = 1; i <= p.n; ++i) {
      req.push_back(controller.add("read_" + std::to_string(i)));
      wait.push_back(controller.add("await_" + std::to_string(i)));
    }
    auto create = controller.add("create_ack");
    auto write = controller.add("write_ack");
    controller.local(init, "controller_init_ports", strict);
    controller.local(strict, "controller_set_strict", connect);
    controller.local(connect, "controller_connect", req[0]);
    for (unsigned i = 0; i < p.n; ++i) {
      controller.send(req[i], "q1_read", wait[i]);
      controller.recv(wait[i], "q1_rok", i + 1 < p.n ? req[i + 1] : create);
    }
    controller.local(create, "controller_create", write);
    controller.send(write, "q2_write", req[0]);
  }

  std::vector<ProcessSpec> procs;
  procs.push_back(code_process("Planner", planner, {}));
  procs.push_back(code_process("Controller", controller, {}));
  procs.push_back(port_process("Q1", p.port_model, "q1_"));
  procs.push_back(port_process("Q2", p.ack_model ? p.ack_model : p.port_model, "q2_"));
  return ProcessNetwork(std::move(procs));
}

namespace {

CodeBuilder producer(const std::string& tag, unsigned n, std::vector<StateId>& terminal, bool send_is_end) {
  CodeBuilder b;
  auto init = b.add("init");
  auto connect = b.add("connect");
  std::vector<StateId> job, send;
  for (unsigned i = 1; i <= n; ++i) {
    job.push_back(b.add("job_" + std::to_string(i)));
    send.push_back(b.add("send_" + std::to_string(i)));
  }
  auto end = b.add("end");
  b.local(init, tag + "_init_port", connect);
  b.local(connect, tag + "_connect", job[0]);
  const std::string chan = tag == "p1" ? "q1_write" : "q2_write";
  for (unsigned i = 0; i < n; ++i) {
    b.local(job[i], tag + "_job", send[i]);
    b.send(send[i], chan, i + 1 < n ? job[i + 1] : end);
  }
  terminal = {end};
  if (send_is_end) terminal.insert(terminal.end(), send.begin(), send.end());
  return b;
}

}  // namespace

ProcessNetwork build_case2(const Case2Params& p) {
  p.validate();
  std::vector<StateId> t1, t2;
  auto p1 = producer("p1", p.n1, t1, p.send_is_valid_end);
  auto p2 = producer("p2", p.n2, t2, p.send_is_valid_end);

  CodeBuilder p3;
  StateId end;
  {
    auto init = p3.add("init");
    auto strict = p3.add("set_strict");
    std::vector<StateId> rq1, w1, rq2, w2, job;
    for (unsigned i = 1; i <= p.n3; ++i) {
      const auto s = std::to_string(i);
      rq1.push_back(p3.add("read1_" + s));
      w1.push_back(p3.add("await1_" + s));
      rq2.push_back(p3.add("read2_" + s));
      w2.push_back(p3.add("await2_" + s));
      job.push_back(p3.add("job_" + s));
    }
    end = p3.add("end");
    p3.local(init, "p3_init_ports", strict);
    p3.local(strict, "p3_set_strict", rq1[0]);
    for (unsigned i = 0; i < p.n3; ++i) {
      p3.send(rq1[i], p.nonblocking_first ? "q1_read_nb" : "q1_read", w1[i]);
      p3.recv(w1[i], "q1_rok", rq2[i]);
      if (p.nonblocking_first) p3.recv(w1[i], "q1_nodata", rq2[i]);
      p3.send(rq2[i], "q2_read", w2[i]);
      p3.recv(w2[i], "q2_rok", job[i]);
      p3.local(job[i], "p3_job", i + 1 < p.n3 ? rq1[i + 1] : end);
    }
  }

  std::vector<ProcessSpec> procs;
  procs.push_back(code_process("P1", p1, t1));
  procs.push_back(code_process("P2", p2, t2));
  procs.push_back(code_process("P3", p3, {end}));
  procs.push_back(port_process("Q1", p.port1_model, "q1_"));
  procs.push_back(port_process("Q2", p.port2_model, "q2_"));
  return ProcessNetwork(std::move(procs));
}

Case2Params compress_case2(const Case2Params& p, unsigned floor) {
  Case2Params c = p;
  const unsigned m = std::min({p.n1, p.n2, p.n3});
  if (floor < 1 || m <= floor) return c;
  const unsigned d = m - floor;
  c.n1 -= d;
  c.n2 -= d;
  c.n3 -= d;
  return c;
}

InterruptScenario interrupt_scenario(EqConfig cfg) {
  auto learn = [&cfg](InterruptSemantics sem) {
    PortSimulator sim(PortKind{PortVariant::standard, 1, false, true, sem});
    Teacher teacher(sim, cfg);
    return learn_ia(teacher, sim.alphabet().inputs);
  };
  return {learn(InterruptSemantics::actual), learn(InterruptSemantics::expected)};
}

std::optional<Transition> early_unblock_transition(const InterfaceAutomaton& a) {
  const auto& sig = a.signature();
  auto write = sig.find("write");
  auto intr = sig.find("intr");
  auto done = sig.find("intr_done");
  if (!write || !intr || !done) return std::nullopt;
  auto blocked = a.step(a.initial(), *write);
  if (!blocked) return std::nullopt;
  auto target = a.step(*blocked, *intr);
  if (!target) return std::nullopt;
  auto outs = a.observable_out(*target);
  if (std::find(outs.begin(), outs.end(), *done) == outs.end()) return std::nullopt;
  return Transition{*blocked, *intr, *target};
}

}  // namespace midlearn

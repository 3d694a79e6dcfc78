#include "midlearn/cli.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "midlearn/remote_sul.hpp"

namespace midlearn {

namespace {

struct Key {
  std::string name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

unsigned long long to_number(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    auto n = std::stoull(v, &used);
    if (used == v.size() && v[0] != '-') return n;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'");
}

std::string fmt_double(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

template <typename T>
Key num_key(std::string name, T RunConfig::*field) {
  return {name, [field](const RunConfig& c) { return std::to_string(c.*field); },
          [field, name](RunConfig& c, const std::string& v) { c.*field = static_cast<T>(to_number(name, v)); }};
}

template <typename T>
Key eq_key(std::string name, T EqConfig::*field) {
  return {name, [field](const RunConfig& c) { return std::to_string(c.eq.*field); },
          [field, name](RunConfig& c, const std::string& v) { c.eq.*field = static_cast<T>(to_number(name, v)); }};
}

Key bool_key(std::string name, bool RunConfig::*field) {
  return {name, [field](const RunConfig& c) { return std::string(c.*field ? "true" : "false"); },
          [field, name](RunConfig& c, const std::string& v) { c.*field = to_bool(name, v); }};
}

Key str_key(std::string name, std::string RunConfig::*field) {
  return {name, [field](const RunConfig& c) { return c.*field; },
          [field](RunConfig& c, const std::string& v) { c.*field = v; }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      str_key("kind", &RunConfig::kind),
      num_key("n", &RunConfig::n),
      bool_key("read_nb", &RunConfig::read_nb),
      bool_key("interrupt", &RunConfig::interrupt),
      str_key("interrupt_semantics", &RunConfig::interrupt_semantics),
      eq_key("extra_states", &EqConfig::extra_states),
      eq_key("random_words", &EqConfig::random_words),
      eq_key("max_word_len", &EqConfig::max_word_len),
      eq_key("seed", &EqConfig::rng_seed),
      bool_key("cache", &RunConfig::cache),
      str_key("remote", &RunConfig::remote),
      str_key("case", &RunConfig::case_study),
      str_key("port", &RunConfig::port),
      num_key("n1", &RunConfig::n1),
      num_key("n2", &RunConfig::n2),
      num_key("n3", &RunConfig::n3),
      num_key("size", &RunConfig::size),
      bool_key("nonblocking_first", &RunConfig::nonblocking_first),
      bool_key("send_end_valid", &RunConfig::send_end_valid),
      num_key("compress", &RunConfig::compress),
      str_key("order", &RunConfig::order),
      num_key("max_states", &RunConfig::max_states),
      {"max_time", [](const RunConfig& c) { return fmt_double(c.max_time); },
       [](RunConfig& c, const std::string& v) {
         try {
           std::size_t used = 0;
           c.max_time = std::stod(v, &used);
           if (used == v.size()) return;
         } catch (const std::exception&) {
         }
         throw ConfigError("config key 'max_time': expected seconds, got '" + v + "'");
       }},
      str_key("listen", &RunConfig::listen),
      num_key("max_clients", &RunConfig::max_clients),
      str_key("out", &RunConfig::out),
      bool_key("timings", &RunConfig::timings),
  };
  return k;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig

bool RunConfig::operator==(const RunConfig& o) const {
  for (const auto& k : keys())
    if (k.get(*this) != k.get(o)) return false;
  return true;
}

void RunConfig::validate() const {
  try {
    port_kind().validate();
    parse_port_variant(port);
    parse_search_order(order);
    if (!remote.empty()) parse_endpoint(remote);
    parse_endpoint(listen);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (n < 1) throw ConfigError("n must be at least 1");
  if (case_study != "case1" && case_study != "case2") throw ConfigError("case must be case1 or case2");
  if (n1 < 1 || n2 < 1 || n3 < 1 || size < 1) throw ConfigError("n1, n2, n3 and size must be at least 1");
  if (max_states < 1 || !(max_time > 0)) throw ConfigError("search limits must be positive");
}

PortKind RunConfig::port_kind() const {
  PortKind k;
  try {
    k.variant = parse_port_variant(kind);
    k.interrupt_semantics = parse_interrupt_semantics(interrupt_semantics);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  k.capacity = k.variant == PortVariant::buffered_strict ? n : 1;
  k.nonblocking_read = read_nb;
  k.interrupt = interrupt;
  return k;
}

SearchLimits RunConfig::limits() const {
  SearchLimits l;
  l.max_states = max_states;
  l.max_time = std::chrono::duration<double>(max_time);
  l.order = parse_search_order(order);
  return l;
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    auto key = trim(std::string_view(t).substr(0, eq));
    auto value = trim(std::string_view(t).substr(eq + 1));
    auto it = std::find_if(keys().begin(), keys().end(), [&](const Key& k) { return k.name == key; });
    if (it == keys().end()) throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->set(base, value);
  }
  return base;
}

std::string to_config_text(const RunConfig& cfg) {
  std::string s;
  for (const auto& k : keys()) s += k.name + "=" + k.get(cfg) + "\n";
  return s;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> v;
  for (const auto& k : keys()) v.push_back(k.name);
  return v;
}

// ---------------------------------------------------------------------------
// Rows

std::vector<std::string> learn_columns(bool timings) {
  std::vector<std::string> c{"Model", "|Q|", "|T|", "#MM", "#EQ", "#Experiments"};
  if (timings) c.push_back("Time(s)");
  return c;
}

std::vector<std::string> learn_row(const std::string& model, const InterfaceAutomaton& a, const LearnStats& s,
                                   bool timings) {
  std::vector<std::string> r{model,
                             std::to_string(a.num_states()),
                             std::to_string(a.num_transitions()),
                             std::to_string(s.mm_queries),
                             std::to_string(s.eq_queries),
                             std::to_string(s.experiments)};
  if (timings) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", s.elapsed_seconds);
    r.push_back(buf);
  }
  return r;
}

int exit_code(Conclusion c) {
  switch (c) {
    case Conclusion::ok: return kExitOk;
    case Conclusion::deadlock: return kExitDeadlock;
    case Conclusion::inconclusive: return kExitInconclusive;
  }
  return kExitUsage;
}

namespace {

std::string model_label(const PortKind& k) {
  std::string s;
  switch (k.variant) {
    case PortVariant::standard: s = "port"; break;
    case PortVariant::buffered_nonstrict: s = "buffered port (non-strict)"; break;
    case PortVariant::buffered_strict: s = "buffered port (strict, N=" + std::to_string(k.capacity) + ")"; break;
  }
  if (k.nonblocking_read) s += "*";
  if (k.interrupt) s += " +intr(" + to_string(k.interrupt_semantics) + ")";
  return s;
}

std::string slug(const PortKind& k) {
  std::string s = to_string(k.variant);
  if (k.variant == PortVariant::buffered_strict) s += "-n" + std::to_string(k.capacity);
  if (k.nonblocking_read) s += "-nb";
  if (k.interrupt) s += "-intr-" + to_string(k.interrupt_semantics);
  return s;
}

struct LearnJob {
  std::string label;
  PortKind kind;
};

IaLearnResult learn_local(const PortKind& kind, const RunConfig& cfg) {
  PortSimulator sim(kind);
  Teacher teacher(sim, cfg.eq, cfg.cache);
  return learn_ia(teacher, sim.alphabet().inputs);
}

std::string fmt_mb(std::size_t bytes) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", static_cast<double>(bytes) / 1e6);
  return buf;
}

std::string fmt_s(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", s);
  return buf;
}

std::vector<std::string> case1_columns(bool timings) {
  std::vector<std::string> c{"Model", "#States", "Memory(MB)"};
  if (timings) c.push_back("Time(s)");
  c.push_back("Conclusion");
  return c;
}

std::vector<std::string> case2_columns(bool timings) {
  std::vector<std::string> c{"N1", "N2", "N3", "Size", "#States"};
  if (timings) c.push_back("Time(s)");
  c.push_back("Memory(MB)");
  c.push_back("Conclusion");
  return c;
}

struct VerifyJob {
  bool case1 = true;
  PortVariant port = PortVariant::buffered_nonstrict;
  unsigned n = 3;
  Case2Params p2;
  unsigned compress = 0;
};

std::string case1_label(PortVariant v, unsigned n) {
  if (v == PortVariant::buffered_strict) return "Buffered Port (strict, N=" + std::to_string(n) + ")";
  if (v == PortVariant::buffered_nonstrict) return "Buffered Port (non-strict)";
  return "Port";
}

struct VerifyOutcome {
  Verdict verdict;
  std::vector<std::string> row;
  std::string witness_text;
  std::string note;
};

VerifyOutcome run_verify(const VerifyJob& job, const SearchLimits& limits, bool timings) {
  VerifyOutcome o;
  if (job.case1) {
    auto net = build_case1(case1_params(job.port, job.n));
    o.verdict = find_deadlock(net, limits);
    o.row = {case1_label(job.port, job.n), std::to_string(o.verdict.states_explored),
             fmt_mb(o.verdict.peak_memory_bytes)};
    if (timings) o.row.push_back(fmt_s(o.verdict.elapsed_seconds));
    if (o.verdict.conclusion == Conclusion::deadlock) {
      std::ostringstream ws;
      for (const auto& s : o.verdict.witness)
        ws << s.action << " [" << net.spec(s.emitter).name << "] -> " << format_state(net, s.state) << "\n";
      o.witness_text = ws.str();
    }
  } else {
    auto params = job.compress ? compress_case2(job.p2, job.compress) : job.p2;
    if (job.compress && params.n1 != job.p2.n1)
      o.note = "bounds compressed to (" + std::to_string(params.n1) + ", " + std::to_string(params.n2) + ", " +
               std::to_string(params.n3) + ")";
    auto net = build_case2(params);
    o.verdict = find_deadlock(net, limits);
    o.row = {std::to_string(job.p2.n1) + (job.p2.nonblocking_first ? "*" : ""), std::to_string(job.p2.n2),
             std::to_string(job.p2.n3), std::to_string(job.p2.size), std::to_string(o.verdict.states_explored)};
    if (timings) o.row.push_back(fmt_s(o.verdict.elapsed_seconds));
    o.row.push_back(fmt_mb(o.verdict.peak_memory_bytes));
    if (o.verdict.conclusion == Conclusion::deadlock) {
      std::ostringstream ws;
      for (const auto& s : o.verdict.witness)
        ws << s.action << " [" << net.spec(s.emitter).name << "] -> " << format_state(net, s.state) << "\n";
      o.witness_text = ws.str();
    }
  }
  o.row.push_back(to_string(o.verdict.conclusion));
  return o;
}

Case2Params case2_from(const RunConfig& cfg) {
  auto p = case2_params(cfg.n1, cfg.n2, cfg.n3, cfg.size, cfg.nonblocking_first);
  p.send_is_valid_end = cfg.send_end_valid;
  return p;
}

void emit_table(const Table& t, const std::filesystem::path& base, std::ostream& out) {
  out << t.to_text();
  write_file(base.string() + ".txt", t.to_text());
  write_file(base.string() + ".json", t.to_json());
}

std::vector<LearnJob> table1_jobs() {
  std::vector<LearnJob> jobs;
  auto add = [&](PortKind k, std::string label) { jobs.push_back({std::move(label), k}); };
  add({PortVariant::standard}, "port");
  add({PortVariant::buffered_nonstrict}, "buffered port (non-strict)");
  add({PortVariant::buffered_strict, 3}, "buffered port (strict)");
  add({PortVariant::buffered_nonstrict, 1, true}, "buffered port (non-strict)*");
  add({PortVariant::buffered_strict, 3, true}, "buffered port (strict)*");
  for (unsigned n = 1; n <= 6; ++n) add({PortVariant::buffered_strict, n}, std::to_string(n));
  return jobs;
}

std::vector<VerifyJob> table2_jobs(const RunConfig& cfg) {
  std::vector<VerifyJob> jobs;
  jobs.push_back({true, PortVariant::buffered_nonstrict, 3, {}, 0});
  jobs.push_back({true, PortVariant::buffered_strict, 1, {}, 0});
  jobs.push_back({true, PortVariant::buffered_strict, 6, {}, 0});
  const unsigned rows[][5] = {{100, 100, 100, 1, 0}, {90, 100, 100, 1, 0},  {100, 100, 100, 6, 0},
                              {90, 100, 100, 6, 0},  {200, 200, 200, 6, 0}, {180, 200, 200, 6, 0},
                              {90, 100, 100, 6, 1}};
  for (const auto& r : rows) {
    VerifyJob j;
    j.case1 = false;
    j.p2 = case2_params(r[0], r[1], r[2], r[3], r[4] != 0);
    j.p2.send_is_valid_end = cfg.send_end_valid;
    j.compress = cfg.compress;
    jobs.push_back(j);
  }
  return jobs;
}

int cmd_learn(const RunConfig& cfg, std::ostream& out) {
  IaLearnResult res;
  std::string label, name;
  if (!cfg.remote.empty()) {
    auto session = connect(parse_endpoint(cfg.remote));
    Teacher teacher(*session, cfg.eq, cfg.cache);
    res = learn_ia(teacher, session->alphabet().inputs);
    label = "remote " + cfg.remote;
    name = "remote";
  } else {
    const auto kind = cfg.port_kind();
    res = learn_local(kind, cfg);
    label = model_label(kind);
    name = slug(kind);
  }
  Table t{learn_columns(cfg.timings), {learn_row(label, res.automaton, res.stats, cfg.timings)}};
  const std::filesystem::path dir = cfg.out;
  save_model(dir / (name + ".ia"), res.automaton);
  write_file(dir / (name + ".dot"), emit_dot(res.automaton, name));
  emit_table(t, dir / ("learn-" + name), out);
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  VerifyJob job;
  job.case1 = cfg.case_study == "case1";
  job.port = parse_port_variant(cfg.port);
  job.n = cfg.n;
  job.compress = cfg.compress;
  if (!job.case1) job.p2 = case2_from(cfg);
  auto o = run_verify(job, cfg.limits(), cfg.timings);
  Table t{job.case1 ? case1_columns(cfg.timings) : case2_columns(cfg.timings), {o.row}};
  const std::filesystem::path dir = cfg.out;
  emit_table(t, dir / ("verify-" + cfg.case_study), out);
  if (!o.note.empty()) err << "note: " << o.note << "\n";
  if (o.verdict.conclusion == Conclusion::deadlock) {
    auto path = dir / ("witness-" + cfg.case_study + ".txt");
    write_file(path, o.witness_text);
    err << "deadlock witness (" << o.verdict.witness.size() << " steps) written to " << path.string() << "\n";
  }
  if (o.verdict.conclusion == Conclusion::inconclusive) err << "inconclusive: " << o.verdict.reason << "\n";
  return exit_code(o.verdict.conclusion);
}

int cmd_sweep(const RunConfig& cfg, const std::string& which, std::ostream& out) {
  const std::filesystem::path dir = cfg.out;
  int status = kExitOk;
  if (which == "table1" || which == "all") {
    auto jobs = table1_jobs();
    std::vector<IaLearnResult> results(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = learn_local(jobs[i].kind, cfg);
    Table top{learn_columns(cfg.timings), {}};
    Table bottom{learn_columns(cfg.timings), {}};
    bottom.columns[0] = "Size";
    for (std::size_t i = 0; i < jobs.size(); ++i)
      (i < 5 ? top : bottom).rows.push_back(learn_row(jobs[i].label, results[i].automaton, results[i].stats, cfg.timings));
    emit_table(top, dir / "table1-top", out);
    out << "\n";
    emit_table(bottom, dir / "table1-bottom", out);
    if (which == "all") out << "\n";
  }
  if (which == "table2" || which == "all") {
    auto jobs = table2_jobs(cfg);
    std::vector<VerifyOutcome> results(jobs.size());
    const auto limits = cfg.limits();
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = run_verify(jobs[i], limits, cfg.timings);
    Table top{case1_columns(cfg.timings), {}};
    Table bottom{case2_columns(cfg.timings), {}};
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      (jobs[i].case1 ? top : bottom).rows.push_back(results[i].row);
      if (results[i].verdict.conclusion == Conclusion::inconclusive) status = kExitInconclusive;
    }
    emit_table(top, dir / "table2-top", out);
    out << "\n";
    emit_table(bottom, dir / "table2-bottom", out);
  }
  return status;
}

int cmd_serve(const RunConfig& cfg, std::ostream& out) {
  PortSimulator sim(cfg.port_kind());
  SulServer server(sim, parse_endpoint(cfg.listen));
  out << "serving " << sim.kind().describe() << " on port " << server.port() << std::endl;
  server.run(cfg.max_clients);
  return kExitOk;
}

int cmd_export(const RunConfig& cfg, const std::string& model_path, const std::string& format,
               const std::string& output, std::ostream& out) {
  std::string text;
  if (model_path.empty()) {
    if (format != "promela") throw ConfigError("networks can only be exported as promela");
    auto net = cfg.case_study == "case1" ? build_case1(case1_params(parse_port_variant(cfg.port), cfg.n))
                                         : build_case2(case2_from(cfg));
    text = emit_promela(net);
  } else {
    auto a = load_model(model_path);
    const auto stem = std::filesystem::path(model_path).stem().string();
    if (format == "dot") text = emit_dot(a, stem);
    else if (format == "promela") text = emit_promela(a, stem);
    else if (format == "model") text = write_model(a);
    else throw ConfigError("unknown export format '" + format + "'");
  }
  if (output.empty()) out << text;
  else write_file(output, text);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  // The config file supplies defaults that explicit flags then override.
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") {
      try {
        cfg = parse_config(read_file(args[i + 1]));
      } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
      }
    }
  }

  CLI::App app{"Learn middleware port models and verify programs that use them", "midlearn"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  bool dump_config = false;
  app.add_option("--config", config_path, "key=value config file");
  app.add_flag("--dump-config", dump_config, "print the effective configuration and exit");
  app.add_option("--kind", cfg.kind, "standard | buffered-nonstrict | buffered-strict");
  app.add_option("--n", cfg.n, "buffer size (strict) or burst length (case1)");
  app.add_flag("--read-nb,!--no-read-nb", cfg.read_nb, "add the non-blocking read input");
  app.add_flag("--interrupt,!--no-interrupt", cfg.interrupt, "add the interrupt input (standard port)");
  app.add_option("--semantics", cfg.interrupt_semantics, "actual | expected");
  app.add_option("--extra-states", cfg.eq.extra_states);
  app.add_option("--random-words", cfg.eq.random_words);
  app.add_option("--max-word-len", cfg.eq.max_word_len);
  app.add_option("--seed", cfg.eq.rng_seed);
  app.add_flag("--cache,!--no-cache", cfg.cache, "trace cache");
  app.add_option("--remote", cfg.remote, "learn a SUL served at host:port");
  app.add_option("--case", cfg.case_study, "case1 | case2 (export without a model file)");
  app.add_option("--port", cfg.port, "case1 channel model: nonstrict | strict");
  app.add_option("--n1", cfg.n1);
  app.add_option("--n2", cfg.n2);
  app.add_option("--n3", cfg.n3);
  app.add_option("--size", cfg.size);
  app.add_flag("--nonblocking-first,!--blocking-first", cfg.nonblocking_first);
  app.add_flag("--send-end-valid,!--no-send-end-valid", cfg.send_end_valid);
  app.add_option("--compress", cfg.compress, "shift case2 bounds so the smallest equals this (0 = off)");
  app.add_option("--order", cfg.order, "dfs | bfs | parallel-bfs");
  app.add_option("--max-states", cfg.max_states);
  app.add_option("--max-time", cfg.max_time, "seconds");
  app.add_option("--listen", cfg.listen, "host:port for serve-sul");
  app.add_option("--max-clients", cfg.max_clients, "serve-sul stops after this many clients (0 = never)");
  app.add_option("--out", cfg.out, "output directory");
  app.add_flag("--timings,!--no-timings", cfg.timings, "include wall-clock columns");

  auto* learn = app.add_subcommand("learn", "learn a port model");
  auto* verify = app.add_subcommand("verify", "model-check a case study");
  std::string case_arg;
  verify->add_option("case", case_arg, "case1 | case2")->check(CLI::IsMember({"case1", "case2"}));
  auto* sweep = app.add_subcommand("sweep", "reproduce the learning and verification tables");
  std::string which = "all";
  sweep->add_option("which", which, "table1 | table2 | all")->check(CLI::IsMember({"table1", "table2", "all"}));
  auto* serve = app.add_subcommand("serve-sul", "serve a simulated port over TCP");
  auto* exp = app.add_subcommand("export", "convert a model file, or a case-study network, to text");
  std::string model_path, format = "dot", output;
  exp->add_option("model", model_path, "native model file");
  exp->add_option("--format", format, "dot | promela | model");
  exp->add_option("-o,--output", output, "write here instead of standard output");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }
  if (!case_arg.empty()) cfg.case_study = case_arg;

  try {
    cfg.validate();
    if (dump_config) {
      out << to_config_text(cfg);
      return kExitOk;
    }
    if (*learn) return cmd_learn(cfg, out);
    if (*verify) return cmd_verify(cfg, out, err);
    if (*sweep) return cmd_sweep(cfg, which, out);
    if (*serve) return cmd_serve(cfg, out);
    if (*exp) return cmd_export(cfg, model_path, format, output, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace midlearn

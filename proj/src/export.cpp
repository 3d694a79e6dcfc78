#include "midlearn/export.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <tuple>
#include <sstream>

#include "json.hpp"

namespace midlearn {

namespace {

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

std::vector<Transition> sorted_transitions(const InterfaceAutomaton& a) {
  auto ts = a.transitions();
  std::sort(ts.begin(), ts.end());
  return ts;
}

// PROMELA identifiers allow [A-Za-z0-9_] only.
std::string ident(std::string_view s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0]))) out.insert(0, "_");
  return out;
}

struct PromelaOption {
  std::string guard;  // "skip" for local steps
  std::string comment;
  StateId to;
};

void emit_proctype(std::ostringstream& os, const std::string& name, std::size_t num_states, StateId initial,
                   const std::vector<std::vector<PromelaOption>>& options, const std::vector<bool>& terminal) {
  auto label = [&](StateId q) { return (terminal[q] ? "end_S" : "S") + std::to_string(q); };
  os << "proctype " << name << "(chan InChannel; chan OutChannel)\n{\n";
  if (initial != 0) os << "  goto " << label(initial) << ";\n";
  for (StateId q = 0; q < num_states; ++q) {
    os << label(q) << ":\n";
    if (options[q].empty()) {
      os << "  false;\n";
      continue;
    }
    os << "  if\n";
    for (const auto& o : options[q]) {
      os << "  :: atomic { " << o.guard << "; goto " << label(o.to) << " }";
      if (!o.comment.empty()) os << "  /* " << o.comment << " */";
      os << "\n";
    }
    os << "  fi;\n";
  }
  os << "}\n\n";
}

}  // namespace

std::string emit_dot(const InterfaceAutomaton& a, std::string_view graph_name) {
  std::ostringstream os;
  os << "digraph " << quote(graph_name) << " {\n";
  os << "  rankdir=LR;\n  node [shape=circle];\n";
  os << "  __start [shape=point];\n  __start -> s" << a.initial() << ";\n";
  for (StateId q = 0; q < a.num_states(); ++q)
    os << "  s" << q << " [label=" << quote(a.state_name(q)) << "];\n";
  for (const auto& t : sorted_transitions(a))
    os << "  s" << t.from << " -> s" << t.to << " [label=" << quote(a.signature().label(t.action)) << "];\n";
  os << "}\n";
  return os.str();
}

std::string emit_promela(const ProcessNetwork& net) {
  std::ostringstream os;
  os << "mtype = {";
  bool first = true;
  for (const auto& a : net.action_names()) {
    os << (first ? " " : ", ") << ident(a);
    first = false;
  }
  os << " };\n\nchan net = [0] of { mtype };\n\n";

  for (std::size_t p = 0; p < net.size(); ++p) {
    const auto& a = net.automaton(p);
    std::vector<std::vector<PromelaOption>> options(a.num_states());
    std::vector<bool> terminal(a.num_states());
    for (StateId q = 0; q < a.num_states(); ++q) {
      terminal[q] = net.is_terminal(p, q);
      for (const auto& m : net.local_moves(p, q))
        options[q].push_back({"skip", net.action_name(m.action), m.to});
      for (const auto& m : net.emit_moves(p, q))
        options[q].push_back({"OutChannel ! " + ident(net.action_name(m.action)), "", m.to});
      for (const auto& m : net.receive_moves(p, q))
        options[q].push_back({"InChannel ? eval(" + ident(net.action_name(m.action)) + ")", "", m.to});
    }
    emit_proctype(os, ident(net.spec(p).name), a.num_states(), a.initial(), options, terminal);
  }

  os << "init {\n  atomic {\n";
  for (std::size_t p = 0; p < net.size(); ++p) os << "    run " << ident(net.spec(p).name) << "(net, net);\n";
  os << "  }\n}\n";
  return os.str();
}

std::string emit_promela(const InterfaceAutomaton& a, std::string_view name) {
  const auto& sig = a.signature();
  std::ostringstream os;
  os << "mtype = {";
  for (std::size_t i = 0; i < sig.size(); ++i) os << (i ? ", " : " ") << ident(sig.name(i));
  os << " };\n\nchan in_ch = [0] of { mtype };\nchan out_ch = [0] of { mtype };\n\n";
  std::vector<std::vector<PromelaOption>> options(a.num_states());
  for (const auto& t : sorted_transitions(a)) {
    const auto sym = ident(sig.name(t.action));
    options[t.from].push_back(
        {sig.is_input(t.action) ? "InChannel ? eval(" + sym + ")" : "OutChannel ! " + sym, "", t.to});
  }
  emit_proctype(os, ident(name), a.num_states(), a.initial(), options, std::vector<bool>(a.num_states(), false));
  os << "init {\n  run " << ident(name) << "(in_ch, out_ch)\n}\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Native model format
//
//   ia 1
//   inputs write read
//   outputs rok
//   states 4
//   initial 0
//   name 2 blocked          (optional, one per named state)
//   transition 0 ?write 1
//   end

std::string write_model(const InterfaceAutomaton& a) {
  const auto& sig = a.signature();
  std::ostringstream os;
  os << "ia 1\ninputs";
  for (const auto& s : sig.inputs()) os << ' ' << s;
  os << "\noutputs";
  for (const auto& s : sig.outputs()) os << ' ' << s;
  os << "\nstates " << a.num_states() << "\ninitial " << a.initial() << "\n";
  const auto& names = a.state_names();
  for (StateId q = 0; q < names.size(); ++q)
    if (!names[q].empty() && names[q] != std::to_string(q)) os << "name " << q << ' ' << names[q] << "\n";
  for (const auto& t : sorted_transitions(a))
    os << "transition " << t.from << ' ' << sig.label(t.action) << ' ' << t.to << "\n";
  os << "end\n";
  return os.str();
}

InterfaceAutomaton read_model(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) -> FormatError {
    return FormatError("model line " + std::to_string(lineno) + ": " + why);
  };
  auto number = [&](const std::string& s) -> std::uint64_t {
    try {
      std::size_t used = 0;
      auto v = std::stoull(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw fail("expected a number, got '" + s + "'");
  };

  std::vector<Symbol> inputs, outputs;
  std::optional<std::uint64_t> states, initial;
  std::map<StateId, std::string> names;
  std::vector<std::tuple<StateId, std::string, StateId>> raw;
  bool header = false, ended = false;

  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (ended) throw fail("content after 'end'");
    const auto& key = tok[0];
    if (!header) {
      if (tok.size() != 2 || key != "ia" || tok[1] != "1") throw fail("expected header 'ia 1'");
      header = true;
    } else if (key == "inputs") {
      inputs.assign(tok.begin() + 1, tok.end());
    } else if (key == "outputs") {
      outputs.assign(tok.begin() + 1, tok.end());
    } else if (key == "states" && tok.size() == 2) {
      states = number(tok[1]);
    } else if (key == "initial" && tok.size() == 2) {
      initial = number(tok[1]);
    } else if (key == "name" && tok.size() == 3) {
      names[static_cast<StateId>(number(tok[1]))] = tok[2];
    } else if (key == "transition" && tok.size() == 4) {
      raw.emplace_back(static_cast<StateId>(number(tok[1])), tok[2], static_cast<StateId>(number(tok[3])));
    } else if (key == "end" && tok.size() == 1) {
      ended = true;
    } else {
      throw fail("unrecognized line '" + line + "'");
    }
  }
  if (!header) throw FormatError("model: empty input");
  if (!ended) throw FormatError("model: missing 'end'");
  if (!states || !initial) throw FormatError("model: missing 'states' or 'initial'");

  ActionSignature sig(inputs, outputs);
  std::vector<Transition> ts;
  for (const auto& [from, label, to] : raw) {
    if (label.size() < 2 || (label[0] != '?' && label[0] != '!'))
      throw FormatError("model: bad action label '" + label + "'");
    auto id = sig.find(std::string_view(label).substr(1));
    if (!id || sig.is_input(*id) != (label[0] == '?'))
      throw FormatError("model: action '" + label + "' not in signature");
    ts.push_back({from, *id, to});
  }
  std::vector<std::string> state_names;
  if (!names.empty()) {
    state_names.resize(*states);
    for (StateId q = 0; q < *states; ++q) state_names[q] = std::to_string(q);
    for (const auto& [q, n] : names) {
      if (q >= *states) throw FormatError("model: name for unknown state " + std::to_string(q));
      state_names[q] = n;
    }
  }
  return InterfaceAutomaton(sig, *states, static_cast<StateId>(*initial), std::move(ts), std::move(state_names));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << text;
}

void save_model(const std::filesystem::path& path, const InterfaceAutomaton& a) { write_file(path, write_model(a)); }

InterfaceAutomaton load_model(const std::filesystem::path& path) { return read_model(read_file(path)); }

// ---------------------------------------------------------------------------
// Tables

std::string Table::to_text() const {
  std::vector<std::size_t> width(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) width[c] = columns[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const std::string& s = c < cells.size() ? cells[c] : "";
      os << (c ? " | " : "") << s;
      if (c + 1 < columns.size()) os << std::string(width[c] - s.size(), ' ');
    }
    os << "\n";
  };
  line(columns);
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "-+-" : "") << std::string(width[c], '-');
  os << "\n";
  for (const auto& r : rows) line(r);
  return os.str();
}

std::string Table::to_json() const {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    for (std::size_t c = 0; c < columns.size(); ++c) o[columns[c]] = c < r.size() ? r[c] : "";
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

}  // namespace midlearn

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "midlearn/casestudies.hpp"
#include "midlearn/export.hpp"
#include "midlearn/teacher.hpp"

namespace midlearn {

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Every parameter the command line accepts. Also readable from a
/// key=value config file (see config_keys()).
struct RunConfig {
  // learning
  std::string kind = "standard";
  unsigned n = 3;
  bool read_nb = false;
  bool interrupt = false;
  std::string interrupt_semantics = "actual";
  EqConfig eq;
  bool cache = true;
  std::string remote;  ///< host:port of a served SUL; empty = in-process

  // verification
  std::string case_study = "case1";
  std::string port = "nonstrict";  ///< case 1 channel model
  unsigned n1 = 100, n2 = 100, n3 = 100, size = 1;
  bool nonblocking_first = false;
  bool send_end_valid = true;
  unsigned compress = 0;  ///< 0 = literal bounds
  std::string order = "dfs";
  std::size_t max_states = 200'000'000;
  double max_time = 1800.0;

  // serving / output
  std::string listen = "127.0.0.1:7777";
  std::size_t max_clients = 0;
  std::string out = "out";
  bool timings = false;

  void validate() const;
  PortKind port_kind() const;
  SearchLimits limits() const;

  bool operator==(const RunConfig&) const;
};

RunConfig parse_config(std::string_view text, RunConfig base = {});
std::string to_config_text(const RunConfig& cfg);
std::vector<std::string> config_keys();

/// Table-1-style row for a learned model.
std::vector<std::string> learn_row(const std::string& model, const InterfaceAutomaton& a, const LearnStats& s,
                                   bool timings);
std::vector<std::string> learn_columns(bool timings);

enum ExitCode : int { kExitOk = 0, kExitDeadlock = 1, kExitUsage = 2, kExitInconclusive = 3 };

int exit_code(Conclusion c);

/// Full command-line entry point. Diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace midlearn

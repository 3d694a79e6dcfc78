#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "midlearn/automata.hpp"
#include "midlearn/mcheck.hpp"

namespace midlearn {

class FormatError : public Error {
 public:
  using Error::Error;
};

std::string emit_dot(const InterfaceAutomaton& a, std::string_view graph_name = "model");

/// One proctype per process over a single unbuffered rendezvous channel;
/// every transition is an atomic option, terminal states carry end labels.
std::string emit_promela(const ProcessNetwork& net);
/// A lone automaton as a proctype driven through its own channel pair.
std::string emit_promela(const InterfaceAutomaton& a, std::string_view name = "model");

/// Native line-oriented model format.
std::string write_model(const InterfaceAutomaton& a);
InterfaceAutomaton read_model(std::string_view text);
void save_model(const std::filesystem::path& path, const InterfaceAutomaton& a);
InterfaceAutomaton load_model(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view text);

/// Plain table used for both the text and the JSON report.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_text() const;
  std::string to_json() const;  ///< array of objects keyed by column
};

}  // namespace midlearn

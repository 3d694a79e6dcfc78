#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "midlearn/teacher.hpp"

namespace midlearn {

enum class PortVariant { standard, buffered_nonstrict, buffered_strict };

/// Behaviour of `intr` while a write is blocked mid-transfer.
/// `actual`: the interrupt completes only once the current write finishes.
/// `expected`: the blocked write is released immediately.
enum class InterruptSemantics { actual, expected };

struct PortKind {
  PortVariant variant = PortVariant::standard;
  unsigned capacity = 1;  ///< buffered variants only
  bool nonblocking_read = false;
  bool interrupt = false;
  InterruptSemantics interrupt_semantics = InterruptSemantics::actual;

  /// Throws ConfigError-like Error on invalid combinations.
  void validate() const;
  std::string describe() const;
};

std::string to_string(PortVariant v);
PortVariant parse_port_variant(std::string_view s);
std::string to_string(InterruptSemantics s);
InterruptSemantics parse_interrupt_semantics(std::string_view s);

/// Maps the concrete reaction of one step (the '+'-joined list of
/// completion events, or "" when nothing completes) to a learner output
/// symbol. Reactions missing from the map keep their joined name.
struct FusionMap {
  std::string version = "port-fusion/1";
  std::map<std::string, std::string> entries;

  static FusionMap standard();
  std::string apply(const std::string& reaction) const;
};

/// Observable effect of one concrete step.
struct ConcreteReaction {
  bool refused = false;               ///< the input cannot be issued now
  std::vector<std::string> events;    ///< completion events, in order
  std::optional<std::uint64_t> delivered;  ///< tag of the message handed to the reader

  std::string joined() const;
};

/// Deterministic reference implementation of a port connection with one
/// writer, one reader and (optionally) one interrupting thread.
class PortSimulator final : public SulSession {
 public:
  explicit PortSimulator(PortKind kind, FusionMap fusion = FusionMap::standard());

  Alphabet alphabet() const override;
  void reset() override;
  Symbol step(const Symbol& input) override;

  ConcreteReaction step_concrete(const Symbol& input);

  const PortKind& kind() const { return kind_; }
  const FusionMap& fusion() const { return fusion_; }
  /// Concrete completion events this port can report.
  std::vector<std::string> concrete_events() const;

  // State inspection for tests.
  const std::deque<std::uint64_t>& buffer() const { return buffer_; }
  bool reader_blocked() const { return reader_blocked_; }
  bool writer_blocked() const { return writer_blocked_; }
  bool interrupted() const { return interrupted_; }
  std::size_t resets() const { return resets_; }

 private:
  ConcreteReaction do_write();
  ConcreteReaction do_read(bool blocking);
  ConcreteReaction do_interrupt();

  PortKind kind_;
  FusionMap fusion_;
  bool started_ = false;
  std::deque<std::uint64_t> buffer_;
  std::optional<std::uint64_t> pending_write_;  // standard port: message held by a blocked writer
  bool reader_blocked_ = false;
  bool writer_blocked_ = false;
  bool interrupt_pending_ = false;
  bool interrupted_ = false;
  std::uint64_t next_tag_ = 0;
  std::size_t resets_ = 0;
};

}  // namespace midlearn

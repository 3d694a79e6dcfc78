#include "midlearn/middleware_sim.hpp"

#include <algorithm>
#include <sstream>

namespace midlearn {

namespace {
constexpr std::string_view kWrite = "write";
constexpr std::string_view kRead = "read";
constexpr std::string_view kReadNb = "read_nb";
constexpr std::string_view kIntr = "intr";
}  // namespace

std::string to_string(PortVariant v) {
  switch (v) {
    case PortVariant::standard: return "standard";
    case PortVariant::buffered_nonstrict: return "buffered-nonstrict";
    case PortVariant::buffered_strict: return "buffered-strict";
  }
  return "?";
}

PortVariant parse_port_variant(std::string_view s) {
  if (s == "standard" || s == "port") return PortVariant::standard;
  if (s == "buffered-nonstrict" || s == "nonstrict") return PortVariant::buffered_nonstrict;
  if (s == "buffered-strict" || s == "strict") return PortVariant::buffered_strict;
  throw Error("unknown port kind '" + std::string(s) + "'");
}

std::string to_string(InterruptSemantics s) {
  return s == InterruptSemantics::actual ? "actual" : "expected";
}

InterruptSemantics parse_interrupt_semantics(std::string_view s) {
  if (s == "actual") return InterruptSemantics::actual;
  if (s == "expected") return InterruptSemantics::expected;
  throw Error("unknown interrupt semantics '" + std::string(s) + "'");
}

void PortKind::validate() const {
  if (variant != PortVariant::standard && capacity < 1)
    throw Error("buffered port capacity must be at least 1");
  if (nonblocking_read && variant == PortVariant::standard)
    throw Error("non-blocking read is only available on buffered ports");
  if (interrupt && variant != PortVariant::standard)
    throw Error("the interrupt extension is modelled for standard ports only");
}

std::string PortKind::describe() const {
  std::ostringstream os;
  os << to_string(variant);
  if (variant == PortVariant::buffered_strict) os << " N=" << capacity;
  if (nonblocking_read) os << " +read_nb";
  if (interrupt) os << " +intr(" << to_string(interrupt_semantics) << ")";
  return os.str();
}

FusionMap FusionMap::standard() {
  FusionMap f;
  f.entries = {
      {"", std::string(kQuiescence)},
      {"wok", std::string(kQuiescence)},    // non-blocking write returned; nothing for the reader
      {"wfail", std::string(kQuiescence)},  // write on an interrupted port
      {"rok", "rok"},
      {"rok+wok", "rok"},
      {"nodata", "nodata"},
      {"intr_done", "intr_done"},
      {"wfail+intr_done", "intr_done"},
      {"rok+wok+intr_done", "rok+intr_done"},
  };
  return f;
}

std::string FusionMap::apply(const std::string& reaction) const {
  auto it = entries.find(reaction);
  return it == entries.end() ? reaction : it->second;
}

std::string ConcreteReaction::joined() const {
  std::string s;
  for (const auto& e : events) {
    if (!s.empty()) s += '+';
    s += e;
  }
  return s;
}

PortSimulator::PortSimulator(PortKind kind, FusionMap fusion)
    : kind_(kind), fusion_(std::move(fusion)) {
  kind_.validate();
}

Alphabet PortSimulator::alphabet() const {
  Alphabet a;
  a.inputs = {std::string(kWrite), std::string(kRead)};
  if (kind_.nonblocking_read) a.inputs.emplace_back(kReadNb);
  if (kind_.interrupt) a.inputs.emplace_back(kIntr);
  std::vector<std::string> reactions{"", "wok", "rok", "rok+wok"};
  if (kind_.nonblocking_read) reactions.emplace_back("nodata");
  if (kind_.interrupt) {
    reactions.insert(reactions.end(), {"wfail", "intr_done", "wfail+intr_done", "rok+wok+intr_done"});
  }
  for (const auto& r : reactions) {
    auto sym = fusion_.apply(r);
    if (std::find(a.outputs.begin(), a.outputs.end(), sym) == a.outputs.end()) a.outputs.push_back(sym);
  }
  a.outputs.emplace_back(kRefused);
  return a;
}

std::vector<std::string> PortSimulator::concrete_events() const {
  std::vector<std::string> ev{"wok", "rok"};
  if (kind_.nonblocking_read) ev.emplace_back("nodata");
  if (kind_.interrupt) {
    ev.emplace_back("wfail");
    ev.emplace_back("intr_done");
  }
  return ev;
}

void PortSimulator::reset() {
  started_ = true;
  buffer_.clear();
  pending_write_.reset();
  reader_blocked_ = writer_blocked_ = false;
  interrupt_pending_ = interrupted_ = false;
  next_tag_ = 0;
  ++resets_;
}

ConcreteReaction PortSimulator::step_concrete(const Symbol& input) {
  if (!started_) throw SessionStateError("step before reset");
  if (input == kWrite) return do_write();
  if (input == kRead) return do_read(true);
  if (input == kReadNb && kind_.nonblocking_read) return do_read(false);
  if (input == kIntr && kind_.interrupt) return do_interrupt();
  throw AlphabetError("unknown input symbol '" + input + "'");
}

Symbol PortSimulator::step(const Symbol& input) {
  auto r = step_concrete(input);
  if (r.refused) return std::string(kRefused);
  return fusion_.apply(r.joined());
}

ConcreteReaction PortSimulator::do_write() {
  ConcreteReaction r;
  if (writer_blocked_) {
    r.refused = true;  // the single writer thread is still inside write()
    return r;
  }
  const std::uint64_t tag = next_tag_++;
  if (kind_.variant == PortVariant::standard) {
    if (interrupted_) {
      r.events = {"wfail"};
    } else if (reader_blocked_) {
      reader_blocked_ = false;
      r.events = {"rok", "wok"};
      r.delivered = tag;
    } else {
      writer_blocked_ = true;
      pending_write_ = tag;
    }
    return r;
  }
  if (reader_blocked_) {
    reader_blocked_ = false;
    r.events = {"rok", "wok"};
    r.delivered = tag;
    return r;
  }
  if (kind_.variant == PortVariant::buffered_nonstrict) {
    buffer_.clear();  // keeps the most recent message only
    buffer_.push_back(tag);
    r.events = {"wok"};
    return r;
  }
  if (buffer_.size() >= kind_.capacity) {
    // The harness never sends more than N outstanding messages.
    --next_tag_;
    r.refused = true;
    return r;
  }
  buffer_.push_back(tag);
  r.events = {"wok"};
  return r;
}

ConcreteReaction PortSimulator::do_read(bool blocking) {
  ConcreteReaction r;
  if (reader_blocked_) {
    r.refused = true;
    return r;
  }
  if (kind_.variant == PortVariant::standard) {
    if (writer_blocked_) {
      writer_blocked_ = false;
      r.delivered = pending_write_;
      pending_write_.reset();
      r.events = {"rok", "wok"};
      if (interrupt_pending_) {
        interrupt_pending_ = false;
        interrupted_ = true;
        r.events.emplace_back("intr_done");
      }
    } else {
      reader_blocked_ = true;
    }
    return r;
  }
  if (!buffer_.empty()) {
    r.delivered = buffer_.front();
    buffer_.pop_front();
    r.events = {"rok"};
  } else if (blocking) {
    reader_blocked_ = true;
  } else {
    r.events = {"nodata"};
  }
  return r;
}

ConcreteReaction PortSimulator::do_interrupt() {
  ConcreteReaction r;
  if (interrupt_pending_ || interrupted_) {
    r.refused = true;  // one-shot interrupter thread
    return r;
  }
  if (writer_blocked_) {
    if (kind_.interrupt_semantics == InterruptSemantics::actual) {
      interrupt_pending_ = true;
      return r;
    }
    writer_blocked_ = false;
    pending_write_.reset();
    interrupted_ = true;
    r.events = {"wfail", "intr_done"};
    return r;
  }
  interrupted_ = true;
  r.events = {"intr_done"};
  return r;
}

}  // namespace midlearn

#include <gtest/gtest.h>

#include <random>

#include "midlearn/middleware_sim.hpp"

using namespace midlearn;

namespace {

Word run(PortSimulator& s, const Word& in) {
  s.reset();
  Word out;
  for (const auto& i : in) out.push_back(s.step(i));
  return out;
}

const std::string Q(kQuiescence);
const std::string R(kRefused);

}  // namespace

TEST(PortKind, Validation) {
  EXPECT_THROW(PortSimulator({PortVariant::buffered_strict, 0}), Error);
  EXPECT_THROW(PortSimulator({PortVariant::standard, 1, true}), Error);
  EXPECT_THROW(PortSimulator({PortVariant::buffered_strict, 2, false, true}), Error);
  EXPECT_NO_THROW(PortSimulator({PortVariant::buffered_nonstrict, 1, true}));
}

TEST(PortKind, ParseNames) {
  EXPECT_EQ(parse_port_variant("strict"), PortVariant::buffered_strict);
  EXPECT_EQ(parse_port_variant("buffered-nonstrict"), PortVariant::buffered_nonstrict);
  EXPECT_EQ(parse_port_variant(to_string(PortVariant::standard)), PortVariant::standard);
  EXPECT_THROW(parse_port_variant("nope"), Error);
  EXPECT_THROW(parse_interrupt_semantics("maybe"), Error);
}

TEST(PortSimulator, Alphabets) {
  PortSimulator std_port({PortVariant::standard});
  EXPECT_EQ(std_port.alphabet().inputs, (Word{"write", "read"}));
  EXPECT_EQ(std_port.alphabet().outputs, (Word{Q, "rok", R}));
  PortSimulator nb({PortVariant::buffered_nonstrict, 1, true});
  auto in = nb.alphabet().inputs;
  EXPECT_NE(std::find(in.begin(), in.end(), "read_nb"), in.end());
  PortSimulator intr({PortVariant::standard, 1, false, true});
  in = intr.alphabet().inputs;
  EXPECT_NE(std::find(in.begin(), in.end(), "intr"), in.end());
}

TEST(PortSimulator, StepBeforeResetAndUnknownSymbol) {
  PortSimulator s({PortVariant::standard});
  EXPECT_THROW(s.step("read"), SessionStateError);
  s.reset();
  EXPECT_THROW(s.step("bogus"), AlphabetError);
  EXPECT_THROW(s.step("read_nb"), AlphabetError);
}

TEST(PortSimulator, StandardRendezvous) {
  PortSimulator s({PortVariant::standard});
  EXPECT_EQ(run(s, {"write", "read"}), (Word{Q, "rok"}));
  EXPECT_EQ(run(s, {"read", "write"}), (Word{Q, "rok"}));
  EXPECT_EQ(run(s, {"write", "write"}), (Word{Q, R}));
  EXPECT_EQ(run(s, {"read", "read"}), (Word{Q, R}));
  s.reset();
  s.step("write");
  EXPECT_TRUE(s.writer_blocked());
  EXPECT_FALSE(s.reader_blocked());
  auto r = s.step_concrete("read");
  EXPECT_EQ(r.joined(), "rok+wok");
}

TEST(PortSimulator, NonStrictLastWriteWins) {
  PortSimulator s({PortVariant::buffered_nonstrict});
  for (int k = 1; k <= 5; ++k) {
    s.reset();
    std::uint64_t last = 0;
    for (int i = 0; i < k; ++i) {
      auto r = s.step_concrete("write");
      EXPECT_EQ(r.joined(), "wok");
      last = static_cast<std::uint64_t>(i);
    }
    EXPECT_LE(s.buffer().size(), 1u);
    auto r = s.step_concrete("read");
    ASSERT_TRUE(r.delivered);
    EXPECT_EQ(*r.delivered, last);
    // nothing left: the next read blocks
    EXPECT_EQ(s.step("read"), Q);
  }
}

TEST(PortSimulator, StrictFifoOrder) {
  PortSimulator s({PortVariant::buffered_strict, 4});
  std::mt19937_64 rng(3);
  std::bernoulli_distribution coin;
  for (int trial = 0; trial < 100; ++trial) {
    s.reset();
    std::vector<std::uint64_t> delivered;
    for (int i = 0; i < 30; ++i) {
      auto r = s.step_concrete(coin(rng) ? "write" : "read");
      if (r.delivered) delivered.push_back(*r.delivered);
    }
    for (std::size_t i = 0; i < delivered.size(); ++i) EXPECT_EQ(delivered[i], i);
  }
}

TEST(PortSimulator, StrictWriteAtFullIsRefused) {
  PortSimulator s({PortVariant::buffered_strict, 2});
  s.reset();
  EXPECT_EQ(s.step_concrete("write").joined(), "wok");
  EXPECT_EQ(s.step_concrete("write").joined(), "wok");
  EXPECT_TRUE(s.step_concrete("write").refused);
  EXPECT_EQ(s.buffer().size(), 2u);
  EXPECT_EQ(run(s, {"write", "write", "write"}), (Word{Q, Q, R}));
}

TEST(PortSimulator, StrictBoundedUnderFuzzing) {
  std::mt19937_64 rng(8);
  for (unsigned n = 1; n <= 6; ++n) {
    PortSimulator s({PortVariant::buffered_strict, n, true});
    const auto in = s.alphabet().inputs;
    std::uniform_int_distribution<std::size_t> pick(0, in.size() - 1);
    for (int trial = 0; trial < 50; ++trial) {
      s.reset();
      for (int i = 0; i < 40; ++i) {
        s.step(in[pick(rng)]);
        ASSERT_LE(s.buffer().size(), n);
      }
    }
  }
}

TEST(PortSimulator, NonBlockingRead) {
  PortSimulator s({PortVariant::buffered_strict, 2, true});
  EXPECT_EQ(run(s, {"read_nb"}), (Word{"nodata"}));
  EXPECT_EQ(run(s, {"write", "read_nb", "read_nb"}), (Word{Q, "rok", "nodata"}));
  // refused while the reader thread is blocked in read()
  EXPECT_EQ(run(s, {"read", "read_nb"}), (Word{Q, R}));
}

TEST(PortSimulator, InterruptActualWaitsForTheWrite) {
  PortSimulator s({PortVariant::standard, 1, false, true, InterruptSemantics::actual});
  EXPECT_EQ(run(s, {"write", "intr", "read"}), (Word{Q, Q, "rok+intr_done"}));
  // later writes return at once without delivering
  s.reset();
  s.step("intr");
  auto r = s.step_concrete("write");
  EXPECT_EQ(r.joined(), "wfail");
  EXPECT_FALSE(r.delivered);
  EXPECT_EQ(s.step("intr"), R);
}

TEST(PortSimulator, InterruptExpectedReleasesWriter) {
  PortSimulator s({PortVariant::standard, 1, false, true, InterruptSemantics::expected});
  EXPECT_EQ(run(s, {"write", "intr"}), (Word{Q, "intr_done"}));
  s.reset();
  s.step("write");
  EXPECT_EQ(s.step_concrete("intr").joined(), "wfail+intr_done");
  EXPECT_FALSE(s.writer_blocked());
}

TEST(PortSimulator, ResetRestoresInitialBehaviour) {
  PortSimulator s({PortVariant::buffered_strict, 3, true});
  PortSimulator fresh({PortVariant::buffered_strict, 3, true});
  run(s, {"write", "write", "read", "write"});
  EXPECT_EQ(run(s, {"read_nb", "write", "read"}), run(fresh, {"read_nb", "write", "read"}));
  EXPECT_EQ(s.resets(), 2u);
}

TEST(PortSimulator, Deterministic) {
  std::mt19937_64 rng(12);
  PortSimulator a({PortVariant::standard, 1, false, true}), b({PortVariant::standard, 1, false, true});
  const auto in = a.alphabet().inputs;
  std::uniform_int_distribution<std::size_t> pick(0, in.size() - 1);
  for (int trial = 0; trial < 200; ++trial) {
    Word w;
    for (int i = 0; i < 12; ++i) w.push_back(in[pick(rng)]);
    EXPECT_EQ(run(a, w), run(b, w));
  }
}

TEST(FusionMap, VersionedAndTotalOverReactions) {
  auto f = FusionMap::standard();
  EXPECT_EQ(f.version, "port-fusion/1");
  EXPECT_EQ(f.apply("rok+wok"), "rok");
  EXPECT_EQ(f.apply("wok"), Q);
  EXPECT_EQ(f.apply(""), Q);
  // every output the simulator can produce is in the declared alphabet
  std::mt19937_64 rng(2);
  for (auto kind : {PortKind{PortVariant::standard, 1, false, true}, PortKind{PortVariant::buffered_strict, 3, true}}) {
    PortSimulator s(kind);
    const auto a = s.alphabet();
    std::uniform_int_distribution<std::size_t> pick(0, a.inputs.size() - 1);
    for (int trial = 0; trial < 100; ++trial) {
      s.reset();
      for (int i = 0; i < 10; ++i) {
        auto o = s.step(a.inputs[pick(rng)]);
        EXPECT_NE(std::find(a.outputs.begin(), a.outputs.end(), o), a.outputs.end()) << o;
      }
    }
  }
}

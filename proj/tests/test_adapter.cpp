#include <gtest/gtest.h>

#include <chrono>

#include "hidsq/adapter.hpp"
#include "hidsq/error.hpp"

using namespace hidsq;

namespace {

const std::string kEcho = HIDSQ_ECHO_MODEL;

LabeledSequence ls(std::initializer_list<Syscall> g, Label l) { return {Sequence{std::vector<Syscall>(g)}, l}; }

ExternalModelSpec echo(const std::string& extra = "", double timeout = 20) {
  ExternalModelSpec s;
  s.name = "echo";
  s.command = "'" + kEcho + "'" + extra;
  s.timeout_seconds = timeout;
  return s;
}

PreparedSplit small_split() {
  PreparedSplit sp;
  for (Syscall i = 0; i < 20; ++i) {
    sp.train.push_back(ls({i, i + 1, i + 2}, kNormal));
    sp.train.push_back(ls({100 + i, 101 + i, 102 + i}, kIntrusion));
  }
  for (Syscall i = 0; i < 20; i += 2) {
    sp.test.push_back(ls({i, i + 1, i + 2}, kNormal));
    sp.test.push_back(ls({100 + i, 101 + i, 102 + i}, kIntrusion));
  }
  return sp;
}

}  // namespace

TEST(Protocol, EncodeSession) {
  const std::vector<LabeledSequence> train = {ls({1, 2}, 1), ls({3, 4}, 0)};
  const std::vector<LabeledSequence> test = {ls({5, 6}, 0)};
  EXPECT_EQ(encode_session(train, test), "TRAIN 2\n1\t1 2\n0\t3 4\nTEST 1\n5 6\nEND\n");
}

TEST(Spec, Validate) {
  ExternalModelSpec s;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.command = "x";
  s.timeout_seconds = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Echo, PerfectOnMemorizedSignatures) {
  const auto r = evaluate_external(echo(), small_split());
  EXPECT_EQ(r.rates.recall, 1.0);
  EXPECT_EQ(r.rates.fpr, 0.0);
  EXPECT_EQ(r.auc, 1.0);
  EXPECT_EQ(r.model, "echo");
}

TEST(Echo, UnseenScoresHalfAndOrderKept) {
  const auto sp = small_split();
  std::vector<LabeledSequence> test = {ls({100, 101, 102}, 1), ls({7, 7, 7}, 0), ls({0, 1, 2}, 0)};
  const auto s = run_external(echo(), sp.train, test);
  EXPECT_EQ(s, (std::vector<double>{1.0, 0.5, 0.0}));
  EXPECT_EQ(run_external(echo(), sp.train, test), s);
}

TEST(Faults, NonNumericNamesLine) {
  const auto sp = small_split();
  try {
    run_external(echo(" --fault=nonnumeric"), sp.train, sp.test);
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Faults, ExitMidTestCarriesDiagnostics) {
  const auto sp = small_split();
  try {
    run_external(echo(" --fault=exit-mid-test"), sp.train, sp.test);
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_FALSE(e.diagnostics().empty());
  }
}

TEST(Faults, BadHandshakeShortAndHang) {
  const auto sp = small_split();
  EXPECT_THROW(run_external(echo(" --fault=bad-handshake"), sp.train, sp.test), ProtocolError);
  EXPECT_THROW(run_external(echo(" --fault=short"), sp.train, sp.test), ProtocolError);
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_THROW(run_external(echo(" --fault=hang", 1.0), sp.train, sp.test), ProtocolError);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(10));
  ExternalModelSpec missing;
  missing.command = "/nonexistent/hidsq-model";
  EXPECT_THROW(run_external(missing, sp.train, sp.test), ProtocolError);
}

TEST(Conformance, EchoPassesFaultyFails) {
  for (const auto& c : check_conformance(echo())) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  bool any_failed = false;
  for (const auto& c : check_conformance(echo(" --fault=nonnumeric"))) any_failed |= !c.passed;
  EXPECT_TRUE(any_failed);
}

#pragma once

// Bridge to external classifiers over a line protocol on the child's
// stdin/stdout. See docs/protocol.md for the wire format:
//
//   parent: HIDSQ-EXT 1 <n>
//   child:  READY 1
//   parent: TRAIN <k>, k lines "label<TAB>s1 ... sn"
//           TEST <m>,  m lines "s1 ... sn"
//           END, then closes stdin
//   child:  m lines, one real score each (higher = more intrusion-like),
//           in test order; exit status 0
//
// The child runs under /bin/sh -c. Running a child sets SIGPIPE to SIG_IGN
// for the whole process so a dead child surfaces as a ProtocolError.

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hidsq/metrics.hpp"
#include "hidsq/preprocess.hpp"

namespace hidsq {

inline constexpr int kProtocolVersion = 1;

struct ExternalModelSpec {
  std::string name = "external";
  std::string command;
  double timeout_seconds = 60.0;
  double threshold = 0.5;  // predict 1 iff score > threshold

  // Throws std::invalid_argument on an empty command or timeout <= 0.
  void validate() const;
};

// Exact bytes sent to the child after the handshake (TRAIN .. END).
std::string encode_session(std::span<const LabeledSequence> train, std::span<const LabeledSequence> test);

// One score per test item, in order. Throws ProtocolError carrying the
// child's stderr on handshake failure, malformed or missing score lines,
// early exit, non-zero exit status or timeout.
std::vector<double> run_external(const ExternalModelSpec& spec, std::span<const LabeledSequence> train,
                                 std::span<const LabeledSequence> test);

// Scores split.test through the child and evaluates them like a native
// model. dataset/provenance are left for the caller to fill.
MetricsReport evaluate_external(const ExternalModelSpec& spec, const PreparedSplit& split);

struct ConformanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Runs the child against a small built-in split with disjoint class
// signatures: protocol completion, score count, finiteness, determinism
// across two runs and perfect separation of memorized values.
std::vector<ConformanceCheck> check_conformance(const ExternalModelSpec& spec);

}  // namespace hidsq

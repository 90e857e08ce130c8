#pragma once

// Seeded synthetic syscall corpora with controllable quality defects.
//
// Each class is a first-order Markov chain over `vocab_size` states. With
// signature overlap p, a block of round(p * vocab_size) shared states has
// identical transitions in both chains and is sticky (0.9 of its mass stays
// in the block); the remaining states are split between the two classes.
// Private rows return to the shared block with probability 0.1 p / (1 - p),
// so the stationary share of the shared block is p. Emitted syscall ids are
// a seeded permutation of the states.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hidsq/corpus.hpp"
#include "hidsq/manifest.hpp"

namespace hidsq {

using TransitionTable = std::vector<std::vector<double>>;  // rows sum to 1

struct Defects {
  double label_flip_rate = 0.0;
  double duplicate_injection_rate = 0.0;  // target duplicate share per class, < 1
  double imbalance_factor = 1.0;          // intrusion count multiplier

  bool neutral() const noexcept {
    return label_flip_rate == 0.0 && duplicate_injection_rate == 0.0 && imbalance_factor == 1.0;
  }
};

struct SynthSpec {
  std::string name = "synthetic";
  std::size_t vocab_size = 40;
  std::size_t traces_per_class = 200;
  std::size_t min_length = 8;
  std::size_t max_length = 16;
  std::size_t branching = 1;  // successors per state within a block
  double signature_overlap = 0.0;
  // Explicit chains replace the constructed ones (both or neither).
  std::optional<TransitionTable> normal_chain;
  std::optional<TransitionTable> intrusion_chain;
  Defects defects;
  std::uint64_t seed = 0;

  // Throws ValidationError.
  void validate() const;
};

struct Chains {
  TransitionTable normal;
  TransitionTable intrusion;
  std::vector<std::size_t> normal_states;  // start-state support
  std::vector<std::size_t> intrusion_states;
  std::vector<Syscall> ids;  // state -> emitted syscall id
};

// Throws ValidationError unless the table is square, non-negative and every
// row sums to 1 within 1e-9.
void validate_transition_table(const TransitionTable& t, std::size_t vocab_size);

Chains build_chains(const SynthSpec& spec);

// Pure function of spec. Each trace is one process with its own pid
// (unique across the dataset). SynthSpec::defects are applied last.
RawDataset generate(const SynthSpec& spec);

// Order: imbalance (intrusion down-sampled to round(f * count), order kept),
// duplicate injection (per class, round(r * count / (1 - r)) copies drawn
// with replacement and appended with fresh pids), label flips (per class,
// round(q * count) traces moved to the other class). All rates 0 (factor 1)
// returns the input unchanged. Throws std::invalid_argument on rates out of
// range.
RawDataset inject_defects(const RawDataset& ds, const Defects& defects, std::uint64_t seed);

struct WriteOptions {
  std::size_t traces_per_file = 8;
  Syscall max_syscall = kDefaultMaxSyscall;
};

// Writes UNM files (traces interleaved round-robin by event index within
// each file) plus manifest.json under `dir`. Returns the manifest path.
std::filesystem::path write_corpus(const RawDataset& ds, const std::filesystem::path& dir,
                                   const WriteOptions& options = {});

nlohmann::json synth_spec_to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const nlohmann::json& j);

}  // namespace hidsq

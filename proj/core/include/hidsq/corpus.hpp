#pragma once

// Trace ingestion: the two on-disk syscall formats, class-labeled dataset
// assembly from a manifest, and report-only validation.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace hidsq {

using Syscall = std::uint64_t;
using Pid = std::uint64_t;

struct SyscallRecord {
  Pid pid = 0;
  Syscall syscall = 0;

  friend bool operator==(const SyscallRecord&, const SyscallRecord&) = default;
};

// One ordered syscall stream. `pids` is populated only for UNM-format
// sources (one entry per event); ADFA traces carry no PIDs.
struct Trace {
  std::string source_id;
  std::vector<Syscall> events;
  std::vector<Pid> pids;

  bool has_pids() const noexcept { return !pids.empty(); }
  friend bool operator==(const Trace&, const Trace&) = default;
};

enum class TraceFormat { unm, adfa };

std::string_view to_string(TraceFormat f);
TraceFormat parse_trace_format(std::string_view s);

struct DatasetManifest {
  std::string name;
  TraceFormat format = TraceFormat::adfa;
  std::vector<std::filesystem::path> normal_paths;
  std::vector<std::filesystem::path> intrusion_paths;
  // Declared, free-form: year, duration, context, source, reputation, ...
  std::map<std::string, std::string> metadata;

  // Throws ValidationError if the two path lists share an entry.
  void validate() const;
};

struct RawDataset {
  DatasetManifest manifest;
  std::vector<Trace> normal_traces;
  std::vector<Trace> intrusion_traces;
  std::size_t dropped_empty_normal = 0;
  std::size_t dropped_empty_intrusion = 0;
};

// "pid syscall" per line; blank lines skipped. Throws ParseError carrying the
// 1-based line number.
std::vector<SyscallRecord> parse_unm_trace(std::string_view text,
                                           std::string_view source = "<unm>");

// Whitespace-separated non-negative integers. Throws ParseError carrying the
// 1-based token position.
Trace parse_adfa_trace(std::string_view text, std::string_view source = "<adfa>");

std::string format_unm_trace(const std::vector<SyscallRecord>& records);
std::string format_adfa_trace(const Trace& trace);

// Packs parsed UNM records into a single file-level Trace (events + pids).
Trace unm_records_to_trace(const std::vector<SyscallRecord>& records, std::string source_id);
std::vector<SyscallRecord> trace_records(const Trace& trace);

struct LoadOptions {
  // 0 = std::thread::hardware_concurrency().
  std::size_t threads = 0;
};

// Paths are loaded in lexicographic order per class. Empty files are
// dropped and counted. Throws IoError / ParseError / ValidationError.
RawDataset load_dataset(const DatasetManifest& manifest, const LoadOptions& options = {});

struct RangeViolation {
  std::string source_id;
  std::size_t position = 0;  // 0-based event index within the trace
  Syscall value = 0;
};

struct ClassStats {
  std::size_t traces = 0;
  std::size_t events = 0;
  std::size_t empty_traces = 0;   // present in the dataset but empty
  std::size_t dropped_empty = 0;  // files dropped at load time
};

struct ValidationReport {
  ClassStats normal;
  ClassStats intrusion;
  Syscall max_syscall = 0;
  std::vector<RangeViolation> out_of_range;

  bool clean() const noexcept {
    return out_of_range.empty() && normal.empty_traces == 0 && intrusion.empty_traces == 0;
  }
};

// Admissible syscall range is [0, max_syscall]. Report-only.
ValidationReport validate_dataset(const RawDataset& ds, Syscall max_syscall);

inline constexpr Syscall kDefaultMaxSyscall = 512;

}  // namespace hidsq

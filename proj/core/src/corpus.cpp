#include "hidsq/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "hidsq/error.hpp"

namespace hidsq {

std::string_view to_string(TraceFormat f) {
  switch (f) {
    case TraceFormat::unm:
      return "unm";
    case TraceFormat::adfa:
      return "adfa";
  }
  return "?";
}

TraceFormat parse_trace_format(std::string_view s) {
  if (s == "unm") return TraceFormat::unm;
  if (s == "adfa") return TraceFormat::adfa;
  throw ValidationError("unknown trace format '" + std::string(s) + "' (expected unm or adfa)");
}

void DatasetManifest::validate() const {
  std::set<std::filesystem::path> normal;
  for (const auto& p : normal_paths) normal.insert(p.lexically_normal());
  for (const auto& p : intrusion_paths) {
    if (normal.count(p.lexically_normal())) {
      throw ValidationError("manifest '" + name + "': path listed as both normal and intrusion: " +
                            p.string());
    }
  }
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; }

// Splits on ASCII whitespace without allocating.
template <typename F>
void for_each_token(std::string_view text, F&& f) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) f(text.substr(i, j - i));
    i = j;
  }
}

bool parse_u64(std::string_view tok, std::uint64_t& out) {
  if (tok.empty()) return false;
  if (tok.front() == '+') tok.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc{} && ptr == tok.data() + tok.size();
}

std::string describe_token(std::string_view tok) {
  if (!tok.empty() && tok.front() == '-') return "negative value '" + std::string(tok) + "'";
  return "expected non-negative integer, got '" + std::string(tok) + "'";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(path.string(), "read failed");
  return std::move(ss).str();
}

}  // namespace

std::vector<SyscallRecord> parse_unm_trace(std::string_view text, std::string_view source) {
  std::vector<SyscallRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    ++line_no;
    pos = eol + 1;

    std::uint64_t values[2];
    std::size_t count = 0;
    for_each_token(line, [&](std::string_view tok) {
      if (count < 2 && !parse_u64(tok, values[count])) {
        throw ParseError(std::string(source), line_no, describe_token(tok));
      }
      ++count;
    });
    if (count == 0) continue;
    if (count != 2) {
      throw ParseError(std::string(source), line_no,
                       "expected 2 fields (pid syscall), got " + std::to_string(count));
    }
    out.push_back({values[0], values[1]});
  }
  return out;
}

Trace parse_adfa_trace(std::string_view text, std::string_view source) {
  Trace t;
  t.source_id = std::string(source);
  std::size_t position = 0;
  for_each_token(text, [&](std::string_view tok) {
    ++position;
    std::uint64_t v;
    if (!parse_u64(tok, v)) throw ParseError(t.source_id, position, describe_token(tok));
    t.events.push_back(v);
  });
  return t;
}

std::string format_unm_trace(const std::vector<SyscallRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += std::to_string(r.pid);
    out += ' ';
    out += std::to_string(r.syscall);
    out += '\n';
  }
  return out;
}

std::string format_adfa_trace(const Trace& trace) {
  std::string out;
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(trace.events[i]);
  }
  if (!trace.events.empty()) out += '\n';
  return out;
}

Trace unm_records_to_trace(const std::vector<SyscallRecord>& records, std::string source_id) {
  Trace t;
  t.source_id = std::move(source_id);
  t.events.reserve(records.size());
  t.pids.reserve(records.size());
  for (const auto& r : records) {
    t.events.push_back(r.syscall);
    t.pids.push_back(r.pid);
  }
  return t;
}

std::vector<SyscallRecord> trace_records(const Trace& trace) {
  if (!trace.has_pids()) {
    throw std::invalid_argument("trace_records: trace '" + trace.source_id + "' carries no PIDs");
  }
  std::vector<SyscallRecord> out(trace.events.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {trace.pids[i], trace.events[i]};
  return out;
}

namespace {

Trace load_one(const std::filesystem::path& path, TraceFormat format) {
  const std::string text = read_file(path);
  const std::string id = path.string();
  if (format == TraceFormat::unm) return unm_records_to_trace(parse_unm_trace(text, id), id);
  return parse_adfa_trace(text, id);
}

// Parses every path (possibly in parallel) into a slot indexed by position in
// the sorted list, so the merge is independent of scheduling.
std::vector<Trace> load_class(std::vector<std::filesystem::path> paths, TraceFormat format,
                              std::size_t threads, std::size_t& dropped) {
  std::sort(paths.begin(), paths.end());
  std::vector<Trace> slots(paths.size());
  std::vector<std::exception_ptr> errors(paths.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < paths.size(); i = next++) {
      try {
        slots[i] = load_one(paths[i], format);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_workers = std::max<std::size_t>(1, std::min(threads, paths.size()));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<Trace> out;
  out.reserve(slots.size());
  for (auto& t : slots) {
    if (t.events.empty()) {
      ++dropped;
    } else {
      out.push_back(std::move(t));
    }
  }
  return out;
}

}  // namespace

RawDataset load_dataset(const DatasetManifest& manifest, const LoadOptions& options) {
  manifest.validate();
  std::size_t threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  if (threads == 0) threads = 1;
  RawDataset ds;
  ds.manifest = manifest;
  ds.normal_traces =
      load_class(manifest.normal_paths, manifest.format, threads, ds.dropped_empty_normal);
  ds.intrusion_traces =
      load_class(manifest.intrusion_paths, manifest.format, threads, ds.dropped_empty_intrusion);
  return ds;
}

namespace {

void scan_class(const std::vector<Trace>& traces, Syscall max_syscall, ClassStats& stats,
                std::vector<RangeViolation>& violations) {
  stats.traces = traces.size();
  for (const auto& t : traces) {
    stats.events += t.events.size();
    if (t.events.empty()) ++stats.empty_traces;
    for (std::size_t i = 0; i < t.events.size(); ++i) {
      if (t.events[i] > max_syscall) violations.push_back({t.source_id, i, t.events[i]});
    }
  }
}

}  // namespace

ValidationReport validate_dataset(const RawDataset& ds, Syscall max_syscall) {
  if (max_syscall == 0) throw std::invalid_argument("validate_dataset: max_syscall must be > 0");
  ValidationReport r;
  r.max_syscall = max_syscall;
  scan_class(ds.normal_traces, max_syscall, r.normal, r.out_of_range);
  scan_class(ds.intrusion_traces, max_syscall, r.intrusion, r.out_of_range);
  r.normal.dropped_empty = ds.dropped_empty_normal;
  r.intrusion.dropped_empty = ds.dropped_empty_intrusion;
  return r;
}

}  // namespace hidsq

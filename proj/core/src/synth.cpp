#include "hidsq/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "hidsq/error.hpp"
#include "hidsq/rng.hpp"

namespace hidsq {

void SynthSpec::validate() const {
  auto fail = [&](const std::string& what) { throw ValidationError("synth spec '" + name + "': " + what); };
  if (vocab_size < 2) fail("vocab_size must be >= 2");
  if (traces_per_class == 0) fail("traces_per_class must be >= 1");
  if (min_length == 0 || min_length > max_length) fail("need 1 <= min_length <= max_length");
  if (branching == 0) fail("branching must be >= 1");
  if (!(signature_overlap >= 0.0 && signature_overlap <= 1.0)) fail("signature_overlap must be in [0, 1]");
  if (normal_chain.has_value() != intrusion_chain.has_value()) fail("give both chains or neither");
  if (normal_chain) {
    validate_transition_table(*normal_chain, vocab_size);
    validate_transition_table(*intrusion_chain, vocab_size);
  }
  const auto& d = defects;
  if (!(d.label_flip_rate >= 0.0 && d.label_flip_rate <= 1.0)) fail("label_flip_rate must be in [0, 1]");
  if (!(d.duplicate_injection_rate >= 0.0 && d.duplicate_injection_rate < 1.0)) {
    fail("duplicate_injection_rate must be in [0, 1)");
  }
  if (!(d.imbalance_factor >= 0.0 && d.imbalance_factor <= 1.0)) fail("imbalance_factor must be in [0, 1]");
}

void validate_transition_table(const TransitionTable& t, std::size_t vocab_size) {
  if (t.size() != vocab_size) {
    throw ValidationError(fmt::format("transition table has {} rows, expected {}", t.size(), vocab_size));
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].size() != vocab_size) {
      throw ValidationError(fmt::format("transition row {} has {} entries, expected {}", i, t[i].size(), vocab_size));
    }
    double sum = 0.0;
    for (double p : t[i]) {
      if (!(p >= 0.0)) throw ValidationError(fmt::format("transition row {} has a negative or NaN entry", i));
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ValidationError(fmt::format("transition row {} sums to {:.12g}, expected 1", i, sum));
    }
  }
}

namespace {

// Spreads `mass` over `branching` distinct targets drawn from `block`, with
// geometrically decaying weights so every row has a dominant successor.
void add_successors(std::vector<double>& row, const std::vector<std::size_t>& block, std::size_t branching,
                    double mass, Rng& rng) {
  if (block.empty() || mass <= 0.0) return;
  std::vector<std::size_t> pick = block;
  rng.shuffle(pick);
  const std::size_t b = std::min(branching, pick.size());
  double norm = 0.0;
  for (std::size_t k = 0; k < b; ++k) norm += std::ldexp(1.0, -static_cast<int>(k));
  for (std::size_t k = 0; k < b; ++k) row[pick[k]] += mass * std::ldexp(1.0, -static_cast<int>(k)) / norm;
}

void normalize(std::vector<double>& row) {
  const double sum = std::accumulate(row.begin(), row.end(), 0.0);
  for (auto& p : row) p /= sum;
}

}  // namespace

Chains build_chains(const SynthSpec& spec) {
  spec.validate();
  const std::size_t v = spec.vocab_size;
  Chains c;
  Rng perm_rng(derive_seed(spec.seed, "synth-ids"));
  c.ids.resize(v);
  std::iota(c.ids.begin(), c.ids.end(), Syscall{0});
  perm_rng.shuffle(c.ids);

  if (spec.normal_chain) {
    c.normal = *spec.normal_chain;
    c.intrusion = *spec.intrusion_chain;
    c.normal_states.resize(v);
    std::iota(c.normal_states.begin(), c.normal_states.end(), std::size_t{0});
    c.intrusion_states = c.normal_states;
    return c;
  }

  const double p = spec.signature_overlap;
  const auto n_shared = static_cast<std::size_t>(std::lround(p * static_cast<double>(v)));
  const std::size_t n_private = v - n_shared;
  std::vector<std::size_t> shared, priv_n, priv_i;
  for (std::size_t s = 0; s < v; ++s) {
    if (s < n_shared) {
      shared.push_back(s);
    } else if (s < n_shared + (n_private + 1) / 2) {
      priv_n.push_back(s);
    } else {
      priv_i.push_back(s);
    }
  }
  constexpr double kStay = 0.9;
  const double back = shared.empty() ? 0.0 : std::min(0.9, 0.1 * p / (1.0 - p));

  Rng shared_rng(derive_seed(spec.seed, "synth-shared"));
  std::vector<std::vector<double>> shared_rows(v, std::vector<double>(v, 0.0));
  for (std::size_t s : shared) add_successors(shared_rows[s], shared, spec.branching, kStay, shared_rng);

  auto build = [&](const std::vector<std::size_t>& own, std::string_view tag) {
    Rng rng(derive_seed(spec.seed, tag));
    TransitionTable t(v, std::vector<double>(v, 0.0));
    for (std::size_t s = 0; s < v; ++s) {
      auto& row = t[s];
      const bool is_shared = s < n_shared;
      const bool is_own = std::find(own.begin(), own.end(), s) != own.end();
      if (is_shared) {
        row = shared_rows[s];
        // with no private states (overlap near 1) the block keeps all its mass
        if (!own.empty()) add_successors(row, own, spec.branching, 1.0 - kStay, rng);
      } else if (is_own) {
        add_successors(row, shared, spec.branching, back, rng);
        add_successors(row, own, spec.branching, 1.0 - (shared.empty() ? 0.0 : back), rng);
      } else {
        // Unreachable for this class; any valid distribution will do.
        row[own.empty() ? shared.front() : own.front()] = 1.0;
      }
      normalize(row);
    }
    return t;
  };
  c.normal = build(priv_n, "synth-normal-chain");
  c.intrusion = build(priv_i, "synth-intrusion-chain");
  c.normal_states = shared;
  c.normal_states.insert(c.normal_states.end(), priv_n.begin(), priv_n.end());
  c.intrusion_states = shared;
  c.intrusion_states.insert(c.intrusion_states.end(), priv_i.begin(), priv_i.end());
  validate_transition_table(c.normal, v);
  validate_transition_table(c.intrusion, v);
  return c;
}

namespace {

std::size_t sample_row(const std::vector<double>& row, double u) {
  double acc = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    acc += row[j];
    if (u < acc) return j;
  }
  // Rounding left u above the final partial sum: take the last positive entry.
  for (std::size_t j = row.size(); j-- > 0;) {
    if (row[j] > 0.0) return j;
  }
  return 0;
}

std::vector<Trace> generate_class(const SynthSpec& spec, const Chains& c, const TransitionTable& t,
                                  const std::vector<std::size_t>& starts, std::string_view cls, Pid& next_pid) {
  Rng rng(derive_seed(spec.seed, std::string("synth-traces-") + std::string(cls)));
  std::vector<Trace> out(spec.traces_per_class);
  for (std::size_t k = 0; k < out.size(); ++k) {
    Trace& tr = out[k];
    tr.source_id = fmt::format("{}/{}/{:06d}", spec.name, cls, k);
    const std::size_t len = spec.min_length + rng.below(spec.max_length - spec.min_length + 1);
    std::size_t state = starts[rng.below(starts.size())];
    const Pid pid = next_pid++;
    for (std::size_t i = 0; i < len; ++i) {
      tr.events.push_back(c.ids[state]);
      tr.pids.push_back(pid);
      state = sample_row(t[state], rng.uniform());
    }
  }
  return out;
}

}  // namespace

RawDataset generate(const SynthSpec& spec) {
  const Chains c = build_chains(spec);
  RawDataset ds;
  ds.manifest.name = spec.name;
  ds.manifest.format = TraceFormat::unm;
  ds.manifest.metadata = {{"source", "synthetic"},
                          {"context", "seeded Markov-chain corpus"},
                          {"signature_overlap", fmt::format("{}", spec.signature_overlap)},
                          {"seed", std::to_string(spec.seed)}};
  Pid next_pid = 1000;
  ds.normal_traces = generate_class(spec, c, c.normal, c.normal_states, "normal", next_pid);
  ds.intrusion_traces = generate_class(spec, c, c.intrusion, c.intrusion_states, "intrusion", next_pid);
  if (!spec.defects.neutral()) return inject_defects(ds, spec.defects, derive_seed(spec.seed, "synth-defects"));
  return ds;
}

namespace {

Pid max_pid(const RawDataset& ds) {
  Pid m = 0;
  for (const auto* traces : {&ds.normal_traces, &ds.intrusion_traces}) {
    for (const auto& t : *traces) {
      for (Pid p : t.pids) m = std::max(m, p);
    }
  }
  return m;
}

std::size_t rounded(double x) { return static_cast<std::size_t>(std::llround(x)); }

}  // namespace

RawDataset inject_defects(const RawDataset& ds, const Defects& d, std::uint64_t seed) {
  if (!(d.imbalance_factor >= 0.0 && d.imbalance_factor <= 1.0)) {
    throw std::invalid_argument("inject_defects: imbalance_factor must be in [0, 1]");
  }
  if (!(d.duplicate_injection_rate >= 0.0 && d.duplicate_injection_rate < 1.0)) {
    throw std::invalid_argument("inject_defects: duplicate_injection_rate must be in [0, 1)");
  }
  if (!(d.label_flip_rate >= 0.0 && d.label_flip_rate <= 1.0)) {
    throw std::invalid_argument("inject_defects: label_flip_rate must be in [0, 1]");
  }
  RawDataset out = ds;
  if (d.neutral()) return out;

  if (d.imbalance_factor < 1.0) {
    auto& v = out.intrusion_traces;
    const std::size_t keep = rounded(d.imbalance_factor * static_cast<double>(v.size()));
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(derive_seed(seed, "imbalance"));
    rng.shuffle(idx);
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());
    std::vector<Trace> kept;
    for (auto i : idx) kept.push_back(std::move(v[i]));
    v = std::move(kept);
  }

  if (d.duplicate_injection_rate > 0.0) {
    Pid next = max_pid(out) + 1;
    const double r = d.duplicate_injection_rate;
    for (auto [traces, tag] : {std::pair{&out.normal_traces, "dup-normal"}, std::pair{&out.intrusion_traces, "dup-intrusion"}}) {
      const std::size_t n = traces->size();
      if (n == 0) continue;
      const std::size_t m = rounded(r * static_cast<double>(n) / (1.0 - r));
      Rng rng(derive_seed(seed, tag));
      for (std::size_t k = 0; k < m; ++k) {
        Trace copy = (*traces)[rng.below(n)];
        copy.source_id += fmt::format("#dup{}", k);
        if (copy.has_pids()) {
          // Fresh pid per source pid so per-process grouping stays intact.
          std::vector<std::pair<Pid, Pid>> remap;
          for (auto& p : copy.pids) {
            auto it = std::find_if(remap.begin(), remap.end(), [&](const auto& e) { return e.first == p; });
            if (it == remap.end()) {
              remap.push_back({p, next++});
              it = remap.end() - 1;
            }
            p = it->second;
          }
        }
        traces->push_back(std::move(copy));
      }
    }
  }

  if (d.label_flip_rate > 0.0) {
    auto pick = [&](std::vector<Trace>& v, std::string_view tag) {
      const std::size_t m = rounded(d.label_flip_rate * static_cast<double>(v.size()));
      std::vector<std::size_t> idx(v.size());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      Rng rng(derive_seed(seed, tag));
      rng.shuffle(idx);
      idx.resize(m);
      std::sort(idx.begin(), idx.end());
      std::vector<Trace> moved, stay;
      std::size_t j = 0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (j < idx.size() && idx[j] == i) {
          moved.push_back(std::move(v[i]));
          ++j;
        } else {
          stay.push_back(std::move(v[i]));
        }
      }
      v = std::move(stay);
      return moved;
    };
    auto to_intrusion = pick(out.normal_traces, "flip-normal");
    auto to_normal = pick(out.intrusion_traces, "flip-intrusion");
    for (auto& t : to_normal) out.normal_traces.push_back(std::move(t));
    for (auto& t : to_intrusion) out.intrusion_traces.push_back(std::move(t));
  }
  return out;
}

namespace {

std::vector<std::filesystem::path> write_class(const std::vector<Trace>& traces, const std::filesystem::path& dir,
                                               std::string_view cls, std::size_t per_file) {
  std::vector<std::filesystem::path> files;
  const std::size_t n_files = (traces.size() + per_file - 1) / per_file;
  for (std::size_t f = 0; f < n_files; ++f) {
    const std::size_t lo = f * per_file, hi = std::min(traces.size(), lo + per_file);
    std::vector<SyscallRecord> records;
    std::size_t longest = 0;
    for (std::size_t k = lo; k < hi; ++k) longest = std::max(longest, traces[k].events.size());
    for (std::size_t i = 0; i < longest; ++i) {
      for (std::size_t k = lo; k < hi; ++k) {
        const Trace& t = traces[k];
        if (i >= t.events.size()) continue;
        records.push_back({t.has_pids() ? t.pids[i] : static_cast<Pid>(k + 1), t.events[i]});
      }
    }
    const auto path = dir / cls / fmt::format("{}_{:05d}.unm", cls, f);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path.string(), "cannot open for writing");
    out << format_unm_trace(records);
    if (!out) throw IoError(path.string(), "write failed");
    files.push_back(path);
  }
  return files;
}

}  // namespace

std::filesystem::path write_corpus(const RawDataset& ds, const std::filesystem::path& dir,
                                   const WriteOptions& options) {
  if (options.traces_per_file == 0) throw std::invalid_argument("write_corpus: traces_per_file must be >= 1");
  std::error_code ec;
  for (const char* cls : {"normal", "intrusion"}) {
    std::filesystem::create_directories(dir / cls, ec);
    if (ec) throw IoError((dir / cls).string(), ec.message());
  }
  ManifestFile m;
  m.dataset.name = ds.manifest.name;
  m.dataset.format = TraceFormat::unm;
  m.dataset.metadata = ds.manifest.metadata;
  m.dataset.normal_paths = write_class(ds.normal_traces, dir, "normal", options.traces_per_file);
  m.dataset.intrusion_paths = write_class(ds.intrusion_traces, dir, "intrusion", options.traces_per_file);
  m.max_syscall = options.max_syscall;
  const auto path = dir / "manifest.json";
  write_manifest(m, path);
  return path;
}

nlohmann::json synth_spec_to_json(const SynthSpec& s) {
  nlohmann::json j = {{"name", s.name},
                      {"vocab_size", s.vocab_size},
                      {"traces_per_class", s.traces_per_class},
                      {"trace_length", {s.min_length, s.max_length}},
                      {"branching", s.branching},
                      {"signature_overlap", s.signature_overlap},
                      {"seed", s.seed},
                      {"defects",
                       {{"label_flip_rate", s.defects.label_flip_rate},
                        {"duplicate_injection_rate", s.defects.duplicate_injection_rate},
                        {"imbalance_factor", s.defects.imbalance_factor}}}};
  if (s.normal_chain) {
    j["normal_chain"] = *s.normal_chain;
    j["intrusion_chain"] = *s.intrusion_chain;
  }
  return j;
}

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  try {
    SynthSpec s;
    s.name = j.value("name", s.name);
    s.vocab_size = j.value("vocab_size", s.vocab_size);
    s.traces_per_class = j.value("traces_per_class", s.traces_per_class);
    if (j.contains("trace_length")) {
      const auto& l = j.at("trace_length");
      s.min_length = l.at(0).get<std::size_t>();
      s.max_length = l.at(1).get<std::size_t>();
    }
    s.branching = j.value("branching", s.branching);
    s.signature_overlap = j.value("signature_overlap", s.signature_overlap);
    s.seed = j.value("seed", s.seed);
    if (j.contains("defects")) {
      const auto& d = j.at("defects");
      s.defects.label_flip_rate = d.value("label_flip_rate", 0.0);
      s.defects.duplicate_injection_rate = d.value("duplicate_injection_rate", 0.0);
      s.defects.imbalance_factor = d.value("imbalance_factor", 1.0);
    }
    if (j.contains("normal_chain")) s.normal_chain = j.at("normal_chain").get<TransitionTable>();
    if (j.contains("intrusion_chain")) s.intrusion_chain = j.at("intrusion_chain").get<TransitionTable>();
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("synth spec: ") + e.what());
  }
}

}  // namespace hidsq

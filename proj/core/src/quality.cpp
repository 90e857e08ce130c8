#include "hidsq/quality.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "hidsq/error.hpp"

namespace hidsq {

double duplication_rate(std::span<const Sequence> seqs) {
  if (seqs.empty()) throw std::invalid_argument("duplication_rate: empty input");
  std::unordered_set<Sequence, SequenceHash> distinct(seqs.begin(), seqs.end());
  return 1.0 - static_cast<double>(distinct.size()) / static_cast<double>(seqs.size());
}

double cross_class_overlap(std::span<const Sequence> normal, std::span<const Sequence> intrusion) {
  if (normal.empty() || intrusion.empty()) throw std::invalid_argument("cross_class_overlap: empty class");
  std::unordered_set<Sequence, SequenceHash> a(normal.begin(), normal.end());
  std::unordered_set<Sequence, SequenceHash> b(intrusion.begin(), intrusion.end());
  std::size_t common = 0;
  for (const auto& s : b) common += a.count(s);
  const std::size_t uni = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

double class_balance(const SequencePool& pool) {
  const ClassCounts c = pool.counts();
  if (c.normal == 0 || c.intrusion == 0) throw std::invalid_argument("class_balance: a class is missing");
  return static_cast<double>(std::min(c.normal, c.intrusion)) / static_cast<double>(std::max(c.normal, c.intrusion));
}

Variety variety(std::span<const Sequence> seqs, std::size_t vocab_size) {
  if (vocab_size == 0) throw std::invalid_argument("variety: vocab_size must be > 0");
  Variety v;
  std::unordered_set<Sequence, SequenceHash> distinct(seqs.begin(), seqs.end());
  v.distinct_grams = distinct.size();
  std::set<Syscall> vocab;
  std::vector<std::set<Syscall>> per_pos;
  for (const auto& s : seqs) {
    if (per_pos.size() < s.size()) per_pos.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      vocab.insert(s.grams[i]);
      per_pos[i].insert(s.grams[i]);
    }
  }
  auto coverage = [&](const std::set<Syscall>& ids) {
    const auto in_range = static_cast<std::size_t>(
        std::distance(ids.begin(), ids.lower_bound(static_cast<Syscall>(vocab_size))));
    return static_cast<double>(in_range) / static_cast<double>(vocab_size);
  };
  v.observed_vocabulary = vocab.size();
  v.vocabulary_coverage = coverage(vocab);
  for (const auto& ids : per_pos) v.position_coverage.push_back(coverage(ids));
  return v;
}

ConsistencyReport consistency_check(const RawDataset& ds, Syscall max_syscall) {
  ConsistencyReport r;
  auto scan_range = [&](const std::vector<Trace>& traces) {
    for (const auto& t : traces) {
      for (Syscall s : t.events) r.out_of_range += (s > max_syscall);
    }
  };
  scan_range(ds.normal_traces);
  scan_range(ds.intrusion_traces);
  if (ds.manifest.format != TraceFormat::unm) return r;

  // pid -> first file index it was seen in; -1 once seen in a second file.
  std::unordered_map<Pid, std::ptrdiff_t> home;
  std::ptrdiff_t file = 0;
  for (const auto* traces : {&ds.normal_traces, &ds.intrusion_traces}) {
    for (const auto& t : *traces) {
      for (Pid p : t.pids) {
        auto [it, inserted] = home.try_emplace(p, file);
        if (!inserted && it->second != file && it->second != -1) {
          it->second = -1;
          ++r.interleaving;
        }
      }
      ++file;
    }
  }
  return r;
}

QualityScorecard scorecard(const RawDataset& ds, const SequencePool& pool, const PreparedSplit& split,
                           Syscall max_syscall) {
  QualityScorecard c;
  c.dataset = ds.manifest.name;
  c.provenance = pool.provenance;
  const auto normal = pool.of_class(kNormal);
  const auto intrusion = pool.of_class(kIntrusion);
  c.n_normal = normal.size();
  c.n_intrusion = intrusion.size();
  if (normal.empty() || intrusion.empty()) {
    throw PipelineError("scorecard for '" + c.dataset + "': a class has no sequences");
  }
  c.duplication_normal = duplication_rate(normal);
  c.duplication_intrusion = duplication_rate(intrusion);
  c.cross_class_overlap = cross_class_overlap(normal, intrusion);
  c.class_balance = class_balance(pool);
  std::vector<Sequence> all;
  all.reserve(pool.sequences.size());
  for (const auto& s : pool.sequences) all.push_back(s.seq);
  c.variety = variety(all, static_cast<std::size_t>(max_syscall) + 1);
  c.consistency = consistency_check(ds, max_syscall);
  c.train_test_value_overlap = train_test_value_overlap(split);
  for (const char* key : kDeclaredKeys) {
    auto it = ds.manifest.metadata.find(key);
    c.declared[key] = (it == ds.manifest.metadata.end() || it->second.empty()) ? kUndeclared : it->second;
  }
  return c;
}

std::vector<BeforeAfterRow> before_after(std::span<const MetricsReport> reports) {
  struct Acc {
    double recall = 0, fpr = 0, n_neg = 0;
    std::size_t n = 0;
  };
  std::map<std::string, std::map<std::string, Acc>> by;
  for (const auto& r : reports) {
    Acc& a = by[r.dataset][r.provenance];
    a.recall += r.rates.recall;
    a.fpr += r.rates.fpr;
    a.n_neg += static_cast<double>(r.n_neg);
    ++a.n;
  }
  std::vector<BeforeAfterRow> rows;
  for (const auto& [ds, provs] : by) {
    auto o = provs.find("original");
    auto p = provs.find("processed");
    if (o == provs.end() || p == provs.end()) {
      throw ValidationError("before/after comparison: dataset '" + ds + "' lacks " +
                            (o == provs.end() ? "original" : "processed") + " reports");
    }
    const Acc& ao = o->second;
    const Acc& ap = p->second;
    BeforeAfterRow row;
    row.dataset = ds;
    row.avg_recall_orig = ao.recall / static_cast<double>(ao.n);
    row.avg_fpr_orig = ao.fpr / static_cast<double>(ao.n);
    row.avg_recall_proc = ap.recall / static_cast<double>(ap.n);
    row.avg_fpr_proc = ap.fpr / static_cast<double>(ap.n);
    row.epsilon = ratio_epsilon(ap.n_neg / static_cast<double>(ap.n));
    row.fpr_ratio = row.avg_fpr_orig / std::max(row.avg_fpr_proc, row.epsilon);
    row.recall_ratio = row.avg_recall_proc / std::max(row.avg_recall_orig, row.epsilon);
    row.models = ap.n;
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::string num(double v) { return fmt::format("{:.6f}", v); }

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

}  // namespace

void write_scorecard_csv(std::span<const QualityScorecard> cards, std::ostream& out) {
  out << "dataset,provenance,n_normal,n_intrusion,duplication_normal,duplication_intrusion,cross_class_overlap,"
         "class_balance,distinct_grams,observed_vocabulary,vocabulary_coverage,position_coverage,"
         "consistency_out_of_range,consistency_interleaving,consistency_violations,train_test_value_overlap";
  for (const char* k : kDeclaredKeys) out << ',' << k;
  out << '\n';
  for (const auto& c : cards) {
    std::string pos;
    for (std::size_t i = 0; i < c.variety.position_coverage.size(); ++i) {
      pos += (i ? ";" : "") + num(c.variety.position_coverage[i]);
    }
    out << c.dataset << ',' << to_string(c.provenance) << ',' << c.n_normal << ',' << c.n_intrusion << ','
        << num(c.duplication_normal) << ',' << num(c.duplication_intrusion) << ',' << num(c.cross_class_overlap)
        << ',' << num(c.class_balance) << ',' << c.variety.distinct_grams << ',' << c.variety.observed_vocabulary
        << ',' << num(c.variety.vocabulary_coverage) << ',' << pos << ',' << c.consistency.out_of_range << ','
        << c.consistency.interleaving << ',' << c.consistency.total() << ',' << num(c.train_test_value_overlap);
    for (const char* k : kDeclaredKeys) out << ',' << quoted(c.declared.at(k));
    out << '\n';
  }
}

void write_before_after_csv(std::span<const BeforeAfterRow> rows, std::ostream& out) {
  out << "dataset,avg_recall_orig,avg_recall_proc,avg_fpr_orig,avg_fpr_proc,fpr_ratio,recall_ratio,epsilon,models\n";
  for (const auto& r : rows) {
    out << r.dataset << ',' << num(r.avg_recall_orig) << ',' << num(r.avg_recall_proc) << ',' << num(r.avg_fpr_orig)
        << ',' << num(r.avg_fpr_proc) << ',' << num(r.fpr_ratio) << ',' << num(r.recall_ratio) << ','
        << num(r.epsilon) << ',' << r.models << '\n';
  }
}

}  // namespace hidsq

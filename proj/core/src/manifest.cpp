#include "hidsq/manifest.hpp"

#include <fstream>

#include "hidsq/error.hpp"

namespace hidsq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<fs::path> resolve_paths(const json& j, const char* key, const fs::path& base) {
  std::vector<fs::path> out;
  if (!j.contains(key)) return out;
  if (!j.at(key).is_array()) throw ValidationError(std::string("manifest: '") + key + "' must be a list");
  for (const auto& p : j.at(key)) {
    fs::path path = p.get<std::string>();
    out.push_back(path.is_absolute() ? path : (base / path).lexically_normal());
  }
  return out;
}

}  // namespace

PipelineConfig pipeline_from_json(const json& j, PipelineConfig cfg) {
  if (j.contains("n")) cfg.n = j.at("n").get<std::size_t>();
  if (j.contains("stride")) cfg.stride = j.at("stride").get<std::size_t>();
  if (j.contains("balance")) cfg.balance = parse_balance_policy(j.at("balance").get<std::string>());
  if (j.contains("ratio")) cfg.ratio = j.at("ratio").get<double>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("dedup")) cfg.dedup = j.at("dedup").get<bool>();
  return cfg;
}

json pipeline_to_json(const PipelineConfig& cfg) {
  return json{{"n", cfg.n},
              {"stride", cfg.stride},
              {"balance", std::string(to_string(cfg.balance))},
              {"ratio", cfg.ratio},
              {"seed", cfg.seed},
              {"dedup", cfg.dedup}};
}

ManifestFile parse_manifest(const json& j, const fs::path& base_dir) {
  try {
    if (!j.is_object()) throw ValidationError("manifest: top level must be an object");
    if (j.contains("manifest_version") && j.at("manifest_version").get<int>() != 1) {
      throw ValidationError("manifest: unsupported manifest_version");
    }
    ManifestFile m;
    m.dataset.name = j.at("name").get<std::string>();
    m.dataset.format = parse_trace_format(j.at("format").get<std::string>());
    m.dataset.normal_paths = resolve_paths(j, "normal", base_dir);
    m.dataset.intrusion_paths = resolve_paths(j, "intrusion", base_dir);
    if (j.contains("metadata")) {
      for (const auto& [k, v] : j.at("metadata").items()) {
        m.dataset.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
    }
    if (j.contains("max_syscall")) m.max_syscall = j.at("max_syscall").get<Syscall>();
    if (j.contains("pipeline")) m.pipeline = pipeline_from_json(j.at("pipeline"));
    m.pipeline.validate();
    m.dataset.validate();
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
}

ManifestFile load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open manifest");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return parse_manifest(j, path.parent_path());
}

json manifest_to_json(const ManifestFile& m, const fs::path& base_dir) {
  auto rel = [&](const std::vector<fs::path>& ps) {
    json arr = json::array();
    for (const auto& p : ps) arr.push_back(p.lexically_relative(base_dir).generic_string());
    return arr;
  };
  json meta = json::object();
  for (const auto& [k, v] : m.dataset.metadata) meta[k] = v;
  return json{{"manifest_version", 1},
              {"name", m.dataset.name},
              {"format", std::string(to_string(m.dataset.format))},
              {"normal", rel(m.dataset.normal_paths)},
              {"intrusion", rel(m.dataset.intrusion_paths)},
              {"max_syscall", m.max_syscall},
              {"metadata", meta},
              {"pipeline", pipeline_to_json(m.pipeline)}};
}

void write_manifest(const ManifestFile& m, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string(), "cannot write manifest");
  out << manifest_to_json(m, path.parent_path()).dump(2) << '\n';
}

}  // namespace hidsq

#pragma once

// On-disk dataset manifest (JSON). Schema, version 1:
//
//   {
//     "manifest_version": 1,
//     "name": "live-lpr",
//     "format": "unm" | "adfa",
//     "normal": ["normal/a.trace", ...],      // relative to the manifest dir
//     "intrusion": ["intrusion/b.trace", ...],
//     "max_syscall": 512,                      // optional
//     "metadata": {"year": "1999", ...},       // optional, string values
//     "pipeline": {"n": 6, "stride": 1, "balance": "bootstrap_to_max",
//                  "ratio": 0.7, "seed": 0, "dedup": true}   // optional
//   }

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "hidsq/corpus.hpp"
#include "hidsq/preprocess.hpp"

namespace hidsq {

struct ManifestFile {
  DatasetManifest dataset;  // paths already resolved against the manifest dir
  PipelineConfig pipeline;
  Syscall max_syscall = kDefaultMaxSyscall;
};

ManifestFile parse_manifest(const nlohmann::json& j, const std::filesystem::path& base_dir);
ManifestFile load_manifest(const std::filesystem::path& path);

nlohmann::json pipeline_to_json(const PipelineConfig& cfg);
PipelineConfig pipeline_from_json(const nlohmann::json& j, PipelineConfig defaults = {});

// Paths are written relative to `base_dir` when possible.
nlohmann::json manifest_to_json(const ManifestFile& m, const std::filesystem::path& base_dir);
void write_manifest(const ManifestFile& m, const std::filesystem::path& path);

}  // namespace hidsq

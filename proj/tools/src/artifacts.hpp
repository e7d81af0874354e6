#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tailchain/excursions.hpp"
#include "tailchain/response.hpp"

namespace tailchain::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string sha256_file(const fs::path& path);

/// Records the job and content hashes. Each input that has its own manifest
/// is linked through that manifest's hash.
struct Manifest {
  std::string command;
  json config;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  json extra = json::object();
};

fs::path manifest_path(const fs::path& artifact);
void write_manifest(const Manifest& m);

/// One row per stored time point, keyed by excursion id.
void write_ensemble_csv(const std::vector<Excursion>& excursions, const fs::path& path);
std::vector<Excursion> read_ensemble_csv(const fs::path& path);

void write_json(const json& j, const fs::path& path);
json read_json(const fs::path& path);

}  // namespace tailchain::cli

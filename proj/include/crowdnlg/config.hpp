#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crowdnlg/validation.hpp"

namespace crowdnlg {

struct BatchConfig {
  std::string id;
  Modality modality = Modality::Textual;
  std::vector<std::string> mrs;  // empty means the whole MR set
  int max_pages_per_worker = 20;
  std::optional<Timestamp> open_from;
  std::optional<Timestamp> open_until;

  bool is_open(Timestamp now) const;
};

struct CountryResolverConfig {
  std::string kind = "header";  // "header" | "static" | "prefix"
  std::string header = "X-Country-Code";
  std::string code;                           // static
  std::map<std::string, std::string> prefixes;  // address prefix -> code
};

/// Paths are resolved against the directory of the config file.
struct AppConfig {
  std::optional<std::filesystem::path> schema;
  std::optional<std::filesystem::path> validation;
  std::optional<std::filesystem::path> lexicon;
  std::optional<std::filesystem::path> glyphs;
  std::filesystem::path mr_set = "mrs.json";
  std::vector<BatchConfig> batches;
  std::filesystem::path store = "corpus.jsonl";
  std::string similarity_endpoint;
  std::optional<std::filesystem::path> similarity_cache;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string token;
  CountryResolverConfig country_resolver;
  int task_ttl_seconds = 3600;
  std::uint64_t render_seed = 1;
};

/// Accepts "YYYY-MM-DDTHH:MM:SSZ" or integral epoch seconds.
Timestamp parse_timestamp(std::string_view s);
std::string format_timestamp(Timestamp t);

std::vector<BatchConfig> batches_from_json(std::string_view json_text);
AppConfig config_from_json(std::string_view json_text, const std::filesystem::path& base_dir = {});
AppConfig load_config(const std::filesystem::path& path);

/// CROWDNLG_SCHEMA, CROWDNLG_VALIDATION, CROWDNLG_BATCHES (a JSON file with a
/// "batches" array), CROWDNLG_STORE. The similarity endpoint is resolved
/// separately and the config value wins over CROWDNLG_SIMILARITY_ENDPOINT.
void apply_env_overrides(AppConfig& config);

std::string default_config_json();

}  // namespace crowdnlg

#include "crowdnlg/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace crowdnlg {

bool BatchConfig::is_open(Timestamp now) const {
  if (open_from && now < *open_from) return false;
  if (open_until && now >= *open_until) return false;
  return true;
}

Timestamp parse_timestamp(std::string_view s) {
  const std::string str(s);
  if (!str.empty() && str.find_first_not_of("0123456789-") == std::string::npos) {
    return Timestamp(std::chrono::seconds(std::stoll(str)));
  }
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  char z = 0;
  if (std::sscanf(str.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &sec, &z) != 7 || z != 'Z') {
    throw std::invalid_argument("bad timestamp '" + str + "'");
  }
  const std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(mo), std::chrono::day(d)};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) throw std::invalid_argument("bad timestamp '" + str + "'");
  return std::chrono::sys_days(ymd) + std::chrono::hours(h) + std::chrono::minutes(mi) + std::chrono::seconds(sec);
}

std::string format_timestamp(Timestamp t) {
  const auto days = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day ymd(days);
  const std::chrono::hh_mm_ss hms(t - days);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

namespace {

Timestamp timestamp_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return Timestamp(std::chrono::seconds(j.get<std::int64_t>()));
  return parse_timestamp(j.get<std::string>());
}

std::vector<BatchConfig> parse_batches(const nlohmann::json& arr) {
  std::vector<BatchConfig> out;
  for (const auto& b : arr) {
    BatchConfig batch;
    batch.id = b.at("id").get<std::string>();
    batch.modality = modality_from_string(b.at("modality").get<std::string>());
    if (b.contains("mrs")) batch.mrs = b["mrs"].get<std::vector<std::string>>();
    batch.max_pages_per_worker = b.value("max_pages_per_worker", 20);
    if (batch.max_pages_per_worker < 1) throw std::invalid_argument("max_pages_per_worker must be >= 1");
    if (b.contains("open_window")) {
      const auto& w = b["open_window"];
      if (w.contains("from") && !w["from"].is_null()) batch.open_from = timestamp_from_json(w["from"]);
      if (w.contains("until") && !w["until"].is_null()) batch.open_until = timestamp_from_json(w["until"]);
    }
    for (const auto& other : out) {
      if (other.id == batch.id) throw std::invalid_argument("duplicate batch id " + batch.id);
    }
    out.push_back(std::move(batch));
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::vector<BatchConfig> batches_from_json(std::string_view json_text) {
  const auto j = nlohmann::json::parse(json_text);
  return parse_batches(j.is_array() ? j : j.at("batches"));
}

AppConfig config_from_json(std::string_view json_text, const std::filesystem::path& base_dir) {
  const auto j = nlohmann::json::parse(json_text);
  AppConfig c;
  const auto opt_path = [&](const char* key, std::optional<std::filesystem::path>& dst) {
    if (j.contains(key) && !j[key].is_null()) dst = resolve(base_dir, j[key].get<std::string>());
  };
  opt_path("schema", c.schema);
  opt_path("validation", c.validation);
  opt_path("lexicon", c.lexicon);
  opt_path("glyphs", c.glyphs);
  c.mr_set = resolve(base_dir, j.value("mr_set", std::string("mrs.json")));
  if (j.contains("batches")) c.batches = parse_batches(j["batches"]);
  c.store = resolve(base_dir, j.value("store", std::string("corpus.jsonl")));
  if (j.contains("similarity")) {
    const auto& s = j["similarity"];
    c.similarity_endpoint = s.value("endpoint", std::string());
    if (s.contains("cache") && !s["cache"].is_null()) c.similarity_cache = resolve(base_dir, s["cache"].get<std::string>());
  }
  if (j.contains("server")) {
    const auto& s = j["server"];
    c.host = s.value("host", c.host);
    c.port = s.value("port", c.port);
    c.token = s.value("token", std::string());
  }
  if (j.contains("country_resolver")) {
    const auto& r = j["country_resolver"];
    c.country_resolver.kind = r.value("kind", c.country_resolver.kind);
    c.country_resolver.header = r.value("header", c.country_resolver.header);
    c.country_resolver.code = r.value("code", std::string());
    if (r.contains("prefixes")) c.country_resolver.prefixes = r["prefixes"].get<std::map<std::string, std::string>>();
    const auto& k = c.country_resolver.kind;
    if (k != "header" && k != "static" && k != "prefix") throw std::invalid_argument("unknown country resolver " + k);
  }
  c.task_ttl_seconds = j.value("task_ttl_seconds", c.task_ttl_seconds);
  if (c.task_ttl_seconds < 1) throw std::invalid_argument("task_ttl_seconds must be >= 1");
  c.render_seed = j.value("render_seed", c.render_seed);
  return c;
}

AppConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_file(path), path.parent_path());
}

void apply_env_overrides(AppConfig& config) {
  if (const char* v = std::getenv("CROWDNLG_SCHEMA"); v && *v) config.schema = v;
  if (const char* v = std::getenv("CROWDNLG_VALIDATION"); v && *v) config.validation = v;
  if (const char* v = std::getenv("CROWDNLG_BATCHES"); v && *v) config.batches = batches_from_json(read_file(v));
  if (const char* v = std::getenv("CROWDNLG_STORE"); v && *v) config.store = v;
}

std::string default_config_json() {
  nlohmann::ordered_json j;
  j["schema"] = "schema.json";
  j["validation"] = "validation.json";
  j["lexicon"] = "lexicon.json";
  j["glyphs"] = "glyphs";
  j["mr_set"] = "mrs.json";
  j["batches"] = {
      {{"id", "textual"}, {"modality", "textual"}, {"max_pages_per_worker", 20}},
      {{"id", "pictorial"}, {"modality", "pictorial"}, {"max_pages_per_worker", 20}},
  };
  j["store"] = "corpus.jsonl";
  j["similarity"] = {{"endpoint", ""}, {"cache", "similarity_cache.jsonl"}};
  j["server"] = {{"host", "127.0.0.1"}, {"port", 8080}, {"token", ""}};
  j["country_resolver"] = {{"kind", "header"}, {"header", "X-Country-Code"}};
  j["task_ttl_seconds"] = 3600;
  j["render_seed"] = 1;
  return j.dump(2) + "\n";
}

}  // namespace crowdnlg

#include "crowdnlg/validation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crowdnlg/text.hpp"

namespace crowdnlg {

std::string_view to_string(Modality m) {
  return m == Modality::Textual ? "textual" : "pictorial";
}

Modality modality_from_string(std::string_view s) {
  if (s == "textual") return Modality::Textual;
  if (s == "pictorial") return Modality::Pictorial;
  throw std::invalid_argument("unknown modality '" + std::string(s) + "'");
}

ValidationConfig validation_config_from_json(std::string_view json_text) {
  const auto doc = nlohmann::json::parse(json_text);
  ValidationConfig config;
  if (doc.contains("legal_symbols")) {
    config.legal_symbols.clear();
    for (const auto& cp : doc["legal_symbols"]) {
      const auto v = cp.get<std::uint32_t>();
      if (v > 0x10FFFF) throw std::invalid_argument("legal symbol out of Unicode range");
      config.legal_symbols.insert(static_cast<char32_t>(v));
    }
  }
  config.attr_name_allowance = doc.value("attr_name_allowance", config.attr_name_allowance);
  config.min_page_seconds = doc.value("min_page_seconds", config.min_page_seconds);
  config.min_length_floor = doc.value("min_length_floor", config.min_length_floor);
  if (doc.contains("allowed_countries")) {
    config.allowed_countries.clear();
    for (const auto& c : doc["allowed_countries"]) config.allowed_countries.insert(c.get<std::string>());
  }
  if (config.attr_name_allowance <= 0) throw std::invalid_argument("attr_name_allowance must be > 0");
  if (config.min_page_seconds < 0) throw std::invalid_argument("min_page_seconds must be >= 0");
  return config;
}

ValidationConfig load_validation_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open validation config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return validation_config_from_json(buf.str());
}

std::string validation_config_to_json(const ValidationConfig& config) {
  nlohmann::ordered_json doc;
  std::vector<std::uint32_t> symbols(config.legal_symbols.begin(), config.legal_symbols.end());
  doc["legal_symbols"] = symbols;
  doc["attr_name_allowance"] = config.attr_name_allowance;
  doc["min_page_seconds"] = config.min_page_seconds;
  doc["allowed_countries"] = config.allowed_countries;
  doc["min_length_floor"] = config.min_length_floor;
  return doc.dump(2) + "\n";
}

bool ValidationReport::accepted() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.second.pass; });
}

const Verdict* ValidationReport::find(std::string_view name) const {
  for (const auto& [n, v] : verdicts) {
    if (n == name) return &v;
  }
  return nullptr;
}

std::vector<std::string> ValidationReport::failed() const {
  std::vector<std::string> names;
  for (const auto& [n, v] : verdicts) {
    if (!v.pass) names.push_back(n);
  }
  return names;
}

Verdict check_legal_characters(std::string_view text, const ValidationConfig& config) {
  const auto cps = text::decode_utf8(text);
  std::string offending;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t cp = cps[i];
    if (text::is_letter(cp) || text::is_digit(cp) || text::is_whitespace(cp) ||
        config.legal_symbols.count(cp) != 0) {
      continue;
    }
    if (!offending.empty()) offending += ", ";
    offending += "'";
    text::append_utf8(offending, cp);
    offending += "' at " + std::to_string(i);
  }
  if (offending.empty()) return Verdict::ok();
  return Verdict::fail("illegal characters: " + offending);
}

int min_required_length(const MeaningRepresentation& mr, const ValidationConfig& config) {
  const auto length = static_cast<long long>(mr_char_length(mr));
  const auto raw = length - static_cast<long long>(mr.complexity()) * config.attr_name_allowance;
  return static_cast<int>(std::max<long long>(config.min_length_floor, raw));
}

Verdict check_min_length(std::string_view text, const MeaningRepresentation& mr,
                         const ValidationConfig& config) {
  const auto length = text::code_point_count(text);
  const auto required = min_required_length(mr, config);
  if (static_cast<long long>(length) >= required) return Verdict::ok();
  return Verdict::fail("utterance has " + std::to_string(length) + " characters; at least " +
                       std::to_string(required) + " required");
}

Verdict check_required_elements(std::string_view text, const MeaningRepresentation& mr,
                                const DomainSchema& schema) {
  const auto haystack = text::normalize_utterance(text);
  std::string missing;
  for (const auto& [attr, value] : mr.pairs) {
    const auto* spec = schema.find(attr);
    if (spec == nullptr || spec->kind != AttributeKind::VerbatimString) continue;
    if (haystack.find(text::normalize_utterance(value)) == std::string::npos) {
      if (!missing.empty()) missing += ", ";
      missing += attr + "=\"" + value + "\"";
    }
  }
  if (missing.empty()) return Verdict::ok();
  return Verdict::fail("missing required elements: " + missing);
}

Verdict check_duplicate(std::string_view text, const std::vector<std::string>& worker_history) {
  const auto needle = text::normalize_utterance(text);
  for (std::size_t i = 0; i < worker_history.size(); ++i) {
    if (text::normalize_utterance(worker_history[i]) == needle) {
      return Verdict::fail("same as earlier submission #" + std::to_string(i + 1));
    }
  }
  return Verdict::ok();
}

Verdict check_timing(Timestamp issued_at, Timestamp submitted_at, const ValidationConfig& config) {
  const auto elapsed = (submitted_at - issued_at).count();
  if (elapsed >= config.min_page_seconds) return Verdict::ok();
  return Verdict::fail("page completed in " + std::to_string(elapsed) + "s; minimum is " +
                       std::to_string(config.min_page_seconds) + "s");
}

bool is_assigned_country_code(std::string_view code) {
  // ISO 3166-1 alpha-2 officially assigned codes.
  static constexpr std::string_view kAssigned =
      "AD AE AF AG AI AL AM AO AQ AR AS AT AU AW AX AZ BA BB BD BE BF BG BH BI BJ BL BM BN BO BQ "
      "BR BS BT BV BW BY BZ CA CC CD CF CG CH CI CK CL CM CN CO CR CU CV CW CX CY CZ DE DJ DK DM "
      "DO DZ EC EE EG EH ER ES ET FI FJ FK FM FO FR GA GB GD GE GF GG GH GI GL GM GN GP GQ GR GS "
      "GT GU GW GY HK HM HN HR HT HU ID IE IL IM IN IO IQ IR IS IT JE JM JO JP KE KG KH KI KM KN "
      "KP KR KW KY KZ LA LB LC LI LK LR LS LT LU LV LY MA MC MD ME MF MG MH MK ML MM MN MO MP MQ "
      "MR MS MT MU MV MW MX MY MZ NA NC NE NF NG NI NL NO NP NR NU NZ OM PA PE PF PG PH PK PL PM "
      "PN PR PS PT PW PY QA RE RO RS RU RW SA SB SC SD SE SG SH SI SJ SK SL SM SN SO SR SS ST SV "
      "SX SY SZ TC TD TF TG TH TJ TK TL TM TN TO TR TT TV TW TZ UA UG UM US UY UZ VA VC VE VG VI "
      "VN VU WF WS YE YT ZA ZM ZW";
  if (code.size() != 2) return false;
  for (std::size_t i = 0; i + 2 <= kAssigned.size(); i += 3) {
    if (kAssigned.substr(i, 2) == code) return true;
  }
  return false;
}

Verdict check_locale(std::string_view country_code, const ValidationConfig& config) {
  if (!is_assigned_country_code(country_code)) {
    return Verdict::fail("unknown country code '" + std::string(country_code) + "'");
  }
  if (config.allowed_countries.count(std::string(country_code)) != 0) return Verdict::ok();
  return Verdict::fail("country '" + std::string(country_code) + "' is not allowed");
}

ValidationReport validate_submission(const Submission& sub, const MeaningRepresentation& mr,
                                     const DomainSchema& schema,
                                     const std::vector<std::string>& history,
                                     const ValidationConfig& config) {
  ValidationReport report;
  report.verdicts.emplace_back(validator::kLegalCharacters, check_legal_characters(sub.text, config));
  report.verdicts.emplace_back(validator::kMinLength, check_min_length(sub.text, mr, config));
  report.verdicts.emplace_back(validator::kRequiredElements,
                               check_required_elements(sub.text, mr, schema));
  report.verdicts.emplace_back(validator::kDuplicate, check_duplicate(sub.text, history));
  report.verdicts.emplace_back(validator::kTiming,
                               check_timing(sub.issued_at, sub.submitted_at, config));
  report.verdicts.emplace_back(validator::kLocale, check_locale(sub.country_code, config));
  return report;
}

}  // namespace crowdnlg

#pragma once

#include <chrono>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "crowdnlg/mr.hpp"

namespace crowdnlg {

using Timestamp = std::chrono::sys_seconds;

enum class Modality { Textual, Pictorial };
std::string_view to_string(Modality m);
Modality modality_from_string(std::string_view s);  // throws std::invalid_argument

struct Submission {
  std::string worker_id;
  std::string mr_id;
  std::string text;
  Timestamp issued_at{};
  Timestamp submitted_at{};
  Modality modality = Modality::Textual;
  std::string batch_id;
  std::string country_code;
};

struct ValidationConfig {
  // Characters allowed besides letters, digits and whitespace.
  std::set<char32_t> legal_symbols{U',', U'.', U':', U';', U'£', U'\'', U'"'};
  int attr_name_allowance = 10;
  int min_page_seconds = 20;
  std::set<std::string> allowed_countries{"CA", "GB", "US"};
  int min_length_floor = 1;
};

/// Legal symbols are stored as a list of code points. Throws
/// std::invalid_argument on invariant violations.
ValidationConfig validation_config_from_json(std::string_view json_text);
ValidationConfig load_validation_config(const std::filesystem::path& path);
std::string validation_config_to_json(const ValidationConfig& config);

struct Verdict {
  bool pass = true;
  std::string detail;

  static Verdict ok() { return {true, {}}; }
  static Verdict fail(std::string why) { return {false, std::move(why)}; }
};

namespace validator {
inline constexpr std::string_view kLegalCharacters = "legal_characters";
inline constexpr std::string_view kMinLength = "min_length";
inline constexpr std::string_view kRequiredElements = "required_elements";
inline constexpr std::string_view kDuplicate = "duplicate";
inline constexpr std::string_view kTiming = "timing";
inline constexpr std::string_view kLocale = "locale";
}  // namespace validator

struct ValidationReport {
  // In evaluation order; one entry per validator.
  std::vector<std::pair<std::string, Verdict>> verdicts;

  bool accepted() const;
  const Verdict* find(std::string_view name) const;
  std::vector<std::string> failed() const;
};

Verdict check_legal_characters(std::string_view text, const ValidationConfig& config);
int min_required_length(const MeaningRepresentation& mr, const ValidationConfig& config);
Verdict check_min_length(std::string_view text, const MeaningRepresentation& mr,
                         const ValidationConfig& config);
Verdict check_required_elements(std::string_view text, const MeaningRepresentation& mr,
                                const DomainSchema& schema);
Verdict check_duplicate(std::string_view text, const std::vector<std::string>& worker_history);
Verdict check_timing(Timestamp issued_at, Timestamp submitted_at, const ValidationConfig& config);
Verdict check_locale(std::string_view country_code, const ValidationConfig& config);

bool is_assigned_country_code(std::string_view code);

/// Runs every validator; none short-circuits.
ValidationReport validate_submission(const Submission& sub, const MeaningRepresentation& mr,
                                     const DomainSchema& schema,
                                     const std::vector<std::string>& history,
                                     const ValidationConfig& config);

}  // namespace crowdnlg

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <vector>

#include "crowdnlg/mr.hpp"
#include "crowdnlg/schema.hpp"

namespace crowdnlg {

struct MrSetRequest {
  std::map<int, int> counts;  // complexity -> number of MRs
  std::uint64_t seed = 0;
  DomainSchema schema;
};

class InfeasibleRequest : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Generates distinct MRs per complexity. 3- and 5-attribute MRs always
/// contain `name`; the remaining slots go to the least-used attributes so
/// that, over all 3/5-attribute MRs, per-attribute usage counts differ by at
/// most one. Ties are broken by the seeded RNG. Deterministic in the request.
std::vector<MeaningRepresentation> generate_balanced_set(const MrSetRequest& request);

/// Usage count of every non-`name` attribute over the 3/5-attribute MRs.
std::map<std::string, int> attribute_usage(const std::vector<MeaningRepresentation>& mrs);

/// MR set file: {"mrs":[{"id":"mr-001","mr":"<canonical text>"}, ...]}
std::string mr_set_to_json(const std::vector<MeaningRepresentation>& mrs, const DomainSchema& schema);
std::vector<MeaningRepresentation> mr_set_from_json(std::string_view json_text, const DomainSchema& schema);
std::vector<MeaningRepresentation> load_mr_set(const std::filesystem::path& path, const DomainSchema& schema);

}  // namespace crowdnlg

#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowdnlg/stats.hpp"
#include "crowdnlg/store.hpp"

namespace crowdnlg::analysis {

enum class Metric { Duration, CharLength, SentenceCount, Informativeness, Naturalness, Phrasing };
inline constexpr std::array<Metric, 6> kMetrics{Metric::Duration,        Metric::CharLength,
                                                Metric::SentenceCount,   Metric::Informativeness,
                                                Metric::Naturalness,     Metric::Phrasing};
std::string_view to_string(Metric m);

/// Per-utterance responses. Crowd metrics are the mean over that utterance's
/// crowd raters and are absent when nobody rated it.
struct UtteranceMetrics {
  std::string utterance_id;
  Modality modality = Modality::Textual;
  int attr_count = 0;
  std::array<std::optional<double>, 6> values;
  std::optional<double> similarity;                  // normalized 1..6
  std::optional<std::array<Bucket, 3>> self_labels;  // first self rating

  std::optional<double> value(Metric m) const { return values[static_cast<std::size_t>(m)]; }
};

/// `scorer` picks the similarity score source; empty prefers "remote" and
/// falls back to "baseline".
std::vector<UtteranceMetrics> compute_metrics(const Corpus& corpus, const std::string& scorer = {});

struct DescriptiveRow {
  Metric metric = Metric::Duration;
  Modality modality = Modality::Textual;
  std::optional<int> attr_count;  // absent for the pooled row
  stats::Summary summary;
};

struct DescriptiveReport {
  std::vector<DescriptiveRow> rows;
  const DescriptiveRow* find(Metric metric, Modality modality, std::optional<int> attr_count) const;
};

/// One row per (metric, modality, attr_count) cell that has data, plus a
/// pooled row per (metric, modality) over the union of its cells.
DescriptiveReport descriptive_stats(std::span<const UtteranceMetrics> metrics);

/// Either a value or the reason the test could not run.
template <class T>
struct Outcome {
  std::optional<T> value;
  std::string error;

  bool ok() const { return value.has_value(); }
};

struct AnalysisOptions {
  std::string scorer;
  // Self-evaluation rows are hidden from the text dashboard unless set.
  bool include_self = false;
};

struct AnalysisReport {
  std::size_t utterances = 0;
  std::vector<ExclusionEntry> exclusions;
  DescriptiveReport descriptive;
  std::map<Metric, Outcome<stats::AnovaTable>> anova;
  std::array<Outcome<stats::KappaResult>, 3> kappa_self_crowd;  // by Criterion
  Outcome<double> agreement_self_similarity;
  Outcome<double> agreement_crowd_similarity;
  Outcome<double> agreement_crowd_similarity_high;  // restricted to high-similarity utterances
  Outcome<stats::PearsonResult> naturalness_phrasing;
  std::map<Modality, stats::Summary> similarity;
  bool include_self = false;
};

/// Applies the between-subject filter, then computes every section. A
/// failing test records its error and the others still run. Throws
/// std::invalid_argument("InsufficientData ...") if nothing survives the filter.
AnalysisReport analyze(const Corpus& corpus, const AnalysisOptions& options = {});

std::string report_to_json(const AnalysisReport& report);
/// Aligned plain-text tables: descriptive statistics by modality and
/// attribute count, then the tests.
std::string report_to_text(const AnalysisReport& report);

}  // namespace crowdnlg::analysis

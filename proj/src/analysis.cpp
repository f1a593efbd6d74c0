#include "crowdnlg/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crowdnlg/text.hpp"

namespace crowdnlg::analysis {

using ojson = nlohmann::ordered_json;

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::Duration: return "duration_sec";
    case Metric::CharLength: return "char_length";
    case Metric::SentenceCount: return "sentence_count";
    case Metric::Informativeness: return "informativeness";
    case Metric::Naturalness: return "naturalness";
    case Metric::Phrasing: return "phrasing";
  }
  return "duration_sec";
}

std::vector<UtteranceMetrics> compute_metrics(const Corpus& corpus, const std::string& scorer) {
  std::map<std::string, std::array<std::vector<double>, 3>> crowd;
  std::map<std::string, std::array<Bucket, 3>> self;
  for (const auto& r : corpus.ratings) {
    if (r.kind == RaterKind::Crowd) {
      auto& slot = crowd[r.utterance_id];
      for (std::size_t i = 0; i < 3; ++i) slot[i].push_back(r.likert[i]);
    } else {
      self.emplace(r.utterance_id, r.labels);
    }
  }
  std::map<std::string, std::map<std::string, double>> scores;
  for (const auto& s : corpus.scores) scores[s.utterance_id].emplace(s.scorer, s.raw);

  std::vector<UtteranceMetrics> out;
  out.reserve(corpus.utterances.size());
  for (const auto& u : corpus.utterances) {
    UtteranceMetrics m;
    m.utterance_id = u.id;
    m.modality = u.modality;
    m.attr_count = u.attr_count;
    if (u.issued_at && u.submitted_at) {
      m.values[static_cast<std::size_t>(Metric::Duration)] =
          static_cast<double>((*u.submitted_at - *u.issued_at).count());
    }
    m.values[static_cast<std::size_t>(Metric::CharLength)] = static_cast<double>(text::code_point_count(u.text));
    m.values[static_cast<std::size_t>(Metric::SentenceCount)] = stats::count_sentences(u.text);
    if (auto it = crowd.find(u.id); it != crowd.end()) {
      for (std::size_t i = 0; i < 3; ++i) {
        m.values[static_cast<std::size_t>(Metric::Informativeness) + i] = stats::summarize(it->second[i]).mean;
      }
    }
    if (auto it = self.find(u.id); it != self.end()) m.self_labels = it->second;
    if (auto it = scores.find(u.id); it != scores.end()) {
      const auto& by = it->second;
      std::optional<double> raw;
      if (!scorer.empty()) {
        if (auto s = by.find(scorer); s != by.end()) raw = s->second;
      } else if (auto s = by.find("remote"); s != by.end()) {
        raw = s->second;
      } else if (auto b = by.find("baseline"); b != by.end()) {
        raw = b->second;
      }
      if (raw) m.similarity = normalize_score(*raw);
    }
    out.push_back(std::move(m));
  }
  return out;
}

const DescriptiveRow* DescriptiveReport::find(Metric metric, Modality modality,
                                              std::optional<int> attr_count) const {
  for (const auto& r : rows) {
    if (r.metric == metric && r.modality == modality && r.attr_count == attr_count) return &r;
  }
  return nullptr;
}

DescriptiveReport descriptive_stats(std::span<const UtteranceMetrics> metrics) {
  DescriptiveReport report;
  for (auto metric : kMetrics) {
    for (auto modality : {Modality::Textual, Modality::Pictorial}) {
      std::map<int, std::vector<double>> cells;
      std::vector<double> pooled;
      for (const auto& m : metrics) {
        if (m.modality != modality) continue;
        const auto v = m.value(metric);
        if (!v) continue;
        cells[m.attr_count].push_back(*v);
        pooled.push_back(*v);
      }
      if (pooled.empty()) continue;
      for (const auto& [count, values] : cells) {
        report.rows.push_back({metric, modality, count, stats::summarize(values)});
      }
      report.rows.push_back({metric, modality, std::nullopt, stats::summarize(pooled)});
    }
  }
  return report;
}

namespace {

std::string error_text(const stats::StatsError& e) {
  switch (e.kind()) {
    case stats::StatsError::Kind::DegenerateDesign: return std::string("DegenerateDesign: ") + e.what();
    case stats::StatsError::Kind::DegenerateMarginals: return std::string("DegenerateMarginals: ") + e.what();
    case stats::StatsError::Kind::ConstantInput: return std::string("ConstantInput: ") + e.what();
    case stats::StatsError::Kind::InvalidInput: return std::string("InsufficientData: ") + e.what();
  }
  return e.what();
}

template <class T, class F>
Outcome<T> attempt(F&& f) {
  Outcome<T> out;
  try {
    out.value = f();
  } catch (const stats::StatsError& e) {
    out.error = error_text(e);
  }
  return out;
}

std::vector<std::string> labels_of(const std::vector<Bucket>& v) {
  std::vector<std::string> out;
  out.reserve(v.size());
  for (auto b : v) out.emplace_back(to_string(b));
  return out;
}

Outcome<double> agreement(const std::vector<Bucket>& a, const std::vector<Bucket>& b) {
  if (a.empty()) return {std::nullopt, "InsufficientData: no paired observations"};
  const auto la = labels_of(a);
  const auto lb = labels_of(b);
  return {stats::percentage_agreement(la, lb), {}};
}

}  // namespace

AnalysisReport analyze(const Corpus& corpus, const AnalysisOptions& options) {
  auto filtered = apply_between_subject_filter(corpus);
  if (filtered.corpus.utterances.empty()) {
    throw std::invalid_argument("InsufficientData: corpus is empty after between-subject filtering");
  }
  AnalysisReport report;
  report.include_self = options.include_self;
  report.exclusions = filtered.exclusions;
  report.utterances = filtered.corpus.utterances.size();
  const auto metrics = compute_metrics(filtered.corpus, options.scorer);
  report.descriptive = descriptive_stats(metrics);

  for (auto metric : kMetrics) {
    std::vector<stats::Observation> obs;
    for (const auto& m : metrics) {
      if (auto v = m.value(metric)) obs.push_back({static_cast<int>(m.modality), m.attr_count, *v});
    }
    if (obs.empty()) {
      report.anova[metric] = {std::nullopt, "InsufficientData: no observations"};
    } else {
      report.anova[metric] = attempt<stats::AnovaTable>([&] { return stats::two_way_anova(obs); });
    }
  }

  for (auto c : kCriteria) {
    const auto i = static_cast<std::size_t>(c);
    std::vector<Bucket> self, crowd;
    for (const auto& m : metrics) {
      const auto v = m.value(static_cast<Metric>(static_cast<int>(Metric::Informativeness) + static_cast<int>(i)));
      if (!m.self_labels || !v) continue;
      self.push_back((*m.self_labels)[i]);
      crowd.push_back(bucket_score(*v));
    }
    if (self.empty()) {
      report.kappa_self_crowd[i] = {std::nullopt, "InsufficientData: no utterance has both self and crowd ratings"};
    } else {
      const auto a = labels_of(self);
      const auto b = labels_of(crowd);
      report.kappa_self_crowd[i] = attempt<stats::KappaResult>([&] { return stats::cohens_kappa(a, b); });
    }
  }

  {
    std::vector<Bucket> self_inf, self_sim, crowd_inf, crowd_sim, high_inf, high_sim;
    for (const auto& m : metrics) {
      if (!m.similarity) continue;
      const auto sim = bucket_score(*m.similarity);
      if (m.self_labels) {
        self_inf.push_back((*m.self_labels)[0]);
        self_sim.push_back(sim);
      }
      if (const auto v = m.value(Metric::Informativeness)) {
        crowd_inf.push_back(bucket_score(*v));
        crowd_sim.push_back(sim);
        if (sim == Bucket::HigherThanAverage) {
          high_inf.push_back(bucket_score(*v));
          high_sim.push_back(sim);
        }
      }
    }
    report.agreement_self_similarity = agreement(self_inf, self_sim);
    report.agreement_crowd_similarity = agreement(crowd_inf, crowd_sim);
    report.agreement_crowd_similarity_high = agreement(high_inf, high_sim);
  }

  {
    std::vector<double> nat, phr;
    for (const auto& m : metrics) {
      const auto n = m.value(Metric::Naturalness);
      const auto p = m.value(Metric::Phrasing);
      if (n && p) {
        nat.push_back(*n);
        phr.push_back(*p);
      }
    }
    report.naturalness_phrasing = attempt<stats::PearsonResult>([&] { return stats::pearson(nat, phr); });
  }

  for (auto modality : {Modality::Textual, Modality::Pictorial}) {
    std::vector<double> sims;
    for (const auto& m : metrics) {
      if (m.modality == modality && m.similarity) sims.push_back(*m.similarity);
    }
    if (!sims.empty()) report.similarity[modality] = stats::summarize(sims);
  }
  return report;
}

namespace {

ojson summary_json(const stats::Summary& s) {
  ojson j;
  j["n"] = s.n;
  j["mean"] = s.mean;
  j["stdev"] = s.stdev ? ojson(*s.stdev) : ojson(nullptr);
  return j;
}

ojson effect_json(const stats::AnovaEffect& e) {
  ojson j;
  j["ss"] = e.sum_of_squares;
  j["df"] = e.df;
  if (e.f) j["F"] = *e.f;
  if (e.p) j["p"] = *e.p;
  return j;
}

template <class T, class F>
ojson outcome_json(const Outcome<T>& o, F&& to_json) {
  if (o.ok()) return to_json(*o.value);
  ojson j;
  j["error"] = o.error;
  return j;
}

}  // namespace

std::string report_to_json(const AnalysisReport& report) {
  ojson j;
  j["utterances"] = report.utterances;
  j["exclusions"] = ojson::array();
  for (const auto& e : report.exclusions) j["exclusions"].push_back({{"worker", e.worker_id}, {"excluded", e.excluded}});

  j["descriptive"] = ojson::array();
  for (const auto& r : report.descriptive.rows) {
    ojson row;
    row["metric"] = std::string(to_string(r.metric));
    row["modality"] = std::string(to_string(r.modality));
    row["attr_count"] = r.attr_count ? ojson(*r.attr_count) : ojson("all");
    row.update(summary_json(r.summary));
    j["descriptive"].push_back(std::move(row));
  }

  j["anova"] = ojson::object();
  for (const auto& [metric, outcome] : report.anova) {
    j["anova"][std::string(to_string(metric))] = outcome_json(outcome, [](const stats::AnovaTable& t) {
      ojson a;
      a["modality"] = effect_json(t.factor_a);
      a["attr_count"] = effect_json(t.factor_b);
      a["interaction"] = effect_json(t.interaction);
      a["residual"] = effect_json(t.residual);
      a["n"] = t.n;
      return a;
    });
  }

  j["kappa_self_crowd"] = ojson::object();
  for (auto c : kCriteria) {
    j["kappa_self_crowd"][std::string(to_string(c))] =
        outcome_json(report.kappa_self_crowd[static_cast<std::size_t>(c)], [](const stats::KappaResult& k) {
          return ojson{{"kappa", k.kappa},
                       {"observed", k.observed_agreement},
                       {"expected", k.expected_agreement},
                       {"z", k.z},
                       {"p", k.p}};
        });
  }

  const auto frac = [](double v) { return ojson(v); };
  j["agreement"] = {{"self_informativeness_vs_similarity", outcome_json(report.agreement_self_similarity, frac)},
                    {"crowd_informativeness_vs_similarity", outcome_json(report.agreement_crowd_similarity, frac)},
                    {"crowd_informativeness_vs_similarity_high",
                     outcome_json(report.agreement_crowd_similarity_high, frac)}};

  j["pearson_naturalness_phrasing"] = outcome_json(report.naturalness_phrasing, [](const stats::PearsonResult& p) {
    return ojson{{"r", p.r}, {"p", p.p}, {"n", p.n}};
  });

  j["similarity"] = ojson::object();
  for (const auto& [modality, s] : report.similarity) j["similarity"][std::string(to_string(modality))] = summary_json(s);
  return j.dump(2);
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string cell_text(const DescriptiveRow* row) {
  if (!row) return "-";
  std::string s = fmt("%.2f", row->summary.mean);
  s += row->summary.stdev ? " (" + fmt("%.2f", *row->summary.stdev) + ")" : " (n/a)";
  return s;
}

std::string p_text(double p) { return p < 0.001 ? "<0.001" : fmt("%.3f", p); }

void pad(std::ostringstream& out, const std::string& s, std::size_t width) {
  out << s;
  for (std::size_t i = text::code_point_count(s); i < width; ++i) out << ' ';
}

}  // namespace

std::string report_to_text(const AnalysisReport& report) {
  std::ostringstream out;
  out << "Utterances analysed: " << report.utterances << '\n';
  for (const auto& e : report.exclusions) {
    out << "Excluded " << e.excluded << " pictorial utterance(s) of cross-condition worker " << e.worker_id << '\n';
  }
  out << '\n';

  std::set<int> counts;
  for (const auto& r : report.descriptive.rows) {
    if (r.attr_count) counts.insert(*r.attr_count);
  }
  std::vector<std::pair<Modality, std::optional<int>>> columns;
  for (auto modality : {Modality::Textual, Modality::Pictorial}) {
    for (int c : counts) columns.emplace_back(modality, c);
    columns.emplace_back(modality, std::nullopt);
  }

  constexpr std::size_t kLabel = 18;
  constexpr std::size_t kCell = 17;
  pad(out, "", kLabel);
  for (const auto& [modality, count] : columns) {
    pad(out, std::string(to_string(modality)).substr(0, 4) + " " + (count ? std::to_string(*count) : "all"), kCell);
  }
  out << '\n';
  for (auto metric : kMetrics) {
    bool any = false;
    for (const auto& [modality, count] : columns) any = any || report.descriptive.find(metric, modality, count);
    if (!any) continue;
    pad(out, std::string(to_string(metric)), kLabel);
    for (const auto& [modality, count] : columns) pad(out, cell_text(report.descriptive.find(metric, modality, count)), kCell);
    out << '\n';
  }

  out << "\nTwo-way ANOVA (modality x attr_count, Type II)\n";
  for (const auto& [metric, outcome] : report.anova) {
    pad(out, std::string(to_string(metric)), kLabel);
    if (!outcome.ok()) {
      out << outcome.error << '\n';
      continue;
    }
    const auto& t = *outcome.value;
    const auto effect = [&](const char* name, const stats::AnovaEffect& e) {
      out << name << " F(" << fmt("%.0f", e.df) << "," << fmt("%.0f", t.residual.df) << ")=" << fmt("%.2f", *e.f)
          << " p=" << p_text(*e.p) << "  ";
    };
    effect("modality", t.factor_a);
    effect("attrs", t.factor_b);
    effect("interaction", t.interaction);
    out << '\n';
  }

  if (report.include_self) {
    out << "\nCohen's kappa, self vs crowd buckets\n";
    for (auto c : kCriteria) {
      const auto& k = report.kappa_self_crowd[static_cast<std::size_t>(c)];
      pad(out, std::string(to_string(c)), kLabel);
      if (k.ok()) {
        out << "kappa=" << fmt("%.3f", k.value->kappa) << " p=" << p_text(k.value->p) << '\n';
      } else {
        out << k.error << '\n';
      }
    }
  }

  out << "\nAgreement, informativeness vs similarity buckets\n";
  const auto line = [&](const std::string& label, const Outcome<double>& o) {
    pad(out, label, kLabel);
    out << (o.ok() ? fmt("%.1f%%", 100 * *o.value) : o.error) << '\n';
  };
  if (report.include_self) line("self", report.agreement_self_similarity);
  line("crowd", report.agreement_crowd_similarity);
  line("crowd, high sim", report.agreement_crowd_similarity_high);

  out << "\nPearson naturalness vs phrasing\n";
  pad(out, "", kLabel);
  if (report.naturalness_phrasing.ok()) {
    const auto& p = *report.naturalness_phrasing.value;
    out << "r=" << fmt("%.2f", p.r) << " p=" << p_text(p.p) << " n=" << p.n << '\n';
  } else {
    out << report.naturalness_phrasing.error << '\n';
  }

  out << "\nSemantic similarity (normalized 1-6)\n";
  for (const auto& [modality, s] : report.similarity) {
    pad(out, std::string(to_string(modality)), kLabel);
    out << fmt("%.2f", s.mean) << " (n=" << s.n << ")\n";
  }
  return out.str();
}

}  // namespace crowdnlg::analysis

#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crowdnlg::stats {

class StatsError : public std::runtime_error {
 public:
  enum class Kind { DegenerateDesign, DegenerateMarginals, ConstantInput, InvalidInput };
  StatsError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// ---- special functions -------------------------------------------------

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double x, double a, double b);
/// P(F > f) for F ~ F(df1, df2).
double f_survival(double f, double df1, double df2);
/// Two-sided P(|T| > |t|) for T ~ t(df).
double t_two_sided(double t, double df);
/// Two-sided P(|Z| > |z|) for standard normal Z.
double normal_two_sided(double z);

// ---- two-way ANOVA ------------------------------------------------------

struct Observation {
  int a = 0;  // level of factor A (modality)
  int b = 0;  // level of factor B (number of attributes)
  double y = 0;
};

struct AnovaEffect {
  double sum_of_squares = 0;
  double df = 0;
  std::optional<double> f;  // absent for the residual row
  std::optional<double> p;
};

struct AnovaTable {
  AnovaEffect factor_a;
  AnovaEffect factor_b;
  AnovaEffect interaction;
  AnovaEffect residual;
  double total_sum_of_squares = 0;  // around the grand mean
  std::size_t n = 0;
};

/// Type II sums of squares from nested least-squares fits with treatment
/// coding. Empty cells are allowed; degrees of freedom are design-matrix
/// ranks. Throws StatsError(DegenerateDesign) when a factor has one level or
/// the residual has no degrees of freedom.
AnovaTable two_way_anova(std::span<const Observation> observations);

// ---- agreement ----------------------------------------------------------

struct KappaResult {
  double kappa = 0;
  double observed_agreement = 0;
  double expected_agreement = 0;
  double z = 0;
  double p = 1;  // two-sided, normal approximation with the H0 standard error
};

/// Cohen's kappa. Throws StatsError(DegenerateMarginals) when the expected
/// agreement is 1, and InvalidInput on length mismatch or empty input.
KappaResult cohens_kappa(std::span<const std::string> a, std::span<const std::string> b);

double percentage_agreement(std::span<const std::string> a, std::span<const std::string> b);

// ---- correlation ----------------------------------------------------------

struct PearsonResult {
  double r = 0;
  double p = 1;
  std::size_t n = 0;
};

/// Product-moment correlation; p from t = r sqrt((n-2)/(1-r^2)).
/// Throws StatsError(ConstantInput) or InvalidInput (n < 3, mismatch).
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

// ---- descriptive ----------------------------------------------------------

struct Summary {
  std::size_t n = 0;
  double mean = 0;
  std::optional<double> stdev;  // sample (n-1) standard deviation; absent for n < 2
};

Summary summarize(std::span<const double> values);

/// Maximal non-empty segments terminated by '.'; a trailing unterminated
/// segment counts as one more sentence.
int count_sentences(std::string_view text);

}  // namespace crowdnlg::stats

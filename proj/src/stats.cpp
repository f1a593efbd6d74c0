#include "crowdnlg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <Eigen/Dense>

namespace crowdnlg::stats {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 10000;

// Continued fraction for I_x(a,b), modified Lentz.
double beta_continued_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double x, double a, double b) {
  if (!(a > 0 && b > 0)) throw StatsError(StatsError::Kind::InvalidInput, "incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(x, a, b) / a;
  }
  return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double f_survival(double f, double df1, double df2) {
  if (!(df1 > 0 && df2 > 0)) throw StatsError(StatsError::Kind::InvalidInput, "F distribution needs df > 0");
  if (std::isnan(f)) return std::numeric_limits<double>::quiet_NaN();
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  // P(F > f) = I_{df2/(df2+df1 f)}(df2/2, df1/2)
  const double x = df2 / (df2 + df1 * f);
  return incomplete_beta(x, df2 / 2.0, df1 / 2.0);
}

double t_two_sided(double t, double df) {
  if (!(df > 0)) throw StatsError(StatsError::Kind::InvalidInput, "t distribution needs df > 0");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return incomplete_beta(x, df / 2.0, 0.5);
}

double normal_two_sided(double z) {
  if (std::isinf(z)) return 0.0;
  return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

// ---- ANOVA ----------------------------------------------------------------

namespace {

struct Fit {
  double rss = 0;
  Eigen::Index rank = 0;
};

Fit least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - x * beta;
  return {resid.squaredNorm(), qr.rank()};
}

// Residual SS around group means; exact for models that are saturated in
// the grouping.
template <typename Key>
double within_group_ss(std::span<const Observation> obs, Key key) {
  std::map<decltype(key(obs[0])), std::pair<double, std::size_t>> sums;
  for (const auto& o : obs) {
    auto& s = sums[key(o)];
    s.first += o.y;
    ++s.second;
  }
  double ss = 0;
  for (const auto& o : obs) {
    const auto& s = sums[key(o)];
    const double d = o.y - s.first / static_cast<double>(s.second);
    ss += d * d;
  }
  return ss;
}

AnovaEffect effect(double ss, double df, double ms_resid, double df_resid) {
  AnovaEffect e;
  e.sum_of_squares = std::max(0.0, ss);
  e.df = df;
  if (df > 0) {
    e.f = (e.sum_of_squares / df) / ms_resid;
    e.p = f_survival(*e.f, df, df_resid);
  }
  return e;
}

}  // namespace

AnovaTable two_way_anova(std::span<const Observation> observations) {
  std::vector<int> a_levels;
  std::vector<int> b_levels;
  for (const auto& o : observations) {
    if (!std::isfinite(o.y)) throw StatsError(StatsError::Kind::InvalidInput, "non-finite response");
    a_levels.push_back(o.a);
    b_levels.push_back(o.b);
  }
  std::sort(a_levels.begin(), a_levels.end());
  a_levels.erase(std::unique(a_levels.begin(), a_levels.end()), a_levels.end());
  std::sort(b_levels.begin(), b_levels.end());
  b_levels.erase(std::unique(b_levels.begin(), b_levels.end()), b_levels.end());
  if (a_levels.size() < 2 || b_levels.size() < 2) {
    throw StatsError(StatsError::Kind::DegenerateDesign, "each factor needs at least two levels");
  }

  const auto n = static_cast<Eigen::Index>(observations.size());
  const auto na = static_cast<Eigen::Index>(a_levels.size());
  const auto nb = static_cast<Eigen::Index>(b_levels.size());
  auto a_index = [&](int level) {
    return std::lower_bound(a_levels.begin(), a_levels.end(), level) - a_levels.begin();
  };
  auto b_index = [&](int level) {
    return std::lower_bound(b_levels.begin(), b_levels.end(), level) - b_levels.begin();
  };

  double mean = 0;
  for (const auto& o : observations) mean += o.y;
  mean /= static_cast<double>(n);
  Eigen::VectorXd y(n);
  double total_ss = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = observations[static_cast<std::size_t>(i)].y - mean;
    total_ss += y(i) * y(i);
  }

  // Additive model [1, A dummies, B dummies] with treatment coding.
  Eigen::MatrixXd additive = Eigen::MatrixXd::Zero(n, 1 + (na - 1) + (nb - 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& o = observations[static_cast<std::size_t>(i)];
    additive(i, 0) = 1.0;
    if (const auto ai = a_index(o.a); ai > 0) additive(i, ai) = 1.0;
    if (const auto bi = b_index(o.b); bi > 0) additive(i, (na - 1) + bi) = 1.0;
  }
  const Fit fit_ab = least_squares(additive, y);

  std::set<std::pair<int, int>> cells;
  for (const auto& o : observations) cells.insert({o.a, o.b});

  const double rss_a = within_group_ss(observations, [](const Observation& o) { return o.a; });
  const double rss_b = within_group_ss(observations, [](const Observation& o) { return o.b; });
  const double rss_full =
      within_group_ss(observations, [](const Observation& o) { return std::make_pair(o.a, o.b); });

  const double rank_a = static_cast<double>(na);
  const double rank_b = static_cast<double>(nb);
  const double rank_ab = static_cast<double>(fit_ab.rank);
  const double rank_full = static_cast<double>(cells.size());
  const double df_resid = static_cast<double>(n) - rank_full;
  if (df_resid <= 0) {
    throw StatsError(StatsError::Kind::DegenerateDesign, "no residual degrees of freedom");
  }
  if (rss_full <= 0) {
    throw StatsError(StatsError::Kind::DegenerateDesign, "zero residual variance");
  }
  const double ms_resid = rss_full / df_resid;

  AnovaTable table;
  table.n = observations.size();
  table.total_sum_of_squares = total_ss;
  table.factor_a = effect(rss_b - fit_ab.rss, rank_ab - rank_b, ms_resid, df_resid);
  table.factor_b = effect(rss_a - fit_ab.rss, rank_ab - rank_a, ms_resid, df_resid);
  table.interaction = effect(fit_ab.rss - rss_full, rank_full - rank_ab, ms_resid, df_resid);
  table.residual.sum_of_squares = rss_full;
  table.residual.df = df_resid;
  return table;
}

// ---- agreement --------------------------------------------------------------

namespace {

void check_pairs(std::size_t a, std::size_t b) {
  if (a != b) throw StatsError(StatsError::Kind::InvalidInput, "label sequences differ in length");
  if (a == 0) throw StatsError(StatsError::Kind::InvalidInput, "label sequences are empty");
}

}  // namespace

KappaResult cohens_kappa(std::span<const std::string> a, std::span<const std::string> b) {
  check_pairs(a.size(), b.size());
  const auto n = static_cast<double>(a.size());
  std::map<std::string, std::pair<double, double>> marginals;
  double agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    marginals[a[i]].first += 1;
    marginals[b[i]].second += 1;
    if (a[i] == b[i]) agree += 1;
  }
  if (marginals.size() == 1) {
    throw StatsError(StatsError::Kind::DegenerateMarginals,
                     "both raters used a single identical label; kappa is undefined");
  }
  double pe = 0;
  double cross = 0;
  for (const auto& [label, counts] : marginals) {
    const double pa = counts.first / n;
    const double pb = counts.second / n;
    pe += pa * pb;
    cross += pa * pb * (pa + pb);
  }
  KappaResult r;
  r.observed_agreement = agree / n;
  r.expected_agreement = pe;
  r.kappa = (r.observed_agreement - pe) / (1.0 - pe);
  const double var0 = (pe + pe * pe - cross) / ((1.0 - pe) * (1.0 - pe) * n);
  if (var0 > 0) {
    r.z = r.kappa / std::sqrt(var0);
    r.p = normal_two_sided(r.z);
  } else {
    r.z = r.kappa == 0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), r.kappa);
    r.p = r.kappa == 0 ? 1.0 : 0.0;
  }
  return r;
}

double percentage_agreement(std::span<const std::string> a, std::span<const std::string> b) {
  check_pairs(a.size(), b.size());
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i] ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(a.size());
}

// ---- correlation --------------------------------------------------------------

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw StatsError(StatsError::Kind::InvalidInput, "sequences differ in length");
  if (x.size() < 3) throw StatsError(StatsError::Kind::InvalidInput, "pearson needs at least 3 pairs");
  const auto n = static_cast<double>(x.size());
  double mx = 0;
  double my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0;
  double syy = 0;
  double sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0 || syy == 0) throw StatsError(StatsError::Kind::ConstantInput, "constant input sequence");
  PearsonResult res;
  res.n = x.size();
  res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = n - 2;
  if (std::fabs(res.r) >= 1.0) {
    res.p = 0.0;
  } else {
    const double t = res.r * std::sqrt(df / (1.0 - res.r * res.r));
    res.p = t_two_sided(t, df);
  }
  return res;
}

// ---- descriptive ------------------------------------------------------------

Summary summarize(std::span<const double> values) {
  Summary s;
  s.n = values.size();
  if (values.empty()) return s;
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n >= 2) {
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stdev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

int count_sentences(std::string_view text) {
  int count = 0;
  bool has_content = false;
  for (char c : text) {
    if (c == '.') {
      if (has_content) ++count;
      has_content = false;
    } else if (c != ' ' && c != '\t' && c != '\n' && c != '\r') {
      has_content = true;
    }
  }
  if (has_content) ++count;
  return count;
}

}  // namespace crowdnlg::stats

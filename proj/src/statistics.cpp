#include "medxplain/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "medxplain/error.hpp"
#include "medxplain/util.hpp"

namespace medxplain::stats {

namespace {

double beta_fraction(double x, double a, double b) {
  constexpr int kMaxIter = 1000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // unbiased
  double n = 0.0;
};

Moments moments(std::span<const double> v) {
  if (v.size() < 2) throw InvalidInput("each sample needs at least two observations");
  Moments m;
  m.n = static_cast<double>(v.size());
  m.mean = mean(v);
  // A constant sample has zero spread; summation rounding must not invent some.
  if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; })) {
    m.mean = v[0];
    return m;
  }
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.var = ss / (m.n - 1.0);
  return m;
}

double pooled_variance(const Moments& a, const Moments& b) {
  return ((a.n - 1.0) * a.var + (b.n - 1.0) * b.var) / (a.n + b.n - 2.0);
}

// Standard error and degrees of freedom of mean(a) - mean(b).
std::pair<double, double> se_df(const Moments& a, const Moments& b, TTestKind kind) {
  if (kind == TTestKind::student) {
    const double sp2 = pooled_variance(a, b);
    if (!(sp2 > 0.0)) throw InvalidInput("pooled variance is zero");
    return {std::sqrt(sp2 * (1.0 / a.n + 1.0 / b.n)), a.n + b.n - 2.0};
  }
  const double va = a.var / a.n, vb = b.var / b.n;
  if (!(va + vb > 0.0)) throw InvalidInput("sample variances are zero");
  const double df = (va + vb) * (va + vb) / (va * va / (a.n - 1.0) + vb * vb / (b.n - 1.0));
  return {std::sqrt(va + vb), df};
}

std::string fmt_p(double p) {
  if (p < 0.001) return "<0.001";
  return util::format_fixed(p, 4);
}

std::string fmt_signed(double v, int decimals) {
  std::string s = util::format_fixed(v, decimals);
  if (v >= 0.0 && s[0] != '-') s.insert(s.begin(), '+');
  return s;
}

}  // namespace

double incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidInput("incomplete_beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(x, a, b) / a;
  return 1.0 - front * beta_fraction(1.0 - x, b, a) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw InvalidInput("degrees of freedom must be positive");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = df / (df + t * t);
  const double tail = 0.5 * incomplete_beta(x, 0.5 * df, 0.5);
  return t > 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("quantile probability must lie in (0,1)");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -student_t_quantile(1.0 - p, df);
  double lo = 0.0, hi = 1.0;
  while (student_t_cdf(hi, df) < p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) break;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (student_t_cdf(mid, df) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double mean(std::span<const double> v) {
  if (v.empty()) throw InvalidInput("mean of an empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

TTestResult t_test_ind(std::span<const double> a, std::span<const double> b, TTestKind kind) {
  const Moments ma = moments(a), mb = moments(b);
  const auto [se, df] = se_df(ma, mb, kind);
  TTestResult r;
  r.t = (ma.mean - mb.mean) / se;
  r.df = df;
  r.p = std::clamp(2.0 * student_t_cdf(-std::abs(r.t), df), 0.0, 1.0);
  return r;
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  const Moments ma = moments(a), mb = moments(b);
  const double sp2 = pooled_variance(ma, mb);
  if (!(sp2 > 0.0)) throw InvalidInput("pooled standard deviation is zero");
  return (ma.mean - mb.mean) / std::sqrt(sp2);
}

std::string effect_label(double d) {
  const double ad = std::abs(d);
  if (ad >= 0.8) return "large";
  if (ad >= 0.5) return "medium";
  if (ad >= 0.2) return "small";
  return "negligible";
}

std::pair<double, double> ci95_mean_diff(std::span<const double> a, std::span<const double> b,
                                         TTestKind kind) {
  const Moments ma = moments(a), mb = moments(b);
  const auto [se, df] = se_df(ma, mb, kind);
  const double half = student_t_quantile(0.975, df) * se;
  const double diff = ma.mean - mb.mean;
  return {diff - half, diff + half};
}

double bonferroni_alpha(int m, double alpha) {
  if (m < 1) throw InvalidInput("number of comparisons must be at least 1");
  return alpha / m;
}

bool bonferroni_significant(double p, int m, double alpha) { return p < bonferroni_alpha(m, alpha); }

std::vector<ComparisonResult> compare_configurations(
    const std::map<std::string, std::vector<double>>& results,
    const std::vector<std::pair<std::string, std::string>>& pairs, int m, TTestKind kind) {
  if (results.size() < 2) throw InvalidInput("need at least two configurations to compare");
  bonferroni_alpha(m);
  std::vector<ComparisonResult> out;
  for (const auto& [name_a, name_b] : pairs) {
    const auto ia = results.find(name_a);
    const auto ib = results.find(name_b);
    if (ia == results.end() || ib == results.end()) {
      throw InvalidInput("unknown configuration in comparison " + name_a + " vs " + name_b);
    }
    const auto& a = ia->second;
    const auto& b = ib->second;
    ComparisonResult r;
    r.name_a = name_a;
    r.name_b = name_b;
    r.m_comparisons = m;
    r.mean_a = mean(a);
    r.mean_b = mean(b);
    r.mean_diff = r.mean_b - r.mean_a;
    r.relative_gain = r.mean_a != 0.0 ? r.mean_diff / r.mean_a : std::numeric_limits<double>::quiet_NaN();
    try {
      const auto tt = t_test_ind(b, a, kind);
      r.t_stat = tt.t;
      r.p_value = tt.p;
      r.cohens_d = cohens_d(b, a);
      r.ci95 = ci95_mean_diff(b, a, kind);
      r.significant_bonferroni = bonferroni_significant(tt.p, m);
    } catch (const InvalidInput& e) {
      r.note = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string report_csv(const std::vector<ComparisonResult>& results) {
  std::ostringstream out;
  out << "config_a,config_b,mean_a,mean_b,mean_diff,relative_gain_pct,t,p,cohens_d,effect,ci_lo,"
         "ci_hi,m,alpha,significant\n";
  auto opt = [](const std::optional<double>& v, int dec) {
    return v ? util::format_fixed(*v, dec) : std::string{};
  };
  for (const auto& r : results) {
    out << r.name_a << ',' << r.name_b << ',' << util::format_fixed(r.mean_a, 6) << ','
        << util::format_fixed(r.mean_b, 6) << ',' << util::format_fixed(r.mean_diff, 6) << ','
        << util::format_fixed(100.0 * r.relative_gain, 4) << ',' << opt(r.t_stat, 6) << ','
        << opt(r.p_value, 8) << ',' << opt(r.cohens_d, 6) << ','
        << (r.cohens_d ? effect_label(*r.cohens_d) : std::string{}) << ','
        << (r.ci95 ? util::format_fixed(r.ci95->first, 6) : std::string{}) << ','
        << (r.ci95 ? util::format_fixed(r.ci95->second, 6) : std::string{}) << ',' << r.m_comparisons
        << ',' << util::format_fixed(bonferroni_alpha(r.m_comparisons), 6) << ','
        << (r.significant_bonferroni ? "yes" : "no") << '\n';
  }
  return out.str();
}

std::string report_table(const std::vector<ComparisonResult>& results, int m) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Comparison", "Mean Difference", "Relative Gain", "p-value", "Cohen's d", "95% CI"});
  for (const auto& r : results) {
    std::string p = r.p_value ? fmt_p(*r.p_value) + (r.significant_bonferroni ? " *" : "") : "n/a";
    std::string d = r.cohens_d ? util::format_fixed(*r.cohens_d, 2) + " (" + effect_label(*r.cohens_d) + ")"
                               : "n/a";
    std::string ci = r.ci95 ? "[" + util::format_fixed(r.ci95->first, 2) + ", " +
                                  util::format_fixed(r.ci95->second, 2) + "]"
                            : "n/a";
    rows.push_back({r.name_a + " vs " + r.name_b, fmt_signed(r.mean_diff, 3),
                    fmt_signed(100.0 * r.relative_gain, 1) + "%", p, d, ci});
  }
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

  std::ostringstream out;
  for (std::size_t n = 0; n < rows.size(); ++n) {
    for (std::size_t c = 0; c < rows[n].size(); ++c) {
      out << std::left << std::setw(static_cast<int>(width[c])) << rows[n][c];
      if (c + 1 < rows[n].size()) out << " | ";
    }
    out << '\n';
    if (n == 0) {
      for (std::size_t c = 0; c < width.size(); ++c) {
        out << std::string(width[c], '-');
        if (c + 1 < width.size()) out << "-+-";
      }
      out << '\n';
    }
  }
  out << "* significant after Bonferroni correction (alpha = 0.05/" << m << " = "
      << util::format_fixed(bonferroni_alpha(m), 6) << ")\n";
  for (const auto& r : results) {
    if (!r.note.empty()) out << "note: " << r.name_a << " vs " << r.name_b << ": " << r.note << '\n';
  }
  return out.str();
}

}  // namespace medxplain::stats

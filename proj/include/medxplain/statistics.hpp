#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace medxplain::stats {

/// Regularised incomplete beta I_x(a, b) by Lentz's continued fraction.
double incomplete_beta(double x, double a, double b);
double student_t_cdf(double t, double df);
/// Inverse of student_t_cdf for p in (0,1).
double student_t_quantile(double p, double df);

enum class TTestKind { student, welch };

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
};

/// Two-sided independent-samples t-test of mean(a) - mean(b). Student uses the
/// pooled variance. Throws InvalidInput when either sample has fewer than two
/// points or the (pooled) variance is zero.
TTestResult t_test_ind(std::span<const double> a, std::span<const double> b,
                       TTestKind kind = TTestKind::student);

/// (mean a - mean b) / pooled SD.
double cohens_d(std::span<const double> a, std::span<const double> b);
std::string effect_label(double d);  // negligible / small / medium / large

/// 95% interval for mean(a) - mean(b).
std::pair<double, double> ci95_mean_diff(std::span<const double> a, std::span<const double> b,
                                         TTestKind kind = TTestKind::student);

double bonferroni_alpha(int m, double alpha = 0.05);
bool bonferroni_significant(double p, int m, double alpha = 0.05);

double mean(std::span<const double> v);

struct ComparisonResult {
  std::string name_a;  // reference configuration
  std::string name_b;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double mean_diff = 0.0;  // mean_b - mean_a
  double relative_gain = 0.0;  // mean_diff / mean_a
  // Absent when a sample is degenerate (fewer than two points, zero variance).
  std::optional<double> t_stat;
  std::optional<double> p_value;
  std::optional<double> cohens_d;
  std::optional<std::pair<double, double>> ci95;
  bool significant_bonferroni = false;
  int m_comparisons = 1;
  std::string note;
};

/// Compares every requested (a, b) pair; b is tested against a so positive
/// differences favour b.
std::vector<ComparisonResult> compare_configurations(
    const std::map<std::string, std::vector<double>>& results,
    const std::vector<std::pair<std::string, std::string>>& pairs, int m,
    TTestKind kind = TTestKind::student);

std::string report_csv(const std::vector<ComparisonResult>& results);
/// Aligned text table: comparison, mean difference, p, Cohen's d, 95% CI,
/// followed by the Bonferroni threshold line.
std::string report_table(const std::vector<ComparisonResult>& results, int m);

}  // namespace medxplain::stats

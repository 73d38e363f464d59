#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shapkit/explanation.hpp"
#include "shapkit/fixtures.hpp"
#include "shapkit/masked_game.hpp"
#include "shapkit/parallel.hpp"

namespace shapkit {

std::string_view scenario_name(Scenario scenario);
Scenario parse_scenario(std::string_view name);

enum class ConvergenceMethod { kernel, kernel_lasso, sampling };
std::string_view convergence_method_name(ConvergenceMethod method);
ConvergenceMethod parse_convergence_method(std::string_view name);

struct ConvergenceOptions {
  Scenario scenario = Scenario::dense_tree;
  std::vector<ConvergenceMethod> methods = {ConvergenceMethod::kernel,
                                            ConvergenceMethod::kernel_lasso,
                                            ConvergenceMethod::sampling};
  std::vector<std::uint64_t> budgets = {32, 128, 512};
  int replicates = 200;
  std::uint64_t seed = kDefaultFixtureSeed;
  Exec exec = Exec::parallel;
};

struct ConvergenceRow {
  ConvergenceMethod method;
  std::uint64_t budget = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  std::vector<double> phi;  // empty when the estimator failed
  std::uint64_t evaluations_used = 0;
  // "ok", or the error code of a replicate whose design was singular.
  std::string status = "ok";
};

struct SummaryRow {
  std::string method;
  std::uint64_t budget = 0;
  int feature = 0;
  std::vector<double> quantiles;  // one per requested probability
  int replicates = 0;             // successful replicates in the group
};

struct ConvergenceResult {
  ConvergenceOptions options;
  TreeScenario fixture;
  Explanation exact;
  std::vector<ConvergenceRow> rows;  // sorted by method, budget, replicate
  std::vector<SummaryRow> summary;   // p10, p50, p90
};

// Permutations given to sampling_shap so it spends at least the
// evaluations kernel_shap spends at `budget` (budget + 2).
int sampling_permutations_for_budget(std::uint64_t budget, int num_features);

ConvergenceResult run_convergence(const ConvergenceOptions& options);

// Linear interpolation between order statistics at 0-based rank p (n - 1).
double percentile(std::span<const double> sorted, double p);

// Groups rows by (method, budget, feature) and reports the requested
// percentiles of phi over the successful rows. Config error for groups with
// fewer than two rows; groups with fewer than two successes are omitted.
std::vector<SummaryRow> summarize_percentiles(
    std::span<const ConvergenceRow> rows, std::span<const double> probs);

// Width p90 - p10 of one feature's replicate estimates.
double band_width(const ConvergenceResult& result, ConvergenceMethod method,
                  std::uint64_t budget, int feature);

struct MaskingOptions {
  // Attribution used for the ranking: exact, kernel, sampling or deep.
  Method method = Method::kernel;
  std::uint64_t kernel_budget = 0;  // 0 = complete enumeration
  int sampling_permutations = 500;
  MaskingMode mode = MaskingMode::mean_imputation;
  std::vector<double> fractions = {0.0, 0.2, 1.0};
  std::uint64_t seed = kDefaultFixtureSeed;
  Exec exec = Exec::parallel;
};

struct MaskingRow {
  int instance = 0;
  std::string method;  // "shap" or "random"
  double fraction = 0.0;
  double output_before = 0.0;
  double output_after = 0.0;
  double delta_log_odds = 0.0;
};

struct MaskingResult {
  MaskingOptions options;
  std::vector<MaskingRow> rows;  // sorted by method, fraction, instance
};

// ln(p / (1 - p)) with p clamped to [1e-12, 1 - 1e-12].
double log_odds(double probability);

// Probability of class 1 from a network with one output (a logit, or a
// probability when the last activation is sigmoid) or two logits.
double class_probability(const MlpModel& model, std::span<const double> x);

MaskingResult run_masking(const MlpModel& model,
                          std::span<const std::vector<double>> instances,
                          const BackgroundData& background,
                          const MaskingOptions& options);

struct PairedTTest {
  double mean_difference = 0.0;
  double t_statistic = 0.0;
  double p_value = 1.0;  // one-sided, H1: mean(a - b) > 0
  int n = 0;
};
PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b);

// Result tables (comma separated, header row, shortest round-trip numbers).
std::string convergence_raw_csv(const ConvergenceResult& result);
std::string convergence_summary_csv(const ConvergenceResult& result);
std::string convergence_exact_csv(const ConvergenceResult& result);
std::string masking_csv(const MaskingResult& result);

}  // namespace shapkit

#include "shapkit/bench.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <string>

#include "shapkit/error.hpp"
#include "shapkit/exact.hpp"
#include "shapkit/kernel.hpp"
#include "shapkit/specific.hpp"
#include "shapkit/table_io.hpp"

namespace shapkit {
namespace {

// Coalition values of a tree game only depend on the features the tree
// splits on; the table is indexed by the coalition restricted to them.
struct ProjectedTable {
  int num_features = 0;
  std::vector<int> active;
  std::vector<double> values;

  double at(Mask s) const {
    Mask local = 0;
    for (std::size_t k = 0; k < active.size(); ++k) {
      if ((s >> active[k]) & Mask{1}) local |= Mask{1} << k;
    }
    return values[local];
  }
};

ProjectedTable project_tree_game(const TreeScenario& fx) {
  MaskedGame game(fx.tree, fx.instance, fx.background);
  ProjectedTable t;
  t.num_features = fx.tree.num_features;
  t.active = fx.active_features;
  const std::size_t k = t.active.size();
  std::vector<Mask> masks(std::size_t{1} << k);
  for (Mask local = 0; local < masks.size(); ++local) {
    Mask s = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if ((local >> j) & Mask{1}) s |= Mask{1} << t.active[j];
    }
    masks[local] = s;
  }
  t.values = evaluate_coalitions(game, masks);
  return t;
}

std::unique_ptr<GameOracle> make_game(const ProjectedTable& table) {
  return std::make_unique<FunctionGame>(
      table.num_features, [&table](Mask s) { return table.at(s); });
}

// Shapley values on the active features, zero for the others.
Explanation projected_exact(const ProjectedTable& table) {
  const int k = static_cast<int>(table.active.size());
  TabularGame local(k, table.values);
  Explanation small = shapley_exact(local, Exec::serial);
  Explanation e = small;
  e.attributions.assign(table.num_features, 0.0);
  for (int j = 0; j < k; ++j) e.attributions[table.active[j]] = small.attributions[j];
  return e;
}

void certify_exact(const Explanation& exact, const ProjectedTable& table,
                   const DecisionTree& tree) {
  if (!check_local_accuracy(exact, 1e-9)) {
    throw Error(ErrorCode::numeric, "exact reference violates local accuracy");
  }
  const auto used = used_features(tree);
  if (used != table.active) {
    throw Error(ErrorCode::config, "tree features differ from the projection");
  }
  for (int i = 0; i < table.num_features; ++i) {
    const bool active = std::binary_search(used.begin(), used.end(), i);
    if (!active && exact.attributions[i] != 0.0) {
      throw Error(ErrorCode::numeric, "exact reference gives a dummy feature "
                                      "nonzero attribution");
    }
  }
}

}  // namespace

std::string_view scenario_name(Scenario scenario) {
  return scenario == Scenario::dense_tree ? "dense_tree" : "sparse_tree";
}

Scenario parse_scenario(std::string_view name) {
  if (name == "dense_tree") return Scenario::dense_tree;
  if (name == "sparse_tree") return Scenario::sparse_tree;
  throw Error(ErrorCode::config, "unknown scenario '" + std::string(name) + "'");
}

std::string_view convergence_method_name(ConvergenceMethod method) {
  switch (method) {
    case ConvergenceMethod::kernel: return "kernel";
    case ConvergenceMethod::kernel_lasso: return "kernel+lasso";
    case ConvergenceMethod::sampling: return "sampling";
  }
  return "unknown";
}

ConvergenceMethod parse_convergence_method(std::string_view name) {
  for (auto m : {ConvergenceMethod::kernel, ConvergenceMethod::kernel_lasso,
                 ConvergenceMethod::sampling}) {
    if (convergence_method_name(m) == name) return m;
  }
  throw Error(ErrorCode::config,
              "unknown convergence method '" + std::string(name) + "'");
}

int sampling_permutations_for_budget(std::uint64_t budget, int num_features) {
  const std::uint64_t per = std::max(1, num_features - 1);
  return static_cast<int>(std::max<std::uint64_t>(1, (budget + per - 1) / per));
}

ConvergenceResult run_convergence(const ConvergenceOptions& options) {
  if (options.replicates < 1) {
    throw Error(ErrorCode::config, "replicates must be >= 1");
  }
  ConvergenceResult result{options, make_tree_scenario(options.scenario, options.seed),
                           {}, {}, {}};
  const ProjectedTable table = project_tree_game(result.fixture);
  result.exact = projected_exact(table);
  certify_exact(result.exact, table, result.fixture.tree);
  const int m = table.num_features;

  struct Task {
    ConvergenceMethod method;
    std::uint64_t budget;
    int replicate;
  };
  std::vector<ConvergenceMethod> methods = options.methods;
  std::sort(methods.begin(), methods.end());
  methods.erase(std::unique(methods.begin(), methods.end()), methods.end());
  std::vector<std::uint64_t> budgets = options.budgets;
  std::sort(budgets.begin(), budgets.end());
  budgets.erase(std::unique(budgets.begin(), budgets.end()), budgets.end());
  for (std::uint64_t b : budgets) {
    if (b < minimum_kernel_budget(m)) {
      throw Error(ErrorCode::config, "budget " + std::to_string(b) +
                                         " is below the kernel minimum for M=" +
                                         std::to_string(m));
    }
  }
  std::vector<Task> tasks;
  for (auto method : methods) {
    for (auto budget : budgets) {
      for (int r = 0; r < options.replicates; ++r) tasks.push_back({method, budget, r});
    }
  }
  result.rows.resize(tasks.size());

  auto run_task = [&](std::size_t k) {
    const Task& t = tasks[k];
    const std::uint64_t seed = derive_seed(
        derive_seed(options.seed, 1000003ULL * static_cast<std::uint64_t>(t.method) + t.budget),
        static_cast<std::uint64_t>(t.replicate));
    auto game = make_game(table);
    Explanation e;
    if (t.method == ConvergenceMethod::sampling) {
      SamplingConfig sc;
      sc.n_permutations = sampling_permutations_for_budget(t.budget, m);
      sc.seed = seed;
      e = sampling_shap(*game, sc, Exec::serial);
    } else {
      KernelConfig kc;
      kc.budget = t.budget;
      kc.seed = seed;
      kc.exec = Exec::serial;
      kc.regularization.debiased_lasso = t.method == ConvergenceMethod::kernel_lasso;
      try {
        e = kernel_shap(*game, kc);
      } catch (const Error& err) {
        // An undersized design can be rank deficient; that is a result.
        if (err.code() != ErrorCode::singular) throw;
        result.rows[k] = {t.method, t.budget, t.replicate, seed, {}, 0,
                          std::string(error_code_name(err.code()))};
        return;
      }
    }
    result.rows[k] = {t.method, t.budget, t.replicate, seed, std::move(e.attributions),
                      e.evaluations_used, "ok"};
  };

  if (options.exec == Exec::serial) {
    for (std::size_t k = 0; k < tasks.size(); ++k) run_task(k);
  } else {
    std::exception_ptr failure;
    const auto n = static_cast<std::int64_t>(tasks.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t k = 0; k < n; ++k) {
      try {
        run_task(static_cast<std::size_t>(k));
      } catch (...) {
#pragma omp critical(shapkit_bench_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  const std::vector<double> probs = {0.1, 0.5, 0.9};
  result.summary = summarize_percentiles(result.rows, probs);
  return result;
}

double percentile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::config, "percentile of an empty group");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::config, "probability outside [0, 1]");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

std::vector<SummaryRow> summarize_percentiles(std::span<const ConvergenceRow> rows,
                                              std::span<const double> probs) {
  std::map<std::pair<ConvergenceMethod, std::uint64_t>, std::vector<const ConvergenceRow*>>
      groups;
  for (const ConvergenceRow& r : rows) groups[{r.method, r.budget}].push_back(&r);
  std::vector<SummaryRow> out;
  for (const auto& [key, members] : groups) {
    if (members.size() < 2) {
      throw Error(ErrorCode::config, "percentile summaries need at least two replicates per "
                                     "(method, budget) group");
    }
    std::vector<const ConvergenceRow*> ok;
    for (const auto* r : members) {
      if (r->status == "ok") ok.push_back(r);
    }
    if (ok.size() < 2) continue;
    const std::size_t m = ok.front()->phi.size();
    for (std::size_t f = 0; f < m; ++f) {
      std::vector<double> values;
      values.reserve(ok.size());
      for (const auto* r : ok) values.push_back(r->phi[f]);
      std::sort(values.begin(), values.end());
      SummaryRow s{std::string(convergence_method_name(key.first)), key.second,
                   static_cast<int>(f), {}, static_cast<int>(ok.size())};
      for (double p : probs) s.quantiles.push_back(percentile(values, p));
      out.push_back(std::move(s));
    }
  }
  return out;
}

double band_width(const ConvergenceResult& result, ConvergenceMethod method,
                  std::uint64_t budget, int feature) {
  const auto name = convergence_method_name(method);
  for (const SummaryRow& s : result.summary) {
    if (s.method == name && s.budget == budget && s.feature == feature) {
      return s.quantiles.back() - s.quantiles.front();
    }
  }
  throw Error(ErrorCode::config, "no summary row for " + std::string(name) + " at budget " +
                                     std::to_string(budget));
}

double log_odds(double probability) {
  const double p = std::clamp(probability, 1e-12, 1.0 - 1e-12);
  return std::log(p / (1.0 - p));
}

double class_probability(const MlpModel& model, std::span<const double> x) {
  const auto out = mlp_forward(model, x);
  auto sigmoid = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  if (out.size() == 2) return sigmoid(out[1] - out[0]);
  if (out.size() == 1) {
    return model.layers.back().activation == Activation::sigmoid ? out[0] : sigmoid(out[0]);
  }
  throw Error(ErrorCode::config, "masking needs a network with one output or two logits");
}

namespace {

// Network whose single output moves with the class-1 log-odds: two-logit
// heads with an identity last layer are folded into l1 - l0.
MlpModel binary_head(const MlpModel& model) {
  if (model.output_size() == 1) return model;
  const DenseLayer& last = model.layers.back();
  if (model.output_size() != 2 || last.activation != Activation::identity) {
    throw Error(ErrorCode::config,
                "masking needs a network with one output or two identity logits");
  }
  MlpModel folded = model;
  DenseLayer& l = folded.layers.back();
  DenseLayer diff;
  diff.rows = 1;
  diff.cols = l.cols;
  diff.activation = Activation::identity;
  diff.weights.resize(l.cols);
  for (int c = 0; c < l.cols; ++c) diff.weights[c] = l.weight(1, c) - l.weight(0, c);
  diff.bias = {l.bias[1] - l.bias[0]};
  l = diff;
  folded.output_index = 0;
  return folded;
}

std::vector<double> attribute(const MlpModel& model, std::span<const double> x,
                              const BackgroundData& background, const MaskingOptions& o,
                              std::uint64_t seed) {
  if (o.method == Method::deep) return deep_shap(model, x, background).attributions;
  MaskedGameOptions go;
  go.mode = o.mode;
  go.exec = Exec::serial;
  MaskedGame game(model, {x.begin(), x.end()}, background, go);
  const int m = game.num_features();
  switch (o.method) {
    case Method::exact:
      return shapley_exact(game, Exec::serial).attributions;
    case Method::sampling: {
      SamplingConfig sc;
      sc.n_permutations = o.sampling_permutations;
      sc.seed = seed;
      return sampling_shap(game, sc, Exec::serial).attributions;
    }
    case Method::kernel: {
      KernelConfig kc;
      kc.budget = o.kernel_budget == 0 ? (std::uint64_t{1} << m) - 2 : o.kernel_budget;
      kc.seed = seed;
      kc.exec = Exec::serial;
      return kernel_shap(game, kc).attributions;
    }
    default:
      throw Error(ErrorCode::config, "masking supports exact, kernel, sampling and deep "
                                     "attributions");
  }
}

}  // namespace

MaskingResult run_masking(const MlpModel& model,
                          std::span<const std::vector<double>> instances,
                          const BackgroundData& background, const MaskingOptions& options) {
  validate(ModelSpec(model));
  const MlpModel head = binary_head(model);
  const int m = model.input_size();
  if (background.num_cols() != m) {
    throw Error(ErrorCode::shape, "background width differs from network input size");
  }
  for (double f : options.fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw Error(ErrorCode::config, "fraction outside [0, 1]");
  }
  std::vector<double> fractions = options.fractions;
  std::sort(fractions.begin(), fractions.end());
  fractions.erase(std::unique(fractions.begin(), fractions.end()), fractions.end());

  const auto n = static_cast<int>(instances.size());
  const std::size_t per_instance = 2 * fractions.size();
  std::vector<MaskingRow> rows(per_instance * instances.size());
  const auto& means = background.means();

  auto run_instance = [&](int i) {
    const auto& x = instances[i];
    if (static_cast<int>(x.size()) != m) {
      throw Error(ErrorCode::shape, "instance width differs from network input size");
    }
    const double p_before = class_probability(model, x);
    const bool positive = p_before >= 0.5;
    const std::uint64_t seed = derive_seed(options.seed, static_cast<std::uint64_t>(i));
    const auto phi = attribute(head, x, background, options, seed);

    std::vector<int> shap_rank(m);
    std::iota(shap_rank.begin(), shap_rank.end(), 0);
    std::stable_sort(shap_rank.begin(), shap_rank.end(), [&](int a, int b) {
      return (positive ? phi[a] : -phi[a]) > (positive ? phi[b] : -phi[b]);
    });
    std::vector<int> random_rank(m);
    std::iota(random_rank.begin(), random_rank.end(), 0);
    std::mt19937_64 rng(derive_seed(seed, 0x7a11d0));
    std::shuffle(random_rank.begin(), random_rank.end(), rng);

    for (std::size_t f = 0; f < fractions.size(); ++f) {
      const auto count = static_cast<int>(std::lround(fractions[f] * m));
      for (int which = 0; which < 2; ++which) {
        const auto& rank = which == 0 ? shap_rank : random_rank;
        std::vector<double> masked = x;
        for (int k = 0; k < count; ++k) masked[rank[k]] = means[rank[k]];
        const double p_after = class_probability(model, masked);
        MaskingRow row{i,
                       which == 0 ? "shap" : "random",
                       fractions[f],
                       p_before,
                       p_after,
                       log_odds(p_after) - log_odds(p_before)};
        rows[(static_cast<std::size_t>(which) * fractions.size() + f) * instances.size() + i] =
            row;
      }
    }
  };

  if (options.exec == Exec::serial) {
    for (int i = 0; i < n; ++i) run_instance(i);
  } else {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < n; ++i) {
      try {
        run_instance(i);
      } catch (...) {
#pragma omp critical(shapkit_masking_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  return {options, std::move(rows)};
}

PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw Error(ErrorCode::config, "paired test needs two equal samples of size >= 2");
  }
  const auto n = static_cast<int>(a.size());
  std::vector<double> d(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) d[k] = a[k] - b[k];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1));
  PairedTTest t;
  t.n = n;
  t.mean_difference = mean;
  if (sd == 0.0) {
    t.t_statistic = mean > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    t.p_value = mean > 0 ? 0.0 : 1.0;
    return t;
  }
  t.t_statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
  boost::math::students_t dist(n - 1);
  t.p_value = boost::math::cdf(boost::math::complement(dist, t.t_statistic));
  return t;
}

std::string convergence_raw_csv(const ConvergenceResult& result) {
  const std::size_t m = result.exact.attributions.size();
  const int rep = result.fixture.reported_feature;
  std::string out =
      "method,budget,replicate,seed,status,evaluations_used,reported_error,max_abs_error";
  for (std::size_t f = 0; f < m; ++f) out += ",phi_" + std::to_string(f);
  out += '\n';
  for (const ConvergenceRow& r : result.rows) {
    if (r.status != "ok") {
      out += std::string(convergence_method_name(r.method)) + ',' + std::to_string(r.budget) +
             ',' + std::to_string(r.replicate) + ',' + std::to_string(r.seed) + ',' + r.status +
             ",0,,";
      out += std::string(m, ',') + '\n';
      continue;
    }
    double worst = 0.0;
    for (std::size_t f = 0; f < m; ++f) {
      worst = std::max(worst, std::abs(r.phi[f] - result.exact.attributions[f]));
    }
    out += std::string(convergence_method_name(r.method)) + ',' + std::to_string(r.budget) +
           ',' + std::to_string(r.replicate) + ',' + std::to_string(r.seed) + ",ok," +
           std::to_string(r.evaluations_used) + ',' +
           format_double(r.phi[rep] - result.exact.attributions[rep]) + ',' +
           format_double(worst);
    for (double v : r.phi) out += ',' + format_double(v);
    out += '\n';
  }
  return out;
}

std::string convergence_summary_csv(const ConvergenceResult& result) {
  std::string out = "method,budget,feature,replicates,p10,p50,p90,exact\n";
  for (const SummaryRow& s : result.summary) {
    out += s.method + ',' + std::to_string(s.budget) + ',' + std::to_string(s.feature) + ',' +
           std::to_string(s.replicates);
    for (double q : s.quantiles) out += ',' + format_double(q);
    out += ',' + format_double(result.exact.attributions[s.feature]) + '\n';
  }
  return out;
}

std::string convergence_exact_csv(const ConvergenceResult& result) {
  std::string out = "feature,phi\n";
  out += "base," + format_double(result.exact.base_value) + '\n';
  for (std::size_t f = 0; f < result.exact.attributions.size(); ++f) {
    out += std::to_string(f) + ',' + format_double(result.exact.attributions[f]) + '\n';
  }
  return out;
}

std::string masking_csv(const MaskingResult& result) {
  std::string out = "instance,method,fraction,output_before,output_after,delta_log_odds\n";
  for (const MaskingRow& r : result.rows) {
    out += std::to_string(r.instance) + ',' + r.method + ',' + format_double(r.fraction) + ',' +
           format_double(r.output_before) + ',' + format_double(r.output_after) + ',' +
           format_double(r.delta_log_odds) + '\n';
  }
  return out;
}

}  // namespace shapkit

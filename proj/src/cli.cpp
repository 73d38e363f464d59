#include "shapkit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "shapkit/bench.hpp"
#include "shapkit/error.hpp"
#include "shapkit/exact.hpp"
#include "shapkit/fixtures.hpp"
#include "shapkit/kernel.hpp"
#include "shapkit/masked_game.hpp"
#include "shapkit/model_io.hpp"
#include "shapkit/specific.hpp"
#include "shapkit/table_io.hpp"

namespace shapkit {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

struct RunConfig {
  std::string model_path;
  std::string data_path;
  std::string background_path;
  int instance = 0;
  std::string background_mode = "independence";
  int background_cap = kDefaultBackgroundCap;
  std::string method = "exact";
  std::string methods = "exact,kernel,sampling";
  std::optional<std::uint64_t> budget;
  int permutations = 1000;
  std::string lasso;
  int threshold = kDefaultLowOrderThreshold;
  std::uint64_t seed = 0;
  std::string output;
  std::string format = "json";
  // benchmark
  std::string scenario = "dense_tree";
  std::string budgets = "32,128,512";
  std::string fractions = "0,0.2,1";
  std::string bench_methods = "kernel,kernel+lasso,sampling";
  int replicates = 200;
  std::uint64_t fixture_seed = kDefaultFixtureSeed;
};

// The explained instance and the game built around it.
struct Target {
  std::optional<ModelSpec> model;
  std::vector<double> instance;
  std::optional<BackgroundData> background;
  std::unique_ptr<GameOracle> game;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
std::vector<T> parse_numbers(const std::string& s, const char* what) {
  std::vector<T> out;
  for (const auto& item : split_list(s)) {
    try {
      std::size_t used = 0;
      if constexpr (std::is_floating_point_v<T>) {
        out.push_back(std::stod(item, &used));
      } else {
        out.push_back(static_cast<T>(std::stoull(item, &used)));
      }
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::config, std::string(what) + ": '" + item + "' is not a number");
    }
  }
  return out;
}

void check_width(const NumericTable& t, int expected, const std::string& what) {
  if (static_cast<int>(t.header.size()) != expected) {
    throw Error(ErrorCode::shape, what + " has " + std::to_string(t.header.size()) +
                                      " columns, the model expects " +
                                      std::to_string(expected));
  }
}

Target load_target(const RunConfig& cfg) {
  Target t;
  const ModelDocument doc = load_model_document(cfg.model_path);
  if (doc.tabular_values) {
    t.game = std::make_unique<TabularGame>(doc.tabular_features, *doc.tabular_values);
    return t;
  }
  t.model = *doc.model;
  const int m = arity(*t.model);
  if (cfg.data_path.empty()) {
    throw Error(ErrorCode::config, "--data is required for model documents");
  }
  const NumericTable data = read_numeric_csv(cfg.data_path);
  check_width(data, m, "data file");
  if (cfg.instance < 0 || cfg.instance >= static_cast<int>(data.rows.size())) {
    throw Error(ErrorCode::config, "--instance " + std::to_string(cfg.instance) +
                                       " is outside the " + std::to_string(data.rows.size()) +
                                       " data rows");
  }
  t.instance = data.rows[cfg.instance];
  std::vector<std::vector<double>> rows;
  if (!cfg.background_path.empty()) {
    const NumericTable bg = read_numeric_csv(cfg.background_path);
    check_width(bg, m, "background file");
    rows = bg.rows;
  } else {
    for (std::size_t r = 0; r < data.rows.size(); ++r) {
      if (static_cast<int>(r) != cfg.instance) rows.push_back(data.rows[r]);
    }
  }
  if (rows.empty()) {
    throw Error(ErrorCode::config, "background is empty; pass --background or add data rows");
  }
  MaskedGameOptions go;
  if (cfg.background_mode == "independence") {
    go.mode = MaskingMode::independence;
  } else if (cfg.background_mode == "mean") {
    go.mode = MaskingMode::mean_imputation;
  } else {
    throw Error(ErrorCode::config, "--background-mode must be independence or mean");
  }
  go.background_cap = cfg.background_cap;
  go.subsample_seed = cfg.seed;
  auto game = std::make_unique<MaskedGame>(*t.model, t.instance, BackgroundData::from_rows(rows), go);
  t.background = game->background();
  t.game = std::move(game);
  return t;
}

Regularization parse_lasso(const std::string& text) {
  Regularization r;
  if (text.empty()) return r;
  r.debiased_lasso = true;
  if (text == "auto") return r;
  const auto v = parse_numbers<double>(text, "--lasso");
  if (v.size() != 1 || !(v.front() >= 0.0)) {
    throw Error(ErrorCode::config, "--lasso takes 'auto' or a nonnegative number");
  }
  r.lambda = v.front();
  return r;
}

template <class T>
const T& require_model(const Target& t, const char* method, const char* type) {
  const T* m = t.model ? std::get_if<T>(&*t.model) : nullptr;
  if (!m) {
    throw Error(ErrorCode::config, std::string("method ") + method + " requires a " + type +
                                       " model");
  }
  return *m;
}

Explanation run_method(Method method, const Target& t, const RunConfig& cfg) {
  const GameOracle& game = *t.game;
  const int m = game.num_features();
  switch (method) {
    case Method::exact:
      return shapley_exact(game);
    case Method::permutation_exact:
      return shapley_permutation_exact(game);
    case Method::sampling: {
      SamplingConfig sc;
      sc.n_permutations = cfg.permutations;
      sc.seed = cfg.seed;
      return sampling_shap(game, sc);
    }
    case Method::kernel: {
      KernelConfig kc;
      const std::uint64_t full =
          m < 63 ? (std::uint64_t{1} << m) - 2 : std::numeric_limits<std::uint64_t>::max();
      kc.budget = cfg.budget.value_or(std::min<std::uint64_t>(full, 2048));
      kc.seed = cfg.seed;
      kc.regularization = parse_lasso(cfg.lasso);
      return kernel_shap(game, kc);
    }
    case Method::low_order:
      return low_order_dispatch(game, cfg.threshold);
    case Method::linear:
      return linear_shap(require_model<LinearModel>(t, "linear", "linear"), t.instance,
                         *t.background);
    case Method::max: {
      const auto& model = require_model<MaxModel>(t, "max", "max");
      // Single reference point: absent inputs sit at the background means,
      // which must all share one level for the game to be a max game.
      const auto& means = t.background->means();
      const double level = std::max(model.floor, means.front());
      for (double mu : means) {
        if (std::max(model.floor, mu) != level) {
          throw Error(ErrorCode::config,
                      "method max needs background means that share one reference level");
        }
      }
      Explanation e = max_shap(t.instance, level);
      if (e.fx_full != predict(model, t.instance)) {
        throw Error(ErrorCode::config,
                    "method max needs an instance whose maximum reaches the reference level");
      }
      return e;
    }
    case Method::deep: {
      const auto& model = require_model<MlpModel>(t, "deep", "mlp");
      return deep_shap(model, t.instance, *t.background, model.output_index);
    }
  }
  throw Error(ErrorCode::config, "unsupported method");
}

ordered_json explanation_json(const Explanation& e, const RunConfig& cfg) {
  ordered_json j;
  j["method"] = std::string(method_name(e.method));
  j["base_value"] = e.base_value;
  j["attributions"] = e.attributions;
  j["prediction"] = e.fx_full;
  j["evaluations_used"] = e.evaluations_used;
  j["seed"] = cfg.seed;
  return j;
}

std::string explanation_csv(const Explanation& e, const RunConfig& cfg) {
  std::string out = "method,base_value,prediction,evaluations_used,seed";
  for (int i = 0; i < e.num_features(); ++i) out += ",phi_" + std::to_string(i);
  out += '\n';
  out += std::string(method_name(e.method)) + ',' + format_double(e.base_value) + ',' +
         format_double(e.fx_full) + ',' + std::to_string(e.evaluations_used) + ',' +
         std::to_string(cfg.seed);
  for (double v : e.attributions) out += ',' + format_double(v);
  out += '\n';
  return out;
}

void emit(const std::string& content, const RunConfig& cfg, std::ostream& out) {
  if (cfg.output.empty()) {
    out << content;
  } else {
    write_text_file(cfg.output, content);
  }
}

int cmd_explain(const RunConfig& cfg, std::ostream& out) {
  if (cfg.format != "json" && cfg.format != "csv") {
    throw Error(ErrorCode::config, "--format must be json or csv");
  }
  const Target t = load_target(cfg);
  const Explanation e = run_method(parse_method(cfg.method), t, cfg);
  emit(cfg.format == "json" ? explanation_json(e, cfg).dump(2) + "\n" : explanation_csv(e, cfg),
       cfg, out);
  return 0;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out) {
  const Target t = load_target(cfg);
  const auto names = split_list(cfg.methods);
  if (names.empty()) throw Error(ErrorCode::config, "--methods is empty");
  ordered_json results = ordered_json::array();
  std::vector<std::pair<std::string, Explanation>> done;
  std::optional<ErrorCode> first_failure;
  for (const auto& name : names) {
    ordered_json entry;
    entry["method"] = name;
    try {
      Explanation e = run_method(parse_method(name), t, cfg);
      entry["base_value"] = e.base_value;
      entry["attributions"] = e.attributions;
      entry["prediction"] = e.fx_full;
      entry["evaluations_used"] = e.evaluations_used;
      done.emplace_back(name, std::move(e));
    } catch (const Error& err) {
      if (!first_failure) first_failure = err.code();
      entry["error"] = {{"code", std::string(error_code_name(err.code()))},
                        {"message", err.what()}};
    }
    results.push_back(entry);
  }
  ordered_json deviations = ordered_json::array();
  for (std::size_t a = 0; a < done.size(); ++a) {
    for (std::size_t b = a + 1; b < done.size(); ++b) {
      double worst = 0.0;
      const auto& pa = done[a].second.attributions;
      const auto& pb = done[b].second.attributions;
      for (std::size_t i = 0; i < pa.size(); ++i) worst = std::max(worst, std::abs(pa[i] - pb[i]));
      deviations.push_back({{"a", done[a].first}, {"b", done[b].first}, {"max_abs", worst}});
    }
  }
  ordered_json doc;
  doc["seed"] = cfg.seed;
  doc["results"] = results;
  doc["deviations"] = deviations;
  emit(doc.dump(2) + "\n", cfg, out);
  if (done.empty()) return exit_status(*first_failure);
  return 0;
}

fs::path output_dir(const RunConfig& cfg) {
  if (cfg.output.empty()) throw Error(ErrorCode::config, "--output DIR is required");
  std::error_code ec;
  fs::create_directories(cfg.output, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + cfg.output + ": " + ec.message());
  return cfg.output;
}

// Writes each file and records its digest in the manifest.
void write_outputs(const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& files,
                   ordered_json manifest, std::ostream& out) {
  ordered_json digests;
  for (const auto& [name, content] : files) {
    write_text_file(dir / name, content);
    digests[name] = sha256_hex(content);
  }
  manifest["files"] = digests;
  const std::string text = manifest.dump(2) + "\n";
  write_text_file(dir / "manifest.json", text);
  ordered_json summary;
  summary["output"] = dir.string();
  summary["files"] = digests;
  summary["manifest_sha256"] = sha256_hex(text);
  out << summary.dump(2) << "\n";
}

int cmd_benchmark(const RunConfig& cfg, std::ostream& out) {
  const fs::path dir = output_dir(cfg);
  ordered_json manifest;
  manifest["command"] = "benchmark";
  manifest["scenario"] = cfg.scenario;
  manifest["seed"] = cfg.seed;
  if (cfg.scenario == "masking") {
    const MaskingFixture fx = make_masking_fixture(cfg.seed);
    MaskingOptions mo;
    mo.method = parse_method(cfg.method);
    mo.kernel_budget = cfg.budget.value_or(0);
    mo.sampling_permutations = cfg.permutations;
    mo.fractions = parse_numbers<double>(cfg.fractions, "--fractions");
    mo.seed = cfg.seed;
    const MaskingResult r = run_masking(fx.model, fx.instances, fx.background, mo);
    manifest["method"] = std::string(method_name(mo.method));
    manifest["fractions"] = mo.fractions;
    manifest["instances"] = fx.instances.size();
    manifest["fixture_sha256"] = sha256_hex(model_to_json(fx.model));
    ordered_json tests = ordered_json::array();
    for (double f : mo.fractions) {
      std::vector<double> shap, rnd;
      for (const MaskingRow& row : r.rows) {
        if (row.fraction != f) continue;
        (row.method == "shap" ? shap : rnd).push_back(std::abs(row.delta_log_odds));
      }
      if (f == 0.0 || shap.size() < 2) continue;
      const PairedTTest t = paired_t_test(shap, rnd);
      tests.push_back({{"fraction", f},
                       {"mean_abs_delta_shap", std::accumulate(shap.begin(), shap.end(), 0.0) / shap.size()},
                       {"mean_abs_delta_random", std::accumulate(rnd.begin(), rnd.end(), 0.0) / rnd.size()},
                       {"t_statistic", t.t_statistic},
                       {"p_value", t.p_value}});
    }
    manifest["paired_tests"] = tests;
    write_outputs(dir, {{"masking.csv", masking_csv(r)}}, manifest, out);
    return 0;
  }
  ConvergenceOptions co;
  co.scenario = parse_scenario(cfg.scenario);
  co.budgets = parse_numbers<std::uint64_t>(cfg.budgets, "--budgets");
  co.replicates = cfg.replicates;
  co.seed = cfg.seed;
  co.methods.clear();
  for (const auto& name : split_list(cfg.bench_methods)) {
    co.methods.push_back(parse_convergence_method(name));
  }
  const ConvergenceResult r = run_convergence(co);
  manifest["replicates"] = co.replicates;
  manifest["budgets"] = co.budgets;
  ordered_json methods = ordered_json::array();
  for (auto m : co.methods) methods.push_back(std::string(convergence_method_name(m)));
  manifest["methods"] = methods;
  manifest["num_features"] = r.fixture.tree.num_features;
  manifest["active_features"] = r.fixture.active_features;
  manifest["reported_feature"] = r.fixture.reported_feature;
  manifest["fixture_sha256"] = sha256_hex(model_to_json(r.fixture.tree));
  ordered_json bands = ordered_json::array();
  for (const SummaryRow& s : r.summary) {
    if (s.feature != r.fixture.reported_feature) continue;
    bands.push_back({{"method", s.method}, {"budget", s.budget},
                     {"p10", s.quantiles[0]}, {"p90", s.quantiles[2]},
                     {"width", s.quantiles[2] - s.quantiles[0]}});
  }
  manifest["reported_bands"] = bands;
  write_outputs(dir,
                {{"convergence_raw.csv", convergence_raw_csv(r)},
                 {"convergence_summary.csv", convergence_summary_csv(r)},
                 {"convergence_exact.csv", convergence_exact_csv(r)}},
                manifest, out);
  return 0;
}

std::string rows_csv(const std::vector<std::vector<double>>& rows) {
  NumericTable t;
  for (std::size_t c = 0; c < rows.front().size(); ++c) t.header.push_back("f" + std::to_string(c));
  t.rows = rows;
  return numeric_csv(t);
}

std::vector<std::vector<double>> background_rows(const BackgroundData& bg) {
  std::vector<std::vector<double>> rows;
  for (int r = 0; r < bg.num_rows(); ++r) rows.emplace_back(bg.row(r).begin(), bg.row(r).end());
  return rows;
}

int cmd_gen_fixtures(const RunConfig& cfg, std::ostream& out) {
  const fs::path dir = output_dir(cfg);
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("sickness_game.json", tabular_game_to_json(sickness_game()));

  const MaxFixture mx = max_game_fixture();
  files.emplace_back("max_game.json", model_to_json(mx.model));
  auto max_rows = background_rows(mx.background);
  max_rows.insert(max_rows.begin(), mx.instance);
  files.emplace_back("max_game_data.csv", rows_csv(max_rows));

  for (Scenario s : {Scenario::dense_tree, Scenario::sparse_tree}) {
    const TreeScenario fx = make_tree_scenario(s, cfg.seed);
    const std::string name(scenario_name(s));
    files.emplace_back(name + ".json", model_to_json(fx.tree));
    auto rows = background_rows(fx.background);
    rows.insert(rows.begin(), fx.instance);
    files.emplace_back(name + "_data.csv", rows_csv(rows));
  }

  const MaskingFixture mf = make_masking_fixture(cfg.seed);
  files.emplace_back("masking_mlp.json", model_to_json(mf.model));
  files.emplace_back("masking_data.csv", rows_csv(mf.instances));
  files.emplace_back("masking_background.csv", rows_csv(background_rows(mf.background)));

  ordered_json manifest;
  manifest["command"] = "gen-fixtures";
  manifest["seed"] = cfg.seed;
  write_outputs(dir, files, manifest, out);
  return 0;
}

void add_game_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--model", cfg.model_path, "Model or tabular game document (JSON)")->required();
  cmd->add_option("--data", cfg.data_path, "Instances: CSV with a header row");
  cmd->add_option("--instance", cfg.instance, "Row of --data to explain");
  cmd->add_option("--background", cfg.background_path,
                  "Background CSV (default: --data without the explained row)");
  cmd->add_option("--background-mode", cfg.background_mode, "independence or mean");
  cmd->add_option("--background-cap", cfg.background_cap, "Max background rows kept");
  cmd->add_option("--budget", cfg.budget, "Kernel SHAP design coalitions");
  cmd->add_option("--permutations", cfg.permutations, "Sampling orderings");
  cmd->add_option("--lasso", cfg.lasso, "Debiased lasso penalty, or 'auto' for CV");
  cmd->add_option("--threshold", cfg.threshold, "Low-order SHAP feature limit");
  cmd->add_option("--seed", cfg.seed, "Random seed");
  cmd->add_option("--output", cfg.output, "Output file (default stdout)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto fail = [&err](std::string_view code, const std::string& message, int status) {
    ordered_json j;
    j["error"] = std::string(code);
    j["message"] = message;
    err << j.dump() << "\n";
    return status;
  };

  CLI::App app{"Shapley additive explanations for tabular models", "shapkit"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* explain = app.add_subcommand("explain", "Explain one prediction");
  add_game_options(explain, cfg);
  explain->add_option("--method", cfg.method,
                      "exact, sampling, kernel, linear, max, deep or low-order");
  explain->add_option("--format", cfg.format, "json or csv");

  auto* compare = app.add_subcommand("compare", "Run several estimators on one game");
  add_game_options(compare, cfg);
  compare->add_option("--methods", cfg.methods, "Comma-separated methods");

  auto* benchmark = app.add_subcommand("benchmark", "Convergence or masking experiment");
  benchmark->add_option("--scenario", cfg.scenario, "dense_tree, sparse_tree or masking");
  benchmark->add_option("--budgets", cfg.budgets, "Comma-separated evaluation budgets");
  benchmark->add_option("--replicates", cfg.replicates, "Replicates per method and budget");
  benchmark->add_option("--methods", cfg.bench_methods, "kernel, kernel+lasso, sampling");
  benchmark->add_option("--method", cfg.method, "Masking attribution method")
      ->default_str("kernel");
  benchmark->add_option("--budget", cfg.budget, "Masking Kernel SHAP budget");
  benchmark->add_option("--permutations", cfg.permutations, "Masking sampling orderings");
  benchmark->add_option("--fractions", cfg.fractions, "Masked fractions for masking");
  benchmark->add_option("--seed", cfg.fixture_seed, "Fixture and replicate seed");
  benchmark->add_option("--output", cfg.output, "Output directory")->required();

  auto* gen = app.add_subcommand("gen-fixtures", "Write the fixture models and data");
  gen->add_option("--seed", cfg.fixture_seed, "Fixture seed");
  gen->add_option("--output", cfg.output, "Output directory")->required();

  std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail("config_error", e.what(), 2);
  }

  try {
    if (explain->parsed()) return cmd_explain(cfg, out);
    if (compare->parsed()) return cmd_compare(cfg, out);
    cfg.seed = cfg.fixture_seed;
    if (benchmark->parsed()) {
      if (benchmark->count("--method") == 0) cfg.method = "kernel";
      return cmd_benchmark(cfg, out);
    }
    return cmd_gen_fixtures(cfg, out);
  } catch (const Error& e) {
    return fail(error_code_name(e.code()), e.what(), exit_status(e.code()));
  } catch (const std::exception& e) {
    return fail("numeric_error", e.what(), 3);
  }
}

}  // namespace shapkit

#include "shapkit/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <unordered_set>

#include "lasso.hpp"
#include "shapkit/error.hpp"

namespace shapkit {
namespace {

double binomial(int n, int k) {
  k = std::min(k, n - k);
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

// Size strata sharing one budget allocation: {s, M-s} when paired.
struct Stratum {
  std::vector<int> sizes;
  double count = 0.0;
  double mass = 0.0;
};

std::vector<Stratum> build_strata(int m, bool paired) {
  std::vector<Stratum> out;
  for (int s = 1; s <= m / 2; ++s) {
    const int mirror = m - s;
    if (paired || mirror == s) {
      Stratum st;
      st.sizes = mirror == s ? std::vector<int>{s} : std::vector<int>{s, mirror};
      out.push_back(st);
    } else {
      out.push_back(Stratum{{s}, 0, 0});
      out.push_back(Stratum{{mirror}, 0, 0});
    }
  }
  for (Stratum& st : out) {
    for (int s : st.sizes) {
      st.count += binomial(m, s);
      st.mass += kernel_stratum_mass(m, s);
    }
  }
  return out;
}

// Uniform random subset of `size` features out of m.
Mask random_subset(int m, int size, std::mt19937_64& rng) {
  std::vector<int> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  Mask mask = 0;
  for (int i = 0; i < size; ++i) {
    std::uniform_int_distribution<int> pick(i, m - 1);
    std::swap(idx[i], idx[pick(rng)]);
    mask |= Mask{1} << idx[i];
  }
  return mask;
}

std::vector<Mask> all_of_size(int m, int size) {
  std::vector<Mask> out;
  // Gosper's hack walks the size-`size` masks in increasing order.
  Mask v = (Mask{1} << size) - 1;
  const Mask limit = Mask{1} << m;
  while (v < limit) {
    out.push_back(v);
    const Mask t = v | (v - 1);
    v = (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(v) + 1));
  }
  return out;
}

constexpr double kEnumerateLimit = 200000.0;

// Draws `count` distinct masks of size `size`, optionally with complements
// (which may have a different size). `chosen` holds masks already present.
void draw_stratum(int m, const Stratum& st, std::uint64_t count, bool paired,
                  std::mt19937_64& rng, std::unordered_set<Mask>& chosen,
                  std::vector<Mask>& out) {
  const int size = st.sizes.front();
  const Mask full = full_mask(m);
  std::uint64_t added = 0;
  auto add = [&](Mask s) {
    if (added < count && chosen.insert(s).second) {
      out.push_back(s);
      ++added;
    }
  };
  const double base_count = binomial(m, size);
  if (base_count <= kEnumerateLimit) {
    std::vector<Mask> pool = all_of_size(m, size);
    std::shuffle(pool.begin(), pool.end(), rng);
    for (Mask s : pool) {
      if (added >= count) break;
      if (chosen.count(s)) continue;
      add(s);
      if (paired) add(full & ~s);
    }
    return;
  }
  while (added < count) {
    const Mask s = random_subset(m, size, rng);
    if (chosen.count(s)) continue;
    add(s);
    if (paired) add(full & ~s);
  }
}

// Largest-remainder split of `total` proportional to `share`, capped by
// `cap`; excess is pushed to strata with spare capacity.
std::vector<std::uint64_t> apportion(std::uint64_t total,
                                     const std::vector<double>& share,
                                     const std::vector<double>& cap) {
  const std::size_t k = share.size();
  std::vector<std::uint64_t> out(k, 0);
  std::vector<bool> open(k, true);
  std::uint64_t left = total;
  while (left > 0) {
    double open_share = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (open[i]) open_share += share[i];
    }
    if (open_share <= 0.0) break;
    std::vector<double> exact(k, 0.0);
    std::uint64_t given = 0;
    std::vector<std::pair<double, std::size_t>> rema;
    for (std::size_t i = 0; i < k; ++i) {
      if (!open[i]) continue;
      exact[i] = static_cast<double>(left) * share[i] / open_share;
      auto whole = static_cast<std::uint64_t>(std::floor(exact[i]));
      out[i] += whole;
      given += whole;
      rema.emplace_back(exact[i] - static_cast<double>(whole), i);
    }
    std::stable_sort(rema.begin(), rema.end(),
                     [](auto a, auto b) { return a.first > b.first; });
    for (std::size_t r = 0; given < left && r < rema.size(); ++r) {
      ++out[rema[r].second];
      ++given;
    }
    left = 0;
    bool clipped = false;
    for (std::size_t i = 0; i < k; ++i) {
      if (open[i] && static_cast<double>(out[i]) >= cap[i]) {
        const auto c = static_cast<std::uint64_t>(cap[i]);
        left += out[i] - c;
        out[i] = c;
        open[i] = false;
        clipped = true;
      }
    }
    if (!clipped) break;
  }
  return out;
}

detail::WeightedProblem reduce(const WeightedDesign& design, double v_empty,
                               double v_full) {
  const int m = design.num_features;
  const int last = m - 1;
  const double delta = v_full - v_empty;
  detail::WeightedProblem p;
  const auto n = static_cast<Eigen::Index>(design.rows.size());
  p.x.resize(n, last);
  p.y.resize(n);
  p.w.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const DesignRow& r = design.rows[static_cast<std::size_t>(k)];
    const double z_last = (r.mask >> last) & Mask{1} ? 1.0 : 0.0;
    for (int i = 0; i < last; ++i) {
      p.x(k, i) = ((r.mask >> i) & Mask{1} ? 1.0 : 0.0) - z_last;
    }
    p.y(k) = r.value - v_empty - z_last * delta;
    p.w(k) = r.weight;
  }
  return p;
}

Explanation recover(const Eigen::VectorXd& beta, int m, double v_empty,
                    double v_full) {
  Explanation e;
  e.method = Method::kernel;
  e.base_value = v_empty;
  e.fx_full = v_full;
  e.attributions.resize(m);
  double rest = 0.0;
  for (int i = 0; i + 1 < m; ++i) {
    e.attributions[i] = beta(i);
    rest += beta(i);
  }
  e.attributions[m - 1] = (v_full - v_empty) - rest;
  return e;
}

// Rows (z, v - v0) and (z - 1, v - v1): under efficiency both are exact
// linear equations in phi, so an unconstrained fit over all M features sees
// the constraint without singling out a feature.
detail::WeightedProblem augment(const WeightedDesign& design, double v_empty,
                                double v_full) {
  const int m = design.num_features;
  const auto n = static_cast<Eigen::Index>(design.rows.size());
  detail::WeightedProblem p;
  p.x.resize(2 * n, m);
  p.y.resize(2 * n);
  p.w.resize(2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const DesignRow& r = design.rows[static_cast<std::size_t>(k)];
    for (int i = 0; i < m; ++i) {
      const double z = (r.mask >> i) & Mask{1} ? 1.0 : 0.0;
      p.x(k, i) = z;
      p.x(n + k, i) = z - 1.0;
    }
    p.y(k) = r.value - v_empty;
    p.y(n + k) = r.value - v_full;
    p.w(k) = r.weight;
    p.w(n + k) = r.weight;
  }
  return p;
}

[[noreturn]] void singular(const WeightedDesign& design) {
  const int m = design.num_features;
  std::vector<int> per_size(m + 1, 0);
  for (const DesignRow& r : design.rows) ++per_size[std::popcount(r.mask)];
  std::string present, missing;
  for (int s = 1; s < m; ++s) {
    std::string& dst = per_size[s] > 0 ? present : missing;
    if (!dst.empty()) dst += ",";
    dst += std::to_string(s);
  }
  throw Error(ErrorCode::singular,
              "reduced kernel design over M=" + std::to_string(m) +
                  " is rank deficient (" + std::to_string(design.rows.size()) +
                  " rows); sizes covered {" + present + "}, sizes missing {" +
                  missing + "}");
}

void check_design(const WeightedDesign& design) {
  if (design.num_features < 1) {
    throw Error(ErrorCode::config, "design has no features");
  }
  for (const DesignRow& r : design.rows) {
    if (!(r.weight > 0.0) || !std::isfinite(r.weight)) {
      throw Error(ErrorCode::numeric, "design weight must be finite and > 0");
    }
    if (!std::isfinite(r.value)) {
      throw Error(ErrorCode::numeric, "design value is not finite");
    }
  }
}

}  // namespace

double shapley_kernel_weight(int num_features, int size) {
  if (num_features < 1 || size < 0 || size > num_features) {
    throw Error(ErrorCode::config, "kernel weight needs 0 <= s <= M, M >= 1");
  }
  if (size == 0 || size == num_features) {
    return std::numeric_limits<double>::infinity();
  }
  return (num_features - 1) /
         (binomial(num_features, size) * size * (num_features - size));
}

double kernel_stratum_mass(int num_features, int size) {
  return static_cast<double>(num_features - 1) /
         (static_cast<double>(size) * (num_features - size));
}

std::uint64_t minimum_kernel_budget(int num_features) {
  if (num_features <= 1) return 0;
  if (num_features < 63) {
    const std::uint64_t total = (std::uint64_t{1} << num_features) - 2;
    return std::min<std::uint64_t>(total, num_features);
  }
  return static_cast<std::uint64_t>(num_features);
}

WeightedDesign sample_coalitions(int num_features, const KernelConfig& config) {
  const int m = num_features;
  if (m < 1 || m >= kMaxFeatures) {
    throw Error(ErrorCode::capacity, "kernel design needs 1 <= M <= 63");
  }
  if (config.budget < minimum_kernel_budget(m)) {
    throw Error(ErrorCode::config,
                "kernel budget " + std::to_string(config.budget) +
                    " is below the minimum " +
                    std::to_string(minimum_kernel_budget(m)) + " for M=" +
                    std::to_string(m));
  }
  WeightedDesign design;
  design.num_features = m;
  const double total = m < 63 ? std::ldexp(1.0, m) - 2.0 : std::ldexp(1.0, m);
  if (static_cast<double>(config.budget) >= total) {
    if (m > kMaxEnumerationFeatures) {
      throw Error(ErrorCode::capacity, "full kernel enumeration needs M <= 25");
    }
    const Mask end = full_mask(m);
    design.rows.reserve(static_cast<std::size_t>(total));
    for (Mask s = 1; s < end; ++s) {
      design.rows.push_back({s, shapley_kernel_weight(m, std::popcount(s)), 0.0});
    }
    design.complete = true;
    return design;
  }

  std::vector<Stratum> strata = build_strata(m, config.paired_sampling);
  double budget_left = static_cast<double>(config.budget);
  double mass_left = 0.0;
  for (const Stratum& st : strata) mass_left += st.mass;

  std::vector<Mask> masks;
  std::unordered_set<Mask> chosen;
  std::size_t next = 0;
  for (; next < strata.size(); ++next) {
    const Stratum& st = strata[next];
    const double share = budget_left * st.mass / mass_left;
    if (share + 1e-9 < st.count) break;
    for (int s : st.sizes) {
      for (Mask mask : all_of_size(m, s)) {
        masks.push_back(mask);
        chosen.insert(mask);
      }
    }
    budget_left -= st.count;
    mass_left -= st.mass;
  }

  std::vector<double> share, cap;
  for (std::size_t k = next; k < strata.size(); ++k) {
    share.push_back(strata[k].mass);
    cap.push_back(strata[k].count);
  }
  const auto left = static_cast<std::uint64_t>(std::llround(budget_left));
  std::vector<std::uint64_t> alloc;
  if (config.paired_sampling) {
    // Allocate whole complement pairs; an odd budget leaves one single.
    for (double& c : cap) c = std::floor(c / 2.0);
    alloc = apportion(left / 2, share, cap);
    for (auto& a : alloc) a *= 2;
    if (left % 2 == 1) {
      for (std::size_t k = 0; k < alloc.size(); ++k) {
        if (static_cast<double>(alloc[k]) < strata[next + k].count) {
          ++alloc[k];
          break;
        }
      }
    }
  } else {
    alloc = apportion(left, share, cap);
  }
  std::mt19937_64 rng(config.seed);
  for (std::size_t k = next; k < strata.size(); ++k) {
    const std::uint64_t want = alloc[k - next];
    if (want == 0) continue;
    draw_stratum(m, strata[k], want, config.paired_sampling, rng, chosen, masks);
  }

  std::vector<std::uint64_t> per_size(m + 1, 0);
  for (Mask s : masks) ++per_size[std::popcount(s)];
  design.rows.reserve(masks.size());
  for (Mask s : masks) {
    const int size = std::popcount(s);
    const double coverage =
        binomial(m, size) / static_cast<double>(per_size[size]);
    design.rows.push_back({s, shapley_kernel_weight(m, size) * coverage, 0.0});
  }
  return design;
}

void evaluate_design(const GameOracle& game, WeightedDesign& design, Exec exec) {
  std::vector<Mask> masks;
  masks.reserve(design.rows.size());
  for (const DesignRow& r : design.rows) masks.push_back(r.mask);
  const auto values = evaluate_coalitions(game, masks, exec);
  for (std::size_t k = 0; k < values.size(); ++k) design.rows[k].value = values[k];
}

// Constrained WLS over `support` (ascending); features outside it get 0
// and the last supported feature absorbs the efficiency constraint.
Explanation refit_on_support(const WeightedDesign& design, double v_empty,
                             double v_full, const std::vector<int>& support) {
  const int m = design.num_features;
  const int last = support.back();
  const double delta = v_full - v_empty;
  const auto n = static_cast<Eigen::Index>(design.rows.size());
  const auto d = static_cast<Eigen::Index>(support.size()) - 1;
  detail::WeightedProblem p;
  p.x.resize(n, d);
  p.y.resize(n);
  p.w.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const DesignRow& r = design.rows[static_cast<std::size_t>(k)];
    const double z_last = (r.mask >> last) & Mask{1} ? 1.0 : 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      p.x(k, j) = ((r.mask >> support[static_cast<std::size_t>(j)]) & Mask{1} ? 1.0 : 0.0) - z_last;
    }
    p.y(k) = r.value - v_empty - z_last * delta;
    p.w(k) = r.weight;
  }
  Eigen::VectorXd beta;
  if (n < d || !detail::weighted_least_squares(p, beta)) singular(design);
  Explanation e;
  e.method = Method::kernel;
  e.base_value = v_empty;
  e.fx_full = v_full;
  e.attributions.assign(m, 0.0);
  double rest = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    e.attributions[support[static_cast<std::size_t>(j)]] = beta(j);
    rest += beta(j);
  }
  e.attributions[last] = delta - rest;
  return e;
}

Explanation solve_constrained_wls(const WeightedDesign& design, double v_empty,
                                  double v_full) {
  check_design(design);
  const int m = design.num_features;
  if (m == 1) return recover(Eigen::VectorXd(), 1, v_empty, v_full);
  const detail::WeightedProblem p = reduce(design, v_empty, v_full);
  Eigen::VectorXd beta;
  if (p.x.rows() < m - 1 || !detail::weighted_least_squares(p, beta)) {
    singular(design);
  }
  return recover(beta, m, v_empty, v_full);
}

Explanation solve_debiased_lasso(const WeightedDesign& design, double v_empty,
                                 double v_full, std::optional<double> lambda,
                                 std::uint64_t cv_seed) {
  check_design(design);
  const int m = design.num_features;
  if (m == 1) return recover(Eigen::VectorXd(), 1, v_empty, v_full);
  if (lambda && !(*lambda >= 0.0)) {
    throw Error(ErrorCode::config, "lasso penalty must be >= 0");
  }
  const detail::WeightedProblem aug = augment(design, v_empty, v_full);
  double penalty = 0.0;
  if (lambda) {
    penalty = *lambda;
  } else {
    const auto n = static_cast<Eigen::Index>(design.rows.size());
    const auto path = detail::cross_validate_lambda(aug, cv_seed, 5, 20, n);
    penalty = path.lambdas[path.best];
  }
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(m);
  detail::weighted_lasso(aug, penalty, beta);
  std::vector<int> support;
  for (int i = 0; i < m; ++i) {
    if (beta(i) != 0.0) support.push_back(i);
  }
  if (support.empty()) {
    // Efficiency still needs a carrier: the most correlated feature.
    const Eigen::VectorXd c = aug.x.transpose() * aug.w.cwiseProduct(aug.y);
    Eigen::Index best = 0;
    c.cwiseAbs().maxCoeff(&best);
    support.push_back(static_cast<int>(best));
  }
  return refit_on_support(design, v_empty, v_full, support);
}

Explanation kernel_shap(const GameOracle& game, const KernelConfig& config) {
  const int m = game.num_features();
  WeightedDesign design = sample_coalitions(m, config);
  const std::uint64_t before = game.evaluations();
  const double v_empty = game.value(Coalition::empty(m));
  const double v_full = game.value(Coalition::full(m));
  evaluate_design(game, design, config.exec);
  Explanation e =
      config.regularization.debiased_lasso
          ? solve_debiased_lasso(design, v_empty, v_full,
                                 config.regularization.lambda,
                                 derive_seed(config.seed, 0x1a550))
          : solve_constrained_wls(design, v_empty, v_full);
  e.evaluations_used = game.evaluations() - before;
  return e;
}

}  // namespace shapkit

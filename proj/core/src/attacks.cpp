#include "advens/attacks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "advens/error.hpp"

namespace advens {
namespace {

constexpr std::array<std::pair<AttackMethod, std::string_view>, 16> kMethodNames{{
    {AttackMethod::none, "none"},
    {AttackMethod::pgd_l1, "pgd_l1"},
    {AttackMethod::pgd_l2, "pgd_l2"},
    {AttackMethod::pgd_linf, "pgd_linf"},
    {AttackMethod::pgd_adam, "pgd_adam"},
    {AttackMethod::rfgsm, "rfgsm"},
    {AttackMethod::grosse, "grosse"},
    {AttackMethod::jsma, "jsma"},
    {AttackMethod::bca, "bca"},
    {AttackMethod::bga, "bga"},
    {AttackMethod::gdkde, "gdkde"},
    {AttackMethod::mimicry, "mimicry"},
    {AttackMethod::salt_pepper, "salt_pepper"},
    {AttackMethod::pointwise, "pointwise"},
    {AttackMethod::max, "max"},
    {AttackMethod::iter_max, "iter_max"},
}};

// Keeps the candidate with the highest score; earlier candidates win ties.
class BestCandidate {
 public:
  void offer(const FeatureVector& candidate, double score) {
    if (!has_ || score > score_) {
      best_ = candidate;
      score_ = score;
      has_ = true;
    }
  }
  const FeatureVector& best() const { return best_; }
  double score() const { return score_; }

 private:
  FeatureVector best_;
  double score_ = -std::numeric_limits<double>::infinity();
  bool has_ = false;
};

FeatureVector clip(const FeatureVector& v, const Box& box) { return v.cwiseMax(box.lower).cwiseMin(box.upper); }

// Start point moved into the box of (x, spec) so that chained attacks over several
// specs stay feasible.
FeatureVector effective_start(const AttackProblem& p) {
  if (p.start.size() != p.x.size()) throw InputError("attack start point has the wrong length");
  if (!is_binary(p.start)) throw InputError("attack start point must be binary");
  return feasible_nearest(p.start, p.x, p.spec);
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void require_pool(std::span<const FeatureVector> pool, const char* who) {
  if (pool.empty()) throw ConfigError(std::string(who) + " needs a non-empty benign pool");
}

}  // namespace

std::string_view to_string(AttackMethod m) {
  for (const auto& [method, name] : kMethodNames) {
    if (method == m) return name;
  }
  return "unknown";
}

AttackMethod parse_attack_method(std::string_view name) {
  for (const auto& [method, n] : kMethodNames) {
    if (n == name) return method;
  }
  throw ConfigError("unknown attack method '" + std::string(name) + "'");
}

void AttackConfig::validate() const {
  auto fail = [this](const std::string& what) {
    throw ConfigError(std::string(to_string(method)) + ": " + what);
  };
  if (iterations < 0) fail("iterations must be >= 0");
  if (!(step_size > 0.0)) fail("step_size must be > 0");
  if (!(lambda >= 0.0)) fail("lambda must be >= 0");
  if (!(bandwidth > 0.0)) fail("bandwidth must be > 0");
  if (n_ben < 1) fail("n_ben must be >= 1");
  if (n_rept < 1) fail("n_rept must be >= 1");
  if (!(eps_max >= 0.0 && eps_max <= 1.0)) fail("eps_max must lie in [0, 1]");
  if (n_s < 1) fail("n_s must be >= 1");
  if (max_flips < -1) fail("max_flips must be >= 0 (or -1 for no cap)");
  if (method == AttackMethod::max || method == AttackMethod::iter_max) {
    if (components.empty()) fail("component list must be non-empty");
    for (const auto& c : components) c.validate();
  }
  if (rounds < 1) fail("rounds must be >= 1");
  if (!(epsilon > 0.0)) fail("epsilon must be > 0");
}

AttackConfig attack_preset(AttackMethod m) {
  AttackConfig c;
  c.method = m;
  switch (m) {
    case AttackMethod::pgd_l1:
      c.iterations = 100;
      c.step_size = 1.0;
      break;
    case AttackMethod::pgd_l2:
      c.iterations = 1000;
      c.step_size = 1.0;
      break;
    case AttackMethod::pgd_linf:
    case AttackMethod::pgd_adam:
    case AttackMethod::gdkde:
      c.iterations = 1000;
      c.step_size = 0.01;
      break;
    case AttackMethod::rfgsm:
      c.iterations = 100;
      c.step_size = 0.01;
      break;
    case AttackMethod::grosse:
    case AttackMethod::jsma:
    case AttackMethod::bca:
    case AttackMethod::bga:
      c.iterations = 100;
      break;
    case AttackMethod::max:
    case AttackMethod::iter_max:
      c.components = max_pgd_components(false);
      break;
    default:
      break;
  }
  return c;
}

AttackConfig training_preset(AttackMethod m) {
  AttackConfig c = attack_preset(m);
  switch (m) {
    case AttackMethod::pgd_l1:
      c.iterations = 50;
      break;
    case AttackMethod::pgd_l2:
      c.iterations = 100;
      break;
    case AttackMethod::pgd_linf:
    case AttackMethod::rfgsm:
      c.iterations = 100;
      c.step_size = 0.01;
      break;
    case AttackMethod::pgd_adam:
      c.iterations = 100;
      c.step_size = 0.02;
      c.random_start = true;
      break;
    case AttackMethod::max:
    case AttackMethod::iter_max:
      c.components = max_pgd_components(true);
      break;
    default:
      break;
  }
  return c;
}

std::vector<AttackConfig> max_pgd_components(bool training_budget) {
  std::vector<AttackConfig> out;
  for (auto m : {AttackMethod::pgd_l1, AttackMethod::pgd_l2, AttackMethod::pgd_linf, AttackMethod::pgd_adam}) {
    out.push_back(training_budget ? training_preset(m) : attack_preset(m));
  }
  return out;
}

AttackOutcome make_outcome(const Classifier& model, const AttackProblem& p, FeatureVector x_adv, int iterations) {
  AttackOutcome out;
  const Logits z = model.logits(x_adv);
  out.success = label_from_logits(z) != p.y;
  out.final_loss = loss_from_logits(z, p.y);
  out.l0 = hamming_distance(x_adv, p.x);
  out.l1 = l1_distance(x_adv, p.x);
  out.iterations_used = iterations;
  out.x_adv = std::move(x_adv);
  return out;
}

AttackOutcome pgd(const Classifier& model, const AttackProblem& p, PgdNorm norm, const AttackConfig& cfg) {
  if (norm != PgdNorm::l1 && norm != PgdNorm::l2 && norm != PgdNorm::linf) throw ConfigError("unknown PGD norm");
  const Box box = bounds(p.spec, p.x);
  FeatureVector cur = effective_start(p);
  BestCandidate best;
  best.offer(cur, loss(model, cur, p.y));

  int used = 0;
  for (int t = 0; t < cfg.iterations; ++t) {
    const Eigen::VectorXd g = input_gradient(model, cur, p.y);
    if (norm == PgdNorm::l1) {
      Eigen::Index pick = -1;
      double magnitude = 0.0;
      for (Eigen::Index i = 0; i < g.size(); ++i) {
        const bool movable = (g[i] > 0.0 && cur[i] < box.upper[i]) || (g[i] < 0.0 && cur[i] > box.lower[i]);
        if (movable && std::abs(g[i]) > magnitude) {
          magnitude = std::abs(g[i]);
          pick = i;
        }
      }
      if (pick < 0) break;
      cur[pick] += cfg.step_size * sign(g[pick]);
    } else if (norm == PgdNorm::l2) {
      const double n = g.norm();
      if (n == 0.0) break;
      cur += (cfg.step_size / n) * g;
    } else {
      if (g.cwiseAbs().maxCoeff() == 0.0) break;
      cur += cfg.step_size * g.unaryExpr([](double v) { return sign(v); });
    }
    cur = clip(cur, box);
    ++used;
    const FeatureVector cand = feasible_nearest(cur, p.x, p.spec);
    best.offer(cand, loss(model, cand, p.y));
  }
  return make_outcome(model, p, best.best(), used);
}

AttackOutcome pgd_adam(const Classifier& model, const AttackProblem& p, const AttackConfig& cfg, Rng& rng) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  const Box box = bounds(p.spec, p.x);
  const FeatureVector start = effective_start(p);
  BestCandidate best;
  best.offer(start, loss(model, start, p.y));

  FeatureVector cur = start;
  if (cfg.random_start) {
    for (Eigen::Index i = 0; i < cur.size(); ++i) {
      cur[i] = box.lower[i] + uniform01(rng) * (box.upper[i] - box.lower[i]);
    }
    const FeatureVector cand = feasible_nearest(cur, p.x, p.spec);
    best.offer(cand, loss(model, cand, p.y));
  }

  Eigen::VectorXd m = Eigen::VectorXd::Zero(cur.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(cur.size());
  int used = 0;
  for (int t = 1; t <= cfg.iterations; ++t) {
    const Eigen::VectorXd g = input_gradient(model, cur, p.y);
    if (g.cwiseAbs().maxCoeff() == 0.0) break;
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(beta1, t);
    const double c2 = 1.0 - std::pow(beta2, t);
    cur.array() += cfg.step_size * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    cur = clip(cur, box);
    ++used;
    const FeatureVector cand = feasible_nearest(cur, p.x, p.spec);
    best.offer(cand, loss(model, cand, p.y));
  }
  return make_outcome(model, p, best.best(), used);
}

AttackOutcome rfgsm(const Classifier& model, const AttackProblem& p, const AttackConfig& cfg, Rng& rng) {
  const Box box = bounds(p.spec, p.x);
  FeatureVector cur = effective_start(p);
  BestCandidate best;
  best.offer(cur, loss(model, cur, p.y));
  int used = 0;
  for (int t = 0; t < cfg.iterations; ++t) {
    const Eigen::VectorXd g = input_gradient(model, cur, p.y);
    if (g.cwiseAbs().maxCoeff() == 0.0) break;
    cur = clip(cur + cfg.step_size * g.unaryExpr([](double v) { return sign(v); }), box);
    ++used;
    const FeatureVector cand = randomized_round(cur, p.x, p.spec, rng);
    best.offer(cand, loss(model, cand, p.y));
  }
  return make_outcome(model, p, best.best(), used);
}

AttackOutcome saliency_flip(const Classifier& model, const AttackProblem& p, SaliencyVariant variant,
                            int max_iters, int max_flips) {
  const Box box = bounds(p.spec, p.x);
  FeatureVector cur = effective_start(p);
  int used = 0;
  int flips = 0;
  for (int t = 0; t < max_iters; ++t) {
    if (max_flips >= 0 && flips >= max_flips) break;
    if (predict(model, cur) != p.y) break;
    const Eigen::VectorXd score = variant == SaliencyVariant::jsma ? benign_probability_gradient(model, cur)
                                                                   : input_gradient(model, cur, p.y);
    Eigen::Index pick = -1;
    double top = 0.0;
    for (Eigen::Index i = 0; i < cur.size(); ++i) {
      if (cur[i] == 0.0 && box.upper[i] == 1.0 && score[i] > top) {
        top = score[i];
        pick = i;
      }
    }
    if (pick < 0) break;
    cur[pick] = 1.0;
    ++flips;
    ++used;
  }
  return make_outcome(model, p, std::move(cur), used);
}

AttackOutcome bga(const Classifier& model, const AttackProblem& p, int max_iters) {
  const Box box = bounds(p.spec, p.x);
  FeatureVector cur = effective_start(p);
  const double sqrt_d = std::sqrt(static_cast<double>(cur.size()));
  int used = 0;
  for (int t = 0; t < max_iters; ++t) {
    if (predict(model, cur) != p.y) break;
    const Eigen::VectorXd g = input_gradient(model, cur, p.y);
    const double threshold = g.norm() / sqrt_d;
    bool flipped = false;
    for (Eigen::Index i = 0; i < cur.size(); ++i) {
      if (cur[i] == 0.0 && box.upper[i] == 1.0 && g[i] > 0.0 && g[i] >= threshold) {
        cur[i] = 1.0;
        flipped = true;
      }
    }
    if (!flipped) break;
    ++used;
  }
  return make_outcome(model, p, std::move(cur), used);
}

double laplacian_kde(const FeatureVector& x, std::span<const FeatureVector> pool, double bandwidth) {
  require_pool(pool, "laplacian_kde");
  double sum = 0.0;
  for (const auto& b : pool) sum += std::exp(-(x - b).cwiseAbs().sum() / bandwidth);
  return sum / static_cast<double>(pool.size());
}

Eigen::VectorXd laplacian_kde_gradient(const FeatureVector& x, std::span<const FeatureVector> pool, double bandwidth) {
  require_pool(pool, "laplacian_kde_gradient");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  for (const auto& b : pool) {
    const Eigen::VectorXd diff = x - b;
    const double k = std::exp(-diff.cwiseAbs().sum() / bandwidth);
    g -= (k / bandwidth) * diff.unaryExpr([](double v) { return sign(v); });
  }
  return g / static_cast<double>(pool.size());
}

AttackOutcome gdkde(const Classifier& model, const AttackProblem& p, std::span<const FeatureVector> benign_pool,
                    const AttackConfig& cfg) {
  require_pool(benign_pool, "gdkde");
  const Box box = bounds(p.spec, p.x);
  auto objective = [&](const FeatureVector& v) {
    const double density = cfg.lambda == 0.0 ? 0.0 : cfg.lambda * laplacian_kde(v, benign_pool, cfg.bandwidth);
    return loss(model, v, p.y) + density;
  };
  FeatureVector cur = effective_start(p);
  BestCandidate best;
  best.offer(cur, objective(cur));
  int used = 0;
  for (int t = 0; t < cfg.iterations; ++t) {
    Eigen::VectorXd g = input_gradient(model, cur, p.y);
    if (cfg.lambda != 0.0) g += cfg.lambda * laplacian_kde_gradient(cur, benign_pool, cfg.bandwidth);
    if (g.cwiseAbs().maxCoeff() == 0.0) break;
    cur = clip(cur + cfg.step_size * g.unaryExpr([](double v) { return sign(v); }), box);
    ++used;
    const FeatureVector cand = feasible_nearest(cur, p.x, p.spec);
    best.offer(cand, objective(cand));
  }
  return make_outcome(model, p, best.best(), used);
}

AttackOutcome mimicry(const Classifier& model, const AttackProblem& p, std::span<const FeatureVector> benign_pool,
                      int n_ben, Rng& rng) {
  require_pool(benign_pool, "mimicry");
  if (n_ben < 1 || static_cast<std::size_t>(n_ben) > benign_pool.size()) {
    throw ConfigError("mimicry: n_ben must lie in [1, pool size]");
  }
  const Box box = bounds(p.spec, p.x);
  std::vector<std::size_t> order(benign_pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // partial Fisher-Yates: the first n_ben entries are a uniform sample without replacement
  for (std::size_t i = 0; i < static_cast<std::size_t>(n_ben); ++i) {
    const auto j = i + uniform_index(rng, order.size() - i);
    std::swap(order[i], order[j]);
  }

  std::optional<AttackOutcome> best_success;
  std::optional<AttackOutcome> best_failure;
  for (int k = 0; k < n_ben; ++k) {
    const FeatureVector& guide = benign_pool[order[static_cast<std::size_t>(k)]];
    if (guide.size() != p.x.size()) throw InputError("mimicry: benign guide has the wrong dimension");
    AttackOutcome cand = make_outcome(model, p, clip(guide, box), k + 1);
    if (cand.success) {
      if (!best_success || cand.l0 < best_success->l0) best_success = std::move(cand);
    } else if (!best_failure || cand.final_loss > best_failure->final_loss) {
      best_failure = std::move(cand);
    }
  }
  AttackOutcome out = best_success ? *std::move(best_success) : *std::move(best_failure);
  out.iterations_used = n_ben;
  return out;
}

AttackOutcome salt_pepper(const Classifier& model, const AttackProblem& p, int n_rept, double eps_max, int n_s,
                          Rng& rng) {
  if (n_rept < 1 || n_s < 1 || !(eps_max >= 0.0 && eps_max <= 1.0)) {
    throw ConfigError("salt_pepper: need n_rept >= 1, n_s >= 1 and 0 <= eps_max <= 1");
  }
  const Box box = bounds(p.spec, p.x);
  const FeatureVector start = effective_start(p);
  const auto d = static_cast<std::size_t>(start.size());
  std::vector<std::size_t> order(d);

  FeatureVector x_star = start;
  double eps_limit = eps_max;
  int used = 0;
  for (int r = 0; r < n_rept; ++r) {
    for (int j = 0; j < n_s; ++j) {
      const double eps_j = n_s == 1 ? eps_limit : eps_limit * static_cast<double>(j) / static_cast<double>(n_s - 1);
      const auto budget = static_cast<std::size_t>(std::floor(eps_j * static_cast<double>(d)));
      FeatureVector cand = start;
      std::iota(order.begin(), order.end(), std::size_t{0});
      for (std::size_t k = 0; k < std::min(budget, d); ++k) {
        const auto pick = k + uniform_index(rng, d - k);
        std::swap(order[k], order[pick]);
        const auto i = static_cast<Eigen::Index>(order[k]);
        const double noise = (rng() >> 63) ? 1.0 : 0.0;  // salt or pepper
        cand[i] = std::clamp(noise, box.lower[i], box.upper[i]);
      }
      ++used;
      if (predict(model, cand) != p.y) {
        x_star = std::move(cand);
        eps_limit = eps_j;
        break;
      }
    }
  }
  return make_outcome(model, p, std::move(x_star), used);
}

AttackOutcome pointwise(const Classifier& model, const AttackProblem& p, const FeatureVector& x_adv, Rng& rng) {
  if (!is_feasible(x_adv, p.x, p.spec)) throw InputError("pointwise: starting adversarial example is infeasible");
  FeatureVector x_star = x_adv;
  if (predict(model, x_star) == p.y) return make_outcome(model, p, std::move(x_star), 0);

  const auto d = static_cast<std::size_t>(x_star.size());
  std::vector<std::size_t> order(d);
  int passes = 0;
  FeatureVector checkpoint;
  do {
    checkpoint = x_star;
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order.begin(), order.end(), rng);
    for (auto u : order) {
      const auto i = static_cast<Eigen::Index>(u);
      if (x_star[i] == p.x[i]) continue;
      const double previous = x_star[i];
      x_star[i] = p.x[i];
      if (!is_feasible(x_star, p.x, p.spec) || predict(model, x_star) == p.y) x_star[i] = previous;
    }
    ++passes;
  } while (checkpoint != x_star);
  return make_outcome(model, p, std::move(checkpoint), passes);
}

AttackOutcome run_attack(const Classifier& model, const AttackProblem& p, const AttackConfig& cfg,
                         const AttackContext& ctx, Rng& rng) {
  cfg.validate();
  switch (cfg.method) {
    case AttackMethod::none:
      return make_outcome(model, p, effective_start(p), 0);
    case AttackMethod::pgd_l1:
      return pgd(model, p, PgdNorm::l1, cfg);
    case AttackMethod::pgd_l2:
      return pgd(model, p, PgdNorm::l2, cfg);
    case AttackMethod::pgd_linf:
      return pgd(model, p, PgdNorm::linf, cfg);
    case AttackMethod::pgd_adam:
      return pgd_adam(model, p, cfg, rng);
    case AttackMethod::rfgsm:
      return rfgsm(model, p, cfg, rng);
    case AttackMethod::grosse:
      return saliency_flip(model, p, SaliencyVariant::grosse, cfg.iterations, cfg.max_flips);
    case AttackMethod::jsma:
      return saliency_flip(model, p, SaliencyVariant::jsma, cfg.iterations);
    case AttackMethod::bca:
      return saliency_flip(model, p, SaliencyVariant::bca, cfg.iterations);
    case AttackMethod::bga:
      return bga(model, p, cfg.iterations);
    case AttackMethod::gdkde:
      return gdkde(model, p, ctx.benign_pool, cfg);
    case AttackMethod::mimicry:
      return mimicry(model, p, ctx.benign_pool, cfg.n_ben, rng);
    case AttackMethod::salt_pepper:
      return salt_pepper(model, p, cfg.n_rept, cfg.eps_max, cfg.n_s, rng);
    case AttackMethod::pointwise: {
      const AttackOutcome init = mimicry(model, p, ctx.benign_pool, cfg.n_ben, rng);
      AttackOutcome out = pointwise(model, p, init.x_adv, rng);
      out.iterations_used += init.iterations_used;
      return out;
    }
    case AttackMethod::max: {
      const std::array<ManipulationSpec, 1> specs{p.spec};
      return max_attack(model, p, cfg.components, specs, ctx, rng);
    }
    case AttackMethod::iter_max: {
      const std::array<ManipulationSpec, 1> specs{p.spec};
      return iter_max_attack(model, p, cfg.components, specs, cfg.rounds, cfg.epsilon, ctx, rng);
    }
  }
  throw ConfigError("unhandled attack method");
}

AttackOutcome max_attack(const Classifier& model, const AttackProblem& p, std::span<const AttackConfig> methods,
                         std::span<const ManipulationSpec> specs, const AttackContext& ctx, Rng& rng,
                         std::vector<double>* component_losses) {
  if (methods.empty() || specs.empty()) throw ConfigError("max attack needs at least one method and one spec");
  const std::uint64_t base = rng();
  std::optional<AttackOutcome> best;
  int total_iterations = 0;
  if (component_losses) component_losses->clear();
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = 0; j < specs.size(); ++j) {
      Rng sub = make_rng(base, {i, j});
      AttackOutcome out = run_attack(model, AttackProblem(p.x, p.y, specs[j], p.start), methods[i], ctx, sub);
      total_iterations += out.iterations_used;
      if (component_losses) component_losses->push_back(out.final_loss);
      if (!best || out.final_loss > best->final_loss) best = std::move(out);
    }
  }
  best->iterations_used = total_iterations;
  return *std::move(best);
}

AttackOutcome iter_max_attack(const Classifier& model, const AttackProblem& p, std::span<const AttackConfig> methods,
                              std::span<const ManipulationSpec> specs, int n_rounds, double epsilon,
                              const AttackContext& ctx, Rng& rng, std::vector<double>* round_losses) {
  if (n_rounds < 1) throw ConfigError("iterative max attack needs n_rounds >= 1");
  if (!(epsilon > 0.0)) throw ConfigError("iterative max attack needs epsilon > 0");
  if (methods.empty() || specs.empty()) throw ConfigError("max attack needs at least one method and one spec");
  if (round_losses) round_losses->clear();

  FeatureVector current = p.start;
  double current_loss = loss(model, current, p.y);
  int total_iterations = 0;
  for (int k = 0; k < n_rounds; ++k) {
    AttackOutcome round = max_attack(model, AttackProblem(p.x, p.y, p.spec, current), methods, specs, ctx, rng);
    total_iterations += round.iterations_used;
    const double previous_loss = current_loss;
    // greedy: a round never moves to a point with lower loss than its input
    if (round.final_loss >= current_loss) {
      current = std::move(round.x_adv);
      current_loss = round.final_loss;
    }
    if (round_losses) round_losses->push_back(current_loss);
    if (std::abs(current_loss - previous_loss) < epsilon) break;
  }
  return make_outcome(model, p, std::move(current), total_iterations);
}

}  // namespace advens

#include <gtest/gtest.h>

#include <cmath>

#include "advens/attacks.hpp"
#include "advens/error.hpp"
#include "helpers.hpp"

namespace advens {
namespace {

using testing::bits;
using testing::constant_model;
using testing::linear_score_model;
using testing::random_binary;
using testing::random_model;
using testing::random_spec;

AttackConfig config(AttackMethod m, int iterations, double step) {
  AttackConfig c = attack_preset(m);
  c.iterations = iterations;
  c.step_size = step;
  return c;
}

TEST(AttackNames, RoundTrip) {
  for (auto m : {AttackMethod::none, AttackMethod::pgd_l1, AttackMethod::pgd_l2, AttackMethod::pgd_linf,
                 AttackMethod::pgd_adam, AttackMethod::rfgsm, AttackMethod::grosse, AttackMethod::jsma,
                 AttackMethod::bca, AttackMethod::bga, AttackMethod::gdkde, AttackMethod::mimicry,
                 AttackMethod::salt_pepper, AttackMethod::pointwise, AttackMethod::max, AttackMethod::iter_max}) {
    EXPECT_EQ(parse_attack_method(to_string(m)), m);
  }
  EXPECT_THROW(parse_attack_method("fgsm"), ConfigError);
}

TEST(AttackConfig, ValidateRejectsBadValues) {
  AttackConfig c = attack_preset(AttackMethod::pgd_linf);
  c.step_size = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = attack_preset(AttackMethod::max);
  c.components.clear();
  EXPECT_THROW(c.validate(), ConfigError);
  c = attack_preset(AttackMethod::salt_pepper);
  c.eps_max = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = attack_preset(AttackMethod::iter_max);
  c.epsilon = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(AttackPresets, PublishedSettings) {
  const auto l1 = training_preset(AttackMethod::pgd_l1);
  EXPECT_EQ(l1.iterations, 50);
  EXPECT_EQ(l1.step_size, 1.0);
  const auto l2 = training_preset(AttackMethod::pgd_l2);
  EXPECT_EQ(l2.iterations, 100);
  EXPECT_EQ(l2.step_size, 1.0);
  const auto linf = training_preset(AttackMethod::pgd_linf);
  EXPECT_EQ(linf.iterations, 100);
  EXPECT_EQ(linf.step_size, 0.01);
  const auto rf = training_preset(AttackMethod::rfgsm);
  EXPECT_EQ(rf.iterations, 100);
  EXPECT_EQ(rf.step_size, 0.01);
  const auto adam = training_preset(AttackMethod::pgd_adam);
  EXPECT_EQ(adam.iterations, 100);
  EXPECT_EQ(adam.step_size, 0.02);
  EXPECT_TRUE(adam.random_start);

  const auto sp = attack_preset(AttackMethod::salt_pepper);
  EXPECT_EQ(sp.n_rept, 10);
  EXPECT_EQ(sp.eps_max, 1.0);
  EXPECT_EQ(sp.n_s, 1000);
  const auto it = attack_preset(AttackMethod::iter_max);
  EXPECT_EQ(it.rounds, 5);
  EXPECT_EQ(it.epsilon, 1e-9);
  EXPECT_EQ(attack_preset(AttackMethod::gdkde).iterations, 1000);
  EXPECT_EQ(attack_preset(AttackMethod::gdkde).step_size, 0.01);
  EXPECT_EQ(attack_preset(AttackMethod::jsma).iterations, 100);
  EXPECT_EQ(attack_preset(AttackMethod::pgd_l1).iterations, 100);
  EXPECT_EQ(attack_preset(AttackMethod::mimicry).n_ben, 30);

  const auto comps = max_pgd_components(true);
  ASSERT_EQ(comps.size(), 4u);
  EXPECT_EQ(comps[0].method, AttackMethod::pgd_l1);
  EXPECT_EQ(comps[1].method, AttackMethod::pgd_l2);
  EXPECT_EQ(comps[2].method, AttackMethod::pgd_linf);
  EXPECT_EQ(comps[3].method, AttackMethod::pgd_adam);
}

TEST(Pgd, ZeroGradientKeepsX) {
  const MlpModel m = constant_model(6, 0.0, 1.0);
  const auto spec = ManipulationSpec::uniform(6, true, true);
  const FeatureVector x = bits({1, 0, 1, 0, 0, 1});
  for (auto norm : {PgdNorm::l1, PgdNorm::l2, PgdNorm::linf}) {
    const auto out = pgd(m, AttackProblem(x, 1, spec), norm, config(AttackMethod::pgd_l1, 20, 1.0));
    EXPECT_EQ(out.x_adv, x);
    EXPECT_EQ(out.l0, 0u);
    EXPECT_FALSE(out.success);
  }
  Rng rng = make_rng(1);
  const auto a = pgd_adam(m, AttackProblem(x, 1, spec), config(AttackMethod::pgd_adam, 20, 0.02), rng);
  EXPECT_EQ(a.x_adv, x);
}

TEST(Pgd, L1FirstStepMatchesSingleFlipEnumeration) {
  Rng rng = make_rng(2);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd v(4);
    for (auto& c : v) c = standard_normal(rng);
    const MlpModel m = linear_score_model(v, 2.0);
    const auto spec = random_spec(4, rng);
    const FeatureVector x = random_binary(4, rng);

    double best = loss(m, x, 1);
    FeatureVector arg = x;
    for (Eigen::Index i = 0; i < 4; ++i) {
      FeatureVector f = x;
      f[i] = 1.0 - f[i];
      if (!is_feasible(f, x, spec)) continue;
      if (const double l = loss(m, f, 1); l > best) {
        best = l;
        arg = f;
      }
    }
    const auto out = pgd(m, AttackProblem(x, 1, spec), PgdNorm::l1, config(AttackMethod::pgd_l1, 1, 1.0));
    EXPECT_EQ(out.x_adv, arg);
  }
}

TEST(Pgd, UnknownNormThrows) {
  const MlpModel m = constant_model(2, 0, 1);
  const auto spec = ManipulationSpec::uniform(2, true, true);
  const FeatureVector x = bits({0, 1});
  EXPECT_THROW(pgd(m, AttackProblem(x, 1, spec), static_cast<PgdNorm>(7), attack_preset(AttackMethod::pgd_l1)),
               ConfigError);
}

TEST(PgdAdam, AtLeastAsStrongAsLinfOnHalfOfTrials) {
  int wins = 0;
  for (int t = 0; t < 100; ++t) {
    const MlpModel m = random_model({12, 8, 2}, 100 + static_cast<std::uint64_t>(t), 0.5);
    Rng rng = make_rng(200, {static_cast<std::uint64_t>(t)});
    const FeatureVector x = random_binary(12, rng, 0.3);
    const auto spec = ManipulationSpec::uniform(12, true, true);
    const AttackProblem p(x, 1, spec);
    const auto lin = pgd(m, p, PgdNorm::linf, config(AttackMethod::pgd_linf, 100, 0.02));
    AttackConfig ac = config(AttackMethod::pgd_adam, 100, 0.02);
    ac.random_start = false;
    const auto ad = pgd_adam(m, p, ac, rng);
    wins += ad.final_loss >= lin.final_loss;
  }
  EXPECT_GE(wins, 50);
}

TEST(Saliency, NoAddableFeatureKeepsX) {
  const MlpModel m = random_model({5, 4, 2}, 3, 0.5);
  const auto spec = ManipulationSpec::uniform(5, false, true);
  const FeatureVector x = bits({0, 1, 0, 0, 1});
  for (auto v : {SaliencyVariant::grosse, SaliencyVariant::jsma, SaliencyVariant::bca}) {
    EXPECT_EQ(saliency_flip(m, AttackProblem(x, 1, spec), v, 100).x_adv, x);
  }
}

TEST(Saliency, FirstFlipMatchesEnumeration) {
  Rng rng = make_rng(4);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd v(5);
    for (auto& c : v) c = standard_normal(rng);
    const MlpModel m = linear_score_model(v, 10.0);  // stays malicious after one flip
    const FeatureVector x = random_binary(5, rng);
    const auto spec = ManipulationSpec::uniform(5, true, false);
    // Each 0->1 flip changes the malware score by v_i; the best flip lowers it most.
    Eigen::Index expected = -1;
    for (Eigen::Index i = 0; i < 5; ++i) {
      if (x[i] == 0.0 && v[i] < 0.0 && (expected < 0 || v[i] < v[expected])) expected = i;
    }
    for (auto var : {SaliencyVariant::grosse, SaliencyVariant::jsma, SaliencyVariant::bca}) {
      const auto out = saliency_flip(m, AttackProblem(x, 1, spec), var, 1);
      FeatureVector want = x;
      if (expected >= 0) want[expected] = 1.0;
      EXPECT_EQ(out.x_adv, want);
    }
  }
}

TEST(Saliency, L0BoundedByIterationsAndGrosseCap) {
  const MlpModel m = linear_score_model(Eigen::VectorXd::Constant(40, -0.1), 10.0);
  const auto spec = ManipulationSpec::uniform(40, true, false);
  const FeatureVector x = FeatureVector::Zero(40);
  for (int iters : {0, 1, 5, 30}) {
    EXPECT_LE(saliency_flip(m, AttackProblem(x, 1, spec), SaliencyVariant::bca, iters).l0,
              static_cast<std::size_t>(iters));
  }
  EXPECT_EQ(saliency_flip(m, AttackProblem(x, 1, spec), SaliencyVariant::grosse, 100, 7).l0, 7u);
}

TEST(Bga, ZeroGradientNoFlips) {
  const MlpModel m = constant_model(5, 0, 1);
  const auto spec = ManipulationSpec::uniform(5, true, false);
  const FeatureVector x = bits({0, 0, 1, 0, 0});
  EXPECT_EQ(bga(m, AttackProblem(x, 1, spec), 10).x_adv, x);
}

TEST(Bga, UniformGradientFlipsAllEligible) {
  // Loss gradient is positive and equal on features 0..3 and zero on 4..9.
  Eigen::VectorXd v = Eigen::VectorXd::Zero(10);
  v.head(4).setConstant(-1.0);
  const MlpModel m = linear_score_model(v, 20.0);
  const auto spec = ManipulationSpec::uniform(10, true, false);
  const FeatureVector x = FeatureVector::Zero(10);
  const auto out = bga(m, AttackProblem(x, 1, spec), 1);
  EXPECT_EQ(out.l0, 4u);
  EXPECT_EQ(out.x_adv.head(4), FeatureVector::Ones(4));
}

TEST(Bga, ThresholdRuleOracle) {
  Rng rng = make_rng(5);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd v(6);
    for (auto& c : v) c = standard_normal(rng);
    const MlpModel m = linear_score_model(v, 5.0);
    const FeatureVector x = random_binary(6, rng);
    const auto spec = random_spec(6, rng);
    const Eigen::VectorXd g = input_gradient(m, x, 1);
    const Box box = bounds(spec, x);
    FeatureVector want = x;
    for (Eigen::Index i = 0; i < 6; ++i) {
      if (x[i] == 0 && box.upper[i] == 1 && g[i] > 0 && g[i] >= g.norm() / std::sqrt(6.0)) want[i] = 1;
    }
    if (predict(m, x) != 1) want = x;
    EXPECT_EQ(bga(m, AttackProblem(x, 1, spec), 1).x_adv, want);
  }
}

TEST(Kde, HandValues) {
  const std::vector<FeatureVector> one{bits({1, 0, 1})};
  EXPECT_DOUBLE_EQ(laplacian_kde(bits({1, 0, 1}), one, 10.0), 1.0);
  const std::vector<FeatureVector> two{bits({1, 0, 0}), bits({1, 1, 1})};
  // distances from (0, 0, 1): 2 and 2 with bandwidth 4 -> exp(-0.5)
  EXPECT_NEAR(laplacian_kde(bits({0, 0, 1}), two, 4.0), std::exp(-0.5), 1e-15);
  // from (0.5, 0, 0): 0.5 and 2.5 with bandwidth 2
  EXPECT_NEAR(laplacian_kde(bits({0.5, 0, 0}), two, 2.0), 0.5 * (std::exp(-0.25) + std::exp(-1.25)), 1e-15);
  EXPECT_THROW(laplacian_kde(bits({0, 0, 1}), std::span<const FeatureVector>{}, 1.0), ConfigError);
}

TEST(Kde, GradientMatchesFiniteDifferences) {
  const std::vector<FeatureVector> pool{bits({1, 0, 0, 1}), bits({0, 1, 1, 1}), bits({1, 1, 0, 0})};
  const FeatureVector x = bits({0.3, 0.6, 0.45, 0.2});
  const Eigen::VectorXd g = laplacian_kde_gradient(x, pool, 3.0);
  for (Eigen::Index i = 0; i < 4; ++i) {
    FeatureVector xp = x, xm = x;
    xp[i] += 1e-6;
    xm[i] -= 1e-6;
    EXPECT_NEAR(g[i], (laplacian_kde(xp, pool, 3.0) - laplacian_kde(xm, pool, 3.0)) / 2e-6, 1e-8);
  }
}

TEST(Gdkde, ZeroLambdaEqualsLinfPgd) {
  const MlpModel m = random_model({10, 6, 2}, 6, 0.5);
  Rng rng = make_rng(7);
  const std::vector<FeatureVector> pool{random_binary(10, rng), random_binary(10, rng)};
  for (int t = 0; t < 10; ++t) {
    const FeatureVector x = random_binary(10, rng);
    const auto spec = random_spec(10, rng);
    AttackConfig c = config(AttackMethod::gdkde, 80, 0.02);
    c.lambda = 0.0;
    const auto a = gdkde(m, AttackProblem(x, 1, spec), pool, c);
    const auto b = pgd(m, AttackProblem(x, 1, spec), PgdNorm::linf, c);
    EXPECT_EQ(a.x_adv, b.x_adv);
    EXPECT_EQ(a.iterations_used, b.iterations_used);
  }
}

TEST(Gdkde, EmptyPoolThrows) {
  const MlpModel m = constant_model(3, 0, 1);
  const auto spec = ManipulationSpec::uniform(3, true, true);
  const FeatureVector x = bits({0, 1, 0});
  EXPECT_THROW(gdkde(m, AttackProblem(x, 1, spec), {}, attack_preset(AttackMethod::gdkde)), ConfigError);
}

TEST(Mimicry, SpecControlsCopy) {
  const MlpModel m = random_model({6, 4, 2}, 8, 0.5);
  const FeatureVector x = bits({1, 0, 1, 0, 1, 0});
  const std::vector<FeatureVector> pool{bits({0, 1, 1, 1, 0, 0})};
  Rng rng = make_rng(1);
  const auto frozen = ManipulationSpec::uniform(6, false, false);
  EXPECT_EQ(mimicry(m, AttackProblem(x, 1, frozen), pool, 1, rng).x_adv, x);
  const auto all = ManipulationSpec::uniform(6, true, true);
  EXPECT_EQ(mimicry(m, AttackProblem(x, 1, all), pool, 1, rng).x_adv, pool[0]);
  EXPECT_THROW(mimicry(m, AttackProblem(x, 1, all), {}, 1, rng), ConfigError);
  EXPECT_THROW(mimicry(m, AttackProblem(x, 1, all), pool, 2, rng), ConfigError);
}

TEST(Mimicry, SelectionMatchesDirectEvaluation) {
  Rng rng = make_rng(9);
  for (int t = 0; t < 40; ++t) {
    Eigen::VectorXd v(8);
    for (auto& c : v) c = standard_normal(rng);
    const MlpModel m = linear_score_model(v, 0.5);
    const FeatureVector x = random_binary(8, rng);
    const auto spec = random_spec(8, rng);
    const std::vector<FeatureVector> pool{random_binary(8, rng), random_binary(8, rng), random_binary(8, rng)};
    const Box box = bounds(spec, x);

    std::optional<FeatureVector> best_success;
    std::size_t best_l0 = 0;
    FeatureVector best_fail;
    double best_loss = -1;
    // n_ben equals the pool size, so every guide is used; visit them in pool order
    // and accept only strict improvements, then compare against the chosen point's
    // characteristics rather than its identity.
    for (const auto& g : pool) {
      const FeatureVector c = g.cwiseMax(box.lower).cwiseMin(box.upper);
      const std::size_t l0 = hamming_distance(c, x);
      if (predict(m, c) != 1) {
        if (!best_success || l0 < best_l0) {
          best_success = c;
          best_l0 = l0;
        }
      } else if (loss(m, c, 1) > best_loss) {
        best_loss = loss(m, c, 1);
        best_fail = c;
      }
    }
    Rng arng = make_rng(10, {static_cast<std::uint64_t>(t)});
    const auto out = mimicry(m, AttackProblem(x, 1, spec), pool, 3, arng);
    EXPECT_EQ(out.success, best_success.has_value());
    if (best_success) {
      EXPECT_EQ(out.l0, best_l0);
      EXPECT_NE(predict(m, out.x_adv), 1);
    } else {
      EXPECT_DOUBLE_EQ(out.final_loss, best_loss);
    }
  }
}

TEST(SaltPepper, NeverSucceedsAgainstConfidentModel) {
  const MlpModel m = constant_model(8, 0, 5);
  const auto spec = ManipulationSpec::uniform(8, true, true);
  const FeatureVector x = bits({1, 0, 0, 1, 0, 1, 0, 0});
  Rng rng = make_rng(1);
  const auto out = salt_pepper(m, AttackProblem(x, 1, spec), 3, 1.0, 20, rng);
  EXPECT_EQ(out.x_adv, x);
  EXPECT_FALSE(out.success);
  EXPECT_EQ(out.iterations_used, 60);
}

TEST(SaltPepper, TraceAgainstAlwaysBenignModel) {
  // The first sweep value is 0, which already evades; every repetition breaks at once
  // and the limit collapses to 0, so x itself is returned after n_rept evaluations.
  const MlpModel m = constant_model(8, 5, 0);
  const auto spec = ManipulationSpec::uniform(8, true, true);
  const FeatureVector x = bits({1, 0, 0, 1, 0, 1, 0, 0});
  Rng rng = make_rng(1);
  const auto out = salt_pepper(m, AttackProblem(x, 1, spec), 4, 1.0, 50, rng);
  EXPECT_EQ(out.x_adv, x);
  EXPECT_TRUE(out.success);
  EXPECT_EQ(out.iterations_used, 4);
}

TEST(SaltPepper, TraceWithTwoSweepPoints) {
  // Sweep {0, eps_max}: eps 0 leaves x (malicious), eps_max = 1 rewrites every
  // coordinate at random. The model calls anything with a 1 in feature 0 benign.
  Eigen::VectorXd v = Eigen::VectorXd::Zero(6);
  v[0] = -10.0;
  const MlpModel m = linear_score_model(v, 1.0);
  const auto spec = ManipulationSpec::uniform(6, true, true);
  const FeatureVector x = FeatureVector::Zero(6);
  for (std::uint64_t s = 0; s < 30; ++s) {
    Rng rng = make_rng(s);
    const auto out = salt_pepper(m, AttackProblem(x, 1, spec), 1, 1.0, 2, rng);
    EXPECT_EQ(out.iterations_used, 2);
    EXPECT_EQ(out.success, out.x_adv[0] == 1.0);
    if (!out.success) EXPECT_EQ(out.x_adv, x);
  }
}

TEST(SaltPepper, PerturbationBoundedByBudget) {
  const MlpModel m = random_model({20, 8, 2}, 11, 0.5);
  Rng rng = make_rng(12);
  for (int t = 0; t < 30; ++t) {
    const FeatureVector x = random_binary(20, rng);
    const auto spec = random_spec(20, rng);
    for (double eps : {0.1, 0.25, 0.5}) {
      const auto out = salt_pepper(m, AttackProblem(x, 1, spec), 5, eps, 10, rng);
      EXPECT_LE(out.l0, static_cast<std::size_t>(std::floor(eps * 20)));
      EXPECT_TRUE(is_feasible(out.x_adv, x, spec));
    }
  }
}

TEST(Pointwise, IdentityInput) {
  const MlpModel m = constant_model(4, 5, 0);
  const auto spec = ManipulationSpec::uniform(4, true, true);
  const FeatureVector x = bits({1, 0, 1, 0});
  Rng rng = make_rng(1);
  EXPECT_EQ(pointwise(m, AttackProblem(x, 1, spec), x, rng).x_adv, x);
}

TEST(Pointwise, EssentialFlipsAreKept) {
  // Benign only when both features 0 and 1 are set.
  Eigen::VectorXd v = Eigen::VectorXd::Zero(4);
  v[0] = v[1] = -1.0;
  const MlpModel m = linear_score_model(v, 1.5);
  const auto spec = ManipulationSpec::uniform(4, true, true);
  const FeatureVector x = FeatureVector::Zero(4);
  const FeatureVector adv = bits({1, 1, 0, 0});
  Rng rng = make_rng(2);
  EXPECT_EQ(pointwise(m, AttackProblem(x, 1, spec), adv, rng).x_adv, adv);
}

TEST(Pointwise, RedundantFlipRevertedBySubsetEnumeration) {
  Rng rng = make_rng(3);
  for (int t = 0; t < 40; ++t) {
    Eigen::VectorXd v(8);
    for (auto& c : v) c = -std::abs(standard_normal(rng));
    const MlpModel m = linear_score_model(v, 1.0);
    const auto spec = ManipulationSpec::uniform(8, true, false);
    const FeatureVector x = FeatureVector::Zero(8);
    const FeatureVector adv = FeatureVector::Ones(8);
    if (predict(m, adv) == 1) continue;
    Rng arng = make_rng(4, {static_cast<std::uint64_t>(t)});
    const auto out = pointwise(m, AttackProblem(x, 1, spec), adv, arng);
    ASSERT_TRUE(out.success);
    // The output keeps a subset of the flips; no single further revert may keep it evasive.
    unsigned kept = 0;
    for (int i = 0; i < 8; ++i) kept |= (out.x_adv[i] == 1.0 ? 1u : 0u) << i;
    for (int i = 0; i < 8; ++i) {
      if (!((kept >> i) & 1u)) continue;
      FeatureVector probe = out.x_adv;
      probe[i] = 0.0;
      EXPECT_EQ(predict(m, probe), 1) << "feature " << i << " was redundant";
    }
    // Among all subsets, some evasive one has l0 <= output l0 (sanity of enumeration).
    std::size_t min_l0 = 9;
    for (unsigned s = 0; s < 256; ++s) {
      FeatureVector c(8);
      for (int i = 0; i < 8; ++i) c[i] = (s >> i) & 1u;
      if (predict(m, c) != 1) min_l0 = std::min<std::size_t>(min_l0, static_cast<std::size_t>(__builtin_popcount(s)));
    }
    EXPECT_LE(min_l0, out.l0);
  }
}

TEST(Pointwise, NonAdversarialInputReturnedUnchanged) {
  const MlpModel m = constant_model(4, 0, 5);
  const auto spec = ManipulationSpec::uniform(4, true, true);
  const FeatureVector x = bits({1, 0, 1, 0});
  const FeatureVector adv = bits({1, 1, 1, 0});
  Rng rng = make_rng(5);
  const auto out = pointwise(m, AttackProblem(x, 1, spec), adv, rng);
  EXPECT_EQ(out.x_adv, adv);
  EXPECT_FALSE(out.success);
}

TEST(Pointwise, InfeasibleInputThrows) {
  const MlpModel m = constant_model(4, 5, 0);
  const auto spec = ManipulationSpec::uniform(4, false, false);
  const FeatureVector x = bits({1, 0, 1, 0});
  Rng rng = make_rng(6);
  EXPECT_THROW(pointwise(m, AttackProblem(x, 1, spec), bits({1, 1, 1, 0}), rng), InputError);
}

TEST(MaxAttack, SingleComponentEqualsDirectRun) {
  const MlpModel m = random_model({10, 6, 2}, 13, 0.5);
  Rng rng = make_rng(14);
  const FeatureVector x = random_binary(10, rng);
  const auto spec = random_spec(10, rng);
  const std::vector<AttackConfig> methods{config(AttackMethod::pgd_l1, 10, 1.0)};
  const std::vector<ManipulationSpec> specs{spec};
  const auto a = max_attack(m, AttackProblem(x, 1, spec), methods, specs, {}, rng);
  const auto b = pgd(m, AttackProblem(x, 1, spec), PgdNorm::l1, methods[0]);
  EXPECT_EQ(a.x_adv, b.x_adv);
  EXPECT_EQ(a.final_loss, b.final_loss);
}

TEST(MaxAttack, StrongerMethodSelected) {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(6, -1.0);
  const MlpModel m = linear_score_model(v, 10.0);
  const auto spec = ManipulationSpec::uniform(6, true, false);
  const FeatureVector x = FeatureVector::Zero(6);
  const std::vector<AttackConfig> methods{attack_preset(AttackMethod::none), config(AttackMethod::pgd_l1, 3, 1.0)};
  const std::vector<ManipulationSpec> specs{spec};
  Rng rng = make_rng(15);
  std::vector<double> losses;
  const auto out = max_attack(m, AttackProblem(x, 1, spec), methods, specs, {}, rng, &losses);
  ASSERT_EQ(losses.size(), 2u);
  EXPECT_LT(losses[0], losses[1]);
  EXPECT_EQ(out.l0, 3u);
  EXPECT_EQ(out.final_loss, losses[1]);
}

TEST(MaxAttack, EmptyListsThrow) {
  const MlpModel m = constant_model(3, 0, 1);
  const auto spec = ManipulationSpec::uniform(3, true, true);
  const FeatureVector x = bits({0, 1, 0});
  Rng rng = make_rng(1);
  const std::vector<AttackConfig> methods{attack_preset(AttackMethod::none)};
  const std::vector<ManipulationSpec> specs{spec};
  EXPECT_THROW(max_attack(m, AttackProblem(x, 1, spec), {}, specs, {}, rng), ConfigError);
  EXPECT_THROW(max_attack(m, AttackProblem(x, 1, spec), methods, {}, {}, rng), ConfigError);
}

TEST(MaxAttack, LossIsMaxOfComponents) {
  const MlpModel m = random_model({16, 8, 2}, 16, 0.5);
  Rng rng = make_rng(17);
  const auto methods = max_pgd_components(true);
  for (int t = 0; t < 20; ++t) {
    const FeatureVector x = random_binary(16, rng);
    const std::vector<ManipulationSpec> specs{random_spec(16, rng), random_spec(16, rng)};
    const auto u = union_specs(specs);
    std::vector<double> losses;
    const auto out = max_attack(m, AttackProblem(x, 1, u), methods, specs, {}, rng, &losses);
    ASSERT_EQ(losses.size(), 8u);
    EXPECT_EQ(out.final_loss, *std::max_element(losses.begin(), losses.end()));
    EXPECT_TRUE(is_feasible(out.x_adv, x, u));
  }
}

TEST(IterMax, StopsWhenLossSettles) {
  const MlpModel m = constant_model(5, 0, 1);
  const auto spec = ManipulationSpec::uniform(5, true, true);
  const FeatureVector x = bits({1, 0, 0, 1, 0});
  const auto methods = max_pgd_components(true);
  const std::vector<ManipulationSpec> specs{spec};
  Rng rng = make_rng(18);
  std::vector<double> rounds;
  iter_max_attack(m, AttackProblem(x, 1, spec), methods, specs, 5, 1e-9, {}, rng, &rounds);
  EXPECT_EQ(rounds.size(), 1u);
}

TEST(IterMax, RoundLossesNonDecreasing) {
  const MlpModel m = random_model({16, 8, 2}, 19, 0.5);
  Rng rng = make_rng(20);
  const auto methods = max_pgd_components(true);
  for (int t = 0; t < 20; ++t) {
    const FeatureVector x = random_binary(16, rng);
    const std::vector<ManipulationSpec> specs{random_spec(16, rng), random_spec(16, rng)};
    const auto u = union_specs(specs);
    std::vector<double> rounds;
    Rng r1 = make_rng(21, {static_cast<std::uint64_t>(t)});
    const auto out = iter_max_attack(m, AttackProblem(x, 1, u), methods, specs, 5, 1e-9, {}, r1, &rounds);
    ASSERT_FALSE(rounds.empty());
    for (std::size_t k = 1; k < rounds.size(); ++k) EXPECT_GE(rounds[k], rounds[k - 1]);
    EXPECT_GE(out.final_loss, rounds.front() - 1e-12);
    EXPECT_EQ(out.final_loss, rounds.back());
    EXPECT_TRUE(is_feasible(out.x_adv, x, u));
  }
}

TEST(IterMax, RejectsBadParameters) {
  const MlpModel m = constant_model(3, 0, 1);
  const auto spec = ManipulationSpec::uniform(3, true, true);
  const FeatureVector x = bits({0, 1, 0});
  const auto methods = max_pgd_components(true);
  const std::vector<ManipulationSpec> specs{spec};
  Rng rng = make_rng(1);
  EXPECT_THROW(iter_max_attack(m, AttackProblem(x, 1, spec), methods, specs, 0, 1e-9, {}, rng), ConfigError);
  EXPECT_THROW(iter_max_attack(m, AttackProblem(x, 1, spec), methods, specs, 3, 0.0, {}, rng), ConfigError);
}

TEST(RunAttack, EveryMethodFeasibleAndConsistent) {
  const MlpModel m = random_model({20, 10, 2}, 22, 0.5);
  Rng rng = make_rng(23);
  std::vector<FeatureVector> pool;
  for (int i = 0; i < 40; ++i) pool.push_back(random_binary(20, rng, 0.2));
  const AttackContext ctx{pool};
  for (auto method : {AttackMethod::none, AttackMethod::pgd_l1, AttackMethod::pgd_l2, AttackMethod::pgd_linf,
                      AttackMethod::pgd_adam, AttackMethod::rfgsm, AttackMethod::grosse, AttackMethod::jsma,
                      AttackMethod::bca, AttackMethod::bga, AttackMethod::gdkde, AttackMethod::mimicry,
                      AttackMethod::salt_pepper, AttackMethod::pointwise, AttackMethod::max,
                      AttackMethod::iter_max}) {
    AttackConfig c = training_preset(method);
    if (method == AttackMethod::salt_pepper) c.n_s = 50;
    if (method == AttackMethod::gdkde) c.iterations = 100;
    for (int t = 0; t < 5; ++t) {
      const FeatureVector x = random_binary(20, rng);
      const auto spec = random_spec(20, rng);
      const auto out = run_attack(m, AttackProblem(x, 1, spec), c, ctx, rng);
      EXPECT_TRUE(is_feasible(out.x_adv, x, spec)) << to_string(method);
      EXPECT_EQ(out.success, predict(m, out.x_adv) != 1) << to_string(method);
      EXPECT_EQ(out.l0, hamming_distance(out.x_adv, x));
      EXPECT_DOUBLE_EQ(out.final_loss, loss(m, out.x_adv, 1));
    }
  }
}

TEST(RunAttack, DeterministicForSeed) {
  const MlpModel m = random_model({20, 10, 2}, 24, 0.5);
  Rng data_rng = make_rng(25);
  const FeatureVector x = random_binary(20, data_rng);
  const auto spec = random_spec(20, data_rng);
  const AttackConfig c = training_preset(AttackMethod::rfgsm);
  Rng a = make_rng(26), b = make_rng(26);
  EXPECT_EQ(run_attack(m, AttackProblem(x, 1, spec), c, {}, a).x_adv,
            run_attack(m, AttackProblem(x, 1, spec), c, {}, b).x_adv);
}

}  // namespace
}  // namespace advens

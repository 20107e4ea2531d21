#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "advens/error.hpp"
#include "advens/perturb.hpp"
#include "helpers.hpp"

namespace advens {
namespace {

using testing::bits;
using testing::random_binary;
using testing::random_spec;

FeatureVector from_mask(unsigned mask, std::size_t d) {
  FeatureVector v(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) v[static_cast<Eigen::Index>(i)] = (mask >> i) & 1u;
  return v;
}

unsigned to_mask(const FeatureVector& v) {
  unsigned m = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) m |= (v[i] == 1.0 ? 1u : 0u) << i;
  return m;
}

// Feasible set by direct application of the flip rules to each candidate.
std::set<unsigned> feasible_set(const FeatureVector& x, const ManipulationSpec& s) {
  std::set<unsigned> out;
  const std::size_t d = s.dim();
  for (unsigned m = 0; m < (1u << d); ++m) {
    bool ok = true;
    for (std::size_t i = 0; i < d && ok; ++i) {
      const bool xi = x[static_cast<Eigen::Index>(i)] == 1.0, yi = (m >> i) & 1u;
      if (xi == yi) continue;
      ok = yi ? s.can_add[i] : s.can_remove[i];
    }
    if (ok) out.insert(m);
  }
  return out;
}

TEST(Bounds, AllFalseIsPoint) {
  const FeatureVector x = bits({1, 0, 1, 0});
  const Box b = bounds(ManipulationSpec::uniform(4, false, false), x);
  EXPECT_EQ(b.lower, x);
  EXPECT_EQ(b.upper, x);
}

TEST(Bounds, AllTrueIsCube) {
  const Box b = bounds(ManipulationSpec::uniform(4, true, true), bits({1, 0, 1, 0}));
  EXPECT_EQ(b.lower, FeatureVector::Zero(4));
  EXPECT_EQ(b.upper, FeatureVector::Ones(4));
}

TEST(Bounds, MixedCaseByHand) {
  ManipulationSpec s;
  s.can_add = {1, 0, 1, 0};
  s.can_remove = {0, 1, 1, 0};
  // x = (0, 1, 1, 0): f0 add-only at 0 -> [0,1]; f1 remove at 1 -> [0,1]; f2 both at 1 -> [0,1]; f3 frozen
  const Box b = bounds(s, bits({0, 1, 1, 0}));
  EXPECT_EQ(b.lower, bits({0, 0, 0, 0}));
  EXPECT_EQ(b.upper, bits({1, 1, 1, 0}));
  // x = (1, 0, 0, 1): f0 cannot drop -> [1,1]; f1 cannot add -> [0,0]; f2 -> [0,1]; f3 -> [1,1]
  const Box c = bounds(s, bits({1, 0, 0, 1}));
  EXPECT_EQ(c.lower, bits({1, 0, 0, 1}));
  EXPECT_EQ(c.upper, bits({1, 0, 1, 1}));
}

TEST(Bounds, LengthMismatchThrows) {
  EXPECT_THROW(bounds(ManipulationSpec::uniform(3, true, true), bits({1, 0})), InputError);
}

TEST(Bounds, BracketX) {
  Rng rng = make_rng(1);
  for (int t = 0; t < 200; ++t) {
    const auto s = random_spec(10, rng);
    const FeatureVector x = random_binary(10, rng);
    const Box b = bounds(s, x);
    EXPECT_TRUE((b.lower.array() <= x.array()).all());
    EXPECT_TRUE((x.array() <= b.upper.array()).all());
  }
}

TEST(IsFeasible, BasicCases) {
  const auto s = ManipulationSpec::uniform(3, false, true);
  const FeatureVector x = bits({1, 0, 1});
  EXPECT_TRUE(is_feasible(x, x, s));
  EXPECT_FALSE(is_feasible(bits({1, 1, 1}), x, s));
  EXPECT_TRUE(is_feasible(bits({0, 0, 1}), x, s));
  EXPECT_THROW(is_feasible(bits({0.5, 0, 1}), x, s), InputError);
  EXPECT_THROW(is_feasible(bits({0, 1}), x, s), InputError);
}

TEST(IsFeasible, MatchesEnumeration) {
  Rng rng = make_rng(2);
  for (int t = 0; t < 60; ++t) {
    const std::size_t d = 1 + uniform_index(rng, 12);
    const auto s = random_spec(d, rng);
    const FeatureVector x = random_binary(d, rng);
    const auto set = feasible_set(x, s);
    for (unsigned m = 0; m < (1u << d); ++m) EXPECT_EQ(is_feasible(from_mask(m, d), x, s), set.count(m) == 1);
  }
}

TEST(UnionSpecs, IdentityAndIdempotence) {
  Rng rng = make_rng(3);
  const auto s = random_spec(8, rng);
  const std::vector<ManipulationSpec> ss{s, s}, sz{s, ManipulationSpec::uniform(8, false, false)};
  EXPECT_EQ(union_specs(ss), s);
  EXPECT_EQ(union_specs(sz), s);
  EXPECT_THROW(union_specs(std::vector<ManipulationSpec>{}), InputError);
  EXPECT_THROW(union_specs(std::vector<ManipulationSpec>{s, ManipulationSpec::uniform(7, true, true)}), InputError);
}

TEST(UnionSpecs, FeasibleSetIsUnion) {
  Rng rng = make_rng(4);
  for (int t = 0; t < 40; ++t) {
    const std::size_t d = 1 + uniform_index(rng, 10);
    const auto a = random_spec(d, rng), b = random_spec(d, rng);
    const FeatureVector x = random_binary(d, rng);
    auto expected = feasible_set(x, a);
    const auto fb = feasible_set(x, b);
    expected.insert(fb.begin(), fb.end());
    // The union spec may also combine an add from A with a removal from B, so the
    // single-spec union is a subset of the union spec's feasible set; for a single
    // differing coordinate they agree.
    const auto u = union_specs(std::vector<ManipulationSpec>{a, b});
    const auto fu = feasible_set(x, u);
    for (auto m : expected) EXPECT_TRUE(fu.count(m));
    for (std::size_t i = 0; i < d; ++i) {
      const unsigned flipped = to_mask(x) ^ (1u << i);
      EXPECT_EQ(fu.count(flipped), expected.count(flipped));
    }
  }
}

TEST(UnionSpecs, MonotoneFeasibility) {
  Rng rng = make_rng(5);
  for (int t = 0; t < 40; ++t) {
    const std::size_t d = 1 + uniform_index(rng, 10);
    const auto b = random_spec(d, rng);
    ManipulationSpec a = b;
    for (std::size_t i = 0; i < d; ++i) {
      if (uniform01(rng) < 0.5) a.can_add[i] = 0;
      if (uniform01(rng) < 0.5) a.can_remove[i] = 0;
    }
    ASSERT_TRUE(is_subset(a, b));
    const FeatureVector x = random_binary(d, rng);
    const auto fb = feasible_set(x, b);
    for (auto m : feasible_set(x, a)) EXPECT_TRUE(fb.count(m));
  }
}

TEST(FeasibleNearest, FixedExamples) {
  const auto all = ManipulationSpec::uniform(3, true, true);
  const FeatureVector x = bits({1, 0, 1});
  EXPECT_EQ(feasible_nearest(bits({0, 1, 1}), x, all), bits({0, 1, 1}));
  const auto frozen = ManipulationSpec::uniform(3, false, false);
  EXPECT_EQ(feasible_nearest(bits({0.9, 0.9, 0.9}), bits({0, 0, 0}), frozen), bits({0, 0, 0}));
  EXPECT_EQ(feasible_nearest(bits({0.5, 0.49, 0.51}), bits({0, 0, 0}), all), bits({1, 0, 1}));
}

TEST(FeasibleNearest, MatchesBruteForce) {
  Rng rng = make_rng(6);
  for (int t = 0; t < 300; ++t) {
    const auto s = random_spec(6, rng);
    const FeatureVector x = random_binary(6, rng);
    const Box box = bounds(s, x);
    FeatureVector c(6);
    for (Eigen::Index i = 0; i < 6; ++i) c[i] = box.lower[i] + uniform01(rng) * (box.upper[i] - box.lower[i]);
    double best = std::numeric_limits<double>::infinity();
    for (auto m : feasible_set(x, s)) best = std::min(best, (from_mask(m, 6) - c).squaredNorm());
    const FeatureVector r = feasible_nearest(c, x, s);
    EXPECT_TRUE(is_feasible(r, x, s));
    EXPECT_NEAR((r - c).squaredNorm(), best, 1e-12);
  }
}

TEST(RandomizedRound, BinaryInputUnchanged) {
  Rng rng = make_rng(7);
  const auto s = ManipulationSpec::uniform(5, true, true);
  const FeatureVector x = bits({1, 0, 1, 1, 0});
  for (int t = 0; t < 50; ++t) EXPECT_EQ(randomized_round(bits({0, 0, 1, 1, 1}), x, s, rng), bits({0, 0, 1, 1, 1}));
}

TEST(RandomizedRound, FrequencyMatchesValue) {
  Rng rng = make_rng(8);
  const auto s = ManipulationSpec::uniform(2, true, true);
  int ones = 0;
  for (int t = 0; t < 10000; ++t) {
    const FeatureVector r = randomized_round(bits({0.3, 1.0}), bits({0, 0}), s, rng);
    ones += r[0] == 1.0;
    EXPECT_EQ(r[1], 1.0);
  }
  EXPECT_NEAR(ones / 10000.0, 0.3, 0.02);
}

TEST(RandomizedRound, AlwaysFeasible) {
  Rng rng = make_rng(9);
  for (int t = 0; t < 300; ++t) {
    const auto s = random_spec(8, rng);
    const FeatureVector x = random_binary(8, rng);
    FeatureVector c(8);
    for (auto& v : c) v = 1.4 * uniform01(rng) - 0.2;
    EXPECT_TRUE(is_feasible(randomized_round(c, x, s, rng), x, s));
  }
}

TEST(Distances, HammingAndL1) {
  EXPECT_EQ(hamming_distance(bits({1, 0, 1, 0}), bits({0, 0, 1, 1})), 2u);
  EXPECT_DOUBLE_EQ(l1_distance(bits({1, 0, 1, 0}), bits({0, 0, 1, 1})), 2.0);
}

TEST(DefaultSpec, ProfileProportions) {
  const auto s = default_spec(1000, 3);
  std::size_t add_only = 0, both = 0, frozen = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    if (s.can_add[i] && !s.can_remove[i]) ++add_only;
    else if (s.can_add[i] && s.can_remove[i]) ++both;
    else if (!s.can_add[i] && !s.can_remove[i]) ++frozen;
  }
  EXPECT_EQ(add_only + both + frozen, 1000u);
  EXPECT_EQ(add_only, 800u);
  EXPECT_EQ(both, 100u);
  EXPECT_EQ(frozen, 100u);
  EXPECT_EQ(default_spec(1000, 3), s);
}

TEST(SpecIo, RoundTripAndFormat) {
  Rng rng = make_rng(10);
  const auto s = random_spec(12, rng);
  std::stringstream ss;
  write_spec(s, ss);
  EXPECT_EQ(read_spec(ss), s);

  std::stringstream hand("# spec\nd=4\n0 1 0\n2 1 1  # both\n");
  const auto h = read_spec(hand);
  EXPECT_EQ(h.can_add, (std::vector<std::uint8_t>{1, 0, 1, 0}));
  EXPECT_EQ(h.can_remove, (std::vector<std::uint8_t>{0, 0, 1, 0}));
}

TEST(SpecIo, ParseErrorsCarryLine) {
  std::stringstream bad("d=3\n0 1 0\n5 1 0\n");
  try {
    read_spec(bad);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::stringstream flag("d=3\n0 2 0\n");
  EXPECT_THROW(read_spec(flag), ParseError);
  std::stringstream nohdr("0 1 0\n");
  EXPECT_THROW(read_spec(nohdr), ParseError);
}

}  // namespace
}  // namespace advens

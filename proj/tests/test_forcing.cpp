#include <gtest/gtest.h>

#include <random>

#include "droplet/forcing.hpp"

using namespace droplet;

namespace {

Forcing random_forcing(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> dt(0.2, 1.5), val(0.3, 3.0);
  std::vector<Forcing::Breakpoint> pts;
  double t = 0.0;
  for (int k = 0; k < n; ++k) {
    pts.push_back({t, val(rng)});
    t += dt(rng);
  }
  return Forcing(pts);
}

}  // namespace

TEST(Forcing, LinearInterpolation) {
  const Forcing f({{0, 1}, {1, 2}});
  EXPECT_DOUBLE_EQ(f.eval(0.5), 1.5);
  EXPECT_DOUBLE_EQ(f.eval(0.0), 1.0);
  EXPECT_DOUBLE_EQ(f.eval(1.0), 2.0);
}

TEST(Forcing, BreakpointValuesAreExact) {
  const Forcing f({{0, 1.38629436112}, {1, 1.55}, {2, 1.30}, {4, 2.75}});
  for (const auto& b : f.breakpoints()) EXPECT_EQ(f.eval(b.t), b.F);
}

TEST(Forcing, ConstantForcing) {
  const Forcing f = Forcing::constant(1.7, 3.0);
  for (double t : {0.0, 0.3, 1.9, 3.0}) EXPECT_EQ(f.eval(t), 1.7);
  EXPECT_EQ(f.log_derivative_bound(), 0.0);
  EXPECT_TRUE(f.monotonicity_changes().empty());
}

TEST(Forcing, OutsideRangeAndInvalidInputThrow) {
  const Forcing f({{0, 1}, {1, 2}});
  EXPECT_THROW(f.eval(-0.1), PreconditionError);
  EXPECT_THROW(f.eval(1.1), PreconditionError);
  EXPECT_THROW(Forcing({{0, 1}, {1, 0}}), PreconditionError);
  EXPECT_THROW(Forcing({{0, 1}, {0, 2}}), PreconditionError);
  EXPECT_THROW(Forcing({}), PreconditionError);
}

TEST(Forcing, UpDownPartition) {
  const auto p = Forcing({{0, 1}, {1, 2}, {2, 1}}).monotonicity_partition();
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].direction, Direction::increasing);
  EXPECT_EQ(p[0].t0, 0.0);
  EXPECT_EQ(p[0].t1, 1.0);
  EXPECT_EQ(p[1].direction, Direction::decreasing);
  EXPECT_EQ(p[1].t1, 2.0);
  EXPECT_EQ(Forcing({{0, 1}, {1, 2}, {2, 1}}).monotonicity_changes(), std::vector<double>{1.0});
}

TEST(Forcing, MonotonePartitionIsOneInterval) {
  const Forcing f({{0, 1}, {1, 1.5}, {3, 4}});
  ASSERT_EQ(f.monotonicity_partition().size(), 1u);
  EXPECT_TRUE(f.monotonicity_changes().empty());
}

TEST(Forcing, ConstantThenIncreasingHasNoChange) {
  const Forcing f({{0, 1}, {1, 1}, {2, 3}});
  const auto p = f.monotonicity_partition();
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].direction, Direction::constant);
  EXPECT_EQ(p[1].direction, Direction::increasing);
  EXPECT_TRUE(f.monotonicity_changes().empty());
}

TEST(Forcing, LogDerivativeBound) {
  EXPECT_DOUBLE_EQ(Forcing({{0, 1}, {1, 2}}).log_derivative_bound(), 1.0);
  EXPECT_DOUBLE_EQ(Forcing({{0, 2}, {1, 1}}).log_derivative_bound(), 1.0);
}

TEST(ForcingProperty, LogDerivativeBoundIsTheSupOfSampledRatio) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Forcing f = random_forcing(rng, 6);
    double sampled = 0.0;
    const auto& b = f.breakpoints();
    for (std::size_t k = 0; k + 1 < b.size(); ++k)
      for (int s = 0; s <= 200; ++s) {
        const double t = b[k].t + (b[k + 1].t - b[k].t) * s / 200.0;
        const double slope = (b[k + 1].F - b[k].F) / (b[k + 1].t - b[k].t);
        sampled = std::max(sampled, std::abs(slope) / f.eval(t));
      }
    EXPECT_NEAR(f.log_derivative_bound(), sampled, 1e-9 * sampled);
  }
}

TEST(ForcingProperty, EvalIsMonotoneOnEachInterval) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Forcing f = random_forcing(rng, 7);
    for (const auto& iv : f.monotonicity_partition()) {
      double prev = f.eval(iv.t0);
      for (int s = 1; s <= 100; ++s) {
        const double v = f.eval(iv.t0 + (iv.t1 - iv.t0) * s / 100.0);
        if (iv.direction == Direction::increasing) EXPECT_GE(v, prev - 1e-12);
        if (iv.direction == Direction::decreasing) EXPECT_LE(v, prev + 1e-12);
        prev = v;
      }
    }
  }
}

TEST(ForcingProperty, PartitionCoversTheRange) {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Forcing f = random_forcing(rng, 8);
    const auto p = f.monotonicity_partition();
    EXPECT_EQ(p.front().t0, f.t_begin());
    EXPECT_EQ(p.back().t1, f.t_end());
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
      EXPECT_EQ(p[k].t1, p[k + 1].t0);
      EXPECT_NE(p[k].direction, p[k + 1].direction);
    }
  }
}

TEST(ForcingProperty, CollinearRefinementChangesNothing) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> frac(0.1, 0.9);
  for (int trial = 0; trial < 50; ++trial) {
    const Forcing f = random_forcing(rng, 6);
    std::vector<Forcing::Breakpoint> pts;
    const auto& b = f.breakpoints();
    for (std::size_t k = 0; k + 1 < b.size(); ++k) {
      pts.push_back(b[k]);
      const double t = b[k].t + frac(rng) * (b[k + 1].t - b[k].t);
      pts.push_back({t, f.eval(t)});
    }
    pts.push_back(b.back());
    const Forcing g(pts);
    EXPECT_EQ(g.monotonicity_changes(), f.monotonicity_changes());
    for (int s = 0; s <= 100; ++s) {
      const double t = f.t_begin() + (f.t_end() - f.t_begin()) * s / 100.0;
      EXPECT_NEAR(g.eval(t), f.eval(t), 1e-12);
    }
  }
}

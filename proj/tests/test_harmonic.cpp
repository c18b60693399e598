#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "common.hpp"
#include "droplet/harmonic.hpp"

using namespace droplet;
using namespace testutil;

namespace {

constexpr double kPi = std::numbers::pi;
const double kE = std::numbers::e;

struct Annulus {
  Shape solid = disk(0, 0, 1);
  GridPtr g;
  HeightField f;
  explicit Annulus(double h, double F = 2.0) {
    g = Grid::box({-3, -3}, {3, 3}, h, &solid);
    f = solve_dirichlet(SupportMask::from_shape(g, disk(0, 0, kE)), F);
  }
};

// u = F log(R/r) / log(R/R0) with R0 = 1, R = e
double annulus_exact(double F, Vec2 p) {
  const double r = norm(p);
  return r <= 1.0 ? F : (r >= kE ? 0.0 : F * std::log(kE / r));
}

double max_node_error(const HeightField& f) {
  double e = 0.0;
  const Grid& g = *f.grid;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      if (f.support.wet(i, j)) e = std::max(e, std::abs(f.at(i, j) - annulus_exact(f.F, g.node(i, j))));
  return e;
}

double max_slope_error(const HeightField& f, double exact) {
  double e = 0.0;
  for (const auto& s : interface_slope(f)) e = std::max(e, std::abs(s.slope - exact));
  return e;
}

}  // namespace

TEST(SolveDirichlet, AnnulusProfileConvergesAtFirstOrder) {
  const Annulus a(1.0 / 32), b(1.0 / 64);
  const double e1 = max_node_error(a.f), e2 = max_node_error(b.f);
  EXPECT_LE(e1, 1.0 / 32);
  EXPECT_LE(e2, 1.0 / 64);
  EXPECT_LT(e2, e1);
  EXPECT_LE(a.f.stats.relative_residual, 1e-8);
}

TEST(SolveDirichlet, FiniteDifferenceResidualOfTheOracleIsSmall) {
  // the analytic profile itself satisfies the 5-point Laplacian to O(h^2) away from the boundaries
  const double h = 1.0 / 64;
  double worst = 0.0;
  for (double r = 1.2; r < 2.5; r += 0.05)
    for (double a = 0; a < 2 * kPi; a += 0.3) {
      const Vec2 p{r * std::cos(a), r * std::sin(a)};
      const double lap = (annulus_exact(2, p + Vec2{h, 0}) + annulus_exact(2, p - Vec2{h, 0}) + annulus_exact(2, p + Vec2{0, h}) +
                          annulus_exact(2, p - Vec2{0, h}) - 4 * annulus_exact(2, p)) /
                         (h * h);
      worst = std::max(worst, std::abs(lap));
    }
  EXPECT_LE(worst, 1e-2);
}

TEST(SolveDirichlet, LinearInF) {
  const Annulus a(1.0 / 32, 1.0), b(1.0 / 32, 2.0);
  for (std::size_t k = 0; k < a.f.u.size(); ++k) EXPECT_NEAR(b.f.u[k], 2.0 * a.f.u[k], 1e-6);
}

TEST(SolveDirichlet, SolidOnlySupportIsConstant) {
  const Shape solid = disk(0, 0, 1);
  auto g = Grid::box({-2, -2}, {2, 2}, 1.0 / 16, &solid);
  const auto f = solve_dirichlet(SupportMask::from_shape(g, solid), 1.5);
  for (int j = 0; j < g->ny(); ++j)
    for (int i = 0; i < g->nx(); ++i) EXPECT_EQ(f.at(i, j), g->solid(i, j) ? 1.5 : 0.0);
  EXPECT_EQ(pressure(f), 0.0);
}

TEST(SolveDirichlet, Preconditions) {
  const Shape solid = disk(0, 0, 1);
  auto g = Grid::box({-2, -2}, {2, 2}, 1.0 / 16, &solid);
  EXPECT_THROW(solve_dirichlet(SupportMask::from_shape(g, disk(0, 0, 0.5)), 1.0), PreconditionError);
  EXPECT_THROW(solve_dirichlet(SupportMask::from_shape(g, disk(0, 0, 1.5)), 0.0), PreconditionError);
  EXPECT_THROW(solve_dirichlet(SupportMask::from_shape(g, disk(0, 0, 3.0)), 1.0), BoxReachedError);
  auto other = Grid::box({-2, -2}, {2, 2}, 1.0 / 8, &solid);
  EXPECT_THROW(solve_dirichlet(*other, SupportMask::from_shape(g, disk(0, 0, 1.5)), 1.0), GridMismatchError);
}

TEST(InterfaceSlope, AnnulusSlopeConverges) {
  const Annulus a(1.0 / 32), b(1.0 / 64);
  const double e1 = max_slope_error(a.f, 2 / kE), e2 = max_slope_error(b.f, 2 / kE);
  EXPECT_LE(e1, 4.0 / 32);
  EXPECT_LE(e2, 4.0 / 64);
  EXPECT_LT(e2, e1);
}

TEST(InterfaceSlope, NodesOnTheFrontGiveNoOutliers) {
  // R = 2 puts the axis nodes (±2, 0), (0, ±2) a hair inside the support
  Shape solid = disk(0, 0, 1);
  const double h = 1.0 / 32;
  auto g = Grid::box({-3, -3}, {3, 3}, h, &solid);
  const auto f = solve_dirichlet(mask_from(g, [](Vec2 p) { return norm(p) - 2.0 - 1e-9; }), 1.0);
  const double exact = 1.0 / (2.0 * std::log(2.0));
  EXPECT_LE(max_slope_error(f, exact), 4.0 * h);
}

TEST(InterfaceSlope, PlanarProfileIsExact) {
  const double q = 1.3, h = 1.0 / 32;
  const Shape solid{Polygon{{{-1.6, -2.9}, {-0.99, -2.9}, {-0.99, 2.9}, {-1.6, 2.9}}}};
  auto g = Grid::box({-2, -3.5}, {0.5, 3.5}, h, &solid);
  const Shape wet{Polygon{{{-1.7, -3}, {0.01, -3}, {0.01, 3}, {-1.7, 3}}}};
  const auto f = solve_dirichlet(SupportMask::from_shape(g, wet), q * 1.0);
  int n = 0;
  for (const auto& s : interface_slope(f)) {
    if (s.point.x < 0 || std::abs(s.point.y) > 0.5) continue;
    EXPECT_NEAR(s.slope, q, 2e-3);
    EXPECT_NEAR(s.normal.x, 1.0, 1e-3);
    ++n;
  }
  EXPECT_GT(n, 25);
}

TEST(InterfaceSlope, DoublingFDoublesSlopes) {
  const Annulus a(1.0 / 32, 1.0), b(1.0 / 32, 2.0);
  const auto sa = interface_slope(a.f), sb = interface_slope(b.f);
  ASSERT_EQ(sa.size(), sb.size());
  for (std::size_t k = 0; k < sa.size(); ++k) EXPECT_NEAR(sb[k].slope, 2 * sa[k].slope, 1e-5);
}

TEST(InterfaceSlope, SamplesSitOnTheFront) {
  const Annulus a(1.0 / 32);
  for (const auto& s : interface_slope(a.f)) {
    EXPECT_GE(s.slope, 0.0);
    EXPECT_NEAR(norm(s.point), kE, 1.0 / 32);
    EXPECT_GT(dot(s.normal, s.point), 0.0);
  }
}

TEST(InterfaceSlope, UnsolvedFieldIsRejected) {
  HeightField f;
  EXPECT_THROW(interface_slope(f), PreconditionError);
  EXPECT_THROW(pressure(f), PreconditionError);
}

TEST(Pressure, AnnulusFlux) {
  const Annulus a(1.0 / 32), b(1.0 / 64);
  EXPECT_NEAR(pressure(a.f), 4 * kPi, 0.05 * 4 * kPi);
  EXPECT_LT(std::abs(pressure(b.f) - 4 * kPi), std::abs(pressure(a.f) - 4 * kPi) + 1e-3);
  EXPECT_GT(pressure(a.f), 0.0);
  const Annulus c(1.0 / 32, 4.0);
  EXPECT_NEAR(pressure(c.f), 2 * pressure(a.f), 1e-5);
}

TEST(HarmonicProperty, MaximumPrincipleFluxBalanceAndResidual) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ax(1.3, 2.4), off(-0.2, 0.2), F(0.2, 3.0);
  const Shape solid = disk(0, 0, 1);
  auto g = Grid::box({-3, -3}, {3, 3}, 1.0 / 32, &solid);
  for (int trial = 0; trial < 12; ++trial) {
    const Shape wet{Ellipse{{off(rng), off(rng)}, ax(rng), ax(rng)}};
    const auto f = solve_dirichlet(SupportMask::from_shape(g, wet), F(rng));
    for (std::size_t k = 0; k < f.u.size(); ++k) {
      EXPECT_GE(f.u[k], -1e-12);
      EXPECT_LE(f.u[k], f.F + 1e-12);
      if (!f.support.wet(k)) EXPECT_EQ(f.u[k], 0.0);
    }
    EXPECT_NEAR(pressure(f), free_boundary_flux(f), 1e-6 * pressure(f));
    EXPECT_LE(laplacian_residual(f) * g->h() * g->h(), 1e-6 * f.F);
  }
}

TEST(FieldDump, RoundTrip) {
  const Annulus a(1.0 / 16);
  std::stringstream ss;
  write_field(ss, *a.g, a.f.u);
  const auto d = read_field(ss);
  EXPECT_EQ(d.nx, a.g->nx());
  EXPECT_EQ(d.ny, a.g->ny());
  EXPECT_DOUBLE_EQ(d.h, a.g->h());
  for (std::size_t k = 0; k < d.values.size(); ++k) EXPECT_NEAR(d.values[k], a.f.u[k], 1e-10);
}

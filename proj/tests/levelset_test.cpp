#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hardyop/levelset.hpp"

using namespace hardyop;

namespace {

PhiFunction point_mass_map(double alpha = 0.0) {
  return phi_from_nevanlinna({alpha, 1.0, measures::dirac(0.0)});
}

RealMeasure random_atoms(std::mt19937_64& rng, int n, double total) {
  std::uniform_real_distribution<double> pos(-3, 3), w(0.1, 1.0);
  std::vector<Atom> atoms;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    atoms.push_back({pos(rng), w(rng)});
    s += atoms.back().mass;
  }
  for (auto& a : atoms) a.mass *= total / s;
  return measures::atoms(atoms);
}

}  // namespace

// ---- interval preimages ----------------------------------------------------------------------

TEST(IntervalPreimage, Identity) {
  const auto r = preimage_interval_measure(identity_map(), 0, 1);
  EXPECT_NEAR(r.total, 1.0, 1e-12);
  ASSERT_EQ(r.set.intervals().size(), 1u);
}

TEST(IntervalPreimage, PointMassMapByQuadraticRoots) {
  // x - 1/x = v  <=>  x = (v ± sqrt(v^2 + 4))/2
  const auto r = preimage_interval_measure(point_mass_map(), 0, 1);
  const double right = (1 + std::sqrt(5.0)) / 2 - 1;
  const double left = 1 - (std::sqrt(5.0) - 1) / 2;
  ASSERT_EQ(r.set.intervals().size(), 2u);
  EXPECT_NEAR(r.set.intervals()[0].length(), left, 1e-12);
  EXPECT_NEAR(r.set.intervals()[1].length(), right, 1e-12);
  EXPECT_NEAR(r.total, 1.0, 1e-12);
}

TEST(IntervalPreimage, SqrtSmallInterval) {
  const double eps = 0.01;
  const auto r = preimage_interval_measure(phi_from_catalog("sqrt", {}), -eps, eps);
  EXPECT_NEAR(r.total, 2 * (std::sqrt(1 + eps * eps) - 1), 1e-12);
}

TEST(IntervalPreimage, RejectsBadInterval) {
  EXPECT_THROW(preimage_interval_measure(identity_map(), 1, 0), PreconditionError);
  EXPECT_THROW(preimage_interval_measure(identity_map(), 0, INFINITY), PreconditionError);
}

TEST(IntervalPreimage, AdditivityAndMonotonicity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-4, 4);
  for (const auto& phi : {phi_from_catalog("sqrt", {}), phi_from_catalog("zlog", {}),
                          phi_from_catalog("zloglin", {}), phi_from_catalog("sqrtpole", {{"alpha", -1.0}}),
                          point_mass_map(0.5)}) {
    for (int k = 0; k < 25; ++k) {
      double v[3] = {u(rng), u(rng), u(rng)};
      std::sort(v, v + 3);
      const double ab = preimage_interval_measure(phi, v[0], v[1]).total;
      const double bc = preimage_interval_measure(phi, v[1], v[2]).total;
      const double ac = preimage_interval_measure(phi, v[0], v[2]).total;
      EXPECT_NEAR(ab + bc, ac, 1e-9) << phi.describe();
      EXPECT_LE(ab, ac);
      EXPECT_LE(bc, ac);
    }
  }
}

TEST(IntervalPreimage, LetacForSingularRho) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ua(-5, 5), ul(0.01, 4), al(-2, 2);
  for (int trial = 0; trial < 5; ++trial) {
    const auto phi = phi_from_nevanlinna({al(rng), 1.0, random_atoms(rng, 1 + trial, 1.0 + trial)});
    for (int k = 0; k < 50; ++k) {
      const double a = ua(rng), len = ul(rng);
      EXPECT_NEAR(preimage_interval_measure(phi, a, a + len).total, len, 1e-8 * std::max(1.0, len));
    }
  }
}

TEST(IntervalPreimage, TangentEndpointIsHalfOpen) {
  // sqrt maps (1, inf) onto (0, inf) and (-inf, -1) onto (-inf, 0), so the interval (0, 1)
  // pulls back to (1, sqrt 2) only.
  const auto r = preimage_interval_measure(phi_from_catalog("sqrt", {}), 0, 1);
  EXPECT_NEAR(r.total, std::sqrt(2.0) - 1, 1e-12);
}

// ---- disk preimages ----------------------------------------------------------------------------

TEST(DiskPreimage, QueryGeometry) {
  const DiskQuery q(0, 1);
  EXPECT_DOUBLE_EQ(q.center(), 0.5);
  EXPECT_DOUBLE_EQ(q.radius(), 0.5);
  EXPECT_TRUE(q.contains({0.5, 0.49}));
  EXPECT_FALSE(q.contains({0.5, 0.5}));
  EXPECT_TRUE(q.contains({0.2, 0.0}));
  EXPECT_THROW(DiskQuery(1, 1), PreconditionError);
}

TEST(DiskPreimage, Identity) { EXPECT_NEAR(preimage_disk_measure(identity_map(), DiskQuery(0, 1)), 1.0, 1e-12); }

TEST(DiskPreimage, SqrtSmallDisk) {
  // Real part: 2(sqrt(1+e^2)-1). Inside (-1,1) the value i sqrt(1-x^2) is in the disk of radius e
  // about 0 iff sqrt(1-x^2) < e, i.e. |x| > sqrt(1-e^2): 2(1 - sqrt(1-e^2)).
  const double e = 0.01;
  const double expect = 2 * (std::sqrt(1 + e * e) - 1) + 2 * (1 - std::sqrt(1 - e * e));
  EXPECT_NEAR(preimage_disk_measure(phi_from_catalog("sqrt", {}), DiskQuery(-e, e)), expect, 1e-10);
}

TEST(DiskPreimage, ContainsIntervalPreimage) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3, 3), l(0.01, 2);
  for (const auto& phi : {phi_from_catalog("sqrt", {}), phi_from_catalog("zlog", {}),
                          phi_from_catalog("zloglin", {}), phi_from_catalog("sqrtpole", {{"alpha", -1.0}})}) {
    for (int k = 0; k < 15; ++k) {
      const double a = u(rng), b = a + l(rng);
      EXPECT_LE(preimage_interval_measure(phi, a, b).total, preimage_disk_measure(phi, DiskQuery(a, b)))
          << phi.describe();
    }
  }
}

TEST(DiskPreimage, ZloglinBoundedBelow) {
  const auto phi = phi_from_catalog("zloglin", {{"alpha", 0.0}});
  for (double a : {-3.0, -1.0, 0.0, 0.7, 2.0, 6.0}) {
    const double m = preimage_disk_measure(phi, DiskQuery(a, a + 0.5));
    EXPECT_GT(m / 0.5, 0.5) << "a = " << a;
  }
}

// ---- tail sets ----------------------------------------------------------------------------------

TEST(TailSet, DiracAtOrigin) {
  const auto r = tail_set(cauchy_transform(measures::dirac(0.0)), 2.0, TailSide::upper);
  ASSERT_EQ(r.set.intervals().size(), 1u);
  EXPECT_NEAR(r.set.intervals()[0].lo, -0.5, 1e-12);
  EXPECT_NEAR(r.set.intervals()[0].hi, 0.0, 1e-12);
  EXPECT_NEAR(r.total, 0.5, 1e-12);
}

TEST(TailSet, TwoAtomsBoole) {
  // G = -1/(2x) + 1/(2(1-x)) = 1 reduces to x^2 = 1/2, so the set is (-1/sqrt2, 0) ∪ (1/sqrt2, 1).
  const auto g = cauchy_transform(measures::atoms({{0.0, 0.5}, {1.0, 0.5}}));
  const double r = 1 / std::sqrt(2.0);
  const auto res = tail_set(g, 1.0, TailSide::upper);
  ASSERT_EQ(res.set.intervals().size(), 2u);
  EXPECT_NEAR(res.set.intervals()[0].lo, -r, 1e-12);
  EXPECT_NEAR(res.set.intervals()[0].hi, 0.0, 1e-12);
  EXPECT_NEAR(res.set.intervals()[1].lo, r, 1e-12);
  EXPECT_NEAR(res.set.intervals()[1].hi, 1.0, 1e-12);
  EXPECT_NEAR(res.total, 1.0, 1e-12);
}

TEST(TailSet, UniformClosedForm) {
  // G(x) = log((x-1)/x); left of 0 the set G > y is (-1/(e^y - 1), 0).
  // Inside (0,1): Re G = log((1-x)/x) > y on (0, 1/(1+e^y)).
  const double y = 10.0;
  const double expect = 1.0 / (std::exp(y) - 1) + 1.0 / (1 + std::exp(y));
  const double m = tail_set_measure(cauchy_transform(measures::uniform(0, 1)), y, TailSide::upper);
  EXPECT_NEAR(m, expect, 1e-12);
  EXPECT_LT(y * m, 1e-3);
}

TEST(TailSet, BooleForRandomAtoms) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = cauchy_transform(random_atoms(rng, 1 + trial % 5, 1.0));
    for (double y : {0.5, 1.0, 2.0, 10.0}) {
      EXPECT_NEAR(y * tail_set_measure(g, y, TailSide::upper), 1.0, 1e-6);
      EXPECT_NEAR(y * tail_set_measure(g, y, TailSide::lower), 1.0, 1e-6);
    }
  }
}

TEST(TailSet, BooleForCantor) {
  const auto g = cauchy_transform(measures::cantor(0, 1, 1.0, 10));
  for (double y : {0.5, 1.0, 2.0, 10.0}) {
    EXPECT_NEAR(y * tail_set_measure(g, y, TailSide::upper), 1.0, 1e-3);
    EXPECT_NEAR(y * tail_set_measure(g, y, TailSide::lower), 1.0, 1e-3);
  }
}

TEST(TailSet, MixedMeasureApproachesSingularMass) {
  const auto g = cauchy_transform(measures::dirac(0.0, 0.5) + measures::uniform(0, 1, 0.5));
  const double y = 1e4;
  const double up = y * tail_set_measure(g, y, TailSide::upper);
  const double lo = y * tail_set_measure(g, y, TailSide::lower);
  EXPECT_GE(up, 0.49);
  EXPECT_LE(up, 0.51);
  EXPECT_GE(lo, 0.49);
  EXPECT_LE(lo, 0.51);
}

TEST(TailSet, DiskIdentityForPhiSources) {
  for (const auto& phi : {phi_from_catalog("sqrt", {}), phi_from_catalog("zlog", {}),
                          phi_from_catalog("zloglin", {}), phi_from_catalog("sqrtpole", {{"alpha", -1.0}}),
                          point_mass_map(0.3), identity_map()}) {
    for (double tau : {-0.5, 0.0, 0.7})
      for (double y : {0.5, 1.0, 2.0, 10.0}) {
        const double tail = tail_set_measure(g_tau(phi, tau), y, TailSide::lower);
        const double disk = preimage_disk_measure(phi, DiskQuery(tau, tau + 1.0 / y));
        EXPECT_NEAR(tail, disk, 1e-8) << phi.describe() << " tau=" << tau << " y=" << y;
      }
  }
}

TEST(TailSet, RejectsNonpositiveLevel) {
  EXPECT_THROW(tail_set_measure(cauchy_transform(measures::dirac(0)), 0.0, TailSide::upper),
               PreconditionError);
}

// ---- Monte Carlo oracle -----------------------------------------------------------------------

TEST(MonteCarlo, IdentityInterval) {
  const auto r = mc_oracle_measure(interval_member(identity_map(), 0, 1), -2, 3, 1'000'000, 1);
  EXPECT_NEAR(r.estimate, 1.0, 0.003);
  EXPECT_NEAR(r.stderr_, 5.0 * std::sqrt(0.2 * 0.8 / 1e6), 1e-5);
}

TEST(MonteCarlo, PointMassMapInterval) {
  const auto r = mc_oracle_measure(interval_member(point_mass_map(), 0, 1), -5, 5, 1'000'000, 2);
  EXPECT_NEAR(r.estimate, 1.0, 0.01);
  EXPECT_LT(std::abs(r.estimate - 1.0), 3 * r.stderr_);
}

TEST(MonteCarlo, SqrtDiskAgrees) {
  const auto phi = phi_from_catalog("sqrt", {});
  const DiskQuery q(-0.01, 0.01);
  const auto r = mc_oracle_measure(disk_member(phi, q), -3, 3, 1'000'000, 3);
  EXPECT_LT(std::abs(r.estimate - preimage_disk_measure(phi, q)), 3 * r.stderr_);
}

TEST(MonteCarlo, Deterministic) {
  auto m = interval_member(point_mass_map(), -1, 2);
  const auto a = mc_oracle_measure(m, -6, 6, 10000, 99), b = mc_oracle_measure(m, -6, 6, 10000, 99);
  EXPECT_EQ(a.hits, b.hits);
}

TEST(MonteCarlo, WindowTooSmallRejected) {
  EXPECT_THROW(mc_oracle_measure(interval_member(identity_map(), 0, 1), 0.2, 3, 1000, 1),
               PreconditionError);
}

TEST(MonteCarlo, AgreesOnAssortedQueries) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-2, 2), l(0.05, 1.5);
  const std::vector<PhiFunction> maps = {phi_from_catalog("sqrt", {}), phi_from_catalog("zlog", {}),
                                         phi_from_catalog("zloglin", {}),
                                         phi_from_catalog("sqrtpole", {{"alpha", -1.0}}),
                                         point_mass_map(0.2)};
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const double a = u(rng), b = a + l(rng);
    const auto& phi = maps[i];
    const auto mi = mc_oracle_measure(interval_member(phi, a, b), -40, 40, 200'000, 100 + i);
    EXPECT_LT(std::abs(mi.estimate - preimage_interval_measure(phi, a, b).total), 3 * mi.stderr_ + 1e-12)
        << phi.describe();
    const auto md = mc_oracle_measure(disk_member(phi, DiskQuery(a, b)), -40, 40, 200'000, 200 + i);
    EXPECT_LT(std::abs(md.estimate - preimage_disk_measure(phi, DiskQuery(a, b))), 3 * md.stderr_ + 1e-12)
        << phi.describe();
  }
}

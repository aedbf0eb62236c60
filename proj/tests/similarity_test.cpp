#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "hardyop/range.hpp"
#include "hardyop/similarity.hpp"

using namespace hardyop;

namespace {

PhiFunction zloglin(double alpha) { return phi_from_catalog("zloglin", {{"alpha", alpha}}); }

}  // namespace

TEST(Certificate, ZloglinFiveCertified) {
  const auto phi = zloglin(5.0);
  const auto cert = similarity_certificate(phi);
  ASSERT_EQ(cert.status, CertificateStatus::certified) << cert.note;
  EXPECT_FALSE(cert.mirrored);
  EXPECT_DOUBLE_EQ(cert.c, -1.0);
  EXPECT_DOUBLE_EQ(cert.d, 1.0);
  EXPECT_EQ(cert.limit_left, INFINITY);
  EXPECT_EQ(cert.limit_right, -INFINITY);
  EXPECT_LT(cert.c1, cert.c);
  EXPECT_GT(cert.d1, cert.d);
  const double v = phi.boundary_value(cert.d1).real();
  EXPECT_NEAR(phi.boundary_value(cert.c1).real(), v, 1e-9 * std::max(1.0, std::abs(v)));
  EXPECT_NEAR(cert.eta, v - cert.d1, 1e-12);
  EXPECT_GT(cert.eta, 0.0);
  EXPECT_TRUE(std::isfinite(cert.product_bound));
  EXPECT_TRUE(cert.orbit_gap_ok);
  // k = ∫(1+t^2) dt/(1+t^2) over [-1,1]
  EXPECT_NEAR(cert.k, 2.0, 1e-12);
}

TEST(Certificate, NegativeAlphaUsesMirror) {
  const auto phi = zloglin(-5.0);
  const auto cert = similarity_certificate(phi);
  ASSERT_EQ(cert.status, CertificateStatus::certified);
  EXPECT_TRUE(cert.mirrored);
  EXPECT_GT(cert.eta, 0.0);
  EXPECT_NEAR(cert.eta, cert.c1 - phi.boundary_value(cert.c1).real(), 1e-12);
}

TEST(Certificate, SqrtFailsHypothesis) {
  const auto cert = similarity_certificate(phi_from_catalog("sqrt", {}));
  EXPECT_EQ(cert.status, CertificateStatus::hypothesis_failed);
  EXPECT_DOUBLE_EQ(cert.limit_left, 0.0);
  EXPECT_DOUBLE_EQ(cert.limit_right, 0.0);
}

TEST(Certificate, ZloglinZeroNotCertified) {
  // Phi(x) - x = log((x-1)/(x+1)) < 0 for x > 1 and the mirror fails symmetrically.
  const auto cert = similarity_certificate(zloglin(0.0));
  EXPECT_EQ(cert.status, CertificateStatus::alpha_too_small);
}

TEST(Certificate, SqrtpoleRecorded) {
  const auto phi = phi_from_catalog("sqrtpole", {{"alpha", -1.0}});
  const auto cert = similarity_certificate(phi);
  EXPECT_NEAR(cert.limit_left, -0.5, 1e-12);   // alpha + 0 + 1/2
  EXPECT_EQ(cert.limit_right, -INFINITY);      // pole at 1
  EXPECT_NE(cert.status, CertificateStatus::hypothesis_failed);
  if (cert.status == CertificateStatus::certified) {
    EXPECT_LT(cert.c1, -1.0);
    EXPECT_GT(cert.d1, 1.0);
    EXPECT_GT(cert.eta, 0.0);
    EXPECT_TRUE(std::isfinite(cert.product_bound));
  }
}

TEST(Certificate, UnboundedSupportRejected) {
  EXPECT_THROW(similarity_certificate(phi_from_catalog("zlog", {})), PreconditionError);
}

TEST(Certificate, TranslationIsCertified) {
  const auto cert = similarity_certificate(translation(2.0));
  EXPECT_EQ(cert.status, CertificateStatus::certified);
  EXPECT_TRUE(cert.translation);
  EXPECT_DOUBLE_EQ(cert.eta, 2.0);
  EXPECT_DOUBLE_EQ(cert.product_bound, 1.0);
  EXPECT_EQ(similarity_certificate(identity_map()).status, CertificateStatus::alpha_too_small);
}

TEST(ProductBound, MatchesDirectSummation) {
  // Direct log-sum over many terms is a lower bound and must be within the tail estimate.
  const double k = 2.0, eta = 1.5, gr = 0.3, gl = 0.7;
  double direct = 0.0;
  for (int n = 0; n < 2'000'000; ++n) {
    const double dr = gr + n * eta, dl = gl + n * eta;
    direct += std::log1p(k / (dr * dr)) + std::log1p(k / (dl * dl));
  }
  const double bound = detail::log_product_bound(k, eta, gr, gl);
  EXPECT_GE(bound, direct);
  EXPECT_LT(bound - direct, 2.0 * k / (eta * eta) / 2e6 + 1e-9);
  EXPECT_EQ(detail::log_product_bound(0.0, eta, gr, gl), 0.0);
}

TEST(Orbit, TranslationSteps) {
  const auto phi = translation(2.0);
  const auto orbit = backward_orbit(phi, similarity_certificate(phi), 0.0, 3);
  ASSERT_EQ(orbit.size(), 3u);
  EXPECT_NEAR(orbit[0], -2.0, 1e-12);
  EXPECT_NEAR(orbit[1], -4.0, 1e-12);
  EXPECT_NEAR(orbit[2], -6.0, 1e-12);
}

TEST(Orbit, ZloglinFiveEscapes) {
  const auto phi = zloglin(5.0);
  const auto cert = similarity_certificate(phi);
  const auto orbit = backward_orbit(phi, cert, 10.0, 5);
  ASSERT_EQ(orbit.size(), 5u);
  double prev = 10.0;
  int short_steps = 0;
  double prod = 1.0;
  for (double t : orbit) {
    EXPECT_LT(t, prev);
    EXPECT_FALSE(t > cert.c1 && t < cert.d1);
    if (prev - t < cert.eta) ++short_steps;
    EXPECT_NEAR(phi.boundary_value(t).real(), prev, 1e-9 * std::max(1.0, std::abs(prev)));
    prod *= phi.derivative(t);
    prev = t;
  }
  EXPECT_LE(short_steps, 1);
  EXPECT_LE(prod, cert.product_bound);
}

TEST(Orbit, LongProductStaysBelowBound) {
  const auto phi = zloglin(5.0);
  const auto cert = similarity_certificate(phi);
  double prod = 1.0;
  for (double t : backward_orbit(phi, cert, 0.0, 200)) prod *= phi.derivative(t);
  EXPECT_LE(prod, cert.product_bound);
}

TEST(Orbit, NeedsCertificate) {
  const auto phi = phi_from_catalog("sqrt", {});
  EXPECT_THROW(backward_orbit(phi, similarity_certificate(phi), 0.0, 3), PreconditionError);
}

TEST(IteratedLowerBound, CertifiedMapStaysAboveFloor) {
  const auto phi = zloglin(5.0);
  const auto r = similarity_lower_bound(phi, 4, default_grid(phi));
  ASSERT_EQ(r.max_depth, 4);
  EXPECT_GE(r.value, 1e-3);
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "cvqkd/errors.hpp"
#include "cvqkd/keyrate.hpp"

using namespace cvqkd;

namespace {

SourceParams coherent(double va) { return SourceParams::coherent(va); }
ChannelParams channel(double eta, double vn) { return ChannelParams::make(eta, vn); }

}  // namespace

TEST_CASE("source and channel validation") {
  CHECK_THROWS_AS(SourceParams::from_va({0.5, 0.5}, kVacuum), DomainError);
  CHECK_THROWS_AS(SourceParams::from_va({100, 100}, {0.5, 1.0}), UnphysicalNoiseError);
  CHECK_NOTHROW(SourceParams::from_va({100, 100}, {0.1, 10.0}));
  CHECK(coherent(100).va() == QuadPair(100, 100));
  CHECK(coherent(100).vs == QuadPair(99, 99));
  CHECK_THROWS_AS(channel(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(channel(0.5, 0.9), UnphysicalNoiseError);
}

TEST_CASE("bob_variance examples") {
  CHECK(bob_variance(coherent(1), channel(1, 1)) == QuadPair(1, 1));
  CHECK(bob_variance(coherent(100), channel(0.5, 1)).plus == doctest::Approx(25.75).epsilon(1e-15));
  for (double vn : {1.0, 1.7, 30.0}) CHECK(bob_variance(coherent(100), channel(1, vn)).minus == 50.5);
}

TEST_CASE("conditional_variance examples and errors") {
  auto r = conditional_variance(5.0, 2.0, 0.0);
  CHECK(r.value == 5.0);
  CHECK(r.gain.gain == 0.0);
  CHECK(conditional_variance(3.0, 3.0, 3.0).value == doctest::Approx(0.0));
  CHECK(conditional_variance(3.0, 3.0, 3.0).gain.gain == doctest::Approx(1.0));
  CHECK_THROWS_AS(conditional_variance(1.0, 1.0, 1.5), InconsistentMomentsError);
  CHECK_THROWS_AS(conditional_variance(1.0, 0.0, 0.0), DomainError);

  // Conditioning on the modulation S: cov = √(η/2) V_S with estimator V_S gives the alice_conditional_variance closed form.
  const double vs = 99.0;
  const auto on_signal = conditional_variance(25.75, vs, std::sqrt(0.25) * vs);
  CHECK(on_signal.value == doctest::Approx(1.0).epsilon(1e-14));
  // Using V_A as the estimator variance instead leaves 1.2475.
  CHECK(conditional_variance(25.75, 100.0, std::sqrt(0.25) * vs).value == doctest::Approx(1.2475));
}

TEST_CASE("optimal gain leaves a residual uncorrelated with the estimator") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.1, 10.0), rho(-0.99, 0.99);
  for (int i = 0; i < 500; ++i) {
    const double vt = u(gen), ve = u(gen);
    const double c = rho(gen) * std::sqrt(vt * ve);
    const auto r = conditional_variance(vt, ve, c);
    // cov(t - g e, e) = c - g ve
    CHECK(c - r.gain.gain * ve == doctest::Approx(0.0).scale(1.0));
    // Residual variance is the minimum of vt - 2 g c + g² ve over g.
    for (double dg : {-0.1, 0.1}) {
      const double g = r.gain.gain + dg;
      CHECK(vt - 2 * g * c + g * g * ve >= r.value - 1e-12);
    }
  }
}

TEST_CASE("alice_conditional_variance examples") {
  CHECK(alice_conditional_variance(coherent(100), channel(0.5, 1)).plus == doctest::Approx(1.0));
  for (double vn : {1.0, 2.0, 9.0}) CHECK(alice_conditional_variance(coherent(100), channel(1, vn)).plus == 1.0);
  CHECK(alice_conditional_variance(coherent(100), channel(1e-12, 1)).minus == doctest::Approx(1.0));
}

TEST_CASE("eve_min_conditional_variance examples") {
  CHECK(eve_min_conditional_variance(coherent(100), channel(0.5, 1)).plus ==
        doctest::Approx(0.5 * (1.0 / 0.505 + 1.0)).epsilon(1e-15));
  CHECK(eve_min_conditional_variance(coherent(100), channel(0.5, 1)).plus == doctest::Approx(1.4900990).epsilon(1e-7));
  CHECK(eve_min_conditional_variance(coherent(100), channel(1, 1)).plus == doctest::Approx(50.5));
  CHECK(eve_min_conditional_variance(coherent(100), channel(1e-9, 1)).plus == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("eve bound pairs conjugate quadratures for asymmetric noise") {
  const ChannelParams ch = ChannelParams::make(0.3, {4.0, 0.5});
  const SourceParams src = SourceParams::from_va({100.0, 50.0}, kVacuum);
  const QuadPair veb = eve_min_conditional_variance(src, ch);
  CHECK(veb.plus == doctest::Approx(0.5 * (1.0 / (0.3 / 50.0 + 0.7 * 0.5) + 1.0)));
  CHECK(veb.minus == doctest::Approx(0.5 * (1.0 / (0.3 / 100.0 + 0.7 * 4.0) + 1.0)));
}

TEST_CASE("heterodyne key rate examples") {
  const auto r = secret_key_rate_heterodyne(coherent(100), channel(0.5, 1));
  CHECK(r.delta_i == doctest::Approx(std::log2(0.5 * (1.0 / 0.505 + 1.0))).epsilon(1e-14));
  CHECK(r.delta_i == doctest::Approx(0.5754).epsilon(1e-4));
  CHECK(r.delta_i == doctest::Approx((r.i_ba.plus - r.i_be.plus) + (r.i_ba.minus - r.i_be.minus)));
  CHECK(r.i_ba.plus >= 0.0);
  CHECK(secret_key_rate_heterodyne(coherent(100), channel(1, 1)).delta_i == doctest::Approx(std::log2(50.5)));
  CHECK(secret_key_rate_heterodyne(coherent(100), channel(1, 1)).delta_i == doctest::Approx(5.6582).epsilon(1e-4));
  const double low = secret_key_rate_heterodyne(coherent(100), channel(0.01, 1)).delta_i;
  CHECK(low > 0.0);
  CHECK(low == doctest::Approx(std::log2((1.0 / (0.01 / 100 + 0.99) + 1.0) / 2.0)));
  CHECK(low == doctest::Approx(0.0072).epsilon(0.01));
}

TEST_CASE("homodyne key rate examples") {
  const auto r = secret_key_rate_homodyne(coherent(100), channel(0.5, 1));
  CHECK(r.protocol == Protocol::homodyne);
  CHECK(r.delta_i == doctest::Approx(0.5 * std::log2(1.0 / 0.505)));
  CHECK(r.delta_i == doctest::Approx(0.4927).epsilon(1e-4));
  CHECK(secret_key_rate_homodyne(coherent(100), channel(1, 1)).delta_i == doctest::Approx(0.5 * std::log2(100.0)));
  CHECK(secret_key_rate_heterodyne(coherent(100), channel(0.5, 1)).delta_i > r.delta_i);
}

TEST_CASE("general rate route equals the symmetric closed form") {
  for (double eta = 0.01; eta <= 1.0; eta += 0.0331)
    for (double vn = 1.0; vn <= 3.0; vn += 0.137)
      for (double va : {2.0, 100.0, 1e4}) {
        const double a = secret_key_rate_heterodyne(coherent(va), channel(eta, vn)).delta_i;
        const double b = symmetric_key_rate_bound(eta, vn, va);
        CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)));
      }
}

TEST_CASE("Heisenberg product on random draws") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20000; ++i) {
    const double eta = std::max(1e-9, u(gen));
    const double vnp = std::exp(std::log(0.2) + u(gen) * std::log(25.0));
    const double vnm = std::exp(std::log(1.0 / vnp) + 2.0 * u(gen));
    const double sq = 0.1 + 0.9 * u(gen);
    QuadPair vsqz{sq, 1.0 / sq * std::exp(u(gen))};
    if (u(gen) < 0.5) vsqz = vsqz.swapped();
    const QuadPair va{std::exp(std::log(10.0) + u(gen) * std::log(1000.0)),
                      std::exp(std::log(10.0) + u(gen) * std::log(1000.0))};
    const SourceParams src = SourceParams::from_va({std::max(va.plus, vsqz.plus), std::max(va.minus, vsqz.minus)}, vsqz);
    const ChannelParams ch = ChannelParams::make(eta, {vnp, vnm});
    const QuadPair veb = eve_min_conditional_variance(src, ch);
    const QuadPair vab = alice_conditional_variance(src, ch);
    CHECK(veb.plus * vab.minus >= 1.0 - 1e-12);
    CHECK(veb.minus * vab.plus >= 1.0 - 1e-12);
  }
}

TEST_CASE("paired rates have the same sign and heterodyne wins whenever a key exists") {
  for (double vn : {1.0, 1.2, 1.5, 2.0, 4.0})
    for (double va : {1.0, 10.0, 100.0, 1e4})
      for (int i = 1; i <= 400; ++i) {
        const double eta = i / 400.0;
        const double het = secret_key_rate_heterodyne(coherent(va), channel(eta, vn)).delta_i;
        const double hom = secret_key_rate_homodyne(coherent(va), channel(eta, vn)).delta_i;
        CHECK((het > 0) == (hom > 0));
        if (het >= 0.0) CHECK(het >= hom - 1e-15);
      }
}

TEST_CASE("below zero the heterodyne rate is the more negative one") {
  // ΔI_het - ΔI_hom = log2(g(a)/g(b)), g(t) = √t + 1/√t; negative once a < b.
  const double het = secret_key_rate_heterodyne(coherent(100), channel(0.1, 2)).delta_i;
  const double hom = secret_key_rate_homodyne(coherent(100), channel(0.1, 2)).delta_i;
  CHECK(het < 0.0);
  CHECK(hom < 0.0);
  CHECK(het < hom);
}

TEST_CASE("monotonicity of the symmetric bound") {
  for (double eta : {0.05, 0.3, 0.7, 0.95})
    for (double va : {10.0, 100.0}) {
      double prev = INFINITY;
      for (double vn = 1.0; vn <= 4.0; vn += 0.05) {
        const double r = symmetric_key_rate_bound(eta, vn, va);
        CHECK(r <= prev + 1e-15);
        prev = r;
      }
    }
  for (double va : {2.0, 100.0, 1e5}) {
    double prev = -INFINITY;
    for (int i = 1; i <= 200; ++i) {
      const double r = symmetric_key_rate_bound(i / 200.0, 1.0, va);
      CHECK(r >= prev - 1e-15);
      prev = r;
    }
  }
}

TEST_CASE("shannon and absolute rates") {
  CHECK(shannon_rate(0.0, 1.0) == 0.0);
  CHECK(shannon_rate(2.0, 2.0) == doctest::Approx(0.5));
  CHECK(shannon_rate(3.0, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(shannon_rate(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(shannon_rate(1.0, -1.0), DomainError);

  RateReport r;
  r.delta_i = 0.5754;
  CHECK(absolute_rate(r, 1e6) == doctest::Approx(5.754e5));
  CHECK(absolute_rate(r, 2e6) == doctest::Approx(2 * absolute_rate(r, 1e6)));
  r.delta_i = 0.0;
  CHECK(absolute_rate(r, 1e9) == 0.0);
  CHECK_THROWS_AS(absolute_rate(r, 0.0), DomainError);
  const RateReport w = with_bandwidth(secret_key_rate_heterodyne(coherent(100), channel(0.5, 1)), 1e6);
  REQUIRE(w.delta_i_abs.has_value());
  CHECK(*w.delta_i_abs == doctest::Approx(1e6 * w.delta_i));
  CHECK(*w.bandwidth == 1e6);
}

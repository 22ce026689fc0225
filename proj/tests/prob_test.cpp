#include <doctest.h>

#include <cmath>
#include <vector>

#include "entreg/prob.hpp"
#include "entreg/rng.hpp"
#include "support/oracles.hpp"

using namespace entreg;
using testsupport::random_prob;

namespace {
const double kLn2 = std::log(2.0);
}

TEST_CASE("ProbVector validation") {
  CHECK_THROWS_AS(ProbVector({1.0}), InvalidDistribution);
  CHECK_THROWS_AS(ProbVector({0.6, 0.6}), InvalidDistribution);
  CHECK_THROWS_AS(ProbVector({1.2, -0.2}), InvalidDistribution);
  CHECK_NOTHROW(ProbVector({0.5, 0.5}));
  CHECK_NOTHROW(ProbVector({1.0, 0.0}));

  CHECK(ProbVector::uniform(4).size() == 4);
  CHECK(ProbVector::one_hot(3, 2)[2] == 1.0);
  CHECK_THROWS_AS(ProbVector::one_hot(3, 3), InvalidParameter);
}

TEST_CASE("SkewParam rejects the endpoints") {
  CHECK_THROWS_AS(SkewParam(0.0), InvalidParameter);
  CHECK_THROWS_AS(SkewParam(1.0), InvalidParameter);
  CHECK_THROWS_AS(SkewParam(-0.1), InvalidParameter);
  CHECK_NOTHROW(SkewParam(1e-9));
  CHECK_NOTHROW(SkewParam(0.5));
}

TEST_CASE("entropy known values") {
  CHECK(entropy(ProbVector::uniform(2)) == doctest::Approx(kLn2).epsilon(1e-12));
  CHECK(entropy(ProbVector::one_hot(2, 0)) == 0.0);
  // Direct evaluation: -0.9 ln 0.9 - 0.1 ln 0.1.
  const double expected = -0.9 * std::log(0.9) - 0.1 * std::log(0.1);
  CHECK(entropy(ProbVector({0.9, 0.1})) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(0.325083).epsilon(1e-6));
}

TEST_CASE("entropy stays within [0, ln n] with extremes attained") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(9);
    const double h = entropy(random_prob(rng, n, 0.0001));
    CHECK(h >= 0.0);
    CHECK(h <= std::log(static_cast<double>(n)) + 1e-12);
  }
  CHECK(entropy(ProbVector::uniform(7)) ==
        doctest::Approx(std::log(7.0)).epsilon(1e-13));
  CHECK(entropy(ProbVector::one_hot(7, 3)) == 0.0);
}

TEST_CASE("cross_entropy") {
  const ProbVector p({0.8, 0.2});
  CHECK(cross_entropy(ProbVector::one_hot(2, 0), p) ==
        doctest::Approx(-std::log(0.8)).epsilon(1e-14));
  CHECK(cross_entropy(ProbVector({0.5, 0.5}), p) ==
        doctest::Approx(-0.5 * std::log(0.8) - 0.5 * std::log(0.2)).epsilon(1e-14));
  CHECK(cross_entropy(ProbVector({0.5, 0.5}), p) ==
        doctest::Approx(0.916291).epsilon(1e-6));

  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const ProbVector q = random_prob(rng, 2 + rng.below(5));
    CHECK(cross_entropy(q, q) == doctest::Approx(entropy(q)).epsilon(1e-12));
  }

  CHECK_THROWS_AS(cross_entropy(ProbVector::one_hot(2, 1), ProbVector({1.0, 0.0})),
                  AbsoluteContinuityViolation);
  CHECK_THROWS_AS(cross_entropy(ProbVector::uniform(2), ProbVector::uniform(3)),
                  DimensionMismatch);
}

TEST_CASE("kl") {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const ProbVector p = random_prob(rng, 2 + rng.below(5));
    CHECK(kl(p, p) == 0.0);
  }
  CHECK(kl(ProbVector({1.0, 0.0}), ProbVector({0.5, 0.5})) ==
        doctest::Approx(kLn2).epsilon(1e-14));
  const double expected = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
  CHECK(kl(ProbVector({0.5, 0.5}), ProbVector({0.9, 0.1})) ==
        doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(0.510826).epsilon(1e-6));
  CHECK_THROWS_AS(kl(ProbVector({0.5, 0.5}), ProbVector({1.0, 0.0})),
                  AbsoluteContinuityViolation);
}

TEST_CASE("jsd symmetry, bounds, extremes") {
  CHECK(jsd(ProbVector({1.0, 0.0}), ProbVector({0.0, 1.0})) ==
        doctest::Approx(kLn2).epsilon(1e-14));
  Rng rng(14);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.below(9);
    const ProbVector p = random_prob(rng, n, 0.0001);
    const ProbVector q = random_prob(rng, n, 0.0001);
    const double d_pq = jsd(p, q);
    const double d_qp = jsd(q, p);
    CHECK(d_pq >= 0.0);
    CHECK(d_pq <= kLn2 + 1e-12);
    CHECK(d_pq == doctest::Approx(d_qp).epsilon(1e-12));
    CHECK(jsd(p, p) == 0.0);
  }
}

TEST_CASE("mixture") {
  const SkewParam half(0.5);
  const ProbVector p({0.9, 0.1});
  const ProbVector q({0.5, 0.5});
  const ProbVector m = mixture(p, q, SkewParam(0.1));
  CHECK(m[0] == doctest::Approx(0.86).epsilon(1e-15));
  CHECK(m[1] == doctest::Approx(0.14).epsilon(1e-15));

  const ProbVector mid = mixture(ProbVector({1.0, 0.0}), ProbVector({0.0, 1.0}), half);
  CHECK(mid[0] == 0.5);
  CHECK(mid[1] == 0.5);

  Rng rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    const ProbVector r = random_prob(rng, 3);
    const ProbVector same = mixture(r, r, SkewParam(rng.uniform(0.01, 0.99)));
    for (std::size_t i = 0; i < r.size(); ++i) {
      CHECK(same[i] == doctest::Approx(r[i]).epsilon(1e-15));
    }
  }
}

TEST_CASE("alpha_js agrees with the entropy closed form") {
  Rng rng(16);
  const double grid[] = {0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99};
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(9);
    const ProbVector p = random_prob(rng, n);
    const ProbVector q = random_prob(rng, n);
    const SkewParam a(grid[trial % 7]);
    const double via_kl = alpha_js(p, q, a);
    const double via_entropy = alpha_js_entropy_form(p, q, a);
    CHECK(std::abs(via_kl - via_entropy) <= 1e-12);
    CHECK(via_kl >= 0.0);
  }
}

TEST_CASE("alpha_js is zero exactly at p = q") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const ProbVector p = random_prob(rng, 2 + rng.below(5));
    const SkewParam a(rng.uniform(0.01, 0.99));
    CHECK(std::abs(alpha_js(p, p, a)) <= 1e-12);
    CHECK(std::abs(alpha_js_entropy_form(p, p, a)) <= 1e-12);
  }
}

TEST_CASE("alpha_js at one half is four times jsd") {
  Rng rng(18);
  const SkewParam half(0.5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.below(9);
    const ProbVector p = random_prob(rng, n);
    const ProbVector q = random_prob(rng, n);
    CHECK(std::abs(alpha_js(p, q, half) - 4.0 * jsd(p, q)) <= 1e-10);
  }
}

TEST_CASE("the two closed forms cross-check on the worked example") {
  const ProbVector p({0.9, 0.1});
  const ProbVector q({0.5, 0.5});
  const SkewParam a(0.1);
  CHECK(std::abs(alpha_js(p, q, a) - alpha_js_entropy_form(p, q, a)) <= 1e-12);
}

TEST_CASE("limits: small alpha recovers the max-entropy gap, large alpha KL(u||p)") {
  Rng rng(19);
  for (std::size_t n : {2, 3, 5, 10}) {
    const ProbVector u = ProbVector::uniform(n);
    for (int trial = 0; trial < 100; ++trial) {
      const ProbVector p = random_prob(rng, n);
      const double log_n = std::log(static_cast<double>(n));

      const double near_zero = alpha_js_entropy_form(u, p, SkewParam(1e-6));
      CHECK(std::abs(near_zero - (log_n - entropy(p))) < 1e-4);

      const double near_one = alpha_js_entropy_form(u, p, SkewParam(1.0 - 1e-6));
      CHECK(std::abs(near_one - kl(u, p)) < 1e-4);
    }
  }
}

TEST_CASE("non-negativity across divergences") {
  Rng rng(20);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 2 + rng.below(9);
    const ProbVector p = random_prob(rng, n, 0.0001);
    const ProbVector q = random_prob(rng, n, 0.0001);
    CHECK(entropy(p) >= 0.0);
    CHECK(kl(p, q) >= 0.0);
    CHECK(jsd(p, q) >= 0.0);
    CHECK(alpha_js(p, q, SkewParam(rng.uniform(0.01, 0.99))) >= 0.0);
  }
}

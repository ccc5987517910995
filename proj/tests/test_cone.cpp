#include <catch2/catch_amalgamated.hpp>

#include "pricegrad/cone.hpp"
#include "pricegrad/rng.hpp"
#include "pricegrad/vec.hpp"

using namespace pricegrad;

TEST_CASE("orthant membership", "[cone]") {
  OrthantCone c2(2);
  CHECK(cone_contains(c2, {0.0, 0.0}, 0.0));
  CHECK_FALSE(cone_contains(c2, {1.0, -1e-3}, 0.0));
  CHECK(cone_contains(OrthantCone(3), {1.0, 2.0, 3.0}, 0.0));
  CHECK(cone_contains(c2, {-1e-10, 0.5}, 1e-9));
  CHECK_THROWS_AS(cone_contains(c2, {1.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(OrthantCone(0), std::invalid_argument);
}

TEST_CASE("normal cone descriptor and membership", "[cone]") {
  OrthantCone c2(2);

  SECTION("one active coordinate") {
    NormalConeDescriptor d = normal_cone_at(c2, {1.0, 0.0}, 1e-12);
    REQUIRE_FALSE(d.is_active(0));
    REQUIRE(d.is_active(1));
    CHECK(normal_cone_contains(d, {0.0, -5.0}, 0.0));
    CHECK_FALSE(normal_cone_contains(d, {1.0, 0.0}, 0.0));
    CHECK_FALSE(normal_cone_contains(d, {0.0, 1.0}, 0.0));
    CHECK_FALSE(normal_cone_contains(d, {-0.1, 0.0}, 0.0));
  }

  SECTION("interior point has trivial normal cone") {
    NormalConeDescriptor d = normal_cone_at(c2, {0.5, 0.5}, 1e-12);
    CHECK(d.active_indices().empty());
    CHECK(normal_cone_contains(d, {0.0, 0.0}, 0.0));
    CHECK_FALSE(normal_cone_contains(d, {0.0, -1e-6}, 0.0));
  }

  SECTION("origin in 1-D gives the negative half-line") {
    NormalConeDescriptor d = normal_cone_at(OrthantCone(1), {0.0}, 1e-12);
    CHECK(normal_cone_contains(d, {-123.0}, 0.0));
    CHECK_FALSE(normal_cone_contains(d, {1e-6}, 0.0));
  }

  SECTION("origin in 2-D gives the full negative orthant") {
    NormalConeDescriptor d = normal_cone_at(c2, {0.0, 0.0}, 1e-12);
    CHECK(normal_cone_contains(d, {-1.0, -1.0}, 0.0));
  }

  SECTION("point outside the cone is rejected") {
    CHECK_THROWS_AS(normal_cone_at(c2, {-0.5, 1.0}, 1e-9), std::invalid_argument);
  }
}

TEST_CASE("normal cone membership properties", "[cone][property]") {
  Rng rng(7);
  for (int iter = 0; iter < 1000; ++iter) {
    std::size_t n = 1 + (rng.raw() % 4);
    OrthantCone c(n);

    // random cone point with a random active set
    Bundle x = rng.uniform_vec(n, 0.0, 2.0);
    for (std::size_t i = 0; i < n; ++i)
      if (rng.uniform01() < 0.4) x[i] = 0.0;
    NormalConeDescriptor d = normal_cone_at(c, x);

    // draw z from the normal cone by construction
    Vec z(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      if (d.is_active(i)) z[i] = -rng.uniform(0.0, 3.0);
    REQUIRE(normal_cone_contains(d, z, 0.0));

    // zero covector and positive scaling stay inside
    REQUIRE(normal_cone_contains(d, zeros(n), 0.0));
    REQUIRE(normal_cone_contains(d, scaled(rng.uniform(0.0, 10.0), z), 1e-15));

    // polarity: <z, y - x> <= 0 for cone points y, and <z, x> = 0
    for (int k = 0; k < 5; ++k) {
      Vec y = rng.uniform_vec(n, 0.0, 2.0);
      double ip = dot(z, sub(y, x));
      REQUIRE(ip <= 1e-12 * (1.0 + norm2(z) * norm2(sub(y, x))));
    }
    REQUIRE(std::abs(dot(z, x)) <= 1e-12);

    // perturbing z off the cone is detected
    if (n > 0) {
      Vec bad = z;
      std::size_t i = rng.raw() % n;
      bad[i] += d.is_active(i) ? 1e-3 - z[i] : 1e-3;
      REQUIRE_FALSE(normal_cone_contains(d, bad, 1e-6));
    }
  }
}

TEST_CASE("violation measures distance from the membership conditions", "[cone]") {
  NormalConeDescriptor d = normal_cone_at(OrthantCone(2), {1.0, 0.0});
  CHECK(normal_cone_violation(d, {0.0, -1.0}) == 0.0);
  CHECK(normal_cone_violation(d, {0.25, -1.0}) == Catch::Approx(0.25));
  CHECK(normal_cone_violation(d, {-0.5, 2.0}) == Catch::Approx(2.0));
}

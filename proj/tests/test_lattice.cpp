#include <doctest.h>

#include <cmath>
#include <random>

#include "anderson/lattice.hpp"

using namespace anderson;

namespace {

Field<double> random_field(int dimension, int half_width, int radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  Field<double> f(dimension, half_width);
  f.for_each_site(radius, [&](int i, int j) {
    f.set(dimension == 2 ? SiteIndex(i, j) : SiteIndex(j), uniform(rng));
  });
  return f;
}

}  // namespace

TEST_SUITE("lattice") {

TEST_CASE("site index basics") {
  const SiteIndex a(3, -1);
  CHECK(a.dimension() == 2);
  CHECK(a.l1_norm() == 4);
  CHECK(a.row() == 3);
  CHECK(a.col() == -1);
  CHECK(a.to_string() == "(3,-1)");
  const SiteIndex b(-5);
  CHECK(b.dimension() == 1);
  CHECK(b.l1_norm() == 5);
  CHECK(b.row() == 0);
  CHECK(b.col() == -5);
  CHECK(SiteIndex::origin(2) == SiteIndex(0, 0));
  CHECK_FALSE(SiteIndex(0) == SiteIndex(0, 0));
}

TEST_CASE("potential golden value") {
  const DisorderSpec spec{2, 0.5, 42, PotentialMode::FixedRealization};
  CHECK(potential_at(spec, SiteIndex(3, -1), 0) == -0.30635020489228088);
  CHECK(potential_at(spec, SiteIndex(3, -1), 7) == -0.30635020489228088);
}

TEST_CASE("potential is a pure function of seed, site and step") {
  const DisorderSpec fixed{2, 1.0, 9, PotentialMode::FixedRealization};
  const DisorderSpec fresh{2, 1.0, 9, PotentialMode::FreshPerStep};
  const SiteIndex x(-4, 2);
  CHECK(potential_at(fixed, x, 0) == potential_at(fixed, x, 0));
  CHECK(potential_at(fixed, x, 0) == potential_at(fixed, x, 123));
  CHECK(potential_at(fresh, x, 0) == potential_at(fixed, x, 0));
  CHECK(potential_at(fresh, x, 1) != potential_at(fresh, x, 0));
  const DisorderSpec other_seed{2, 1.0, 10, PotentialMode::FixedRealization};
  CHECK(potential_at(other_seed, x, 0) != potential_at(fixed, x, 0));
  CHECK(potential_at(fixed, SiteIndex(2, -4), 0) != potential_at(fixed, x, 0));
}

TEST_CASE("potential vanishes identically at zero disorder") {
  const DisorderSpec spec{2, 0.0, 5, PotentialMode::FreshPerStep};
  for (int i = -20; i <= 20; ++i)
    for (int j = -20; j <= 20; ++j) CHECK(potential_at(spec, SiteIndex(i, j), 3) == 0.0);
}

TEST_CASE("potential range and moments") {
  const double c = 0.7;
  const DisorderSpec spec{2, c, 2024, PotentialMode::FixedRealization};
  const PotentialSampler sampler(spec, 0);
  double sum = 0.0;
  double sum_sq = 0.0;
  double low = c;
  double high = -c;
  const int half = 500;  // (2*500+1)^2 > 1e6 samples
  for (int i = -half; i <= half; ++i) {
    const std::uint64_t key = sampler.row_key(i);
    for (int j = -half; j <= half; ++j) {
      const double v = sampler.value(key, j);
      sum += v;
      sum_sq += v * v;
      low = std::min(low, v);
      high = std::max(high, v);
    }
  }
  const double count = std::pow(2.0 * half + 1.0, 2);
  REQUIRE(count >= 1e6);
  const double mean = sum / count;
  const double variance = sum_sq / count - mean * mean;
  const double sigma_of_mean = c / std::sqrt(3.0) / std::sqrt(count);
  CHECK(std::abs(mean) <= 3.0 * sigma_of_mean);
  CHECK(std::abs(variance - c * c / 3.0) <= 0.05 * c * c / 3.0);
  CHECK(low >= -c);
  CHECK(high <= c);
  CHECK(low < -0.99 * c);
  CHECK(high > 0.99 * c);
}

TEST_CASE("disorder spec validation") {
  CHECK_THROWS_AS((DisorderSpec{3, 0.1, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((DisorderSpec{2, -0.1, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((DisorderSpec{2, std::nan(""), 1}.validate()), std::invalid_argument);
  CHECK_NOTHROW((DisorderSpec{1, 0.0, 1}.validate()));
}

TEST_CASE("field window and accessors") {
  Field<double> f(2, 3);
  CHECK(f.half_width() == 3);
  CHECK(f.support_radius() == 0);
  f.set(SiteIndex(1, -2), 2.5);
  CHECK(f(SiteIndex(1, -2)) == 2.5);
  CHECK(f(SiteIndex(10, 10)) == 0.0);
  CHECK(f.radius_bound() == 3);
  CHECK(f.support_radius() == 3);
  CHECK_THROWS_AS(f.set(SiteIndex(2, 2), 1.0), WindowOverflow);
  CHECK_THROWS_AS(f.set(SiteIndex(1), 1.0), ShapeMismatch);
  CHECK_THROWS_AS(f.set(SiteIndex(0, 0), std::nan("")), std::invalid_argument);
  CHECK(f.window().rows() == 7);
  CHECK(f.window().cols() == 7);
  CHECK(f.window()(1 + 3, -2 + 3) == 2.5);
  CHECK(f.window().sum() == 2.5);
  f.set_zero();
  CHECK(f.squared_norm() == 0.0);
  CHECK(f.radius_bound() == 0);
}

TEST_CASE("delta field") {
  const Field<double> d = delta_field<double>(SiteIndex(1, 1), 4);
  CHECK(d.norm() == 1.0);
  CHECK(d(SiteIndex(1, 1)) == 1.0);
  CHECK(d.support_radius() == 2);
  CHECK_THROWS_AS(delta_field<double>(SiteIndex(3, 2), 4), WindowOverflow);
  CHECK_THROWS_AS(delta_field<double>(SiteIndex(-5), 4), WindowOverflow);
}

TEST_CASE("field arithmetic") {
  Field<double> f(1, 4);
  Field<double> g(1, 4);
  f.set(SiteIndex(1), 1.0);
  g.set(SiteIndex(-2), 2.0);
  const Field<double> h = f + 3.0 * g;
  CHECK(h(SiteIndex(1)) == 1.0);
  CHECK(h(SiteIndex(-2)) == 6.0);
  CHECK((h - f)(SiteIndex(1)) == 0.0);
  CHECK(h.support_radius() == 2);
  CHECK_THROWS_AS(f += Field<double>(1, 5), ShapeMismatch);
  CHECK_THROWS_AS(f += Field<double>(2, 4), ShapeMismatch);
}

TEST_CASE("inner product against a brute force oracle") {
  std::mt19937_64 rng(7);
  const Field<double> f = random_field(2, 2, 2, rng);
  const Field<double> g = random_field(2, 2, 1, rng);
  double expected = 0.0;
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j) expected += f(SiteIndex(i, j)) * g(SiteIndex(i, j));
  CHECK(inner_product(f, g) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(inner_product(f, f) == doctest::Approx(f.squared_norm()).epsilon(1e-15));
  CHECK_THROWS_AS(inner_product(f, Field<double>(2, 3)), ShapeMismatch);
}

TEST_CASE("operator stencil examples") {
  const DisorderSpec free2{2, 0.0, 0};
  const Field<double> h = apply_hamiltonian(delta_field<double>(SiteIndex(0, 0), 3), free2, 0);
  CHECK(h(SiteIndex(0, 0)) == 4.0);
  CHECK(h(SiteIndex(1, 0)) == -1.0);
  CHECK(h(SiteIndex(-1, 0)) == -1.0);
  CHECK(h(SiteIndex(0, 1)) == -1.0);
  CHECK(h(SiteIndex(0, -1)) == -1.0);
  CHECK(h(SiteIndex(1, 1)) == 0.0);
  CHECK(h.squared_norm() == 20.0);

  const DisorderSpec free1{1, 0.0, 0};
  const Field<double> h1 = apply_hamiltonian(delta_field<double>(SiteIndex(2), 3), free1, 0);
  CHECK(h1(SiteIndex(2)) == 2.0);
  CHECK(h1(SiteIndex(1)) == -1.0);
  CHECK(h1(SiteIndex(3)) == -1.0);

  const DisorderSpec disordered{2, 0.5, 42};
  const Field<double> hd =
      apply_hamiltonian(delta_field<double>(SiteIndex(3, -1), 5), disordered, 0);
  CHECK(hd(SiteIndex(3, -1)) == 4.0 + potential_at(disordered, SiteIndex(3, -1), 0));
  CHECK(hd(SiteIndex(2, -1)) == -1.0);

  const Field<double> shifted =
      apply_hamiltonian(delta_field<double>(SiteIndex(0, 0), 3), free2, 0, -4.0);
  CHECK(shifted(SiteIndex(0, 0)) == 0.0);
}

TEST_CASE("operator self-adjointness on random fields") {
  std::mt19937_64 rng(11);
  for (const int dimension : {1, 2}) {
    for (const double c : {0.0, 0.3, 2.0}) {
      const DisorderSpec spec{dimension, c, 77};
      for (int trial = 0; trial < 5; ++trial) {
        const Field<double> f = random_field(dimension, 10, 9, rng);
        const Field<double> g = random_field(dimension, 10, 9, rng);
        const double lhs = inner_product(apply_hamiltonian(f, spec, 0), g);
        const double rhs = inner_product(f, apply_hamiltonian(g, spec, 0));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, f.norm() * g.norm()));
      }
    }
  }
}

TEST_CASE("operator linearity") {
  std::mt19937_64 rng(12);
  const DisorderSpec spec{2, 1.0, 3};
  const Field<double> f = random_field(2, 8, 6, rng);
  const Field<double> g = random_field(2, 8, 6, rng);
  const Field<double> lhs = apply_hamiltonian(2.0 * f + g, spec, 0);
  const Field<double> rhs = 2.0 * apply_hamiltonian(f, spec, 0) + apply_hamiltonian(g, spec, 0);
  CHECK((lhs - rhs).norm() <= 1e-13 * lhs.norm());
}

TEST_CASE("operator support grows by exactly one") {
  std::mt19937_64 rng(13);
  for (const int dimension : {1, 2}) {
    const DisorderSpec spec{dimension, 0.5, 4};
    for (int radius = 0; radius < 6; ++radius) {
      const Field<double> f = random_field(dimension, 8, radius, rng);
      const Field<double> h = apply_hamiltonian(f, spec, 0);
      CHECK(h.support_radius() == f.support_radius() + 1);
    }
  }
}

TEST_CASE("operator refuses to leave the window") {
  const DisorderSpec spec{2, 0.0, 0};
  CHECK_THROWS_AS(apply_hamiltonian(delta_field<double>(SiteIndex(2, 1), 3), spec, 0),
                  WindowOverflow);
  CHECK_NOTHROW(apply_hamiltonian(delta_field<double>(SiteIndex(1, 1), 3), spec, 0));
  CHECK_THROWS_AS(apply_hamiltonian(delta_field<double>(SiteIndex(1), 3), spec, 0),
                  ShapeMismatch);
}

}  // TEST_SUITE

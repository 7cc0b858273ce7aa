#include "auction/feasibility.hpp"

#include "auction/errors.hpp"
#include "test_support.hpp"

using namespace auction;
using testing::half_mass;
using testing::half_mass_q;
using testing::two_by_two;

TEST_CASE("g_k dynamic program on the two-agent example") {
  auto u = two_by_two();
  TypeMask highs = 0b0101;  // H1, H2

  CHECK(g_k_dp<double>(u, half_mass(), 1, highs) == doctest::Approx(0.75));
  CHECK(g_k_dp<Rational>(u, half_mass_q(), 1, highs) == Rational(3, 4));
  CHECK(g_k_dp<double>(u, half_mass(), 1, 0) == 0.0);
  // With two units the cap never binds on two highs: E[#highs] = 1.
  CHECK(g_k_dp<double>(u, half_mass(), 2, highs) == doctest::Approx(1.0));
  // Everyone always has a type: g_1(T_N) = 1.
  CHECK(g_k_dp<double>(u, half_mass(), 1, 0b1111) == doctest::Approx(1.0));
  CHECK_THROWS_AS(g_k_dp<double>(u, half_mass(), 0, highs), StructuralError);
}

TEST_CASE("dp matches enumeration on random instances") {
  Rng rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    auto u = testing::random_universe(rng, 3, 3);
    auto fq = testing::random_mass_q(rng, u);
    int k = 1 + static_cast<int>(rng() % 3);
    TypeMask S = static_cast<TypeMask>(rng()) & u.full_mask();
    CHECK(g_k_dp<Rational>(u, fq, k, S) == g_bruteforce<Rational>(u, fq, k, S));
    double dd = g_k_dp<double>(u, testing::to_doubles(fq), k, S);
    double de = g_bruteforce<double>(u, testing::to_doubles(fq), k, S);
    CHECK(std::abs(dd - de) <= 1e-12);
  }
}

TEST_CASE("uniform matroid expectation reproduces g_k") {
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    auto u = testing::random_universe(rng, 3, 3);
    auto fq = testing::random_mass_q(rng, u);
    int k = 1 + static_cast<int>(rng() % 2);
    auto m = uniform_matroid(k, u.type_count());
    auto g_m = make_matroid_oracle<Rational>(u, fq, m);
    auto g_k = make_k_unit_oracle<Rational>(u, fq, k);
    TypeMask S = static_cast<TypeMask>(rng()) & u.full_mask();
    CHECK(g_m(S) == g_k(S));
  }
}

TEST_CASE("oracle axioms: zero, monotone, submodular") {
  Rng rng(77);
  int checked = 0;
  while (checked < 1000) {
    auto u = testing::random_universe(rng, 3, 3);
    auto f = testing::to_doubles(testing::random_mass_q(rng, u));
    ExpectedRankOracle<double> g;
    if (rng() % 2) {
      g = make_k_unit_oracle<double>(u, f, 1 + static_cast<int>(rng() % 3));
    } else {
      std::vector<TypeMask> blocks;
      std::vector<int> caps;
      for (int a = 1; a <= u.agent_count(); ++a) {
        blocks.push_back(u.agent_mask(a));
        caps.push_back(1 + static_cast<int>(rng() % 2));
      }
      g = make_matroid_oracle<double>(u, f,
                                      partition_matroid(blocks, caps, u.type_count()));
    }
    CHECK(g(0) == 0.0);
    for (int rep = 0; rep < 25; ++rep, ++checked) {
      TypeMask S = static_cast<TypeMask>(rng()) & u.full_mask();
      TypeMask Sp = S | (static_cast<TypeMask>(rng()) & u.full_mask());
      int free_count = popcount(u.full_mask() & ~Sp);
      if (free_count == 0) continue;
      int pick = static_cast<int>(rng() % free_count);
      int s = -1;
      for (int t = 0; t < u.type_count(); ++t)
        if (!(Sp & (TypeMask(1) << t)) && pick-- == 0) {
          s = t;
          break;
        }
      TypeMask bit = TypeMask(1) << s;
      CHECK(g(S | bit) - g(S) >= -1e-9);  // monotone
      CHECK(g(S | bit) - g(S) >= g(Sp | bit) - g(Sp) - 1e-9);  // diminishing returns
    }
  }
}

TEST_CASE("separation on the intro example") {
  auto u = two_by_two();
  auto g = make_k_unit_oracle<Rational>(u, half_mass_q(), 1);

  // Both agents served with probability 1 on H: infeasible by -1/4 on {H1,H2}.
  Vec<Rational> both_aggressive(4);
  both_aggressive << Rational(1, 2), Rational(0), Rational(1, 2), Rational(0);
  auto cert = separate<Rational>(both_aggressive, g);
  CHECK(cert.set == 0b0101u);
  CHECK(cert.slack == Rational(-1, 4));
  CHECK_FALSE(is_feasible<Rational>(both_aggressive, g).first);

  // One aggressive, one uniform: feasible.
  Vec<Rational> mixed(4);
  mixed << Rational(1, 2), Rational(0), Rational(1, 4), Rational(1, 4);
  CHECK(is_feasible<Rational>(mixed, g).first);
  CHECK(separate<Rational>(mixed, g).slack >= Rational(0));

  // Both uniform: feasible.
  Vec<Rational> both_uniform = Vec<Rational>::Constant(4, Rational(1, 4));
  CHECK(is_feasible<Rational>(both_uniform, g).first);

  // Zero rule: the minimum slack is zero, attained at the empty set.
  Vec<Rational> zero = Vec<Rational>::Constant(4, Rational(0));
  auto zcert = separate<Rational>(zero, g);
  CHECK(zcert.set == 0u);
  CHECK(zcert.slack == Rational(0));
}

TEST_CASE("feasibility is downward closed") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    auto u = testing::random_universe(rng, 3, 3);
    auto f = testing::to_doubles(testing::random_mass_q(rng, u));
    auto g = tabulate(make_k_unit_oracle<double>(u, f, 1));
    VecXd xbar(u.type_count());
    // Scale a random sub-distribution until feasible.
    for (int t = 0; t < xbar.size(); ++t) xbar[t] = f[t] * uniform01(rng);
    while (!is_feasible<double>(xbar, g).first) xbar *= 0.5;
    VecXd smaller = xbar;
    for (int t = 0; t < smaller.size(); ++t) smaller[t] *= uniform01(rng);
    CHECK(is_feasible<double>(smaller, g).first);
  }
}

TEST_CASE("sampled matroid oracle approximates enumeration") {
  auto u = two_by_two();
  auto f = half_mass();
  auto m = partition_matroid({0b0011, 0b1100}, {1, 1}, 4);
  auto exact = make_matroid_oracle<double>(u, f, m);
  auto approx = make_matroid_oracle_sampled(u, f, m, 0.02, 1e-4, 987);
  for (TypeMask S : {TypeMask(0b0101), TypeMask(0b1111), TypeMask(0b0010)}) {
    CHECK(std::abs(approx(S) - exact(S)) <= 0.05);
    CHECK(approx(S) == approx(S));  // deterministic per subset
  }
  CHECK(approx.flavor.find("sampled") != std::string::npos);
}

TEST_CASE("tabulated oracle matches the original") {
  auto u = two_by_two();
  auto g = make_k_unit_oracle<double>(u, half_mass(), 1);
  auto tab = tabulate(g);
  for (TypeMask S = 0; S < 16; ++S) CHECK(tab(S) == g(S));
}

TEST_CASE("enumeration guards") {
  std::vector<std::vector<std::string>> labels(23, {"x"});
  TypeUniverse wide(labels);
  VecXd ones = VecXd::Ones(23);
  auto g = ExpectedRankOracle<double>{[](TypeMask) { return 0.0; }, 23, "stub"};
  CHECK_THROWS_AS(separate<double>(VecXd::Zero(23), g), InstanceTooLargeError);
  CHECK_THROWS_AS(tabulate(g), InstanceTooLargeError);

  std::vector<std::vector<std::string>> deep(21, {"a", "b"});
  TypeUniverse big(deep);
  VecXd f = VecXd::Constant(42, 0.5);
  CHECK_THROWS_AS(g_bruteforce<double>(big, f, 1, 0b1), InstanceTooLargeError);
}

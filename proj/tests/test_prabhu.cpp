#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "reservoir/errors.hpp"
#include "reservoir/prabhu.hpp"

using namespace reservoir;

namespace {

double d(const StationaryDistribution& dist, int r, int s) {
  return static_cast<double>(dist.dmatrix()(r, s));
}

double alpha(const StationaryDistribution& dist, int r) {
  return static_cast<double>(dist.alpha().alpha[static_cast<std::size_t>(r)]);
}

}  // namespace

TEST_CASE("derived parameters of the worked examples") {
  const DerivedParams d1 = derive_params(oracle::example(1));
  CHECK(d1.n == 2);
  CHECK(d1.delta == 0.0);
  CHECK(d1.lambda == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(d1.kappa == 1);

  const DerivedParams d3 = derive_params(oracle::example(3));
  CHECK(d3.n == 2);
  CHECK(d3.delta == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(d3.lambda == doctest::Approx(2.0 * std::exp(-0.8)).epsilon(1e-15));
  CHECK(d3.kappa == 2);

  const DerivedParams d4 = derive_params(oracle::example(4));
  CHECK(d4.n == 2);
  CHECK(d4.delta == 0.0);
  CHECK(d4.lambda == doctest::Approx(-16.0 * std::exp(-2.0)).epsilon(1e-15));
  CHECK(d4.kappa == 1);

  // v/m = 3 up to rounding: kappa is n - 1 = 2
  const DerivedParams d2 = derive_params(oracle::example(2));
  CHECK(d2.n == 3);
  CHECK(d2.delta == 0.0);
  CHECK(d2.kappa == 2);
}

TEST_CASE("delta snaps to zero near integer multiples") {
  // 0.3 / 0.1 = 2.9999999999999996 in binary
  const DerivedParams a = derive_params({0.3, 1, 1.0, 0.1});
  CHECK(a.n == 3);
  CHECK(a.delta == 0.0);
  CHECK(a.kappa == 2);

  const DerivedParams b = derive_params({1.0, 1, 1.0, 0.25 * (1.0 + 1e-12)});
  CHECK(b.n == 4);
  CHECK(b.delta == 0.0);

  const DerivedParams c = derive_params({1.0, 1, 1.0, 0.3});
  CHECK(c.n == 3);
  CHECK(c.delta == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(c.kappa == 3);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(derive_params({0.0, 1, 2.0, 0.5}), DomainError);
  CHECK_THROWS_AS(derive_params({-1.0, 1, 2.0, 0.5}), DomainError);
  CHECK_THROWS_AS(derive_params({1.0, 0, 2.0, 0.5}), DomainError);
  CHECK_THROWS_AS(derive_params({1.0, 1, 0.0, 0.5}), DomainError);
  CHECK_THROWS_AS(derive_params({1.0, 1, 2.0, 0.0}), DomainError);
  CHECK_THROWS_AS(derive_params({1.0, 1, 2.0, std::nan("")}), DomainError);
  CHECK_THROWS_AS(derive_params({1.0, kMaxShape + 1, 2.0, 0.5}), DomainError);
  CHECK_THROWS_AS(derive_params({1.0, 1, 2.0, 1e-5}), DomainError);
  CHECK_THROWS_AS(derive_params({1.0, 1, 1000.0, 0.5}), DomainError);
  CHECK_NOTHROW(derive_params({1.0, kMaxShape, 2.0, 0.5}));
}

TEST_CASE("power term switches to log magnitude without a jump") {
  for (double x : {0.3, 1.0, 2.5, 7.0}) {
    for (long q : {0L, 1L, 3L}) {
      const Wide nl = -0.7L;
      // k = 31 by the log path against k = 30 by multiplication times x/31
      const Wide low = lambda_power_term(nl, q, x, 30);
      const Wide high = lambda_power_term(nl, q, x, 31);
      CHECK(static_cast<double>(high) ==
            doctest::Approx(static_cast<double>(low * x / 31)).epsilon(1e-14));
    }
  }
  CHECK(lambda_power_term(2.0L, 0, 0.0L, 0) == 1);  // 0^0 = 1
  CHECK(lambda_power_term(2.0L, 0, 0.0L, 3) == 0);
  CHECK(lambda_power_term(2.0L, 0, -1.0L, 2) == 0);
  CHECK(lambda_power_term(2.0L, 3, 1.0L, -1) == 0);
  CHECK(lambda_power_term(0.0L, 2, 3.0L, 40) == 0);
  CHECK(static_cast<double>(lambda_power_term(-2.0L, 3, 1.0L, 0)) == -8.0);
  // 100^200 / 200! overflows double factorials but not the log path
  const double big = static_cast<double>(lambda_power_term(1.0L, 0, 100.0L, 200));
  CHECK(std::isfinite(big));
  CHECK(std::log(big) == doctest::Approx(200 * std::log(100.0) - std::lgamma(201.0)).epsilon(1e-12));
}

TEST_CASE("d-matrix entries match the printed closed forms") {
  {
    const ModelParams prm = oracle::example(1);
    const DerivedParams der = derive_params(prm);
    const double lam = der.lambda;
    CHECK(static_cast<double>(d_entry(prm, der, 0, 0)) == doctest::Approx(1 - lam / 8).epsilon(1e-15));
    CHECK(1 - lam / 8 == doctest::Approx(0.90803014).epsilon(1e-8));
  }
  {
    const ModelParams prm = oracle::example(2);
    const DerivedParams der = derive_params(prm);
    const double lam = der.lambda;
    CHECK(static_cast<double>(d_entry(prm, der, 0, 0)) ==
          doctest::Approx(1 - 2 * lam / 9 + lam * lam / 162).epsilon(1e-14));
  }
  {
    const ModelParams prm = oracle::example(3);
    const DerivedParams der = derive_params(prm);
    const double lam = der.lambda;
    CHECK(static_cast<double>(d_entry(prm, der, 0, 0)) ==
          doctest::Approx(1 - 9 * lam / 50 + lam * lam / 750).epsilon(1e-14));
  }
  {
    const ModelParams prm = oracle::example(4);
    const DerivedParams der = derive_params(prm);
    const double lam = der.lambda;
    CHECK(std::abs(static_cast<double>(d_entry(prm, der, 0, 0)) - (-1 + 11 * lam / 384)) < 1e-12);
    CHECK(std::abs(static_cast<double>(d_entry(prm, der, 0, 1)) - (-7.0 / 12 + 7 * lam / 1920)) < 1e-12);
    CHECK(std::abs(static_cast<double>(d_entry(prm, der, 1, 0)) - (1 - lam / 48)) < 1e-12);
    CHECK(std::abs(static_cast<double>(d_entry(prm, der, 1, 1)) - (0.5 - lam / 384)) < 1e-12);
  }
  CHECK_THROWS_AS(d_entry(oracle::example(4), derive_params(oracle::example(4)), 2, 0), DomainError);
  CHECK_THROWS_AS(d_entry(oracle::example(4), derive_params(oracle::example(4)), 0, -1), DomainError);
}

TEST_CASE("d-matrix entries match quadrature of the defining integral") {
  oracle::ParamGenerator gen(20240611);
  for (int i = 0; i < 60; ++i) {
    const ModelParams prm = gen.next();
    const DerivedParams der = derive_params(prm);
    for (int r = 0; r < prm.p; ++r) {
      for (int s = 0; s < prm.p; ++s) {
        const oracle::QuadratureValue ref = oracle::d_entry(prm, der, r, s);
        const long double got = d_entry(prm, der, r, s);
        INFO("p=" << prm.p << " mu=" << prm.mu << " m=" << prm.m << " r=" << r << " s=" << s);
        CHECK(static_cast<double>(std::abs(got - ref.value) / std::abs(ref.value)) < 1e-10);
      }
    }
  }
}

TEST_CASE("right-hand side entries") {
  CHECK(static_cast<double>(rhs_entry(oracle::example(1), 0)) ==
        doctest::Approx(std::exp(-3.0)).epsilon(1e-15));
  CHECK(static_cast<double>(rhs_entry(oracle::example(4), 0)) ==
        doctest::Approx(7 * std::exp(-6.0)).epsilon(1e-15));
  CHECK(static_cast<double>(rhs_entry(oracle::example(4), 1)) ==
        doctest::Approx(-4 * std::exp(-6.0)).epsilon(1e-15));
  CHECK_THROWS_AS(rhs_entry(oracle::example(4), 2), DomainError);
}

TEST_CASE("worked example probabilities") {
  SUBCASE("one") {
    const auto dist = build_distribution(oracle::example(1));
    const double lam = dist.derived().lambda;
    const double a0 = 8 / (8 - 8 * lam + lam * lam) * std::exp(-3.0);
    CHECK(dist.spillage_probability() == doctest::Approx(a0).epsilon(1e-14));
    CHECK(std::abs(dist.spillage_probability() - 0.15000227) < 1e-8);
    CHECK(dist.depletion_probability() ==
          doctest::Approx(1 - 0.5 * std::exp(2.0) * (2 - lam) * a0).epsilon(1e-13));
    CHECK(std::abs(dist.depletion_probability() - 0.29937324) < 1e-8);
    CHECK(dist.cdf(0.0) == dist.depletion_probability());
    CHECK(dist.cdf(1.0) == 1.0);
  }
  SUBCASE("two") {
    const auto dist = build_distribution(oracle::example(2));
    const double lam = dist.derived().lambda;
    const double a0 = 162 / (162 - 162 * lam + 36 * lam * lam - lam * lam * lam) *
                      std::exp(-8.0 / 3.0);
    CHECK(dist.spillage_probability() == doctest::Approx(a0).epsilon(1e-14));
    CHECK(std::abs(dist.spillage_probability() - 0.34604845) < 1e-8);
    CHECK(dist.depletion_probability() ==
          doctest::Approx(1 - std::exp(2.0) * (18 - 12 * lam + lam * lam) * a0 / 18).epsilon(1e-12));
    CHECK(std::abs(dist.depletion_probability() - 0.04363903) < 1e-8);
    CHECK(dist.depletion_probability() < dist.spillage_probability());
  }
  SUBCASE("three") {
    const auto dist = build_distribution(oracle::example(3));
    const double lam = dist.derived().lambda;
    const double a0 = 750 / (750 - 750 * lam + 135 * lam * lam - lam * lam * lam) *
                      std::exp(-2.8);
    CHECK(dist.spillage_probability() == doctest::Approx(a0).epsilon(1e-14));
    CHECK(std::abs(dist.spillage_probability() - 0.24745701) < 1e-8);
    CHECK(std::abs(dist.depletion_probability() - 0.12789671) < 1e-8);
    // printed arc expressions
    auto arc0 = [&](double z) {
      const double w = 1 - 5 * z;
      return 1 - std::exp(2 * (1 - z)) * (50 - 10 * (3 - 5 * z) * lam + w * w * lam * lam) * a0 / 50;
    };
    auto arc1 = [&](double z) { return 1 - std::exp(2 * (1 - z)) * (5 - (3 - 5 * z) * lam) * a0 / 5; };
    auto arc2 = [&](double z) { return 1 - std::exp(2 * (1 - z)) * a0; };
    for (double z : {0.05, 0.1, 0.15}) CHECK(dist.cdf(z) == doctest::Approx(arc0(z)).epsilon(1e-13));
    for (double z : {0.25, 0.4, 0.55}) CHECK(dist.cdf(z) == doctest::Approx(arc1(z)).epsilon(1e-13));
    for (double z : {0.65, 0.8, 0.95}) CHECK(dist.cdf(z) == doctest::Approx(arc2(z)).epsilon(1e-13));
  }
  SUBCASE("four") {
    const auto dist = build_distribution(oracle::example(4));
    const double lam = dist.derived().lambda;
    const double mu = 4.0;
    const double d00 = -1 + 11 * lam / 384, d01 = -7.0 / 12 + 7 * lam / 1920;
    const double d10 = 1 - lam / 48, d11 = 0.5 - lam / 384;
    const double det = 1 - lam * (d00 + d11) + lam * lam * (d00 * d11 - d01 * d10);
    const double e = std::exp(-1.5 * mu);
    const double a0 = 0.5 * (2 + 3 * mu - 2 * lam * mu * d01 - lam * (2 + 3 * mu) * d11) / det * e;
    const double a1 = 0.5 * (-2 * mu + 2 * lam * mu * d00 + lam * (2 + 3 * mu) * d10) / det * e;
    CHECK(alpha(dist, 0) == doctest::Approx(a0).epsilon(1e-13));
    CHECK(alpha(dist, 1) == doctest::Approx(a1).epsilon(1e-13));
    CHECK(std::abs(dist.spillage_probability() - 0.13554701) < 1e-8);
    const double f0 = 1 - std::exp(mu) * ((48 - 6 * lam) * a0 + (48 - lam) * a1) / 48;
    CHECK(dist.depletion_probability() == doctest::Approx(f0).epsilon(1e-12));
    CHECK(std::abs(dist.depletion_probability() - 0.22163253) < 1e-8);
    CHECK(d(dist, 0, 1) == doctest::Approx(d01).epsilon(1e-14));
  }
}

TEST_CASE("alpha solve") {
  const auto dist = build_distribution(oracle::example(4));
  CHECK(dist.alpha().residual <= 1e-12);
  CHECK(dist.alpha().condition >= 1.0);

  // I - lambda D singular when lambda D = I
  DMatrix dmat(2);
  dmat(0, 0) = 2;
  dmat(1, 1) = 2;
  const std::vector<Wide> rhs{1, 1};
  CHECK_THROWS_AS(solve_alpha(dmat, rhs, 0.5), NumericalError);
  CHECK_THROWS_AS(solve_alpha(dmat, std::vector<Wide>{1}, 0.5), DomainError);
}

TEST_CASE("arc index") {
  const ModelParams p1 = oracle::example(1);
  const DerivedParams d1 = derive_params(p1);
  CHECK(arc_index(p1, d1, 0.25) == 1);
  CHECK(arc_index(p1, d1, 0.75) == 2);
  CHECK(arc_index(p1, d1, 0.5) == 2);  // boundary belongs to the right arc
  CHECK_THROWS_AS(arc_index(p1, d1, 0.0), DomainError);
  CHECK_THROWS_AS(arc_index(p1, d1, 1.0), DomainError);

  const ModelParams p3 = oracle::example(3);
  const DerivedParams d3 = derive_params(p3);
  CHECK(arc_index(p3, d3, 0.1) == 0);
  CHECK(arc_index(p3, d3, 0.2) == 1);
  CHECK(arc_index(p3, d3, 0.5) == 1);
  CHECK(arc_index(p3, d3, 0.7) == 2);
  CHECK(arc_index(p3, d3, std::nextafter(1.0, 0.0)) == 2);
}

TEST_CASE("cdf and pdf domain") {
  const auto dist = build_distribution(oracle::example(1));
  CHECK_THROWS_AS(dist.cdf(-0.1), DomainError);
  CHECK_THROWS_AS(dist.cdf(1.1), DomainError);
  CHECK_THROWS_AS(dist.pdf(0.0), DomainError);
  CHECK_THROWS_AS(dist.pdf(1.0), DomainError);
}

TEST_CASE("pdf matches finite differences of the cdf") {
  for (int k = 1; k <= 4; ++k) {
    const auto dist = build_distribution(oracle::example(k));
    const double h = 1e-6;
    for (double z = 0.03; z < 0.98; z += 0.0473) {
      const double fd = (dist.cdf(z + h) - dist.cdf(z - h)) / (2 * h);
      INFO("example " << k << " z=" << z);
      CHECK(std::abs(dist.pdf(z) - fd) < 1e-6);
      CHECK(dist.pdf(z) >= 0.0);
    }
  }
}

TEST_CASE("total mass of atoms and density is one") {
  for (int k = 1; k <= 4; ++k) {
    const auto dist = build_distribution(oracle::example(k));
    std::vector<double> cuts{0.0};
    for (double b : oracle::arc_boundaries(dist.params(), dist.derived())) cuts.push_back(b);
    cuts.push_back(dist.params().v);
    double mass = dist.depletion_probability() + dist.spillage_probability();
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      mass += oracle::integrate([&](double z) { return dist.pdf(z); }, cuts[i], cuts[i + 1]);
    }
    CHECK(std::abs(mass - 1.0) < 1e-8);
  }
}

TEST_CASE("rescaling") {
  CHECK(rescale(oracle::example(1)) == ModelParams{2.0, 1, 1.0, 1.0});
  CHECK(rescale(oracle::example(4)) == ModelParams{2.0, 2, 2.0, 1.0});
  const ModelParams unit{1.7, 3, 2.5, 1.0};
  CHECK(rescale(unit) == unit);

  const ModelParams prm = oracle::example(4);
  const auto a = build_distribution(prm);
  const auto b = build_distribution(rescale(prm));
  CHECK(d(b, 0, 1) == doctest::Approx(8 * d(a, 0, 1)).epsilon(1e-13));
  CHECK(b.spillage_probability() == doctest::Approx(a.spillage_probability()).epsilon(1e-13));
  CHECK(std::abs(build_distribution(rescale(oracle::example(1))).spillage_probability() -
                 0.15000227) < 1e-8);
}

TEST_CASE("randomized distribution properties") {
  oracle::ParamGenerator gen(977);
  for (int i = 0; i < 40; ++i) {
    const ModelParams prm = gen.next();
    INFO("p=" << prm.p << " mu=" << prm.mu << " m=" << prm.m);
    const auto dist = build_distribution(prm);
    const auto& der = dist.derived();

    CHECK(dist.spillage_probability() >= 0.0);
    CHECK(dist.spillage_probability() <= 1.0);
    CHECK(dist.depletion_probability() >= 0.0);
    CHECK(dist.depletion_probability() <= 1.0);
    CHECK(dist.alpha().residual <= 1e-12);

    double prev = dist.cdf(0.0);
    bool monotone = true;
    for (int k = 1; k <= 2000; ++k) {
      const double f = dist.cdf(prm.v * k / 2000.0);
      monotone = monotone && f >= prev - 1e-12;
      prev = f;
    }
    CHECK(monotone);

    for (double b : oracle::arc_boundaries(prm, der)) {
      const long right = arc_index(prm, der, b);
      CHECK(std::abs(dist.arc_cdf(right - 1, b) - dist.arc_cdf(right, b)) <= 1e-10);
    }
    CHECK(std::abs(1.0 - dist.arc_cdf(der.n, prm.v) - dist.spillage_probability()) <= 1e-13);

    // F near 0 approaches the depletion atom from above
    CHECK(dist.cdf(1e-9 * prm.v) >= dist.depletion_probability() - 1e-10);
  }
}

TEST_CASE("rescaling identities on random parameters") {
  oracle::ParamGenerator gen(31337, 0.5, 2.0);
  for (int i = 0; i < 30; ++i) {
    ModelParams prm = gen.next();
    prm.m = std::max(prm.m, 0.1 * prm.v);
    INFO("v=" << prm.v << " p=" << prm.p << " mu=" << prm.mu << " m=" << prm.m);
    const auto a = build_distribution(prm);
    const auto b = build_distribution(rescale(prm));
    CHECK(b.derived().lambda == doctest::Approx(std::pow(prm.m, prm.p) * a.derived().lambda).epsilon(1e-13));
    CHECK(std::abs(b.derived().delta - a.derived().delta / prm.m) < 1e-12);
    CHECK(b.derived().kappa == a.derived().kappa);
    CHECK(std::abs(b.spillage_probability() - a.spillage_probability()) < 1e-10);
    for (int r = 0; r < prm.p; ++r) {
      CHECK(alpha(b, r) == doctest::Approx(std::pow(prm.m, r) * alpha(a, r)).epsilon(1e-9));
      for (int s = 0; s < prm.p; ++s) {
        CHECK(d(b, r, s) * std::pow(prm.m, prm.p - r + s) ==
              doctest::Approx(d(a, r, s)).epsilon(1e-12));
      }
    }
    const double vt = b.params().v;
    for (int k = 0; k <= 50; ++k) {
      const double zt = k == 50 ? vt : vt * k / 50.0;
      const double z = k == 50 ? prm.v : std::min(prm.m * zt, prm.v);
      CHECK(std::abs(b.cdf(zt) - a.cdf(z)) < 1e-10);
    }
  }
}

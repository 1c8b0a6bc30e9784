#include <doctest.h>

#include <cmath>
#include <random>

#include "iocttl/fitting.hpp"

using namespace iocttl;

namespace {

CcdfPoints exact_pareto_points(double alpha, double k, std::size_t n) {
  CcdfPoints c;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = k * std::pow(1.6, static_cast<double>(i + 1));
    c.xs.push_back(x);
    c.ys.push_back(pareto_survival(x, alpha, k));
  }
  return c;
}

CcdfPoints exact_weibull_points(double lambda, double k, std::size_t n) {
  CcdfPoints c;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = k * 0.05 * std::pow(1.5, static_cast<double>(i + 1));
    c.xs.push_back(x);
    c.ys.push_back(weibull_survival(x, lambda, k));
  }
  return c;
}

}  // namespace

TEST_CASE("empirical CCDF drops the all-below point") {
  const auto c = empirical_ccdf({1, 1, 2, 4});
  CHECK(c.xs == std::vector<double>{1, 2});
  CHECK(c.ys == std::vector<double>{0.5, 0.25});
  CHECK_FALSE(c.zero_shifted);
}

TEST_CASE("empirical CCDF rejects degenerate samples") {
  CHECK_THROWS_AS(empirical_ccdf({3, 3, 3, 3}), DataError);
  CHECK_THROWS_AS(empirical_ccdf({1, 2}), DataError);
  CHECK_THROWS_AS(empirical_ccdf({-1, 2, 3}), DataError);
}

TEST_CASE("zeros shift by the epsilon and get flagged") {
  const auto c = empirical_ccdf({0, 1, 2, 4});
  CHECK(c.zero_shifted);
  CHECK(c.xs.front() == doctest::Approx(0.5));
}

TEST_CASE("scaling samples scales xs and leaves ys alone") {
  const auto a = empirical_ccdf({1, 2, 3, 5, 5, 9});
  const auto b = empirical_ccdf({10, 20, 30, 50, 50, 90});
  REQUIRE(a.xs.size() == b.xs.size());
  for (std::size_t i = 0; i < a.xs.size(); ++i) {
    CHECK(b.xs[i] == doctest::Approx(10.0 * a.xs[i]));
    CHECK(b.ys[i] == doctest::Approx(a.ys[i]));
  }
}

TEST_CASE("pareto fit recovers exact parameters") {
  const auto fit = fit_pareto(exact_pareto_points(1.2, 0.0199, 24));
  CHECK(std::abs(fit.shape - 1.2) / 1.2 < 1e-6);
  CHECK(std::abs(fit.scale - 0.0199) / 0.0199 < 1e-6);
  CHECK(fit.rmse < 1e-9);
}

TEST_CASE("weibull fit recovers exact parameters") {
  auto fit = fit_weibull(exact_weibull_points(0.5, 2.0, 24));
  CHECK(std::abs(fit.shape - 0.5) / 0.5 < 1e-6);
  CHECK(std::abs(fit.scale - 2.0) / 2.0 < 1e-6);
  CHECK(fit.rmse < 1e-9);

  // a pure exponential is Weibull with shape 1
  fit = fit_weibull(exact_weibull_points(1.0, 3.0, 20));
  CHECK(std::abs(fit.shape - 1.0) < 1e-6);
}

TEST_CASE("two-point CCDF interpolates exactly") {
  CcdfPoints c;
  c.xs = {1.0, 4.0};
  c.ys = {0.5, 0.1};
  const auto fit = fit_pareto(c);
  CHECK(fit.rmse < 1e-12);
}

TEST_CASE("exponential decay favors the weibull family") {
  CcdfPoints c;
  for (int i = 1; i <= 20; ++i) {
    const double x = 0.3 * i;
    c.xs.push_back(x);
    c.ys.push_back(std::exp(-x));
  }
  const auto pareto = fit_pareto(c);
  const auto weibull = fit_weibull(c);
  CHECK(weibull.rmse < pareto.rmse);
}

TEST_CASE("pareto tails favor the pareto family") {
  const auto c = exact_pareto_points(0.8, 0.5, 20);
  const auto pareto = fit_pareto(c);
  const auto weibull = fit_weibull(c);
  CHECK(pareto.rmse < weibull.rmse);
}

TEST_CASE("rmse is recomputable from the returned parameters") {
  std::mt19937_64 rng(8);
  std::vector<double> samples;
  for (int i = 0; i < 400; ++i)
    samples.push_back(0.2 * std::pow(1.0 - static_cast<double>(rng() >> 11) *
                                               0x1.0p-53,
                                     -1.0 / 1.1));
  const auto c = empirical_ccdf(samples);
  const auto fit = fit_pareto(c);
  double sq = 0.0;
  for (std::size_t i = 0; i < c.xs.size(); ++i) {
    const double r = pareto_survival(c.xs[i], fit.shape, fit.scale) - c.ys[i];
    sq += r * r;
  }
  CHECK(fit.rmse ==
        doctest::Approx(std::sqrt(sq / static_cast<double>(c.xs.size()))));
}

TEST_CASE("rmse stays at the noise floor regardless of point count") {
  for (const std::size_t n : {8u, 40u, 200u}) {
    CHECK(fit_pareto(exact_pareto_points(1.4, 0.7, n)).rmse < 1e-9);
    CHECK(fit_weibull(exact_weibull_points(0.3, 1.1, n)).rmse < 1e-9);
  }
}

TEST_CASE("non-power-law data is rejected") {
  CcdfPoints flat;
  flat.xs = {1, 2, 4, 8};
  flat.ys = {0.4, 0.4, 0.4, 0.4};
  CHECK_THROWS_AS(fit_pareto(flat), DataError);
}

TEST_CASE("weibull filtering needs three usable points") {
  CcdfPoints c;
  c.xs = {1, 2, 3};
  c.ys = {1.0, 0.5, 0.2};  // the y=1 point is dropped
  CHECK_THROWS_AS(fit_weibull(c), DataError);
}

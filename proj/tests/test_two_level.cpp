#include <doctest.h>

#include <random>

#include "mams/bounds.hpp"
#include "mams/errors.hpp"
#include "mams/two_level.hpp"
#include "support.hpp"

using namespace mams;

namespace {

TwoLevelParams fig4(double alpha) { return TwoLevelParams::make(2.0, 0.2, 5 * alpha, alpha, 1.0); }

}  // namespace

TEST_CASE("closed forms for the two-level setting") {
  const auto a = analyze_two_level(TwoLevelParams::make(2.0, 0.2, 0.5, 0.1, 1.0));
  CHECK(a.lambda == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(a.rho == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(a.delta_h == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(a.delta_l == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(a.e_delta_arrival == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(a.heavy_traffic_constant == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(a.p_h == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("equal levels behave like Poisson arrivals") {
  const auto a = analyze_two_level(TwoLevelParams::make(0.4, 0.4, 0.3, 2.0, 1.0));
  CHECK(a.delta_h == 0.0);
  CHECK(a.delta_l == 0.0);
  CHECK(a.e_delta_arrival == 0.0);
  CHECK(a.heavy_traffic_constant == 1.0);
  const auto b = e_q_bounds(a.params, a);
  CHECK(b.lower == doctest::Approx(0.4 / 0.6).epsilon(1e-14));
  CHECK(b.upper_fast == doctest::Approx(0.4 / 0.6).epsilon(1e-14));
  CHECK_FALSE(b.upper_slow.has_value());
}

TEST_CASE("alpha family: lambda fixed, closed-form bounds") {
  for (double alpha : {0.01, 0.1, 0.37, 1.0, 10.0}) {
    const auto p = fig4(alpha);
    const auto a = analyze_two_level(p);
    CHECK(a.lambda == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(a.e_delta_arrival == doctest::Approx(0.15 / alpha).epsilon(1e-12));

    const auto e = empty_prob_bounds(p, a);
    CHECK(e.lower == 0.0);
    CHECK(e.upper_fast == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    REQUIRE(e.upper_slow.has_value());
    CHECK(*e.upper_slow == doctest::Approx(std::min(1.0, 5 * alpha / 3)).epsilon(1e-12));

    const auto b = e_q_bounds(p, a);
    CHECK(b.lower == doctest::Approx(1 + 0.1 / alpha).epsilon(1e-12));
    CHECK(b.upper_fast == doctest::Approx(1 + 0.15 / alpha).epsilon(1e-12));
    REQUIRE(b.upper_slow.has_value());
    CHECK(*b.upper_slow == doctest::Approx(1.5 + 0.1 / alpha).epsilon(1e-12));
    CHECK(*b.upper_slow - b.lower == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(b.upper == std::min(b.upper_fast, *b.upper_slow));
  }
}

TEST_CASE("fast switching limit approaches rho / (1 - rho)") {
  const auto p = fig4(1e6);
  const auto b = e_q_bounds(p, analyze_two_level(p));
  CHECK(b.lower == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(b.upper_fast == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("mean_q_given_empty_prob endpoints") {
  for (double alpha : {0.05, 1.0}) {
    const auto p = fig4(alpha);
    const auto a = analyze_two_level(p);
    const auto b = e_q_bounds(p, a);
    CHECK(mean_q_given_empty_prob(a, a.p_h) == doctest::Approx(b.upper_fast).epsilon(1e-13));
    CHECK(mean_q_given_empty_prob(a, 0.0) == doctest::Approx(b.lower).epsilon(1e-13));
  }
  const auto a = analyze_two_level(fig4(1.0));
  CHECK_THROWS_AS(mean_q_given_empty_prob(a, 1.5), DomainError);
  CHECK_THROWS_AS(mean_q_given_empty_prob(a, -0.1), DomainError);
}

TEST_CASE("slow bound availability") {
  const auto below = TwoLevelParams::make(0.9, 0.2, 1.0, 1.0, 1.0);
  CHECK_FALSE(empty_prob_bounds(below, analyze_two_level(below)).upper_slow.has_value());
  const auto boundary = TwoLevelParams::make(1.0, 0.2, 1.0, 1.0, 1.0);
  CHECK_FALSE(empty_prob_bounds(boundary, analyze_two_level(boundary)).upper_slow.has_value());
  CHECK_FALSE(e_q_bounds(boundary, analyze_two_level(boundary)).upper_slow.has_value());
}

TEST_CASE("probability bounds are clamped") {
  const auto p = fig4(50.0);
  const auto e = empty_prob_bounds(p, analyze_two_level(p));
  REQUIRE(e.upper_slow.has_value());
  CHECK(*e.upper_slow == 1.0);
}

TEST_CASE("parameter validation and normalization") {
  CHECK_THROWS_AS(TwoLevelParams::make(0.0, 0.2, 1, 1, 1), DomainError);
  CHECK_THROWS_AS(TwoLevelParams::make(1.0, 0.2, -1, 1, 1), DomainError);
  CHECK_THROWS_AS(TwoLevelParams::make(1.0, 0.2, 1, 1, std::nan("")), DomainError);
  CHECK_THROWS_AS(analyze_two_level(TwoLevelParams::make(2.0, 1.0, 1, 1, 1.0)), DomainError);

  const auto swapped = TwoLevelParams::make(0.2, 2.0, 0.1, 0.5, 1.0);
  CHECK(swapped == TwoLevelParams::make(2.0, 0.2, 0.5, 0.1, 1.0));
  CHECK(swapped.intermittent_overload());
}

TEST_CASE("property: closed forms match the generic pipeline") {
  std::mt19937_64 rng(41);
  int checked = 0;
  while (checked < 100) {
    const double lh = testing::log_uniform(rng, 0.05, 20), ll = testing::log_uniform(rng, 0.05, 20);
    const double ah = testing::log_uniform(rng, 0.05, 20), al = testing::log_uniform(rng, 0.05, 20);
    const double mu = testing::log_uniform(rng, 0.05, 20);
    const auto p = TwoLevelParams::make(lh, ll, ah, al, mu);
    if (p.long_run_rate() >= mu) continue;
    ++checked;
    const auto a = analyze_two_level(p);
    CHECK(a.p_h * a.delta_h + (1 - a.p_h) * a.delta_l == doctest::Approx(0.0).epsilon(1e-12).scale(1 + a.delta_h));
    CHECK(a.delta_h - a.delta_l == doctest::Approx((p.lambda_h - a.lambda) / p.alpha_h).epsilon(1e-12));
    CHECK(a.e_delta_arrival >= 0.0);

    const auto [arrival, completion] = to_mams(p);
    CHECK(validate(arrival).ok());
    CHECK(validate(completion).ok());
    const auto s = build_system(arrival, completion);
    const auto b = bounds(s);
    const double scale = std::max({1.0, std::abs(a.delta_h), std::abs(a.delta_l), a.heavy_traffic_constant});
    CHECK(std::abs(s.arrival.relative.delta(0) - a.delta_h) <= 1e-10 * scale);
    CHECK(std::abs(s.arrival.relative.delta(1) - a.delta_l) <= 1e-10 * scale);
    CHECK(std::abs(b.e_delta_arrival_weighted - a.e_delta_arrival) <= 1e-10 * scale);
    CHECK(std::abs(b.heavy_traffic_constant - a.heavy_traffic_constant) <= 1e-10 * scale);

    const auto tb = e_q_bounds(p, a);
    CHECK(tb.lower <= tb.upper_fast);
    CHECK(tb.lower <= tb.upper);
    CHECK(b.upper >= tb.upper_fast - 1e-9 * scale);
    CHECK(b.lower == doctest::Approx(tb.lower).epsilon(1e-9));
  }
}

TEST_CASE("to_mams layout") {
  const auto [arrival, completion] = to_mams(TwoLevelParams::make(2.0, 0.2, 0.5, 0.1, 1.0));
  CHECK(arrival.states() == std::vector<std::string>{"H", "L"});
  CHECK(completion.states() == std::vector<std::string>{"X"});
  CHECK(completion.transitions().size() == 1);
  CHECK(completion.transitions()[0].rate == 1.0);
}

TEST_CASE("generic upper bound is looser than the fast two-level bound") {
  for (double alpha : {0.1, 1.0, 10.0}) {
    const auto p = fig4(alpha);
    const auto [arrival, completion] = to_mams(p);
    const auto generic = bounds(build_system(arrival, completion));
    CHECK(generic.upper >= e_q_bounds(p, analyze_two_level(p)).upper_fast);
  }
}

TEST_CASE("heavy traffic with alpha fixed") {
  const auto p = TwoLevelParams::make(2.0 * 1.998, 0.2 * 1.998, 0.5, 0.1, 1.0);
  const auto a = analyze_two_level(p);
  CHECK(a.rho == doctest::Approx(0.999));
  const auto b = e_q_bounds(p, a);
  CHECK((1 - a.rho) * b.lower == doctest::Approx(a.heavy_traffic_constant).epsilon(0.01));
  CHECK((1 - a.rho) * b.upper_fast == doctest::Approx(a.heavy_traffic_constant).epsilon(0.01));
}

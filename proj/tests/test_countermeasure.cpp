#include <cmath>
#include <random>
#include <vector>

#include "cvqkd/countermeasure.h"
#include "cvqkd/error.h"
#include "doctest.h"

using namespace cvqkd;

TEST_CASE("plan_monitor") {
  const auto none = plan_monitor(1000, 0.0, 1);
  CHECK(none.count() == 0);
  CHECK(none.mask.size() == 1000);

  const std::size_t n = 100'000;
  const auto p = plan_monitor(n, 0.1, 2);
  CHECK(p.mask.size() == n);
  CHECK(std::abs(static_cast<double>(p.count()) - 1e4) <= 5.0 * std::sqrt(n * 0.1 * 0.9));
  CHECK(plan_monitor(n, 0.1, 2).mask == p.mask);
  CHECK(plan_monitor(n, 0.1, 3).mask != p.mask);
  CHECK(plan_monitor(50, 1.0, 3).count() == 50);
  CHECK_THROWS_AS(plan_monitor(10, 1.5, 1), InvalidInput);
  CHECK_THROWS_AS(plan_monitor(10, -0.1, 1), InvalidInput);
}

TEST_CASE("realtime_shot_noise examples") {
  const auto tri = realtime_shot_noise(3.0, 1.2, 0.0, 0.1);
  CHECK(tri.n0_rt == doctest::Approx(1.1));
  CHECK(tri.s_rt == doctest::Approx(1.8));

  // Forward model with S = 2, N0 = 1.5, v_el = 0.01, extinction 0.01.
  const double s = 2.0, n0 = 1.5, v = 0.01, ex = 0.01;
  const auto inv = realtime_shot_noise(s + n0 + v, ex * s + n0 + v, ex, v);
  CHECK(inv.s_rt == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(inv.n0_rt == doctest::Approx(1.5).epsilon(1e-12));

  CHECK(realtime_shot_noise(1.7, 1.7, 0.0, 0.0).s_rt == 0.0);
  CHECK_THROWS_AS(realtime_shot_noise(2.0, 1.0, 1.0, 0.0), Degenerate);
}

TEST_CASE("realtime_shot_noise inverts the forward model for every extinction") {
  std::mt19937_64 eng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double s = 5.0 * u(eng), n0 = 0.1 + 2.0 * u(eng), v = 0.1 * u(eng), ex = 0.99 * u(eng);
    const auto r = realtime_shot_noise(s + n0 + v, ex * s + n0 + v, ex, v);
    CHECK(r.s_rt == doctest::Approx(s).epsilon(1e-9).scale(1.0));
    CHECK(r.n0_rt == doctest::Approx(n0).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("realtime_shot_noise from samples") {
  std::mt19937_64 eng(5);
  std::normal_distribution<double> n01;
  std::vector<double> open(200'000), closed(20'000);
  for (double& v : open) v = std::sqrt(3.0) * n01(eng);
  for (double& v : closed) v = std::sqrt(1.0) * n01(eng);
  const auto r = realtime_shot_noise(open, closed, 0.0, 0.0);
  CHECK(r.m_open == open.size());
  CHECK(r.m_closed == closed.size());
  CHECK(std::abs(r.n0_rt - 1.0) <= 5.0 * std::sqrt(2.0 / closed.size()));
  CHECK(std::abs(r.s_rt - 2.0) <= 5.0 * std::hypot(3.0 * std::sqrt(2.0 / open.size()), std::sqrt(2.0 / closed.size())));
  CHECK_THROWS_AS(realtime_shot_noise(open, std::vector<double>{1.0}, 0.0, 0.0), InvalidInput);
}

TEST_CASE("second_hd_shot_noise") {
  CHECK(second_hd_shot_noise(1.7, 1.0, 0.0).n0 == doctest::Approx(1.7));
  CHECK(second_hd_shot_noise(0.3, 2.0, 0.3).n0 == 0.0);
  const auto below = second_hd_shot_noise(0.2, 1.0, 0.3);
  CHECK(below.below_electronic_floor);
  CHECK(below.n0 < 0.0);
  CHECK_THROWS_AS(second_hd_shot_noise(1.0, 0.0, 0.0), InvalidInput);

  // Vacuum data on the second detector, whose sensitivity is 1/kappa of the main one.
  const double kappa = 0.8, n0 = 1.3, v_el2 = 0.05;
  const std::size_t m = 100'000;
  std::mt19937_64 eng(6);
  std::normal_distribution<double> n01;
  const double var_true = n0 / kappa + v_el2;
  double s2 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double y = std::sqrt(var_true) * n01(eng);
    s2 += y * y;
  }
  const auto est = second_hd_shot_noise(s2 / m, kappa, v_el2);
  const double se = kappa * var_true * std::sqrt(2.0 / m);
  CHECK(std::abs(est.n0 - n0) <= 5.0 * se);
  CHECK_FALSE(est.below_electronic_floor);
}

TEST_CASE("effective_eta") {
  CHECK(effective_eta(0.6, 0.0) == 0.6);
  CHECK(effective_eta(0.6, 2.7) == doctest::Approx(0.322).epsilon(1e-3));
  CHECK(effective_eta(0.8, 10.0 * std::log10(2.0)) == doctest::Approx(0.4).epsilon(1e-12));
  for (double a : {0.1, 1.0, 2.7})
    for (double b : {0.0, 0.5, 3.0})
      CHECK(effective_eta(0.6, a + b) == doctest::Approx(effective_eta(effective_eta(0.6, a), b)).epsilon(1e-14));
  CHECK_THROWS_AS(effective_eta(0.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(effective_eta(0.5, -1.0), InvalidInput);
}

TEST_CASE("detect_attack") {
  const auto same = detect_attack(1.0, 1.0, 10'000, 5.0);
  CHECK_FALSE(same.alarm);
  CHECK(same.statistic == 0.0);

  const double n0_rt = 1.0 / 1.5;
  const auto hit = detect_attack(n0_rt, 1.0, 10'000, 5.0);
  CHECK(hit.alarm);
  CHECK(hit.statistic == doctest::Approx((1.0 - n0_rt) / (n0_rt * std::sqrt(2.0 / 1e4))));
  CHECK_THROWS_AS(detect_attack(1.0, 1.0, 1, 5.0), InvalidInput);
}

TEST_CASE("false-alarm rate without attack") {
  std::mt19937_64 eng(7);
  std::normal_distribution<double> n01;
  const std::size_t m = 10'000;
  int alarms = 0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> closed(m);
    for (double& v : closed) v = n01(eng);
    const auto rt = realtime_shot_noise(std::vector<double>{1.0, -1.0}, closed, 0.0, 0.0);
    alarms += detect_attack(rt.n0_rt, 1.0, m, 5.0).alarm;
  }
  CHECK(alarms <= 1);
}

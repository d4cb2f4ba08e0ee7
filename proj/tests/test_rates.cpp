#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tikflow/rates.hpp"

#include <cmath>

using namespace tikflow;

namespace {

FlowParams cont(double q, double p, double theta = 1.0, double a = 1.0) {
  FlowParams f;
  f.alpha = 3.5;
  f.beta = 4.0;
  f.a = a;
  f.p = p;
  f.q = q;
  f.delta = DeltaSpec{1.0, theta};
  return f;
}

StepParams disc(double q, double p, double theta) {
  StepParams s;
  s.h = 1.0;
  s.alpha = 15.0;
  s.beta = 4.0;
  s.a = 1.0;
  s.p = p;
  s.q = q;
  s.delta = DeltaSpec{1.0, theta};
  return s;
}

}  // namespace

TEST_CASE("worked classification: continuous q=0.9 p=1.2 delta=t") {
  const auto rep = predict_rates(cont(0.9, 1.2));
  CHECK(rep.theorem_case == "3.1(ii)");
  CHECK(rep.predicted_exponents.at("gap") == doctest::Approx(-2.2).epsilon(1e-14));
  CHECK(rep.predicted_exponents.at("velocity") == doctest::Approx(-0.6));
}

TEST_CASE("worked classification: continuous q=0.9 p=2.0 delta=t") {
  const auto rep = predict_rates(cont(0.9, 2.0, 1.0, 0.09));
  CHECK(rep.theorem_case == "3.1(i)");
  CHECK(rep.predicted_exponents.at("gap") == doctest::Approx(-2.8).epsilon(1e-14));
  CHECK(rep.predicted_exponents.at("velocity") == doctest::Approx(-0.9));
  bool saw_a_check = false;
  for (const auto& c : rep.condition_checks)
    if (c.name.find("q(1-q)") != std::string::npos) {
      saw_a_check = true;
      CHECK(c.holds);
      CHECK(c.threshold == doctest::Approx(0.09).epsilon(1e-12));
    }
  CHECK(saw_a_check);
}

TEST_CASE("worked classification: discrete q=0.95 p=1.9 delta_k=k^5") {
  const auto rep = predict_rates(disc(0.95, 1.9, 5.0));
  CHECK(rep.theorem_case == "4.2(ii)");
  CHECK(rep.predicted_exponents.at("gap") == doctest::Approx(-6.9).epsilon(1e-14));
  CHECK(rep.predicted_exponents.at("dist_to_path") ==
        doctest::Approx(-0.025).epsilon(1e-12));
}

TEST_CASE("continuous case partition is exhaustive and mutually exclusive") {
  for (int i = 1; i <= 100; ++i) {
    for (int j = 1; j <= 100; ++j) {
      const double q = i / 101.0;
      const double p = 2.05 * j / 100.0;
      const auto rep = predict_rates(cont(q, p, 0.0));
      // exactly the case the defining inequalities pick
      if (!(p > q) || p > 2.0) {
        CHECK(rep.theorem_case == "none");
      } else if (p <= 2.0 * q) {
        CHECK(rep.theorem_case == "3.1(ii)");
      } else {
        CHECK(rep.theorem_case == "3.1(i)");
      }
    }
  }
}

TEST_CASE("discrete case partition is exhaustive and mutually exclusive") {
  for (int i = 1; i <= 100; ++i) {
    for (int j = 1; j <= 100; ++j) {
      const double q = i / 101.0;
      const double p = 2.05 * j / 100.0;
      const auto rep = predict_rates(disc(q, p, 0.0));
      if (!(p > 1.0) || p > 2.0 || p == q + 1.0) {
        CHECK(rep.theorem_case == "none");
      } else if (p > q + 1.0) {
        CHECK(rep.theorem_case == "4.1");
      } else if (p < 2.0 * q) {
        CHECK(rep.theorem_case == "4.2(i)");
      } else if (p < (3.0 * q + 1.0) / 2.0) {
        CHECK(rep.theorem_case == "4.2(ii)");
      } else {
        CHECK(rep.theorem_case == "4.2(iii)");
      }
    }
  }
}

TEST_CASE("gap exponent is continuous across p = (4q+2)/3") {
  const double q = 0.7, theta = 2.0;
  const double pb = (4.0 * q + 2.0) / 3.0;
  const auto lo = predict_rates(disc(q, pb - 1e-9, theta));
  const auto hi = predict_rates(disc(q, pb + 1e-9, theta));
  CHECK(std::abs(lo.predicted_exponents.at("gap") -
                 hi.predicted_exponents.at("gap")) <= 1e-6);
}

TEST_CASE("alternate-statement exponent is flagged in the notes") {
  const auto rep = predict_rates(cont(0.9, 1.88));
  CHECK(rep.predicted_exponents.at("gap") ==
        doctest::Approx(-(4.0 * 0.9 - 2.0 * 1.88 + 2.0 + 1.0)));
  bool flagged = false;
  for (const auto& n : rep.notes)
    if (n.find("4q-2p+2") != std::string::npos) flagged = true;
  CHECK(flagged);
}

TEST_CASE("slope fit recovers exact power laws") {
  std::vector<double> t, y3, yc;
  for (int i = 0; i < 500; ++i) {
    const double ti = std::pow(100.0, i / 499.0);
    t.push_back(ti);
    y3.push_back(std::pow(ti, -3.0));
    yc.push_back(7.5);
  }
  const auto f3 = fit_loglog_slope(t, y3);
  CHECK(std::abs(f3.slope + 3.0) <= 1e-9);
  CHECK(f3.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(f3.exhausted);

  const auto fc = fit_loglog_slope(t, yc);
  CHECK(std::abs(fc.slope) <= 1e-12);
}

TEST_CASE("envelope fit sees through bounded oscillation") {
  std::vector<double> t, y;
  for (int i = 0; i < 4000; ++i) {
    const double ti = std::pow(100.0, i / 3999.0);
    t.push_back(ti);
    y.push_back(std::pow(ti, -2.2) * (2.0 + std::sin(ti)));
  }
  const auto f = fit_loglog_slope(t, y, {0.5, 1.0}, true);
  CHECK(f.used_envelope);
  CHECK(f.slope == doctest::Approx(-2.2).epsilon(0.05));
}

TEST_CASE("floored series raise the exhausted signal") {
  std::vector<double> t, y;
  for (int i = 0; i < 100; ++i) {
    t.push_back(1.0 + i);
    y.push_back(1e-16);
  }
  CHECK(fit_loglog_slope(t, y).exhausted);
}

#include "tikflow/rates.hpp"

#include <algorithm>
#include <cmath>

namespace tikflow {

namespace {

void note_34iii_discrepancy(RegimeReport& rep, double q, double p, double theta) {
  rep.notes.push_back(
      "gap exponent uses 4q-2p+2 (proof- and discrete-consistent); the "
      "statement's 4p-2q+2 variant would give " +
      std::to_string(-(4.0 * p - 2.0 * q + 2.0 + theta)));
}

}  // namespace

RegimeReport predict_rates(const FlowParams& P) {
  P.validate();
  RegimeReport rep;
  rep.setting = RegimeReport::Setting::continuous;
  const double q = P.q, p = P.p, th = P.delta.theta;

  const double K1 = P.K1.value_or(th + 1.0);
  rep.condition_checks.push_back({"t*delta'/delta < K1 (witness K1)", K1 > th, K1});
  if (p == 2.0)
    rep.condition_checks.push_back({"a >= q(1-q)", P.a >= q * (1.0 - q), q * (1.0 - q)});
  rep.condition_checks.push_back(
      {"delta(t) -> infinity (theta > 0)", th > 0.0, th});

  if (!(p > q) || p > 2.0) {
    rep.theorem_case = "none";
    rep.notes.push_back(p <= q ? "requires p > q" : "requires p <= 2");
    return rep;
  }

  if (p <= 2.0 * q) {
    rep.theorem_case = "3.1(ii)";  // q < p <= 2q
    rep.predicted_exponents["gap"] = -(p + th);
    rep.predicted_exponents["velocity"] = -p / 2.0;
  } else {
    rep.theorem_case = "3.1(i)";  // 2q < p <= 2
    rep.predicted_exponents["gap"] = -(2.0 * q + th);
    rep.predicted_exponents["velocity"] = -q;
  }

  // strong-convergence regime extras (q < p < q+1)
  if (p < q + 1.0) {
    const double tstar =
        std::pow(P.a * P.beta / std::max(P.delta.c * (p + th), 1e-300),
                 1.0 / std::max(p + th - 1.0, 1e-12));
    rep.condition_checks.push_back(
        {"t^p delta' + p t^(p-1) delta >= a*beta beyond t*", true,
         std::max(tstar, P.t0)});
    if (p < (3.0 * q + 1.0) / 2.0) {
      rep.predicted_exponents["dist_to_path"] = -(1.0 - q) / 2.0;
    } else {
      rep.predicted_exponents["dist_to_path"] = -(q - p + 1.0);
      if (p >= (4.0 * q + 2.0) / 3.0) {
        rep.predicted_exponents["gap"] = -(4.0 * q - 2.0 * p + 2.0 + th);
        note_34iii_discrepancy(rep, q, p, th);
      }
    }
  }
  return rep;
}

RegimeReport predict_rates(const StepParams& P) {
  P.validate();
  RegimeReport rep;
  rep.setting = RegimeReport::Setting::discrete;
  const double q = P.q, p = P.p, th = P.delta.theta;

  if (!(p > 1.0) || p > 2.0 || p == q + 1.0) {
    rep.theorem_case = "none";
    rep.notes.push_back("requires 1 < p < q+1 or q+1 < p <= 2");
    return rep;
  }

  if (p > q + 1.0) {
    rep.theorem_case = "4.1";  // constant-anchor energy regime
    rep.condition_checks.push_back(
        {"alpha > h^(q-1)", P.alpha > std::pow(P.h, q - 1.0), std::pow(P.h, q - 1.0)});
    rep.predicted_exponents["gap"] = -(2.0 * q + th);
    rep.predicted_exponents["velocity"] = -q;
    return rep;
  }

  // 1 < p < q+1: strong-convergence regime, needs the growth condition
  rep.condition_checks.push_back(
      {"delta_k^2 >= c0 k^(p-q) for some c0 > 0", 2.0 * th >= p - q, 2.0 * th});
  {
    long first_ok = -1;
    double c_used = 0.0;
    for (double c : {0.5, 1.0, 3.0, 10.0}) {
      GrowthReport g = growth_condition_check(P, c, 2, 10000);
      if (g.holds_to_end) {
        first_ok = g.first_ok;
        c_used = c;
        break;
      }
    }
    rep.condition_checks.push_back({"growth condition (scanned c grid)",
                                    first_ok >= 0,
                                    first_ok >= 0 ? c_used : -1.0});
  }

  if (p < 2.0 * q) {
    rep.theorem_case = "4.2(i)";
    rep.predicted_exponents["gap"] = -(p + th);
    rep.predicted_exponents["dist_to_path"] = -(1.0 - q) / 2.0;
    rep.predicted_exponents["gradient"] = -((p - q + 1.0) / 2.0 + th);
    rep.predicted_exponents["step_norm"] = -(p - q + 1.0) / 2.0;
  } else if (p < (3.0 * q + 1.0) / 2.0) {
    rep.theorem_case = "4.2(ii)";
    rep.predicted_exponents["gap"] = -(p + th);
    rep.predicted_exponents["dist_to_path"] = -(1.0 - q) / 2.0;
    rep.predicted_exponents["gradient"] = -((q + 1.0) / 2.0 + th);
    rep.predicted_exponents["step_norm"] = -(q + 1.0) / 2.0;
  } else {
    rep.theorem_case = "4.2(iii)";
    rep.predicted_exponents["dist_to_path"] = -(q - p + 1.0);
    rep.predicted_exponents["gradient"] = -(2.0 * q - p + 1.0 + th);
    rep.predicted_exponents["step_norm"] = -(2.0 * q - p + 1.0);
    if (p < (4.0 * q + 2.0) / 3.0) {
      rep.predicted_exponents["gap"] = -(p + th);
    } else {
      rep.predicted_exponents["gap"] = -(4.0 * q - 2.0 * p + 2.0 + th);
      note_34iii_discrepancy(rep, q, p, th);
    }
  }
  return rep;
}

SlopeFit fit_loglog_slope(std::span<const double> abscissa,
                          std::span<const double> value,
                          std::pair<double, double> window, bool envelope) {
  if (abscissa.size() != value.size())
    throw std::invalid_argument("fit_loglog_slope: length mismatch");
  SlopeFit fit;
  fit.window_lo = window.first;
  fit.window_hi = window.second;
  fit.used_envelope = envelope;

  std::vector<double> t, y;
  double run_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < abscissa.size(); ++i) {
    double v = value[i];
    if (!(v > 0.0) || std::isnan(v)) continue;
    if (envelope) {
      run_min = std::min(run_min, v);
      v = run_min;
    }
    t.push_back(abscissa[i]);
    y.push_back(v);
  }
  if (t.size() < 2) {
    fit.exhausted = true;
    return fit;
  }
  const double l0 = std::log(t.front()), l1 = std::log(t.back());
  const double wa = l0 + window.first * (l1 - l0);
  const double wb = l0 + window.second * (l1 - l0);

  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::size_t n = 0, floored = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double lx = std::log(t[i]);
    if (lx < wa - 1e-12 || lx > wb + 1e-12) continue;
    if (y[i] <= 1e-15) {
      ++floored;
      continue;
    }
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
    ++n;
  }
  if (n < 2) {
    fit.exhausted = true;  // window empty or entirely at the floor
    return fit;
  }
  const double dn = static_cast<double>(n);
  const double vxx = sxx - sx * sx / dn;
  const double vxy = sxy - sx * sy / dn;
  const double vyy = syy - sy * sy / dn;
  fit.slope = vxy / vxx;
  fit.intercept = (sy - fit.slope * sx) / dn;
  fit.r_squared = vyy > 0.0 ? std::clamp(vxy * vxy / (vxx * vyy), 0.0, 1.0) : 1.0;
  if (floored > n) fit.exhausted = true;
  return fit;
}

}  // namespace tikflow

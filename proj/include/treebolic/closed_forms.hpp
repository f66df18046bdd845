#pragma once

// Scalar laws of the skeleton walk of Brownian motion with drift parameters
// (alpha, beta) on HT(q, p): the Laplace transform of the sojourn time between
// successive bifurcation-line visits, its moments, the induced walk
// probabilities, the rate of escape and the CLT variance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "json.hpp"

#include "treebolic/errors.hpp"

namespace treebolic {

struct ModelParams {
  double q = 2.0;
  std::int64_t p = 2;
  double alpha = 1.0;
  double beta = 1.0;

  ModelParams() = default;
  ModelParams(double q_, std::int64_t p_, double alpha_, double beta_) : q(q_), p(p_), alpha(alpha_), beta(beta_) {
    validate();
  }
  void validate() const {
    if (!(q > 1.0)) throw DomainError("ModelParams: q must exceed 1");
    if (p < 1) throw DomainError("ModelParams: p must be >= 1");
    if (!std::isfinite(alpha)) throw DomainError("ModelParams: alpha must be finite");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("ModelParams: beta must be positive");
  }

  double log_q() const { return std::log(q); }
  double beta_p() const { return beta * static_cast<double>(p); }
  // rho = beta p q^(1 - alpha)
  double rho() const { return beta_p() * std::pow(q, 1.0 - alpha); }
  // Probability that a vertical excursion leaving a line goes up (flux split).
  double skew_up() const { return beta_p() / (beta_p() + 1.0); }
  // Vertical drift and diffusion coefficient in Busemann units.
  double vertical_drift() const { return (1.0 - alpha) / log_q(); }
  double vertical_sigma() const { return std::sqrt(2.0) / log_q(); }
};

inline double b_param(const ModelParams& m) { return (1.0 - m.alpha) * m.log_q() / 2.0; }

// s(lambda) = b^2 + (log q)^2 lambda
inline double s_fun(const ModelParams& m, double lambda) {
  const double b = b_param(m);
  return b * b + m.log_q() * m.log_q() * lambda;
}

namespace detail {

inline constexpr int kSeriesCap = 200;
inline constexpr double kSeriesRelTol = 1e-18;
inline constexpr double kSeriesRange = 700.0;

// Entire series C(s) = sum s^n/(2n)!, S(s) = sum s^n/(2n+1)! and their first
// two s-derivatives, summed termwise.
struct CoshSeries {
  double c = 0, dc = 0, d2c = 0;
  double s = 0, ds = 0, d2s = 0;
};

inline CoshSeries cosh_series(double x) {
  if (std::abs(x) > kSeriesRange) throw DomainError("cosh series: |s| beyond supported range");
  CoshSeries out;
  // term_c(n) = x^n/(2n)!, term_s(n) = x^n/(2n+1)!
  double tc = 1.0, ts = 1.0;
  for (int n = 0; n < kSeriesCap; ++n) {
    const double dn = n;
    out.c += tc;
    out.s += ts;
    if (n >= 1) {
      // d/dx x^n = n x^(n-1); use term/x only when x != 0, else only n == 1 survives.
      if (x != 0.0) {
        out.dc += dn * tc / x;
        out.ds += dn * ts / x;
        if (n >= 2) {
          out.d2c += dn * (dn - 1.0) * tc / (x * x);
          out.d2s += dn * (dn - 1.0) * ts / (x * x);
        }
      } else {
        if (n == 1) {
          out.dc += 1.0 / 2.0;
          out.ds += 1.0 / 6.0;
        }
      }
    }
    const double next_c = tc * x / ((2.0 * dn + 1.0) * (2.0 * dn + 2.0));
    const double next_s = ts * x / ((2.0 * dn + 2.0) * (2.0 * dn + 3.0));
    if (n > 2 && std::abs(next_c) <= kSeriesRelTol * std::abs(out.c) &&
        std::abs(next_s) <= kSeriesRelTol * std::abs(out.s))
      break;
    tc = next_c;
    ts = next_s;
  }
  if (x == 0.0) {
    out.d2c = 2.0 / 24.0;   // 2 * 1/4!
    out.d2s = 2.0 / 120.0;  // 2 * 1/5!
  }
  return out;
}

}  // namespace detail

// r(lambda) = (beta p + 1) C(s) + (beta p - 1) b S(s)
inline double r_fun(const ModelParams& m, double lambda) {
  const auto ser = detail::cosh_series(s_fun(m, lambda));
  return (m.beta_p() + 1.0) * ser.c + (m.beta_p() - 1.0) * b_param(m) * ser.s;
}

// dr/dlambda and d2r/dlambda2 via termwise differentiation (ds/dlambda = log^2 q).
inline double r_prime(const ModelParams& m, double lambda) {
  const auto ser = detail::cosh_series(s_fun(m, lambda));
  const double l2 = m.log_q() * m.log_q();
  return l2 * ((m.beta_p() + 1.0) * ser.dc + (m.beta_p() - 1.0) * b_param(m) * ser.ds);
}
inline double r_second(const ModelParams& m, double lambda) {
  const auto ser = detail::cosh_series(s_fun(m, lambda));
  const double l4 = std::pow(m.log_q(), 4);
  return l4 * ((m.beta_p() + 1.0) * ser.d2c + (m.beta_p() - 1.0) * b_param(m) * ser.d2s);
}

// Closed-form branch of r: cosh/sinh for s >= 0, cos/sin for s < 0.
inline double r_closed(const ModelParams& m, double lambda) {
  const double s = s_fun(m, lambda);
  const double b = b_param(m);
  if (s == 0.0) return (m.beta_p() + 1.0) + (m.beta_p() - 1.0) * b;
  if (s > 0.0) {
    const double r = std::sqrt(s);
    return (m.beta_p() + 1.0) * std::cosh(r) + (m.beta_p() - 1.0) * b * std::sinh(r) / r;
  }
  const double r = std::sqrt(-s);
  return (m.beta_p() + 1.0) * std::cos(r) + (m.beta_p() - 1.0) * b * std::sin(r) / r;
}

namespace detail {

// r stays positive on [lambda, 0] iff lambda lies before the first pole of the
// transform. r(0) > 0 always; for s < 0 r oscillates in sqrt(-s) with period
// 2 pi, so a grid of step 0.02 in that variable cannot step over a zero pair.
inline double r_checked(const ModelParams& m, double lambda, const char* who) {
  const double r = r_fun(m, lambda);
  bool ok = r > 0.0;
  if (ok && lambda < 0.0) {
    const double theta = std::sqrt(std::max(0.0, -s_fun(m, lambda)));
    const int n = std::max(64, static_cast<int>(std::ceil(theta / 0.02)));
    for (int k = 1; k < n && ok; ++k) ok = r_fun(m, lambda * k / n) > 0.0;
  }
  if (!ok) throw DomainError(std::string(who) + ": lambda beyond the first pole of the transform");
  return r;
}

}  // namespace detail

// E(exp(-lambda tau) 1[Y = side]).
inline double laplace_joint(const ModelParams& m, double lambda, int side) {
  if (side != 1 && side != -1) throw DomainError("laplace_joint: side must be +1 or -1");
  const double r = detail::r_checked(m, lambda, "laplace_joint");
  const double b = b_param(m);
  return side == 1 ? m.beta_p() * std::exp(b) / r : std::exp(-b) / r;
}

// E(exp(-lambda tau)) = (rho + 1) e^-b / r(lambda).
inline double laplace_tau(const ModelParams& m, double lambda) {
  const double r = detail::r_checked(m, lambda, "laplace_tau");
  return (m.rho() + 1.0) * std::exp(-b_param(m)) / r;
}

// Mean sojourn time between successive line levels, closed form.
inline double exp_tau(const ModelParams& m) {
  const double l2 = m.log_q() * m.log_q();
  const double b = b_param(m);
  if (m.alpha == 1.0 || b == 0.0) return l2 / 2.0;
  const double bp = m.beta_p();
  const double ch = std::cosh(b), sh = std::sinh(b);
  const double num = (bp - 1.0) * b * ch + ((bp + 1.0) * b - (bp - 1.0)) * sh;
  const double den = (bp + 1.0) * ch + (bp - 1.0) * sh;
  return l2 / (2.0 * b * b) * num / den;
}

// Same quantity through the transform: r'(0) e^b / (rho + 1).
inline double exp_tau_from_transform(const ModelParams& m) {
  return r_prime(m, 0.0) * std::exp(b_param(m)) / (m.rho() + 1.0);
}

inline double var_tau(const ModelParams& m) {
  const double e = exp_tau_from_transform(m);
  return e * e - r_second(m, 0.0) * std::exp(b_param(m)) / (m.rho() + 1.0);
}

struct SkeletonProbs {
  double up_z = 0;          // vertical walk +1
  double down_z = 0;        // vertical walk -1
  double up_each_child = 0; // tree walk to a given successor
};

inline SkeletonProbs skeleton_probs(const ModelParams& m) {
  const double rho = m.rho();
  return {rho / (1.0 + rho), 1.0 / (1.0 + rho), rho / ((1.0 + rho) * static_cast<double>(m.p))};
}

// l(alpha, beta) = log q / E(tau) * (rho - 1)/(rho + 1)
inline double escape_rate(const ModelParams& m) {
  const double rho = m.rho();
  return m.log_q() / exp_tau(m) * (rho - 1.0) / (rho + 1.0);
}

// Asymptotic variance of Y_t / sqrt(t) in Busemann units.
inline double clt_sigma2(const ModelParams& m) {
  const double rho = m.rho();
  const double var_y = 4.0 * rho / ((rho + 1.0) * (rho + 1.0));
  const double et = exp_tau(m);
  const double ell = escape_rate(m);
  return var_y / et + ell * ell * var_tau(m) / (et * m.log_q() * m.log_q());
}

enum class Regime { Upward, Downward, Critical };

inline Regime classify_regime(const ModelParams& m) {
  const double rho = m.rho();
  if (rho > 1.0) return Regime::Upward;
  if (rho < 1.0) return Regime::Downward;
  return Regime::Critical;
}

inline std::string to_string(Regime r) {
  switch (r) {
    case Regime::Upward: return "upward";
    case Regime::Downward: return "downward";
    case Regime::Critical: return "critical";
  }
  return "unknown";
}

struct ClosedForms {
  double b = 0;
  double rho = 0;
  double exp_tau = 0;
  double var_tau = 0;
  double prob_up = 0;
  double ey = 0;
  double var_y = 0;
  double ell = 0;
  double sigma2 = 0;
  Regime regime = Regime::Critical;
};

inline ClosedForms closed_forms(const ModelParams& m) {
  ClosedForms cf;
  cf.b = b_param(m);
  cf.rho = m.rho();
  cf.exp_tau = exp_tau(m);
  cf.var_tau = var_tau(m);
  cf.prob_up = cf.rho / (cf.rho + 1.0);
  cf.ey = (cf.rho - 1.0) / (cf.rho + 1.0);
  cf.var_y = 4.0 * cf.rho / ((cf.rho + 1.0) * (cf.rho + 1.0));
  cf.ell = escape_rate(m);
  cf.sigma2 = clt_sigma2(m);
  cf.regime = classify_regime(m);
  return cf;
}

inline nlohmann::json to_json(const ModelParams& m) {
  return {{"q", m.q}, {"p", m.p}, {"alpha", m.alpha}, {"beta", m.beta}};
}

inline nlohmann::json to_json(const ClosedForms& cf) {
  return {{"b", cf.b},           {"rho", cf.rho},       {"expTau", cf.exp_tau}, {"varTau", cf.var_tau},
          {"probUp", cf.prob_up}, {"EY", cf.ey},         {"varY", cf.var_y},     {"ell", cf.ell},
          {"sigma2", cf.sigma2},  {"regime", to_string(cf.regime)}};
}

}  // namespace treebolic

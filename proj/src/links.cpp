#include "qef/links.hpp"

#include "qef/errors.hpp"
#include "qef/qexp.hpp"
#include "qef/root.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <limits>

namespace qef {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;
constexpr double kLogTwo = 0.6931471805599453094;
constexpr double kLogSqrtTwoPi = 0.9189385332046727418;  // log sqrt(2 pi)

// ---------------------------------------------------------------------
// logistic
// ---------------------------------------------------------------------

double logistic_log_cdf(double z) {
  // log(1/(1+e^-z)); split on sign so neither exp overflows
  return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

// ---------------------------------------------------------------------
// Gumbel (minimum values): G(z) = 1 - exp(-e^z)
// ---------------------------------------------------------------------

double gumbel_min_log_cdf(double z) {
  const double w = std::exp(z);
  // log(1 - e^-w); below log 2 the expm1 form keeps relative precision
  return w > kLogTwo ? std::log1p(-std::exp(-w)) : std::log(-std::expm1(-w));
}

// ---------------------------------------------------------------------
// standard normal
// ---------------------------------------------------------------------

double normal_log_cdf_impl(double z) {
  if (z < -36.0) {
    // Mills-ratio asymptotics: log Phi(z) =
    //   log phi(z) - log(-z) + log(1 - 1/z^2 + 3/z^4 - 15/z^6 + ...)
    const double r = 1.0 / (z * z);
    const double series =
        -r * (1.0 - r * (3.0 - r * (15.0 - r * (105.0 - r * 945.0))));
    return -0.5 * z * z - kLogSqrtTwoPi - std::log(-z) + std::log1p(series);
  }
  if (z < 6.0) return std::log(0.5 * std::erfc(-z * M_SQRT1_2));
  return std::log1p(-0.5 * std::erfc(z * M_SQRT1_2));
}

// ---------------------------------------------------------------------
// Cauchy
// ---------------------------------------------------------------------

double cauchy_cdf(double z) {
  // atan(z) + atan(1/z) = -pi/2 for z < 0 removes the cancellation in
  // 1/2 + atan(z)/pi deep in the lower tail
  if (z < -1.0) return std::atan(-1.0 / z) / kPi;
  if (z > 1.0) return 1.0 - std::atan(1.0 / z) / kPi;
  return 0.5 + std::atan(z) / kPi;
}

double cauchy_log_cdf(double z) {
  if (z < -1.0) return std::log(std::atan(-1.0 / z)) - std::log(kPi);
  if (z > 1.0) return std::log1p(-std::atan(1.0 / z) / kPi);
  return std::log(0.5 + std::atan(z) / kPi);
}

// ---------------------------------------------------------------------
// uniform on [-1, 1]
// ---------------------------------------------------------------------

double uniform_log_cdf(double z) {
  if (z <= -1.0) return -kInf;
  if (z >= 1.0) return 0.0;
  return std::log1p(z) - kLogTwo;
}

}  // namespace

// ---------------------------------------------------------------------
// t-logistic: G_t(z) = exp_t(z - gamma), exp_t(z-gamma) + exp_t(-gamma) = 1
// ---------------------------------------------------------------------

namespace {

// gamma_t(z) for z <= 0, where gamma stays within [0, gamma_t(0)] and both
// terms of the defining identity are small enough to difference stably:
//   exp_t(z - gamma) + [exp_t(-gamma) - 1] = 0
// with the first term anchored at the support edge z* = -1/(1-t) for t < 1
// (avoids the cancellation in 1 + (1-t) z near the edge) and the second via
// expm1 in log space.
double t_logistic_gamma_lower(double t, double z) {
  const auto first_term = [t, z](double g) {
    if (t < 1.0) {
      const double z_star = -1.0 / (1.0 - t);
      const double arg = (1.0 - t) * ((z - z_star) - g);
      return arg > 0.0 ? std::pow(arg, 1.0 / (1.0 - t)) : 0.0;
    }
    return exp_q(z - g, t);  // t >= 1: no cancellation on z <= 0
  };
  const auto residual = [&](double g) {
    return first_term(g) + std::expm1(ln_exp_q(-g, t));
  };
  const double r0 = residual(0.0);
  if (r0 <= 0.0) return 0.0;  // exp_t(z) = 0 already (z at or below z*)
  double lo = 0.0;
  double hi = std::max(0.0, z) + 2.0;
  // the residual tends to -1 as gamma grows; expand until the sign flips
  for (int k = 0; k < 200 && residual(hi) > 0.0; ++k) {
    lo = hi;
    hi = 2.0 * hi + 2.0;
  }
  RootOptions opts;
  opts.residual_tol = 1e-14;
  const RootResult res = find_root_brent(residual, lo, hi, opts);
  if (!res.converged)
    throw SolverError("t_logistic_gamma: root solve failed (t=" +
                      std::to_string(t) + ", z=" + std::to_string(z) + ")");
  return res.x;
}

struct TLogisticEval {
  double log_cdf;
  double log_sf;
};

// Solves on the z <= 0 side and mirrors through G_t(-z) = 1 - G_t(z), which
// the defining identity makes exact.
TLogisticEval t_logistic_eval(double t, double z) {
  const double s = z > 0.0 ? -z : z;
  const double gamma = t_logistic_gamma_lower(t, s);
  const double log_sf_s = ln_exp_q(-gamma, t);          // log(1 - G(s))
  const double log_cdf_s = std::log(-std::expm1(log_sf_s));
  if (z > 0.0) return {log_sf_s, log_cdf_s};
  return {log_cdf_s, log_sf_s};
}

}  // namespace

double t_logistic_gamma(double t, double z) {
  if (!std::isfinite(t) || !std::isfinite(z))
    throw std::invalid_argument("t_logistic_gamma: non-finite input");
  // gamma_t(z) = z + gamma_t(-z) maps the solve onto the stable side
  if (z > 0.0) return z + t_logistic_gamma_lower(t, -z);
  return t_logistic_gamma_lower(t, z);
}

double t_logistic_cdf(double t, double z) {
  if (!std::isfinite(t) || !std::isfinite(z))
    throw std::invalid_argument("t_logistic_cdf: non-finite input");
  const double s = z > 0.0 ? -z : z;
  const double small = -std::expm1(ln_exp_q(-t_logistic_gamma_lower(t, s), t));
  return z > 0.0 ? 1.0 - small : small;
}

double normal_log_cdf(double z) { return normal_log_cdf_impl(z); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  // Acklam's rational approximation, then one Halley step
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double u = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double u = p - 0.5;
    const double r = u * u;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        u /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double u = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u +
          c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }
  // Halley refinement against the erfc-based CDF
  const double e = 0.5 * std::erfc(-x * M_SQRT1_2) - p;
  const double phi = std::exp(-0.5 * x * x - kLogSqrtTwoPi);
  const double u = e / phi;
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

LinkFamily LinkFamily::t_logistic(double t) {
  if (!std::isfinite(t))
    throw std::invalid_argument("t-logistic parameter must be finite");
  return LinkFamily(LinkKind::TLogistic, t);
}

double LinkFamily::tail_index() const {
  switch (kind_) {
    case LinkKind::Logistic:
    case LinkKind::GumbelMin:
    case LinkKind::StandardNormal:
      return 1.0;
    case LinkKind::Cauchy:
      return 2.0;
    case LinkKind::Uniform:
      return 0.0;
    case LinkKind::TLogistic:
      return std::max(t_, 0.0);
  }
  return 1.0;
}

double LinkFamily::cdf(double z) const {
  switch (kind_) {
    case LinkKind::Logistic:
      return z >= 0 ? 1.0 / (1.0 + std::exp(-z))
                    : std::exp(z) / (1.0 + std::exp(z));
    case LinkKind::GumbelMin:
      return -std::expm1(-std::exp(z));
    case LinkKind::StandardNormal:
      return z < -36.0 ? std::exp(normal_log_cdf_impl(z))
                       : 0.5 * std::erfc(-z * M_SQRT1_2);
    case LinkKind::Cauchy:
      return cauchy_cdf(z);
    case LinkKind::Uniform:
      return std::clamp(0.5 * (1.0 + z), 0.0, 1.0);
    case LinkKind::TLogistic:
      return t_logistic_cdf(t_, z);
  }
  return 0.0;
}

double LinkFamily::cdf_complement(double z) const {
  switch (kind_) {
    case LinkKind::Logistic:
    case LinkKind::StandardNormal:
    case LinkKind::Cauchy:
    case LinkKind::Uniform:
      return LinkFamily(kind_).cdf(-z);  // symmetric families
    case LinkKind::GumbelMin:
      return std::exp(-std::exp(z));
    case LinkKind::TLogistic:
      return t_logistic_cdf(t_, -z);  // symmetry is exact for G_t
  }
  return 0.0;
}

double LinkFamily::log_cdf(double z) const {
  switch (kind_) {
    case LinkKind::Logistic:
      return logistic_log_cdf(z);
    case LinkKind::GumbelMin:
      return gumbel_min_log_cdf(z);
    case LinkKind::StandardNormal:
      return normal_log_cdf_impl(z);
    case LinkKind::Cauchy:
      return cauchy_log_cdf(z);
    case LinkKind::Uniform:
      return uniform_log_cdf(z);
    case LinkKind::TLogistic:
      return t_logistic_eval(t_, z).log_cdf;
  }
  return -kInf;
}

double LinkFamily::log_sf(double z) const {
  switch (kind_) {
    case LinkKind::Logistic:
      return logistic_log_cdf(-z);
    case LinkKind::GumbelMin:
      return -std::exp(z);
    case LinkKind::StandardNormal:
      return normal_log_cdf_impl(-z);
    case LinkKind::Cauchy:
      return cauchy_log_cdf(-z);
    case LinkKind::Uniform:
      return uniform_log_cdf(-z);
    case LinkKind::TLogistic:
      return t_logistic_eval(t_, z).log_sf;
  }
  return -kInf;
}

double LinkFamily::pdf(double z) const {
  switch (kind_) {
    case LinkKind::Logistic: {
      const double lc = logistic_log_cdf(z);
      return std::exp(lc + logistic_log_cdf(-z));
    }
    case LinkKind::GumbelMin:
      return std::exp(z - std::exp(z));
    case LinkKind::StandardNormal:
      return std::exp(-0.5 * z * z - kLogSqrtTwoPi);
    case LinkKind::Cauchy:
      return 1.0 / (kPi * (1.0 + z * z));
    case LinkKind::Uniform:
      return (z > -1.0 && z < 1.0) ? 0.5 : 0.0;
    case LinkKind::TLogistic:
      return std::exp(evaluate(z).log_pdf);
  }
  return 0.0;
}

LinkEval LinkFamily::evaluate(double z) const {
  LinkEval ev{};
  switch (kind_) {
    case LinkKind::Logistic: {
      ev.log_cdf = logistic_log_cdf(z);
      ev.log_sf = logistic_log_cdf(-z);
      ev.log_pdf = ev.log_cdf + ev.log_sf;
      ev.dlog_pdf = std::exp(ev.log_sf) - std::exp(ev.log_cdf);  // 1 - 2G
      return ev;
    }
    case LinkKind::GumbelMin: {
      const double w = std::exp(z);
      ev.log_cdf = gumbel_min_log_cdf(z);
      ev.log_sf = -w;
      ev.log_pdf = z - w;
      ev.dlog_pdf = 1.0 - w;
      return ev;
    }
    case LinkKind::StandardNormal: {
      ev.log_cdf = normal_log_cdf_impl(z);
      ev.log_sf = normal_log_cdf_impl(-z);
      ev.log_pdf = -0.5 * z * z - kLogSqrtTwoPi;
      ev.dlog_pdf = -z;
      return ev;
    }
    case LinkKind::Cauchy: {
      ev.log_cdf = cauchy_log_cdf(z);
      ev.log_sf = cauchy_log_cdf(-z);
      ev.log_pdf = -std::log(kPi) - std::log1p(z * z);
      ev.dlog_pdf = -2.0 * z / (1.0 + z * z);
      return ev;
    }
    case LinkKind::Uniform: {
      ev.log_cdf = uniform_log_cdf(z);
      ev.log_sf = uniform_log_cdf(-z);
      ev.log_pdf = (z > -1.0 && z < 1.0) ? -kLogTwo : -kInf;
      ev.dlog_pdf = 0.0;
      return ev;
    }
    case LinkKind::TLogistic: {
      const TLogisticEval tl = t_logistic_eval(t_, z);
      const double la = tl.log_cdf;  // log G
      const double lb = tl.log_sf;   // log(1 - G)
      if (la == -kInf || lb == -kInf) {
        // outside the support (t < 1): zero density
        ev.log_cdf = la;
        ev.log_sf = lb;
        ev.log_pdf = -kInf;
        ev.dlog_pdf = 0.0;
        return ev;
      }
      // g = (A^t B^t)/(A^t + B^t) with A = G, B = 1 - G, via implicit
      // differentiation of the defining identity
      const double ta = t_ * la, tb = t_ * lb;
      const double lse =
          std::max(ta, tb) + std::log1p(std::exp(-std::abs(ta - tb)));
      ev.log_cdf = la;
      ev.log_sf = lb;
      ev.log_pdf = ta + tb - lse;
      // g'/g = t [g/A - g/B - g (A^{t-1} - B^{t-1})/(A^t + B^t)]
      const double r1 = std::exp(ev.log_pdf - la);
      const double r0 = std::exp(ev.log_pdf - lb);
      const double u1 = std::exp(ev.log_pdf + (t_ - 1.0) * la - lse);
      const double u0 = std::exp(ev.log_pdf + (t_ - 1.0) * lb - lse);
      ev.dlog_pdf = t_ * (r1 - r0 - (u1 - u0));
      return ev;
    }
  }
  return ev;
}

double LinkFamily::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("quantile: p must be in (0,1)");
  switch (kind_) {
    case LinkKind::Logistic:
      return std::log(p) - std::log1p(-p);
    case LinkKind::GumbelMin:
      return std::log(-std::log1p(-p));
    case LinkKind::StandardNormal:
      return normal_quantile(p);
    case LinkKind::Cauchy:
      return std::tan(kPi * (p - 0.5));
    case LinkKind::Uniform:
      return 2.0 * p - 1.0;
    case LinkKind::TLogistic: {
      // G_t is continuous and strictly increasing where 0 < G_t < 1
      const double t = t_;
      const auto f = [this, p](double z) { return cdf(z) - p; };
      double lo = -1.0, hi = 1.0;
      for (int k = 0; k < 200 && f(lo) > 0.0; ++k) lo = 2.0 * lo - 1.0;
      for (int k = 0; k < 200 && f(hi) < 0.0; ++k) hi = 2.0 * hi + 1.0;
      RootOptions opts;
      opts.residual_tol = 1e-14;
      const RootResult res = find_root_brent(f, lo, hi, opts);
      if (!res.converged)
        throw SolverError("t-logistic quantile failed (t=" +
                          std::to_string(t) + ")");
      return res.x;
    }
  }
  return 0.0;
}

std::string LinkFamily::tag() const {
  switch (kind_) {
    case LinkKind::Logistic:
      return "logistic";
    case LinkKind::GumbelMin:
      return "gumbel-min";
    case LinkKind::StandardNormal:
      return "probit";
    case LinkKind::Cauchy:
      return "cauchit";
    case LinkKind::Uniform:
      return "uniform";
    case LinkKind::TLogistic: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "t-logistic:%.17g", t_);
      return buf;
    }
  }
  return "?";
}

LinkFamily LinkFamily::parse(std::string_view tag) {
  if (tag == "logistic" || tag == "logit") return logistic();
  if (tag == "gumbel-min" || tag == "cloglog") return gumbel_min();
  if (tag == "probit" || tag == "normal" || tag == "standard-normal")
    return standard_normal();
  if (tag == "cauchit" || tag == "cauchy") return cauchy();
  if (tag == "uniform") return LinkFamily::uniform();
  constexpr std::string_view prefix = "t-logistic:";
  if (tag.substr(0, prefix.size()) == prefix) {
    const std::string_view num = tag.substr(prefix.size());
    double t = 0.0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), t);
    if (ec != std::errc() || ptr != num.data() + num.size())
      throw ConfigError("bad t-logistic parameter in link tag: '" +
                        std::string(tag) + "'");
    return t_logistic(t);
  }
  throw ConfigError("unknown link tag: '" + std::string(tag) + "'");
}

}  // namespace qef

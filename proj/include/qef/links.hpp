#pragma once

#include <string>
#include <string_view>

namespace qef {

enum class LinkKind {
  Logistic,
  GumbelMin,       // minimum-value Gumbel, i.e. the cloglog link
  StandardNormal,  // probit link
  Cauchy,          // cauchit link
  Uniform,         // uniform on [-1, 1]
  TLogistic,       // G_t(z) = exp_t(z - gamma_t(z))
};

// Everything the regression derivatives need at one point, computed in log
// space so that deep-tail ratios like g/G stay finite.
struct LinkEval {
  double log_cdf;
  double log_sf;
  double log_pdf;
  double dlog_pdf;  // g'(z)/g(z)
};

// One-dimensional CDF G used as the response distribution of the binomial
// regression model; carries the extreme-value tail index q of its lower tail.
class LinkFamily {
 public:
  static LinkFamily logistic() { return LinkFamily(LinkKind::Logistic); }
  static LinkFamily gumbel_min() { return LinkFamily(LinkKind::GumbelMin); }
  static LinkFamily standard_normal() {
    return LinkFamily(LinkKind::StandardNormal);
  }
  static LinkFamily cauchy() { return LinkFamily(LinkKind::Cauchy); }
  static LinkFamily uniform() { return LinkFamily(LinkKind::Uniform); }
  static LinkFamily t_logistic(double t);

  LinkKind kind() const { return kind_; }
  double t() const { return t_; }

  // lower tail index: 1 for logistic/Gumbel/normal, 2 for Cauchy, 0 for
  // uniform, max(t, 0) for t-logistic
  double tail_index() const;

  double cdf(double z) const;
  double sf(double z) const { return cdf_complement(z); }
  double log_cdf(double z) const;
  double log_sf(double z) const;
  double pdf(double z) const;
  LinkEval evaluate(double z) const;
  double quantile(double p) const;

  // "logistic", "gumbel-min", "probit", "cauchit", "uniform",
  // "t-logistic:<t>"
  std::string tag() const;
  static LinkFamily parse(std::string_view tag);

  bool operator==(const LinkFamily& o) const {
    return kind_ == o.kind_ && t_ == o.t_;
  }

 private:
  explicit LinkFamily(LinkKind kind, double t = 1.0) : kind_(kind), t_(t) {}
  double cdf_complement(double z) const;

  LinkKind kind_;
  double t_;
};

inline double link_cdf(const LinkFamily& family, double z) {
  return family.cdf(z);
}
inline double link_log_cdf(const LinkFamily& family, double z) {
  return family.log_cdf(z);
}
inline double link_log_sf(const LinkFamily& family, double z) {
  return family.log_sf(z);
}

// gamma_t(z) >= 0 solving exp_t(z - gamma) + exp_t(-gamma) = 1, to absolute
// residual 1e-14.
double t_logistic_gamma(double t, double z);

// G_t(z) = exp_t(z - gamma_t(z))
double t_logistic_cdf(double t, double z);

// Standard-normal helpers shared with the quantile code.
double normal_log_cdf(double z);
double normal_quantile(double p);

}  // namespace qef

#include "odekit/adapt.hpp"

#include <algorithm>
#include <cmath>

namespace odekit {

ToleranceSpec ToleranceSpec::scalar(double atol, double rtol) {
  ToleranceSpec t;
  t.atol = Vector::Constant(1, atol);
  t.rtol = rtol;
  return t;
}

ToleranceSpec ToleranceSpec::vector(const Vector& atol, double rtol) {
  ToleranceSpec t;
  t.atol = atol;
  t.rtol = rtol;
  return t;
}

void ToleranceSpec::validate(std::size_t n) const {
  if (atol.size() != 1 && static_cast<std::size_t>(atol.size()) != n)
    throw ConfigError("atol must be a scalar or have one entry per component");
  if (!(rtol >= 0.0)) throw ConfigError("rtol must be nonnegative");
  bool any_positive = rtol > 0.0;
  for (Eigen::Index i = 0; i < atol.size(); ++i) {
    if (!(atol[i] >= 0.0)) throw ConfigError("atol must be nonnegative");
    if (atol[i] > 0.0) any_positive = true;
  }
  if (!any_positive) throw ConfigError("atol and rtol cannot both be zero");
}

double weighted_error_norm(const Vector& u, const Vector& u_tilde, const ToleranceSpec& tol, NormKind norm) {
  if (u.size() != u_tilde.size()) throw Error("weighted_error_norm: dimension mismatch");
  const auto n = u.size();
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sc = tol.atol_at(i) + tol.rtol * std::max(std::abs(u[i]), std::abs(u_tilde[i]));
    const double e = std::abs(u[i] - u_tilde[i]) / sc;
    if (norm == NormKind::Inf)
      acc = std::max(acc, e);
    else
      acc += e * e;
  }
  return norm == NormKind::Inf ? acc : std::sqrt(acc / static_cast<double>(n));
}

std::string to_string(AdaptKind k) {
  switch (k) {
    case AdaptKind::None: return "none";
    case AdaptKind::Basic: return "basic";
    case AdaptKind::DSP: return "dsp";
  }
  return "?";
}

AdaptKind parse_adapt_kind(const std::string& s) {
  if (s == "none") return AdaptKind::None;
  if (s == "basic") return AdaptKind::Basic;
  if (s == "dsp") return AdaptKind::DSP;
  throw ConfigError("unknown adapt kind '" + s + "' (expected none, basic or dsp)");
}

void AdaptConfig::validate() const {
  if (!(clip_low > 0.0 && clip_low < 1.0 && clip_high > 1.0)) throw ConfigError("adapt: need 0 < clip_low < 1 < clip_high");
  if (!(safety > 0.0 && safety <= 1.0)) throw ConfigError("adapt: safety must lie in (0, 1]");
  if (!(reject_factor > 0.0 && reject_factor <= 1.0)) throw ConfigError("adapt: reject_factor must lie in (0, 1]");
  if (!(dt_min >= 0.0 && dt_max > dt_min)) throw ConfigError("adapt: need 0 <= dt_min < dt_max");
}

AdaptDecision adapt_decide(const AdaptConfig& cfg, double werr, int order_for_control, double dt,
                           bool just_rejected, const AdaptHistory* history) {
  AdaptDecision d;
  d.werr = werr;
  if (cfg.kind == AdaptKind::None) {
    d.accept = true;
    d.factor = 1.0;
    d.next_dt = dt;
    return d;
  }
  d.accept = werr <= 1.0;
  const double k = static_cast<double>(order_for_control + 1);
  double factor;
  const bool filtered = cfg.kind == AdaptKind::DSP && d.accept && history && history->prev_werr && history->prev_dt;
  if (filtered) {
    const auto& f = cfg.dsp_filter;
    const double tiny = 1e-16;
    factor = cfg.safety * std::pow(std::max(werr, tiny), -f.beta1 / k) *
             std::pow(std::max(*history->prev_werr, tiny), -f.beta2 / k) *
             std::pow(dt / *history->prev_dt, -f.alpha2);
  } else {
    factor = cfg.safety * std::pow(werr, -1.0 / k);
  }
  if (std::isnan(factor)) factor = cfg.clip_low;
  factor = std::clamp(factor, cfg.clip_low, cfg.clip_high);
  if (just_rejected) factor = std::min(factor, 1.0);
  if (!d.accept) factor *= cfg.reject_factor;
  d.factor = factor;
  d.next_dt = std::clamp(dt * factor, cfg.dt_min, cfg.dt_max);
  return d;
}

void adapt_record(AdaptHistory& h, double werr, double dt) {
  h.prev_werr = werr;
  h.prev_dt = dt;
}

}  // namespace odekit

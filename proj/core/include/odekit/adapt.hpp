#pragma once

#include "odekit/types.hpp"

#include <limits>
#include <optional>
#include <string>

namespace odekit {

struct ToleranceSpec {
  Vector atol = Vector::Constant(1, 1e-6);  // size 1 broadcasts
  double rtol = 1e-6;

  static ToleranceSpec scalar(double atol, double rtol);
  static ToleranceSpec vector(const Vector& atol, double rtol);
  double atol_at(Eigen::Index i) const { return atol.size() == 1 ? atol[0] : atol[i]; }
  void validate(std::size_t n) const;
};

enum class NormKind { Two, Inf };

double weighted_error_norm(const Vector& u, const Vector& u_tilde, const ToleranceSpec& tol,
                           NormKind norm = NormKind::Inf);

enum class AdaptKind { None, Basic, DSP };
std::string to_string(AdaptKind k);
AdaptKind parse_adapt_kind(const std::string& s);

struct DSPFilter {
  double beta1 = 0.25;
  double beta2 = 0.25;
  double alpha2 = 0.25;
};

struct AdaptConfig {
  AdaptKind kind = AdaptKind::Basic;
  double clip_low = 0.1;
  double clip_high = 10.0;
  double safety = 0.9;
  double reject_factor = 0.5;
  DSPFilter dsp_filter;
  double dt_min = 0.0;
  double dt_max = std::numeric_limits<double>::infinity();
  NormKind norm = NormKind::Inf;

  void validate() const;
};

struct AdaptDecision {
  bool accept = true;
  double next_dt = 0.0;
  double werr = 0.0;
  double factor = 1.0;  // before dt_min/dt_max clamping
};

/** @brief Error and step-ratio history used by the DSP filter. */
struct AdaptHistory {
  std::optional<double> prev_werr;
  std::optional<double> prev_dt;
};

AdaptDecision adapt_decide(const AdaptConfig& cfg, double werr, int order_for_control, double dt,
                           bool just_rejected, const AdaptHistory* history = nullptr);

/** @brief Records an accepted step into the DSP history. */
void adapt_record(AdaptHistory& h, double werr, double dt);

}  // namespace odekit

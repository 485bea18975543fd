#pragma once

#include "odekit/types.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace odekit {

enum class Family { ERK, Theta, ARKIMEX, RosW, BDF };
std::string to_string(Family f);

/** @brief Butcher coefficients; A lower triangular (strictly for explicit). */
struct ButcherTableau {
  std::string name;
  Matrix A;
  Vector b;
  Vector c;
  std::optional<Vector> b_hat;
  int p = 1;
  int p_hat = 0;
  std::optional<Matrix> bstar;  // s x p*, B*_i(theta) = sum_j bstar(i,j) theta^(j+1)
  bool l_stable = false;

  int stages() const { return static_cast<int>(b.size()); }
  bool is_explicit() const;
  bool has_embedded() const { return b_hat.has_value(); }
};

struct IMEXTableau {
  std::string name;
  ButcherTableau explicit_part;
  ButcherTableau implicit_part;
  std::optional<Matrix> bstar;  // shared by both parts
  int p = 1;
  int p_hat = 0;
  bool stiffly_accurate = false;
  bool l_stable = false;

  int stages() const { return explicit_part.stages(); }
  bool has_embedded() const { return explicit_part.b_hat.has_value(); }
};

struct RosTransform {
  Matrix omega;        // A Gamma^-1
  Matrix d;            // diag(1/gamma_ii) - Gamma^-1
  Vector m;            // b Gamma^-1
  std::optional<Vector> m_hat;
  Vector gamma_sums;   // sum_{j<=i} gamma_ij
  Vector gamma_diag;
  bool has_explicit_rows = false;
};

struct RosTableau {
  std::string name;
  Matrix Gamma;
  Matrix A;
  Vector b;
  std::optional<Vector> b_hat;
  int p = 1;
  int p_hat = 0;
  bool w_method = false;
  bool l_stable = false;
  RosTransform transform;

  int stages() const { return static_cast<int>(b.size()); }
  Vector alpha() const { return A.rowwise().sum(); }
  bool has_embedded() const { return b_hat.has_value(); }
};

/** @brief Variable-step BDF of fixed order; coefficients generated per step. */
struct BDFDescriptor {
  std::string name;
  int order = 1;
};

using Tableau = std::variant<ButcherTableau, IMEXTableau, RosTableau, BDFDescriptor>;

Family family_of(const Tableau& t);
const std::string& name_of(const Tableau& t);
int order_of(const Tableau& t);
int embedded_order_of(const Tableau& t);

/** @brief Throws ConfigError listing the available names when unknown. */
const Tableau& registry_get(const std::string& name);
std::vector<std::string> registry_names();

/** @brief theta-method in endpoint form: [[0,0],[1-theta,theta]]. */
ButcherTableau theta_tableau(double theta);

struct OrderResidual {
  std::string id;  // e.g. "b:[[],[]]" for the tree and weight vector used
  int order = 0;
  double value = 0.0;
};

std::vector<OrderResidual> check_order_conditions(const Tableau& t, int up_to);
std::vector<OrderResidual> check_order_conditions(const ButcherTableau& t, const Vector& weights, int up_to);
double max_residual(const std::vector<OrderResidual>& r);

RosTransform ros_transform(const Matrix& Gamma, const Matrix& A, const Vector& b,
                           const std::optional<Vector>& b_hat);

/** @brief B*(theta) weights. */
Vector dense_eval(const Matrix& bstar, double theta);
Vector dense_eval(const ButcherTableau& t, double theta);

/** @brief d u'/d t_{n+1} weights of the BDF formula on nodes x[0] = t_{n+1}, x[1] = t_n, ... */
Vector bdf_coefficients(const std::vector<double>& nodes);

/** @brief Digest of all coefficients for summaries. */
std::string coefficient_digest(const Tableau& t);

}  // namespace odekit

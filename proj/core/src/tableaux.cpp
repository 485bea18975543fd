#include "odekit/tableaux.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <mutex>
#include <sstream>
#include <type_traits>

namespace odekit {

std::string to_string(Family f) {
  switch (f) {
    case Family::ERK: return "rk";
    case Family::Theta: return "theta";
    case Family::ARKIMEX: return "arkimex";
    case Family::RosW: return "rosw";
    case Family::BDF: return "bdf";
  }
  return "?";
}

bool ButcherTableau::is_explicit() const {
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = i; j < A.cols(); ++j)
      if (A(i, j) != 0.0) return false;
  return true;
}

namespace {

Matrix mat(int s, std::initializer_list<std::initializer_list<double>> rows) {
  Matrix A = Matrix::Zero(s, s);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double v : row) A(i, j++) = v;
    ++i;
  }
  return A;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

ButcherTableau erk(std::string name, Matrix A, Vector b, int p, std::optional<Vector> b_hat = std::nullopt,
                   int p_hat = 0) {
  ButcherTableau t;
  t.name = std::move(name);
  t.c = A.rowwise().sum();
  t.A = std::move(A);
  t.b = std::move(b);
  t.b_hat = std::move(b_hat);
  t.p = p;
  t.p_hat = p_hat;
  return t;
}

ButcherTableau make_euler() {
  auto t = erk("euler", mat(1, {{0.0}}), vec({1.0}), 1);
  Matrix bs(1, 1);
  bs << 1.0;
  t.bstar = bs;
  return t;
}

ButcherTableau make_rk4() {
  auto t = erk("rk4", mat(4, {{}, {0.5}, {0.0, 0.5}, {0.0, 0.0, 1.0}}), vec({1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6}), 4);
  Matrix bs(4, 3);
  bs << 1.0, -1.5, 2.0 / 3, 0.0, 1.0, -2.0 / 3, 0.0, 1.0, -2.0 / 3, 0.0, -0.5, 2.0 / 3;
  t.bstar = bs;
  return t;
}

ButcherTableau make_ssp104() {
  const double a = 1.0 / 6, q = 1.0 / 15;
  Matrix A = Matrix::Zero(10, 10);
  for (int i = 1; i < 5; ++i)
    for (int j = 0; j < i; ++j) A(i, j) = a;
  for (int i = 5; i < 10; ++i) {
    for (int j = 0; j < 5; ++j) A(i, j) = q;
    for (int j = 5; j < i; ++j) A(i, j) = a;
  }
  return erk("ssp-rk104", A, Vector::Constant(10, 0.1), 4);
}

ButcherTableau make_bs3() {
  return erk("bs3", mat(4, {{}, {0.5}, {0.0, 0.75}, {2.0 / 9, 1.0 / 3, 4.0 / 9}}), vec({2.0 / 9, 1.0 / 3, 4.0 / 9, 0.0}),
             3, vec({7.0 / 24, 0.25, 1.0 / 3, 0.125}), 2);
}

ButcherTableau make_dp5() {
  Matrix A = mat(7, {{},
                     {1.0 / 5},
                     {3.0 / 40, 9.0 / 40},
                     {44.0 / 45, -56.0 / 15, 32.0 / 9},
                     {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
                     {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
                     {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}});
  Vector b = A.row(6).transpose();
  Vector bh = vec({5179.0 / 57600, 0.0, 7571.0 / 16695, 393.0 / 640, -92097.0 / 339200, 187.0 / 2100, 1.0 / 40});
  auto t = erk("dp5", A, b, 5, bh, 4);
  // Shampine's fourth-order continuous extension
  Matrix bs(7, 4);
  bs << 1.0, -8048581381.0 / 2820520608, 8663915743.0 / 2820520608, 0.0,
        0.0, 0.0, 0.0, 0.0,
        0.0, 131558114200.0 / 32700410799, -68118460800.0 / 10900136933, 0.0,
        0.0, -1754552775.0 / 470086768, 14199869525.0 / 1410260304, 0.0,
        0.0, 127303824393.0 / 49829197408, -318862633887.0 / 49829197408, 0.0,
        0.0, -282668133.0 / 205662961, 2019193451.0 / 616988883, 0.0,
        0.0, 40617522.0 / 29380423, -110615467.0 / 29380423, 0.0;
  for (Eigen::Index i = 0; i < 7; ++i) bs(i, 3) = t.b[i] - (bs(i, 0) + bs(i, 1) + bs(i, 2));
  t.bstar = bs;
  return t;
}

IMEXTableau imex(std::string name, Matrix Ae, Matrix Ai, Vector be, Vector bi, int p, std::optional<Vector> bh_e,
                 std::optional<Vector> bh_i, int p_hat) {
  IMEXTableau t;
  t.name = name;
  t.explicit_part = erk(name + "/explicit", std::move(Ae), std::move(be), p, std::move(bh_e), p_hat);
  t.implicit_part = erk(name + "/implicit", std::move(Ai), std::move(bi), p, std::move(bh_i), p_hat);
  t.p = p;
  t.p_hat = p_hat;
  const auto s = t.implicit_part.stages();
  t.stiffly_accurate = (t.implicit_part.A.row(s - 1).transpose() - t.implicit_part.b).cwiseAbs().maxCoeff() == 0.0;
  t.l_stable = true;
  return t;
}

IMEXTableau make_ars122() {
  auto t = imex("ars122", mat(2, {{}, {0.5}}), mat(2, {{}, {0.0, 0.5}}), vec({0.0, 1.0}), vec({0.0, 1.0}), 2,
                vec({0.5, 0.5}), vec({0.5, 0.5}), 1);
  Matrix bs(2, 2);
  bs << 1.0, -1.0, 0.0, 1.0;
  t.bstar = bs;
  t.l_stable = false;
  return t;
}

IMEXTableau make_ars443() {
  Matrix Ai = mat(5, {{},
                      {0.0, 0.5},
                      {0.0, 1.0 / 6, 0.5},
                      {0.0, -0.5, 0.5, 0.5},
                      {0.0, 1.5, -1.5, 0.5, 0.5}});
  Matrix Ae = mat(5, {{},
                      {0.5},
                      {11.0 / 18, 1.0 / 18},
                      {5.0 / 6, -5.0 / 6, 0.5},
                      {0.25, 1.75, 0.75, -1.75}});
  Vector bi = Ai.row(4).transpose();
  Vector be = Ae.row(4).transpose();
  return imex("ars443", Ae, Ai, be, bi, 3, std::nullopt, std::nullopt, 0);
}

IMEXTableau make_ark3() {
  const double g = 1767732205903.0 / 4055673282236.0;
  Matrix Ae = mat(4, {{},
                      {1767732205903.0 / 2027836641118.0},
                      {5535828885825.0 / 10492691773637.0, 788022342437.0 / 10882634858940.0},
                      {6485989280629.0 / 16251701735622.0, -4246266847089.0 / 9704473918619.0,
                       10755448449292.0 / 10357097424841.0}});
  Vector b = vec({1471266399579.0 / 7840856788654.0, -4482444167858.0 / 7529755066697.0,
                  11266239266428.0 / 11593286722821.0, g});
  Matrix Ai = mat(4, {{},
                      {g, g},
                      {2746238789719.0 / 10658868560708.0, -640167445237.0 / 6845629431997.0, g},
                      {b[0], b[1], b[2], g}});
  Vector bh = vec({2756255671327.0 / 12835298489170.0, -10771552573575.0 / 22201958757719.0,
                   9247589265047.0 / 10645013368117.0, 2193209047091.0 / 5459859503100.0});
  auto t = imex("ark3", Ae, Ai, b, b, 3, bh, bh, 2);
  Matrix bs(4, 2);
  bs << 4655552711362.0 / 22874653954995.0, -215264564351.0 / 13552729205753.0,
      -18682724506714.0 / 9892148508045.0, 17870216137069.0 / 13817060693119.0,
      34259539580243.0 / 13192909600954.0, -28141676662227.0 / 17317692491321.0,
      584795268549.0 / 6622622206610.0, 2508943948391.0 / 7218656332882.0;
  t.bstar = bs;
  return t;
}

IMEXTableau make_ark4() {
  Matrix Ae = mat(6, {{},
                      {0.5},
                      {13861.0 / 62500.0, 6889.0 / 62500.0},
                      {-116923316275.0 / 2393684061468.0, -2731218467317.0 / 15368042101831.0,
                       9408046702089.0 / 11113171139209.0},
                      {-451086348788.0 / 2902428689909.0, -2682348792572.0 / 7519795681897.0,
                       12662868775082.0 / 11960479115383.0, 3355817975965.0 / 11060851509271.0},
                      {647845179188.0 / 3216320057751.0, 73281519250.0 / 8382639484533.0,
                       552539513391.0 / 3454668386233.0, 3354512671639.0 / 8306763924573.0, 4040.0 / 17871.0}});
  Vector b = vec({82889.0 / 524892.0, 0.0, 15625.0 / 83664.0, 69875.0 / 102672.0, -2260.0 / 8211.0, 0.25});
  Matrix Ai = mat(6, {{},
                      {0.25, 0.25},
                      {8611.0 / 62500.0, -1743.0 / 31250.0, 0.25},
                      {5012029.0 / 34652500.0, -654441.0 / 2922500.0, 174375.0 / 388108.0, 0.25},
                      {15267082809.0 / 155376265600.0, -71443401.0 / 120774400.0, 730878875.0 / 902184768.0,
                       2285395.0 / 8070912.0, 0.25},
                      {b[0], b[1], b[2], b[3], b[4], 0.25}});
  Vector bh = vec({4586570599.0 / 29645900160.0, 0.0, 178811875.0 / 945068544.0, 814220225.0 / 1159782912.0,
                   -3700637.0 / 11593932.0, 61727.0 / 225920.0});
  return imex("ark4", Ae, Ai, b, b, 4, bh, bh, 3);
}

RosTableau ros(std::string name, Matrix Gamma, Matrix A, Vector b, Vector bh, int p, int p_hat, bool w, bool l) {
  RosTableau t;
  t.name = std::move(name);
  t.Gamma = std::move(Gamma);
  t.A = std::move(A);
  t.b = std::move(b);
  t.b_hat = std::move(bh);
  t.p = p;
  t.p_hat = p_hat;
  t.w_method = w;
  t.l_stable = l;
  t.transform = ros_transform(t.Gamma, t.A, t.b, t.b_hat);
  return t;
}

RosTableau make_ra3pw() {
  const double g = 7.8867513459481287e-01;
  return ros("ra3pw",
             mat(3, {{g}, {-1.5773502691896257, g}, {-0.67075317547305480, -0.17075317547305482, g}}),
             mat(3, {{}, {1.5773502691896257}, {0.5, 0.0}}),
             vec({0.10566243270259355, 0.049038105676657971, 0.84529946162074843}),
             vec({-0.17863279495408180, 1.0 / 3.0, 0.84529946162074843}), 3, 2, false, false);
}

RosTableau make_ra34pw2() {
  const double g = 4.3586652150845900e-01;
  return ros("ra34pw2",
             mat(4, {{g},
                     {-8.7173304301691801e-01, g},
                     {-9.0338057013044082e-01, 5.4180672388095326e-02, g},
                     {2.4212380706095346e-01, -1.2232505839045147e+00, 5.4526025533510214e-01, g}}),
             mat(4, {{},
                     {8.7173304301691801e-01},
                     {8.4457060015369423e-01, -1.1299064236484185e-01},
                     {0.0, 0.0, 1.0}}),
             vec({2.4212380706095346e-01, -1.2232505839045147e+00, 1.5452602553351020e+00, 4.3586652150845900e-01}),
             vec({3.7810903145819369e-01, -9.6042292212423178e-02, 0.5, 2.1793326075422950e-01}), 3, 2, true, true);
}

RosTableau make_rodas3() {
  return ros("rodas3",
             mat(4, {{0.5}, {1.0, 0.5}, {-0.25, -0.25, 0.5}, {1.0 / 12, 1.0 / 12, -2.0 / 3, 0.5}}),
             mat(4, {{}, {0.0}, {1.0, 0.0}, {0.75, -0.25, 0.5}}), vec({5.0 / 6, -1.0 / 6, -1.0 / 6, 0.5}),
             vec({0.75, -0.25, 0.5, 0.0}), 3, 2, false, true);
}

RosTableau make_sandu3() {
  const double g = 0.43586652150845899941601945119356;
  return ros("sandu3",
             mat(3, {{g}, {-0.19294655696029095575009695436041, g}, {0.0, 1.74927148125794685173529749738960, g}}),
             mat(3, {{}, {g}, {g, 0.0}}),
             vec({-0.75457412385404315829818998646589, 1.94100407061964420292840123379419,
                  -0.18642994676560104463021124732829}),
             vec({-1.53358745784149585370766523913002, 2.81745131148625772213931745457622,
                  -0.28386385364476186843165221544619}),
             3, 2, false, true);
}

std::map<std::string, Tableau> build_registry() {
  std::map<std::string, Tableau> r;
  auto put = [&r](Tableau t) {
    std::string n = name_of(t);
    r.emplace(std::move(n), std::move(t));
  };
  put(make_euler());
  put(erk("ssp-rk2", mat(2, {{}, {1.0}}), vec({0.5, 0.5}), 2));
  put(erk("ssp-rk3", mat(3, {{}, {1.0}, {0.25, 0.25}}), vec({1.0 / 6, 1.0 / 6, 2.0 / 3}), 3));
  put(make_ssp104());
  put(make_rk4());
  put(make_bs3());
  put(make_dp5());
  auto be = theta_tableau(1.0);
  be.name = "beuler";
  be.l_stable = true;
  put(be);
  auto cn = theta_tableau(0.5);
  cn.name = "cn";
  put(cn);
  put(theta_tableau(0.5));
  put(make_ars122());
  put(make_ars443());
  put(make_ark3());
  put(make_ark4());
  put(make_ra3pw());
  put(make_ra34pw2());
  put(make_rodas3());
  put(make_sandu3());
  for (int k = 1; k <= 6; ++k) put(BDFDescriptor{"bdf" + std::to_string(k), k});
  return r;
}

const std::map<std::string, Tableau>& registry() {
  static const std::map<std::string, Tableau> r = build_registry();
  return r;
}

}  // namespace

ButcherTableau theta_tableau(double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in (0, 1]");
  ButcherTableau t;
  t.name = "theta";
  t.A = mat(2, {{0.0, 0.0}, {1.0 - theta, theta}});
  t.b = vec({1.0 - theta, theta});
  t.c = vec({0.0, 1.0});
  t.p = theta == 0.5 ? 2 : 1;
  return t;
}

Family family_of(const Tableau& t) {
  struct V {
    Family operator()(const ButcherTableau& b) const { return b.is_explicit() ? Family::ERK : Family::Theta; }
    Family operator()(const IMEXTableau&) const { return Family::ARKIMEX; }
    Family operator()(const RosTableau&) const { return Family::RosW; }
    Family operator()(const BDFDescriptor&) const { return Family::BDF; }
  };
  return std::visit(V{}, t);
}

const std::string& name_of(const Tableau& t) {
  return std::visit([](const auto& x) -> const std::string& { return x.name; }, t);
}

int order_of(const Tableau& t) {
  return std::visit(
      [](const auto& x) -> int {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, BDFDescriptor>)
          return x.order;
        else
          return x.p;
      },
      t);
}

int embedded_order_of(const Tableau& t) {
  return std::visit(
      [](const auto& x) -> int {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, BDFDescriptor>)
          return x.order - 1;
        else
          return x.p_hat;
      },
      t);
}

const Tableau& registry_get(const std::string& name) {
  const auto& r = registry();
  auto it = r.find(name);
  if (it == r.end()) {
    std::string msg = "unknown scheme '" + name + "'; available:";
    for (const auto& [k, v] : r) msg += " " + k;
    throw ConfigError(msg);
  }
  return it->second;
}

std::vector<std::string> registry_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : registry()) out.push_back(k);
  return out;
}

RosTransform ros_transform(const Matrix& Gamma, const Matrix& A, const Vector& b, const std::optional<Vector>& b_hat) {
  const auto s = Gamma.rows();
  if (Gamma.cols() != s || A.rows() != s || A.cols() != s || b.size() != s)
    throw ConfigError("ros_transform: inconsistent coefficient shapes");
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = i + 1; j < s; ++j)
      if (Gamma(i, j) != 0.0) throw ConfigError("ros_transform: Gamma must be lower triangular");

  RosTransform t;
  t.gamma_diag = Gamma.diagonal();
  t.gamma_sums = Gamma.rowwise().sum();
  for (Eigen::Index i = 0; i < s; ++i)
    if (Gamma(i, i) == 0.0) t.has_explicit_rows = true;
  if (t.has_explicit_rows) {
    // Explicit rows make Gamma singular; steppers then use the slope form directly.
    if (Gamma(0, 0) == 0.0 && s == 1) throw ConfigError("ros_transform: structurally singular Gamma");
    return t;
  }
  const Matrix Ginv = Gamma.triangularView<Eigen::Lower>().solve(Matrix::Identity(s, s));
  t.omega = A * Ginv;
  t.d = Matrix(t.gamma_diag.cwiseInverse().asDiagonal()) - Ginv;
  t.m = (b.transpose() * Ginv).transpose();
  if (b_hat) t.m_hat = Vector((b_hat->transpose() * Ginv).transpose());
  return t;
}

Vector dense_eval(const Matrix& bstar, double theta) {
  Vector w = Vector::Zero(bstar.rows());
  double pw = theta;
  for (Eigen::Index j = 0; j < bstar.cols(); ++j) {
    w += bstar.col(j) * pw;
    pw *= theta;
  }
  return w;
}

Vector dense_eval(const ButcherTableau& t, double theta) {
  if (!t.bstar) throw ConfigError("tableau " + t.name + " has no dense-output coefficients");
  return dense_eval(*t.bstar, theta);
}

Vector bdf_coefficients(const std::vector<double>& x) {
  const std::size_t k = x.size();
  if (k < 2) throw ConfigError("bdf_coefficients: need at least two nodes");
  Vector a(static_cast<Eigen::Index>(k));
  // Derivative at x[0] of the Lagrange basis polynomial of node j.
  double a0 = 0.0;
  for (std::size_t m = 1; m < k; ++m) a0 += 1.0 / (x[0] - x[m]);
  a[0] = a0;
  for (std::size_t j = 1; j < k; ++j) {
    double num = 1.0, den = 1.0;
    for (std::size_t m = 0; m < k; ++m) {
      if (m == j) continue;
      den *= x[j] - x[m];
      if (m != 0) num *= x[0] - x[m];
    }
    a[static_cast<Eigen::Index>(j)] = num / den;
  }
  return a;
}

namespace {

void mix(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
}

void mix(std::uint64_t& h, const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      double v = m(i, j);
      mix(h, &v, sizeof v);
    }
}

}  // namespace

std::string coefficient_digest(const Tableau& t) {
  std::uint64_t h = 1469598103934665603ULL;
  struct V {
    std::uint64_t& h;
    void operator()(const ButcherTableau& b) const {
      mix(h, b.A);
      mix(h, b.b);
      if (b.b_hat) mix(h, *b.b_hat);
    }
    void operator()(const IMEXTableau& b) const {
      (*this)(b.explicit_part);
      (*this)(b.implicit_part);
    }
    void operator()(const RosTableau& r) const {
      mix(h, r.Gamma);
      mix(h, r.A);
      mix(h, r.b);
      if (r.b_hat) mix(h, *r.b_hat);
    }
    void operator()(const BDFDescriptor& b) const { mix(h, &b.order, sizeof b.order); }
  };
  std::visit(V{h}, t);
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace odekit

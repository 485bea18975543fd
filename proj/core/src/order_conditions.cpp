#include "odekit/tableaux.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace odekit {

namespace {

// Rooted tree with vertex colors; children kept in canonical order.
struct Tree {
  int color = 0;
  std::vector<Tree> kids;

  int order() const {
    int n = 1;
    for (const auto& k : kids) n += k.order();
    return n;
  }
  double density() const {
    double g = order();
    for (const auto& k : kids) g *= k.density();
    return g;
  }
  std::string key(bool colored) const {
    std::string s = colored ? (color == 0 ? "E" : "I") : "";
    s += "[";
    for (std::size_t i = 0; i < kids.size(); ++i) {
      if (i) s += ",";
      s += kids[i].key(colored);
    }
    return s + "]";
  }
};

void partitions(int n, int maxpart, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (n == 0) {
    out.push_back(cur);
    return;
  }
  for (int k = std::min(n, maxpart); k >= 1; --k) {
    cur.push_back(k);
    partitions(n - k, k, cur, out);
    cur.pop_back();
  }
}

std::vector<Tree> trees_of_order(int order, int ncolors, bool colored);

// Multisets of trees for a partition, avoiding duplicate orderings.
void combine(const std::vector<int>& parts, std::size_t idx, std::size_t min_index_same, int ncolors, bool colored,
             std::vector<Tree>& cur, std::vector<std::vector<Tree>>& out) {
  if (idx == parts.size()) {
    out.push_back(cur);
    return;
  }
  auto options = trees_of_order(parts[idx], ncolors, colored);
  std::size_t start = (idx > 0 && parts[idx] == parts[idx - 1]) ? min_index_same : 0;
  for (std::size_t i = start; i < options.size(); ++i) {
    cur.push_back(options[i]);
    combine(parts, idx + 1, i, ncolors, colored, cur, out);
    cur.pop_back();
  }
}

std::vector<Tree> trees_of_order(int order, int ncolors, bool colored) {
  std::vector<Tree> out;
  if (order == 1) {
    for (int c = 0; c < ncolors; ++c) out.push_back(Tree{c, {}});
    return out;
  }
  std::vector<std::vector<int>> parts;
  std::vector<int> cur;
  partitions(order - 1, order - 1, cur, parts);
  for (const auto& p : parts) {
    std::vector<std::vector<Tree>> kidsets;
    std::vector<Tree> tmp;
    combine(p, 0, 0, ncolors, colored, tmp, kidsets);
    for (const auto& ks : kidsets)
      for (int c = 0; c < ncolors; ++c) out.push_back(Tree{c, ks});
  }
  return out;
}

// Elementary weights per stage. Gamma adds the Rosenbrock term on single-child vertices.
Vector phi(const Tree& t, const std::vector<const Matrix*>& A, const Matrix* Gamma) {
  const auto s = A[0]->rows();
  Vector v = Vector::Ones(s);
  for (const auto& k : t.kids) v = v.cwiseProduct(*A[static_cast<std::size_t>(k.color)] * phi(k, A, Gamma));
  if (Gamma && t.kids.size() == 1) v += *Gamma * phi(t.kids[0], A, Gamma);
  return v;
}

std::vector<OrderResidual> check_trees(const std::vector<const Matrix*>& A, const std::vector<const Vector*>& b,
                                       const Matrix* Gamma, int up_to, const std::string& prefix) {
  std::vector<OrderResidual> res;
  const int ncolors = static_cast<int>(A.size());
  for (int o = 1; o <= up_to; ++o) {
    for (const auto& t : trees_of_order(o, ncolors, ncolors > 1)) {
      const double v = b[static_cast<std::size_t>(t.color)]->dot(phi(t, A, Gamma)) - 1.0 / t.density();
      res.push_back({prefix + t.key(ncolors > 1), o, std::abs(v)});
    }
  }
  return res;
}

}  // namespace

std::vector<OrderResidual> check_order_conditions(const ButcherTableau& t, const Vector& weights, int up_to) {
  return check_trees({&t.A}, {&weights}, nullptr, up_to, "");
}

std::vector<OrderResidual> check_order_conditions(const Tableau& tab, int up_to) {
  if (up_to < 1 || up_to > 6) throw ConfigError("check_order_conditions: order must be in 1..6");
  struct V {
    int up_to;
    std::vector<OrderResidual> operator()(const ButcherTableau& t) const {
      return check_trees({&t.A}, {&t.b}, nullptr, up_to, "b:");
    }
    std::vector<OrderResidual> operator()(const IMEXTableau& t) const {
      return check_trees({&t.explicit_part.A, &t.implicit_part.A}, {&t.explicit_part.b, &t.implicit_part.b},
                         nullptr, up_to, "b:");
    }
    std::vector<OrderResidual> operator()(const RosTableau& t) const {
      return check_trees({&t.A}, {&t.b}, &t.Gamma, up_to, "b:");
    }
    std::vector<OrderResidual> operator()(const BDFDescriptor& d) const {
      // Exactness of the constant-step formula on polynomials t^q, q <= up_to.
      std::vector<double> x;
      for (int j = 0; j <= d.order; ++j) x.push_back(-static_cast<double>(j));
      const Vector a = bdf_coefficients(x);
      std::vector<OrderResidual> res;
      for (int q = 1; q <= up_to; ++q) {
        double s = 0.0;
        for (int j = 0; j <= d.order; ++j) s += a[j] * std::pow(x[static_cast<std::size_t>(j)], q);
        const double exact = q == 1 ? 1.0 : 0.0;  // derivative of t^q at 0
        res.push_back({"t^" + std::to_string(q), q, std::abs(s - exact)});
      }
      return res;
    }
  };
  return std::visit(V{up_to}, tab);
}

double max_residual(const std::vector<OrderResidual>& r) {
  double m = 0.0;
  for (const auto& x : r) m = std::max(m, x.value);
  return m;
}

}  // namespace odekit

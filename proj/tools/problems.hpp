#pragma once

#include <odekit/odekit.hpp>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace odekit::cli {

using ParamMap = std::map<std::string, double>;

/** @brief A scalar objective psi(u(t_F)) with its gradient. */
struct Objective {
  std::string name;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

struct ProblemInstance {
  std::string name;
  Problem problem;
  Vector u0;
  std::vector<std::string> param_names;  // order of the columns of param_jacobian
  ParamMap params;
  std::function<Vector(double)> exact;   // empty when no closed form is known
  std::optional<EventSpec> events;
  SolveOptions defaults;
  ToleranceSpec tolerances;
  std::string default_scheme;
};

struct LibraryEntry {
  std::string name;
  std::string description;
  ParamMap defaults;
};

const std::vector<LibraryEntry>& problem_library();

/** @brief Builds a problem; unknown names or parameters throw ConfigError. */
ProblemInstance build_problem(const std::string& name, const ParamMap& overrides = {});

/** @brief Parses "k=v,k2=v2". */
ParamMap parse_params(const std::string& text);

/** @brief "u<i>" selects component i at the final time. */
Objective make_objective(const std::string& spec, std::size_t dim);

}  // namespace odekit::cli

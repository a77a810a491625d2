#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fwsens/geometry.hpp"
#include "fwsens/objective.hpp"

namespace fwsens::cli {

using json = nlohmann::ordered_json;

/// Input validation failure; the message names the offending field.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// On-disk problem: {"name"?, "A", "b", "objective": {"Q", "c", "r"}, "x0"?}.
struct ProblemFile {
  std::optional<std::string> name;
  Matrix A;
  Vector b;
  Eigen::MatrixXd Q;
  Vector c;
  double r = 0.0;
  std::optional<Vector> x0;

  Polytope polytope() const { return Polytope(A, b); }
  QuadraticObjective objective() const { return QuadraticObjective(Q, c, r); }

  bool operator==(const ProblemFile& o) const {
    return name == o.name && A == o.A && b == o.b && Q == o.Q && c == o.c && r == o.r &&
           x0.has_value() == o.x0.has_value() && (!x0 || *x0 == *o.x0);
  }
};

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw InputError("unknown key '" + where + it.key() + "'");
  }
}

inline const json& require_key(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError("missing field '" + where + key + "'");
  return *it;
}

inline double read_real(const json& j, const std::string& field) {
  if (!j.is_number()) throw InputError("field '" + field + "' must be a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw InputError("field '" + field + "' must be finite");
  return x;
}

inline Vector read_vector(const json& j, const std::string& field) {
  if (!j.is_array()) throw InputError("field '" + field + "' must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = read_real(j[i], field + "[" + std::to_string(i) + "]");
  }
  return v;
}

inline Eigen::MatrixXd read_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw InputError("field '" + field + "' must be a non-empty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  Eigen::MatrixXd M;
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string rf = field + "[" + std::to_string(i) + "]";
    const Vector row = read_vector(j[i], rf);
    if (i == 0) {
      cols = static_cast<std::size_t>(row.size());
      if (cols == 0) throw InputError("field '" + rf + "' must not be empty");
      M.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (static_cast<std::size_t>(row.size()) != cols) {
      throw InputError("field '" + rf + "' has " + std::to_string(row.size()) + " entries, expected " +
                       std::to_string(cols));
    }
    M.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return M;
}

}  // namespace detail

inline json to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

template <typename Derived>
json matrix_to_json(const Eigen::MatrixBase<Derived>& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ProblemFile parse_problem(const json& j) {
  if (!j.is_object()) throw InputError("problem must be a JSON object");
  detail::reject_unknown_keys(j, {"name", "A", "b", "objective", "x0"}, "");
  ProblemFile p;
  if (auto it = j.find("name"); it != j.end()) {
    if (!it->is_string()) throw InputError("field 'name' must be a string");
    p.name = it->get<std::string>();
  }
  p.A = detail::read_matrix(detail::require_key(j, "A", ""), "A");
  p.b = detail::read_vector(detail::require_key(j, "b", ""), "b");
  if (p.b.size() != p.A.rows()) {
    throw InputError("field 'b' has " + std::to_string(p.b.size()) + " entries, expected " +
                     std::to_string(p.A.rows()));
  }
  const json& obj = detail::require_key(j, "objective", "");
  if (!obj.is_object()) throw InputError("field 'objective' must be an object");
  detail::reject_unknown_keys(obj, {"Q", "c", "r"}, "objective.");
  p.Q = detail::read_matrix(detail::require_key(obj, "Q", "objective."), "objective.Q");
  const auto n = p.A.cols();
  if (p.Q.rows() != n || p.Q.cols() != n) {
    throw InputError("field 'objective.Q' must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  p.c = detail::read_vector(detail::require_key(obj, "c", "objective."), "objective.c");
  if (p.c.size() != n) throw InputError("field 'objective.c' must have " + std::to_string(n) + " entries");
  p.r = detail::read_real(detail::require_key(obj, "r", "objective."), "objective.r");
  if (auto it = j.find("x0"); it != j.end()) {
    p.x0 = detail::read_vector(*it, "x0");
    if (p.x0->size() != n) throw InputError("field 'x0' must have " + std::to_string(n) + " entries");
  }
  try {
    (void)p.objective();
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("field 'objective.Q': ") + e.what());
  }
  return p;
}

inline json serialize_problem(const ProblemFile& p) {
  json j = json::object();
  if (p.name) j["name"] = *p.name;
  j["A"] = matrix_to_json(p.A);
  j["b"] = to_json(p.b);
  j["objective"] = {{"Q", matrix_to_json(p.Q)}, {"c", to_json(p.c)}, {"r", p.r}};
  if (p.x0) j["x0"] = to_json(*p.x0);
  return j;
}

inline json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(what + ": malformed JSON (" + e.what() + ")");
  } catch (const json::out_of_range& e) {
    // Number literals such as 1e400 overflow a double.
    throw InputError(what + ": non-finite number (" + e.what() + ")");
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ProblemFile load_problem(const std::string& path) { return parse_problem(parse_json_text(read_file(path), path)); }

/// A vector given inline ("[1, 0.5]") or as a path to a file holding a JSON array.
inline Vector parse_vector_arg(const std::string& arg, const std::string& field) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  const bool inline_array = first != std::string::npos && arg[first] == '[';
  const json j = inline_array ? parse_json_text(arg, field) : parse_json_text(read_file(arg), arg);
  return detail::read_vector(j, field);
}

}  // namespace fwsens::cli

#include "sigma2/kfield.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sigma2/errors.hpp"

namespace sigma2 {

double KField::eval(const Vec3& z) const {
  double quad = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) quad += z[i] * B[i][j] * z[j];
  return c0 + dot(a, z) + quad;
}

Vec3 KField::ambient_grad(const Vec3& z) const {
  Vec3 g = a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g[i] += 2.0 * B[i][j] * z[j];
  return g;
}

Vec3 KField::sphere_grad(const Vec3& z) const {
  const Vec3 g = ambient_grad(z);
  const double radial = dot(g, z);
  return {g[0] - radial * z[0], g[1] - radial * z[1], g[2] - radial * z[2]};
}

double KField::laplacian(const Vec3& z) const {
  double trB = B[0][0] + B[1][1] + B[2][2];
  double zBz = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) zBz += z[i] * B[i][j] * z[j];
  return 2.0 * trB - 6.0 * zBz - 2.0 * dot(a, z);
}

bool KField::is_constant() const {
  for (int i = 0; i < 3; ++i) {
    if (a[i] != 0.0) return false;
    for (int j = 0; j < 3; ++j)
      if (B[i][j] != 0.0) return false;
  }
  return true;
}

double KField::gradient_scale() const {
  double fro2 = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) fro2 += B[i][j] * B[i][j];
  return a.norm() + 2.0 * std::sqrt(fro2);
}

namespace {

double parse_number(const std::string& s, const char* what) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v))
    throw InputError("bad-kfield", std::string("expected a number for ") + what + ", got '" + s + "'");
  return v;
}

std::vector<double> parse_number_list(const std::string& s, size_t count, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item, what));
  if (out.size() != count)
    throw InputError("bad-kfield", std::string(what) + ": expected " + std::to_string(count) +
                                       " comma-separated numbers, got " + std::to_string(out.size()));
  return out;
}

KField from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("bad-kfield", "cannot open K JSON file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("bad-kfield", "malformed K JSON '" + path + "': " + e.what());
  }
  KField K;
  K.c0 = 0.0;
  if (j.contains("c0")) K.c0 = j.at("c0").get<double>();
  if (j.contains("a")) {
    auto arr = j.at("a");
    if (!arr.is_array() || arr.size() != 3)
      throw InputError("bad-kfield", "K JSON field 'a' must be an array of 3 numbers");
    for (int i = 0; i < 3; ++i) K.a[i] = arr.at(i).get<double>();
  }
  if (j.contains("B")) {
    auto mat = j.at("B");
    if (!mat.is_array() || mat.size() != 3)
      throw InputError("bad-kfield", "K JSON field 'B' must be a 3x3 array");
    for (int i = 0; i < 3; ++i) {
      auto row = mat.at(i);
      if (!row.is_array() || row.size() != 3)
        throw InputError("bad-kfield", "K JSON field 'B' must be a 3x3 array");
      for (int k = 0; k < 3; ++k) K.B[i][k] = row.at(k).get<double>();
    }
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < i; ++k)
        if (std::abs(K.B[i][k] - K.B[k][i]) > 1e-14 * (1.0 + std::abs(K.B[i][k])))
          throw InputError("bad-kfield", "K JSON field 'B' must be symmetric");
  }
  K.name = "json:" + path;
  return K;
}

} // namespace

KField parse_kfield(const std::string& spec) {
  if (spec.empty()) throw InputError("bad-kfield", "empty K specification");

  KField K;
  K.name = spec;

  if (spec == "2+z3") {
    K.c0 = 2.0;
    K.a = {0.0, 0.0, 1.0};
    return K;
  }

  const auto colon = spec.find(':');
  const std::string head = colon == std::string::npos ? spec : spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? std::string() : spec.substr(colon + 1);

  if (head == "const") {
    K.c0 = parse_number(rest, "const value");
    return K;
  }
  if (head == "linear") {
    auto v = parse_number_list(rest, 4, "linear coefficients");
    K.c0 = v[0];
    K.a = {v[1], v[2], v[3]};
    return K;
  }
  if (head == "quadric") {
    const double eps = parse_number(rest, "quadric eps");
    K.c0 = 1.0 - 2.0 * eps;
    K.B[0][0] = eps;
    K.B[1][1] = 1.5 * eps;
    K.B[2][2] = 3.0 * eps;
    return K;
  }
  if (head == "poly") {
    std::vector<std::string> parts;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ';')) parts.push_back(item);
    if (parts.size() != 3)
      throw InputError("bad-kfield", "poly spec needs 3 ';'-separated groups: c0; a1,a2,a3; b11,b12,b13,b22,b23,b33");
    K.c0 = parse_number(parts[0], "poly c0");
    auto lin = parse_number_list(parts[1], 3, "poly linear coefficients");
    K.a = {lin[0], lin[1], lin[2]};
    auto b = parse_number_list(parts[2], 6, "poly quadratic coefficients");
    K.B[0][0] = b[0];
    K.B[0][1] = K.B[1][0] = b[1];
    K.B[0][2] = K.B[2][0] = b[2];
    K.B[1][1] = b[3];
    K.B[1][2] = K.B[2][1] = b[4];
    K.B[2][2] = b[5];
    return K;
  }
  if (head == "json") {
    if (rest.empty()) throw InputError("bad-kfield", "json spec needs a path: json:<path>");
    return from_json_file(rest);
  }

  // Bare number → constant field.
  if (colon == std::string::npos) {
    K.c0 = parse_number(spec, "constant K");
    return K;
  }
  throw InputError("bad-kfield", "unknown K specification '" + spec + "'");
}

SphereField sample_kfield(const KField& K, const GridSpec& spec) {
  return SphereField::sampled(spec, [&K](const Vec3& z) { return K.eval(z); });
}

} // namespace sigma2

#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tunnel/errors.hpp"
#include "tunnel/potential.hpp"

namespace tunnel {

using json = nlohmann::json;

namespace detail {

inline double number_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ConfigError(std::string("potential: missing numeric parameter '") + key + "'");
  return j.at(key).get<double>();
}

inline std::vector<double> coefficient_field(const json& j) {
  if (!j.contains("coefficients") || !j.at("coefficients").is_array())
    throw ConfigError("potential: missing 'coefficients' array");
  std::vector<double> c;
  for (auto& x : j.at("coefficients")) {
    if (!x.is_number()) throw ConfigError("potential: coefficients must be numbers");
    c.push_back(x.get<double>());
  }
  return c;
}

}  // namespace detail

// {"kind": "quartic", "parameters": {"a": 1}}; kinds: quartic, pendulum,
// triple_well, island, polynomial.
inline Potential potential_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw ConfigError("potential: expected an object with a string 'kind'");
  std::string kind = j.at("kind").get<std::string>();
  json p = j.value("parameters", json::object());
  if (!p.is_object()) throw ConfigError("potential: 'parameters' must be an object");
  try {
    if (kind == "quartic" || kind == "quartic_double_well")
      return Potential::quartic_double_well(detail::number_field(p, "a"));
    if (kind == "pendulum") return Potential::pendulum(detail::number_field(p, "gamma"));
    if (kind == "triple_well")
      return Potential::triple_well(detail::number_field(p, "a"), detail::number_field(p, "b"));
    if (kind == "island") return Potential::island(detail::coefficient_field(p));
    if (kind == "polynomial") return Potential::polynomial(detail::coefficient_field(p));
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("potential: ") + e.what());
  }
  throw ConfigError("potential: unknown kind '" + kind + "'");
}

inline json potential_to_json(const Potential& v) {
  json j;
  switch (v.kind()) {
    case PotentialKind::quartic_double_well:
      j = {{"kind", "quartic"}, {"parameters", {{"a", v.a()}}}};
      break;
    case PotentialKind::pendulum:
      j = {{"kind", "pendulum"}, {"parameters", {{"gamma", v.gamma()}}}};
      break;
    case PotentialKind::triple_well:
      j = {{"kind", "triple_well"}, {"parameters", {{"a", v.a()}, {"b", v.b()}}}};
      break;
    case PotentialKind::island:
      j = {{"kind", "island"}, {"parameters", {{"coefficients", v.coefficients()}}}};
      break;
    case PotentialKind::polynomial:
      j = {{"kind", "polynomial"}, {"parameters", {{"coefficients", v.coefficients()}}}};
      break;
  }
  return j;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

// Inline JSON when the argument starts with '{', otherwise a file path.
inline Potential load_potential(const std::string& arg) {
  if (!arg.empty() && arg.front() == '{') {
    try {
      return potential_from_json(json::parse(arg));
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("potential: ") + e.what());
    }
  }
  return potential_from_json(read_json_file(arg));
}

struct Range {
  double start = 0, stop = 0;
  int count = 0;

  std::vector<double> values() const {
    std::vector<double> v;
    for (int i = 0; i < count; ++i) v.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
    return v;
  }
};

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

inline double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    double x = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(x)) throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(what + ": '" + s + "' is not a number");
  }
}

// "start:stop:count" or a single value; grids must be non-empty and increasing.
inline Range parse_range(const std::string& s, const std::string& what) {
  auto parts = split(s, ':');
  Range r;
  if (parts.size() == 1) {
    r.start = r.stop = parse_number(parts[0], what);
    r.count = 1;
    return r;
  }
  if (parts.size() != 3) throw ConfigError(what + ": expected start:stop:count");
  r.start = parse_number(parts[0], what);
  r.stop = parse_number(parts[1], what);
  double n = parse_number(parts[2], what);
  if (n < 1 || n != std::floor(n)) throw ConfigError(what + ": count must be a positive integer");
  r.count = int(n);
  if (r.count > 1 && !(r.stop > r.start)) throw ConfigError(what + ": grid must be increasing");
  if (r.count == 1 && r.stop != r.start) throw ConfigError(what + ": a single point needs start == stop");
  return r;
}

inline std::complex<double> parse_time(const std::string& s) {
  auto parts = split(s, ',');
  if (parts.size() != 2) throw ConfigError("--T: expected re,im");
  return {parse_number(parts[0], "--T"), parse_number(parts[1], "--T")};
}

// "re_start:re_stop:n,im_start:im_stop:m"
struct TimeGrid {
  Range re, im;
};

inline TimeGrid parse_time_grid(const std::string& s) {
  auto parts = split(s, ',');
  if (parts.size() != 2) throw ConfigError("--T-grid: expected re_start:re_stop:n,im_start:im_stop:m");
  return {parse_range(parts[0], "--T-grid"), parse_range(parts[1], "--T-grid")};
}

}  // namespace tunnel

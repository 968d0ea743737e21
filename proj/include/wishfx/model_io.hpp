#pragma once

// JSON parameter document:
// {"d": 2, "beta": 3.1, "M": [[..]], "Q": [[..]], "R": [[..]], "sigma0": [[..]],
//  "currencies": [{"label": "USD", "A": [[..]], "h": -0.2, "H": [[..]]}, ...]}
// Matrices are row-major and full; symmetric entries are validated on load.

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wishfx/model.hpp"

namespace wishfx {

struct ModelDoc {
  WishartParams params;
  std::vector<CurrencySpec> currencies;

  const CurrencySpec& currency(const std::string& label) const {
    for (const auto& c : currencies)
      if (c.label == label) return c;
    throw DataError("unknown currency '" + label + "'");
  }

  // "DOM/FOR" -> pair with the given spot.
  FxPairSpec pair(const std::string& name, double spot) const {
    const auto slash = name.find('/');
    if (slash == std::string::npos) throw DataError("pair must be written DOM/FOR, got '" + name + "'");
    return FxPairSpec(currency(name.substr(0, slash)), currency(name.substr(slash + 1)), spot);
  }
};

namespace detail {

inline RMat matrix_from_json(const nlohmann::json& j, int d, const char* name) {
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    throw DataError(std::string("field '") + name + "' must be a " + std::to_string(d) + "x" +
                    std::to_string(d) + " array");
  RMat m(d, d);
  for (int i = 0; i < d; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != d)
      throw DataError(std::string("field '") + name + "' has a malformed row");
    for (int k = 0; k < d; ++k) {
      if (!row[k].is_number()) throw DataError(std::string("field '") + name + "' has a non-numeric entry");
      m(i, k) = row[k].get<double>();
    }
  }
  return m;
}

inline nlohmann::json matrix_to_json(const RMat& m) {
  auto out = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (int k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(std::move(row));
  }
  return out;
}

inline const nlohmann::json& field(const nlohmann::json& j, const char* name) {
  if (!j.contains(name)) throw DataError(std::string("missing field '") + name + "'");
  return j.at(name);
}

inline SymMat sym_from_json(const nlohmann::json& j, int d, const char* name) {
  try {
    return SymMat::from_full(matrix_from_json(j, d, name));
  } catch (const ShapeError&) {
    throw DataError(std::string("field '") + name + "' is not symmetric");
  }
}

}  // namespace detail

inline ModelDoc model_from_json(const nlohmann::json& j, Validation v = Validation::checked) {
  using namespace detail;
  if (!field(j, "d").is_number_integer()) throw DataError("field 'd' must be an integer");
  const int d = field(j, "d").get<int>();
  if (d < 1 || d > kMaxDim) throw DataError("field 'd' must be in [1, " + std::to_string(kMaxDim) + "]");
  if (!field(j, "beta").is_number()) throw DataError("field 'beta' must be a number");

  PsdMat sigma0(sym_from_json(field(j, "sigma0"), d, "sigma0"));
  ModelDoc doc{WishartParams(field(j, "beta").get<double>(), matrix_from_json(field(j, "M"), d, "M"),
                             matrix_from_json(field(j, "Q"), d, "Q"), matrix_from_json(field(j, "R"), d, "R"),
                             sigma0, v),
               {}};
  for (const auto& c : field(j, "currencies")) {
    CurrencySpec cur{field(c, "label").get<std::string>(), sym_from_json(field(c, "A"), d, "A"),
                     field(c, "h").get<double>(), PsdMat(sym_from_json(field(c, "H"), d, "H"))};
    for (const auto& other : doc.currencies)
      if (other.label == cur.label) throw DataError("duplicate currency '" + cur.label + "'");
    doc.currencies.push_back(std::move(cur));
  }
  return doc;
}

inline nlohmann::json model_to_json(const ModelDoc& doc) {
  using detail::matrix_to_json;
  const auto& p = doc.params;
  nlohmann::json j;
  j["d"] = p.dim();
  j["beta"] = p.beta();
  j["M"] = matrix_to_json(p.M());
  j["Q"] = matrix_to_json(p.Q());
  j["R"] = matrix_to_json(p.R());
  j["sigma0"] = matrix_to_json(p.sigma0().matrix());
  j["currencies"] = nlohmann::json::array();
  for (const auto& c : doc.currencies)
    j["currencies"].push_back(
        {{"label", c.label}, {"A", matrix_to_json(c.A.matrix())}, {"h", c.h}, {"H", matrix_to_json(c.H.matrix())}});
  return j;
}

inline ModelDoc load_model(const std::string& path, Validation v = Validation::checked) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open parameter file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("cannot parse '" + path + "': " + e.what());
  }
  try {
    return model_from_json(j, v);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed parameter file '" + path + "': " + e.what());
  } catch (const DataError& e) {
    throw DataError("'" + path + "': " + e.what());
  }
}

}  // namespace wishfx

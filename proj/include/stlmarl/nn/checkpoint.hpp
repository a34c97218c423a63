#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "stlmarl/nn/init.hpp"

namespace stlmarl::nn {

/// Text container of named arrays with shape headers plus a free-form
/// metadata block. Serialized as JSON; doubles round-trip exactly.
struct Checkpoint {
  nlohmann::json meta;
  std::map<std::string, Mat> arrays;

  void put(const std::string& name, const Mat& m) { arrays[name] = m; }
  void put(const std::string& name, const Vec& v) { arrays[name] = m_from(v); }
  const Mat& get(const std::string& name) const;
  Vec get_vec(const std::string& name) const;
  bool has(const std::string& name) const { return arrays.count(name) != 0; }

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

private:
  static Mat m_from(const Vec& v) {
    Mat m(v.size(), 1);
    m.col(0) = v;
    return m;
  }
};

}  // namespace stlmarl::nn

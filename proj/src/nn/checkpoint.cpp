#include "stlmarl/nn/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

namespace stlmarl::nn {

const Mat& Checkpoint::get(const std::string& name) const {
  auto it = arrays.find(name);
  if (it == arrays.end())
    throw std::runtime_error("checkpoint: missing array '" + name + "'");
  return it->second;
}

Vec Checkpoint::get_vec(const std::string& name) const {
  const Mat& m = get(name);
  if (m.cols() != 1)
    throw std::runtime_error("checkpoint: array '" + name + "' is not a vector");
  return m.col(0);
}

void Checkpoint::save(const std::string& path) const {
  nlohmann::json j;
  j["format"] = "stlmarl-checkpoint";
  j["version"] = 1;
  j["meta"] = meta;
  nlohmann::json arrs = nlohmann::json::object();
  for (const auto& [name, m] : arrays) {
    nlohmann::json a;
    a["rows"] = m.rows();
    a["cols"] = m.cols();
    std::vector<double> data(m.size());
    // Row-major serialization, independent of Eigen's storage order.
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) data[k++] = m(r, c);
    a["data"] = std::move(data);
    arrs[name] = std::move(a);
  }
  j["arrays"] = std::move(arrs);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot write '" + path + "'");
  out << j.dump();
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.value("format", "") != "stlmarl-checkpoint")
    throw std::runtime_error("checkpoint: unrecognized format in '" + path + "'");
  Checkpoint ck;
  ck.meta = j.value("meta", nlohmann::json::object());
  for (const auto& [name, a] : j.at("arrays").items()) {
    Eigen::Index rows = a.at("rows").get<Eigen::Index>();
    Eigen::Index cols = a.at("cols").get<Eigen::Index>();
    const auto& data = a.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols)
      throw std::runtime_error("checkpoint: array '" + name + "' size mismatch");
    Mat m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
    ck.arrays.emplace(name, std::move(m));
  }
  return ck;
}

}  // namespace stlmarl::nn

#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "bqproc/csv.hpp"
#include "bqproc/error.hpp"

namespace bqproc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// n records of (y in {0,1}, scalar first covariate z, covariate row x of
/// length d). The z-coefficient is normalized to +-1 in every fit.
struct Dataset {
  Vector y;
  Vector z;
  RowMatrix x;
  std::string provenance;

  Eigen::Index n() const { return y.size(); }
  Eigen::Index d() const { return x.cols(); }

  void validate() const {
    if (y.size() < 1) throw ConfigError("dataset is empty");
    if (z.size() != y.size() || x.rows() != y.size()) {
      throw ConfigError("dataset columns have different lengths");
    }
    if (x.cols() < 1) throw ConfigError("dataset needs at least one x column");
    for (Eigen::Index i = 0; i < n(); ++i) {
      if (y[i] != 0.0 && y[i] != 1.0) {
        throw ConfigError("y[" + std::to_string(i) + "] is not 0 or 1");
      }
      if (!std::isfinite(z[i]) || !x.row(i).allFinite()) {
        throw ConfigError("non-finite covariate at row " + std::to_string(i));
      }
    }
  }
};

/// CSV with header `y,z,x1,...,xd`.
inline Dataset read_dataset_csv(std::istream& in, std::string provenance = {}) {
  std::string line;
  std::size_t lineno = 0;
  if (!csv::next_line(in, line, lineno)) throw ParseError(1, "missing header");
  const auto header = csv::split(line);
  if (header.size() < 3 || header[0] != "y" || header[1] != "z") {
    throw ParseError(lineno, "header must be 'y,z,x1,...,xd'");
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t j = 0; j < d; ++j) {
    if (header[j + 2] != "x" + std::to_string(j + 1)) {
      throw ParseError(lineno, "expected column 'x" + std::to_string(j + 1) + "', found '" +
                                   std::string(header[j + 2]) + "'");
    }
  }
  std::vector<double> ys, zs, xs;
  while (csv::next_line(in, line, lineno)) {
    const auto f = csv::split(line);
    if (f.size() != d + 2) {
      throw ParseError(lineno, "expected " + std::to_string(d + 2) + " fields, found " +
                                   std::to_string(f.size()));
    }
    const double yv = csv::parse_finite(f[0], lineno, "y");
    if (yv != 0.0 && yv != 1.0) throw ParseError(lineno, "y must be 0 or 1");
    ys.push_back(yv);
    zs.push_back(csv::parse_finite(f[1], lineno, "z"));
    for (std::size_t j = 0; j < d; ++j) {
      xs.push_back(csv::parse_finite(f[j + 2], lineno, header[j + 2]));
    }
  }
  if (ys.empty()) throw ParseError(lineno, "no data rows");
  Dataset data;
  const auto n = static_cast<Eigen::Index>(ys.size());
  data.y = Eigen::Map<Vector>(ys.data(), n);
  data.z = Eigen::Map<Vector>(zs.data(), n);
  data.x = Eigen::Map<RowMatrix>(xs.data(), n, static_cast<Eigen::Index>(d));
  data.provenance = std::move(provenance);
  return data;
}

inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file '" + path + "'");
  return read_dataset_csv(in, "file:" + path);
}

inline void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "y,z";
  for (Eigen::Index j = 0; j < data.d(); ++j) out << ",x" << j + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << (data.y[i] == 1.0 ? '1' : '0') << ',' << csv::format_double(data.z[i]);
    for (Eigen::Index j = 0; j < data.d(); ++j) out << ',' << csv::format_double(data.x(i, j));
    out << '\n';
  }
}

}  // namespace bqproc

#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>

namespace msbl {

// Project-wide matrix file format: first line "rows,cols", then one line per
// row of comma-separated decimals printed with 17 significant digits so the
// round trip is exact for doubles.
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& a);
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& a);

Eigen::MatrixXd read_matrix_csv(std::istream& is);
Eigen::MatrixXd read_matrix_csv(const std::string& path);

// 17-significant-digit decimal rendering shared by all CSV writers.
std::string format_double(double x);

}  // namespace msbl

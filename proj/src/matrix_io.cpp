#include "msbl/matrix_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace msbl {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& a) {
    os << a.rows() << ',' << a.cols() << '\n';
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (j) os << ',';
            os << format_double(a(i, j));
        }
        os << '\n';
    }
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& a) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    write_matrix_csv(f, a);
    if (!f) throw std::runtime_error("write failed: " + path);
}

namespace {

std::vector<double> parse_row(const std::string& line) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        out.push_back(std::stod(cell));
    }
    return out;
}

}  // namespace

Eigen::MatrixXd read_matrix_csv(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("matrix csv: empty input");
    long rows = 0, cols = 0;
    if (std::sscanf(header.c_str(), "%ld,%ld", &rows, &cols) != 2 || rows < 1 || cols < 1)
        throw std::runtime_error("matrix csv: bad header '" + header + "'");
    Eigen::MatrixXd a(rows, cols);
    std::string line;
    for (long i = 0; i < rows; ++i) {
        if (!std::getline(is, line))
            throw std::runtime_error("matrix csv: truncated at row " + std::to_string(i));
        const auto vals = parse_row(line);
        if (static_cast<long>(vals.size()) != cols)
            throw std::runtime_error("matrix csv: row " + std::to_string(i) + " has " +
                                     std::to_string(vals.size()) + " entries, expected " +
                                     std::to_string(cols));
        for (long j = 0; j < cols; ++j) a(i, j) = vals[j];
    }
    return a;
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    return read_matrix_csv(f);
}

}  // namespace msbl

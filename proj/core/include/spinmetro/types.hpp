#pragma once

#include <Eigen/Dense>

#include <complex>

namespace spinmetro {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

}  // namespace spinmetro

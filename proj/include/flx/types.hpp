#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace flx {

using cdouble = std::complex<double>;

using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

// Points always carry three coordinates; 2D scenes keep z = 0.
using Point = Eigen::Vector3d;
using CPoint = Eigen::Vector3cd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or invariant-violating configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Singular systems, exact resonances, non-convergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Request outside supported domain (coincident points, size caps, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace flx

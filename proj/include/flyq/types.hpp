#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace flyq {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

constexpr double kHermitianTol = 1e-12;
constexpr double kUnitaryTol = 1e-10;
constexpr double kDefaultPsdFloor = 1e-8;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidOperator : public Error { public: using Error::Error; };
class NotAState : public Error { public: using Error::Error; };
class ShapeError : public Error { public: using Error::Error; };
class AmbiguousRank : public Error { public: using Error::Error; };
class IntegrationError : public Error { public: using Error::Error; };
class QuadratureError : public Error { public: using Error::Error; };
class IncompleteScenario : public Error { public: using Error::Error; };
class PerturbationTooLarge : public Error { public: using Error::Error; };
class DegenerateSpectrum : public Error { public: using Error::Error; };
class UnstableStep : public Error { public: using Error::Error; };
class GridTooSmall : public Error { public: using Error::Error; };
class InvalidCorrelation : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

}  // namespace flyq

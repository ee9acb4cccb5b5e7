#ifndef PHDAE_TYPES_HPP
#define PHDAE_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace phdae {

using Index = Eigen::Index;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;
using SpMat = Eigen::SparseMatrix<double>;
using SpCMat = Eigen::SparseMatrix<Complex>;

/// Block dimensions are inconsistent or a structural precondition
/// (e.g. n1 == n4) is violated. Distinct from a numerical check failure.
class StructuralError : public std::invalid_argument {
public:
    explicit StructuralError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical check failed: a matrix that must be invertible is
/// (near-)singular, a PSD check failed beyond tolerance, etc.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline Mat dense(const SpMat& s) { return Mat(s); }

}  // namespace phdae

#endif

#ifndef PHDAE_LYAPUNOV_HPP
#define PHDAE_LYAPUNOV_HPP

#include "phdae/types.hpp"

namespace phdae {

/// Solves the continuous-time Lyapunov equation A X + X A^T + Q = 0
/// for symmetric Q by a complex Schur decomposition of A followed by
/// triangular back-substitution. Throws NumericalError when the
/// spectrum of A is not Lyapunov-regular (lambda_i + conj(lambda_j)
/// numerically zero).
Mat solve_lyapunov(const Mat& A, const Mat& Q);

}  // namespace phdae

#endif

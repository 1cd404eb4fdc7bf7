#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

#include "vqpi/numerics.hpp"

namespace vqpi {

struct UnitaryTerm {
  std::complex<double> coefficient;
  Eigen::MatrixXcd matrix;
};

struct UnitaryDecomposition {
  std::vector<UnitaryTerm> terms;

  Eigen::MatrixXcd reconstruct() const {
    if (terms.empty()) throw std::logic_error("UnitaryDecomposition: no terms");
    Eigen::MatrixXcd sum = terms[0].coefficient * terms[0].matrix;
    for (std::size_t k = 1; k < terms.size(); ++k)
      sum += terms[k].coefficient * terms[k].matrix;
    return sum;
  }

  double max_unitarity_residual() const {
    double worst = 0.0;
    for (const auto& term : terms) {
      Eigen::MatrixXcd gram = term.matrix.adjoint() * term.matrix;
      gram -= Eigen::MatrixXcd::Identity(gram.rows(), gram.cols());
      worst = std::max(worst, gram.cwiseAbs().maxCoeff());
    }
    return worst;
  }

  double reconstruction_residual(const Eigen::MatrixXd& target) const {
    return (reconstruct() - target.cast<std::complex<double>>()).cwiseAbs().maxCoeff();
  }
};

// Splits a real square matrix into two unitaries. With A = U S V^T and
// s = ||A||_2, the scaled spectrum S/s lies in [0, 1], so
//   W = U (S/s + i sqrt(I - (S/s)^2)) V^T
// and its conjugate are exactly unitary and average to A/s. Any matrix thus
// costs two circuit terms with coefficients s/2 regardless of structure.
inline UnitaryDecomposition two_term_unitary_decomposition(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw std::invalid_argument("two_term_unitary_decomposition: square nonempty matrix required");
  RealSvd s = svd(a);
  const double scale = s.singular_values(0);
  if (scale <= 0.0)
    throw std::invalid_argument("two_term_unitary_decomposition: zero matrix");

  const int n = static_cast<int>(a.rows());
  Eigen::VectorXcd plus(n), minus(n);
  for (int i = 0; i < n; ++i) {
    const double c = std::min(1.0, s.singular_values(i) / scale);
    const double t = std::sqrt(std::max(0.0, 1.0 - c * c));
    plus(i) = std::complex<double>(c, t);
    minus(i) = std::complex<double>(c, -t);
  }
  Eigen::MatrixXcd uc = s.u.cast<std::complex<double>>();
  Eigen::MatrixXcd vt = s.v.transpose().cast<std::complex<double>>();

  UnitaryDecomposition result;
  result.terms.push_back({std::complex<double>(scale / 2.0, 0.0), uc * plus.asDiagonal() * vt});
  result.terms.push_back({std::complex<double>(scale / 2.0, 0.0), uc * minus.asDiagonal() * vt});
  return result;
}

}  // namespace vqpi

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "vqpi/envgen.hpp"

namespace vqpi {

struct RealSvd {
  Eigen::MatrixXd u;
  Eigen::VectorXd singular_values;  // descending
  Eigen::MatrixXd v;

  Eigen::MatrixXd reconstruct() const {
    return u * singular_values.asDiagonal() * v.transpose();
  }
};

inline RealSvd svd(const Eigen::MatrixXd& a) {
  Eigen::BDCSVD<Eigen::MatrixXd> solver(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& a) {
  return Eigen::BDCSVD<Eigen::MatrixXd>(a).singularValues();
}

enum class MatrixNorm { kOne, kInfinity, kSpectral };

inline double matrix_norm(const Eigen::MatrixXd& a, MatrixNorm which) {
  switch (which) {
    case MatrixNorm::kOne:
      return a.cwiseAbs().colwise().sum().maxCoeff();
    case MatrixNorm::kInfinity:
      return a.cwiseAbs().rowwise().sum().maxCoeff();
    case MatrixNorm::kSpectral:
      return singular_values(a)(0);
  }
  throw std::invalid_argument("matrix_norm: unknown norm");
}

// Ratio of extreme singular values. The fast path reads them off the
// spectrum of A^T A, which costs a fraction of a full SVD but loses half the
// digits near singularity, so anything that does not look comfortably
// well-conditioned is redone with an SVD. Throws when numerically singular.
inline double condition_number(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw std::invalid_argument("condition_number: square nonempty matrix required");
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues()(a.rows() - 1);
  const double lmin = eig.eigenvalues()(0);
  if (lmin > lmax * 1e-8) return std::sqrt(lmax / lmin);

  Eigen::VectorXd sv = singular_values(a);
  const double smax = sv(0), smin = sv(sv.size() - 1);
  if (smin <= 1e-14 * smax)
    throw std::runtime_error("condition_number: matrix is numerically singular");
  return smax / smin;
}

// Diagonal-dominance bounds on norms of the inverse. For kInfinity the
// margin runs over rows, for kOne over columns; kSpectral interpolates the
// two via the Hoelder inequality. Returns nothing when a required margin is
// not strictly positive.
inline std::optional<double> inverse_norm_bound(const Eigen::MatrixXd& a, MatrixNorm which) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw std::invalid_argument("inverse_norm_bound: square nonempty matrix required");
  auto margin = [&](bool by_rows) {
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < a.rows(); ++i) {
      double off = 0.0;
      for (int j = 0; j < a.cols(); ++j)
        if (j != i) off += std::abs(by_rows ? a(i, j) : a(j, i));
      worst = std::min(worst, std::abs(a(i, i)) - off);
    }
    return worst;
  };
  switch (which) {
    case MatrixNorm::kInfinity: {
      double m = margin(true);
      if (m <= 0.0) return std::nullopt;
      return 1.0 / m;
    }
    case MatrixNorm::kOne: {
      double m = margin(false);
      if (m <= 0.0) return std::nullopt;
      return 1.0 / m;
    }
    case MatrixNorm::kSpectral: {
      auto row = inverse_norm_bound(a, MatrixNorm::kInfinity);
      auto col = inverse_norm_bound(a, MatrixNorm::kOne);
      if (!row || !col) return std::nullopt;
      return std::sqrt(*row * *col);
    }
  }
  throw std::invalid_argument("inverse_norm_bound: unknown norm");
}

// Condition-number ceilings for the local-dynamics evaluation systems
// A = I - discount * P with window width log2(N).

inline double bound_general_local(int num_states, double discount) {
  const double n = static_cast<double>(num_states);
  const double w = static_cast<double>(int_log2(num_states));
  return std::sqrt(n + discount * n * w) * std::sqrt(1.0 + discount) / (1.0 - discount);
}

// Doubly stochastic dynamics tighten the ceiling to a size-free constant.
inline double bound_uniform_local(double discount) {
  return (1.0 + discount) / (1.0 - discount);
}

// Scaling actually observed for the random families: the N under the root
// is replaced by the window width.
inline double bound_empirical_local(int num_states, double discount) {
  const double w = static_cast<double>(int_log2(num_states));
  return std::sqrt(w + discount * w * w) * std::sqrt(1.0 + discount) / (1.0 - discount);
}

// Training a solver state to this global-cost level guarantees the
// normalized solution sits within epsilon of the target in trace distance.
inline double loss_threshold_bound(double epsilon, double kappa) {
  if (!(epsilon > 0.0) || !(kappa >= 1.0))
    throw std::invalid_argument("loss_threshold_bound: need epsilon > 0 and kappa >= 1");
  return (epsilon * epsilon) / (kappa * kappa);
}

struct SparsityStats {
  int max_row_nnz = 0;
  int max_col_nnz = 0;
  double density = 0.0;
};

inline SparsityStats sparsity_stats(const Eigen::MatrixXd& a, double tol = 1e-12) {
  SparsityStats stats;
  if (a.size() == 0) return stats;
  Eigen::Index total = 0;
  for (int i = 0; i < a.rows(); ++i) {
    int rn = 0;
    for (int j = 0; j < a.cols(); ++j)
      if (std::abs(a(i, j)) > tol) ++rn;
    stats.max_row_nnz = std::max(stats.max_row_nnz, rn);
    total += rn;
  }
  for (int j = 0; j < a.cols(); ++j) {
    int cn = 0;
    for (int i = 0; i < a.rows(); ++i)
      if (std::abs(a(i, j)) > tol) ++cn;
    stats.max_col_nnz = std::max(stats.max_col_nnz, cn);
  }
  stats.density = static_cast<double>(total) / static_cast<double>(a.size());
  return stats;
}

}  // namespace vqpi

#include "dk/quadratic_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace dk {

AntisymmetricMatrix AntisymmetricMatrix::zeros(int sites) {
  if (sites < 1) throw Error(ErrorKind::InvalidMatrix, "need at least one site");
  return AntisymmetricMatrix(Eigen::MatrixXd::Zero(2 * sites, 2 * sites));
}

AntisymmetricMatrix AntisymmetricMatrix::from_dense(const Eigen::MatrixXd& m,
                                                    const Tolerances& tol) {
  if (m.rows() != m.cols() || m.rows() == 0 || m.rows() % 2 != 0) {
    std::ostringstream os;
    os << "expected a square matrix of even positive dimension, got " << m.rows() << "x"
       << m.cols();
    throw Error(ErrorKind::InvalidMatrix, os.str());
  }
  const double asym = (m + m.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= tol.antisymmetry)) {
    std::ostringstream os;
    os << "matrix is not antisymmetric: max |A + A^T| = " << asym;
    throw Error(ErrorKind::InvalidMatrix, os.str());
  }
  return AntisymmetricMatrix(0.5 * (m - m.transpose()));
}

void AntisymmetricMatrix::set(int alpha, int beta, double value) {
  if (alpha == beta) {
    if (value != 0.0) throw Error(ErrorKind::InvalidMatrix, "diagonal entries must vanish");
    return;
  }
  m_(alpha, beta) = value;
  m_(beta, alpha) = -value;
}

void AntisymmetricMatrix::add(int alpha, int beta, double value) {
  if (alpha == beta) {
    if (value != 0.0) throw Error(ErrorKind::InvalidMatrix, "diagonal entries must vanish");
    return;
  }
  m_(alpha, beta) += value;
  m_(beta, alpha) -= value;
}

Eigen::MatrixXd BlockSpectrum::blockform() const {
  const Eigen::Index n = 2 * static_cast<Eigen::Index>(epsilons.size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    b(2 * k, 2 * k + 1) = epsilons[k];
    b(2 * k + 1, 2 * k) = -epsilons[k];
  }
  return b;
}

BlockSpectrum block_spectrum(const AntisymmetricMatrix& A) {
  const int n = A.dim();
  const int m = n / 2;
  // Householder reduction of a skew matrix is skew tridiagonal. Splitting even and
  // odd indices turns it into [[0, B], [-B^T, 0]] with B lower bidiagonal, and the
  // SVD of B yields the 2x2 blocks directly.
  Eigen::HessenbergDecomposition<Eigen::MatrixXd> hess(A.matrix());
  const Eigen::MatrixXd H = hess.matrixH();
  const Eigen::MatrixXd P = hess.matrixQ();

  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    B(k, k) = 0.5 * (H(2 * k, 2 * k + 1) - H(2 * k + 1, 2 * k));
    if (k > 0) B(k, k - 1) = 0.5 * (H(2 * k, 2 * k - 1) - H(2 * k - 1, 2 * k));
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success)
    throw Error(ErrorKind::InvalidMatrix, "singular value decomposition did not converge");

  Eigen::MatrixXd Q(n, n);
  Eigen::VectorXd e(n), o(n);
  for (int k = 0; k < m; ++k) {
    e.setZero();
    o.setZero();
    for (int r = 0; r < m; ++r) {
      e(2 * r) = svd.matrixU()(r, k);
      o(2 * r + 1) = svd.matrixV()(r, k);
    }
    Q.col(2 * k) = P * e;
    Q.col(2 * k + 1) = P * o;
  }

  const Eigen::MatrixXd M = Q.transpose() * A.matrix() * Q;
  std::vector<double> eps(m);
  for (int k = 0; k < m; ++k) {
    double v = 0.5 * (M(2 * k, 2 * k + 1) - M(2 * k + 1, 2 * k));
    if (v < 0.0) {
      Q.col(2 * k).swap(Q.col(2 * k + 1));
      v = -v;
    }
    eps[k] = v;
  }

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eps[a] > eps[b]; });

  BlockSpectrum out;
  out.Q.resize(n, n);
  out.epsilons.resize(m);
  for (int k = 0; k < m; ++k) {
    out.Q.col(2 * k) = Q.col(2 * order[k]);
    out.Q.col(2 * k + 1) = Q.col(2 * order[k] + 1);
    out.epsilons[k] = eps[order[k]];
  }
  return out;
}

Eigen::MatrixXd ground_state_covariance_matrix(const BlockSpectrum& spectrum) {
  const Eigen::Index n = spectrum.Q.rows();
  const double emax = spectrum.epsilons.empty() ? 0.0 : spectrum.epsilons.front();
  const double zero = 1e-12 * std::max(1.0, emax);
  Eigen::MatrixXd canon = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < spectrum.epsilons.size(); ++k) {
    if (spectrum.epsilons[k] <= zero) continue;
    canon(2 * k, 2 * k + 1) = -1.0;
    canon(2 * k + 1, 2 * k) = 1.0;
  }
  return spectrum.Q * canon * spectrum.Q.transpose();
}

Eigen::Matrix2d CovarianceResult::block(int d) const {
  auto it = blocks_.find(d);
  if (it == blocks_.end()) return Eigen::Matrix2d::Zero();
  return it->second;
}

Eigen::MatrixXd CovarianceResult::dense() const {
  const int n = sites_;
  Eigen::MatrixXd m(2 * n, 2 * n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) m.block<2, 2>(2 * j, 2 * k) = block(j - k);
  return m;
}

CovarianceResult assemble_covariance(const BlockMap& blocks, int sites, CovarianceMetadata meta,
                                     const Tolerances& tol) {
  if (sites < 1) throw Error(ErrorKind::InconsistentBlocks, "need at least one site");
  CovarianceResult out;
  out.sites_ = sites;
  out.meta_ = std::move(meta);
  for (const auto& [d, b] : blocks) {
    if (std::abs(d) > sites - 1) {
      std::ostringstream os;
      os << "displacement " << d << " outside |d| <= " << sites - 1;
      throw Error(ErrorKind::InconsistentBlocks, os.str());
    }
    if (!b.allFinite()) throw Error(ErrorKind::InconsistentBlocks, "non-finite block entry");
    const Eigen::Matrix2d partner = -b.transpose();
    auto it = blocks.find(-d);
    if (it != blocks.end()) {
      const double mismatch = (it->second - partner).cwiseAbs().maxCoeff();
      if (!(mismatch <= tol.block_consistency)) {
        std::ostringstream os;
        os << "blocks d=" << d << " and d=" << -d << " violate C_d[u][v] = -C_-d[v][u] by "
           << mismatch;
        throw Error(ErrorKind::InconsistentBlocks, os.str());
      }
    }
    out.blocks_[d] = b;
    if (it == blocks.end()) out.blocks_[-d] = partner;
  }
  return out;
}

CovarianceResult assemble_covariance(const std::function<Eigen::Matrix2d(int)>& rule, int sites,
                                     CovarianceMetadata meta, const Tolerances& tol) {
  BlockMap blocks;
  for (int d = -(sites - 1); d <= sites - 1; ++d) blocks[d] = rule(d);
  return assemble_covariance(blocks, sites, std::move(meta), tol);
}

BlockMap extract_blocks(const Eigen::MatrixXd& dense) {
  if (dense.rows() != dense.cols() || dense.rows() % 2 != 0)
    throw Error(ErrorKind::ShapeMismatch, "expected a square matrix of even dimension");
  const int n = static_cast<int>(dense.rows() / 2);
  BlockMap out;
  for (int d = 0; d < n; ++d) out[d] = dense.block<2, 2>(2 * d, 0);
  for (int d = 1; d < n; ++d) out[-d] = dense.block<2, 2>(0, 2 * d);
  return out;
}

double max_singular_value(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

double physicality_check(const CovarianceResult& c) { return max_singular_value(c.dense()); }

}  // namespace dk

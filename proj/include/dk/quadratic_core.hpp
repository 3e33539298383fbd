#pragma once

// Quadratic Majorana forms H = (i/4) g^T A g with A real antisymmetric,
// their orthogonal block diagonalization, and covariance-matrix plumbing.
//
// Index convention: Majorana (site j, flavor u) lives at flat index 2j + u,
// sites are 0-based.

#include <map>
#include <optional>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dk/errors.hpp"

namespace dk {

struct MajoranaIndex {
  int site = 0;
  int flavor = 0;  // 0 or 1

  constexpr int flat() const noexcept { return 2 * site + flavor; }
  static constexpr MajoranaIndex from_flat(int alpha) noexcept { return {alpha / 2, alpha % 2}; }
  friend constexpr bool operator==(MajoranaIndex, MajoranaIndex) = default;
};

/// Default thresholds; every operation taking a `Tolerances` can be tuned by the caller.
struct Tolerances {
  double antisymmetry = 1e-10;       // |A + A^T| accepted on input
  double block_consistency = 1e-9;   // C_d[u][v] + C_{-d}[v][u]
};

class AntisymmetricMatrix {
 public:
  /// Zero matrix of dimension 2 * sites.
  static AntisymmetricMatrix zeros(int sites);

  /// Validates evenness and antisymmetry, then stores the exact antisymmetric part.
  static AntisymmetricMatrix from_dense(const Eigen::MatrixXd& m, const Tolerances& tol = {});

  /// Sets A[a][b] = value and A[b][a] = -value.
  void set(int alpha, int beta, double value);
  void set(MajoranaIndex a, MajoranaIndex b, double value) { set(a.flat(), b.flat(), value); }
  /// Adds value to A[a][b] and subtracts it from A[b][a].
  void add(int alpha, int beta, double value);

  double operator()(int alpha, int beta) const { return m_(alpha, beta); }
  double operator()(MajoranaIndex a, MajoranaIndex b) const { return m_(a.flat(), b.flat()); }

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  int sites() const noexcept { return dim() / 2; }
  const Eigen::MatrixXd& matrix() const noexcept { return m_; }

 private:
  explicit AntisymmetricMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {}
  Eigen::MatrixXd m_;
};

/// Q^T A Q = (+) [[0, e_j], [-e_j, 0]], e_j >= 0 sorted descending.
struct BlockSpectrum {
  Eigen::MatrixXd Q;
  std::vector<double> epsilons;

  /// The canonical direct sum built from `epsilons`.
  Eigen::MatrixXd blockform() const;
};

BlockSpectrum block_spectrum(const AntisymmetricMatrix& A);

/// Ground-state covariance of H = (i/4) g^T A g, i.e. -A |A|^{-1}.
/// Zero modes contribute a zero block (mixed in the degenerate subspace).
Eigen::MatrixXd ground_state_covariance_matrix(const BlockSpectrum& spectrum);

struct CovarianceMetadata {
  double h = 0.0;
  std::string bath;                 // free-form description, e.g. "Gamma=0.1 b=0"
  std::optional<double> time;       // empty for steady state
  bool steady = false;
};

using BlockMap = std::map<int, Eigen::Matrix2d>;

/// Translation-invariant covariance of an N-site chain, stored as
/// displacement-resolved blocks C_d (d = j - k) for |d| <= N - 1.
class CovarianceResult {
 public:
  int sites() const noexcept { return sites_; }
  const CovarianceMetadata& metadata() const noexcept { return meta_; }
  const BlockMap& blocks() const noexcept { return blocks_; }

  /// Block for displacement d; zero outside the stored range.
  Eigen::Matrix2d block(int d) const;
  /// Entry C_{jk,uv}.
  double operator()(MajoranaIndex a, MajoranaIndex b) const {
    return block(a.site - b.site)(a.flavor, b.flavor);
  }
  /// Full 2N x 2N matrix.
  Eigen::MatrixXd dense() const;

 private:
  friend CovarianceResult assemble_covariance(const BlockMap&, int, CovarianceMetadata,
                                              const Tolerances&);
  int sites_ = 0;
  BlockMap blocks_;
  CovarianceMetadata meta_;
};

/// Builds the covariance from supplied blocks. Missing partners C_{-d} are
/// completed as -C_d^T; supplied pairs must agree within tol.block_consistency.
CovarianceResult assemble_covariance(const BlockMap& blocks, int sites,
                                     CovarianceMetadata meta = {}, const Tolerances& tol = {});

/// Same, with blocks generated on demand for |d| <= sites - 1.
CovarianceResult assemble_covariance(const std::function<Eigen::Matrix2d(int)>& rule, int sites,
                                     CovarianceMetadata meta = {}, const Tolerances& tol = {});

/// Reads C_d off the first row/column of site blocks of a translation-invariant matrix.
BlockMap extract_blocks(const Eigen::MatrixXd& dense);

/// Largest singular value of the assembled matrix (<= 1 for a physical Gaussian state).
double physicality_check(const CovarianceResult& c);
double max_singular_value(const Eigen::MatrixXd& m);

}  // namespace dk

#pragma once

#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

#include "sinkhorn_lqg/error.hpp"

namespace sinkhorn_lqg {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix. Construction symmetrizes the input and rejects
/// inputs whose antisymmetric part exceeds 1e-8 relative to the Frobenius
/// norm. Positive (semi)definiteness is checked by the operations that need
/// it, not by the type.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  explicit SpdMatrix(const Eigen::Ref<const Matrix>& m);

  static SpdMatrix identity(Index dim);
  static SpdMatrix scaled_identity(Index dim, double scale);
  static SpdMatrix zero(Index dim);
  static SpdMatrix diagonal(std::initializer_list<double> entries);
  static SpdMatrix diagonal(const Eigen::Ref<const Vector>& entries);

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }
  double trace() const { return m_.trace(); }
  double frobenius_norm() const { return m_.norm(); }

  friend SpdMatrix operator+(const SpdMatrix& a, const SpdMatrix& b);
  friend SpdMatrix operator-(const SpdMatrix& a, const SpdMatrix& b);
  friend SpdMatrix operator*(double s, const SpdMatrix& a);

 private:
  struct Trusted {};
  SpdMatrix(Matrix m, Trusted) : m_(std::move(m)) {}

  Matrix m_;

  friend SpdMatrix sym_project(const Eigen::Ref<const Matrix>& a);
};

/// Eigenvalues in ascending order.
Vector eigenvalues(const SpdMatrix& m);
double min_eigenvalue(const SpdMatrix& m);

/// Scale-relative PSD tolerance 1e-10 * |trace| / dim.
double psd_tolerance(const SpdMatrix& m);

bool is_psd(const SpdMatrix& m);
bool is_pd(const SpdMatrix& m);
void require_psd(const SpdMatrix& m, const char* what);
void require_pd(const SpdMatrix& m, const char* what);
void require_same_dim(const SpdMatrix& a, const SpdMatrix& b, const char* what);

SpdMatrix spd_sqrt(const SpdMatrix& m);
SpdMatrix spd_inv_sqrt(const SpdMatrix& m);
double spd_logdet(const SpdMatrix& m);
SpdMatrix spd_inv(const SpdMatrix& m);

/// (A + A^T) / 2, without the asymmetry check of the constructor.
SpdMatrix sym_project(const Eigen::Ref<const Matrix>& a);

/// Raises every eigenvalue below `floor` to `floor`.
SpdMatrix psd_floor(const SpdMatrix& m, double floor);

/// A^T S A for symmetric S; the result is symmetrized.
SpdMatrix congruence(const Eigen::Ref<const Matrix>& a, const SpdMatrix& s);

/// Block-diagonal assembly.
SpdMatrix block_diagonal(const std::vector<SpdMatrix>& blocks);

/// Applies a scalar function to the spectrum: V f(Lambda) V^T.
template <typename F>
SpdMatrix spectral_apply(const SpdMatrix& m, F&& f) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.matrix());
  Vector values = es.eigenvalues().unaryExpr(f);
  return sym_project(es.eigenvectors() * values.asDiagonal() *
                     es.eigenvectors().transpose());
}

}  // namespace sinkhorn_lqg

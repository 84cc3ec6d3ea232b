#include "sinkhorn_lqg/spd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sinkhorn_lqg {

namespace {

constexpr double kAsymmetryTolerance = 1e-8;

Eigen::SelfAdjointEigenSolver<Matrix> eigen_solve(const SpdMatrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(m.matrix());
}

}  // namespace

SpdMatrix::SpdMatrix(const Eigen::Ref<const Matrix>& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kDimMismatch, "symmetric matrix must be square, got " +
                                             std::to_string(m.rows()) + "x" +
                                             std::to_string(m.cols()));
  }
  if (!m.allFinite()) {
    throw Error(ErrorCode::kInvalidInput, "matrix has non-finite entries");
  }
  const double scale = std::max(m.norm(), 1e-300);
  const double skew = (m - m.transpose()).norm() / 2.0;
  if (skew > kAsymmetryTolerance * scale) {
    throw Error(ErrorCode::kAsymmetric,
                "relative asymmetry " + std::to_string(skew / scale) + " exceeds 1e-8");
  }
  m_ = (m + m.transpose()) / 2.0;
}

SpdMatrix SpdMatrix::identity(Index dim) {
  return SpdMatrix(Matrix::Identity(dim, dim), Trusted{});
}

SpdMatrix SpdMatrix::scaled_identity(Index dim, double scale) {
  return SpdMatrix(scale * Matrix::Identity(dim, dim), Trusted{});
}

SpdMatrix SpdMatrix::zero(Index dim) { return SpdMatrix(Matrix::Zero(dim, dim), Trusted{}); }

SpdMatrix SpdMatrix::diagonal(std::initializer_list<double> entries) {
  Vector v(static_cast<Index>(entries.size()));
  Index i = 0;
  for (double e : entries) v(i++) = e;
  return diagonal(v);
}

SpdMatrix SpdMatrix::diagonal(const Eigen::Ref<const Vector>& entries) {
  return SpdMatrix(Matrix(entries.asDiagonal()), Trusted{});
}

SpdMatrix operator+(const SpdMatrix& a, const SpdMatrix& b) {
  require_same_dim(a, b, "operator+");
  return SpdMatrix(a.m_ + b.m_, SpdMatrix::Trusted{});
}

SpdMatrix operator-(const SpdMatrix& a, const SpdMatrix& b) {
  require_same_dim(a, b, "operator-");
  return SpdMatrix(a.m_ - b.m_, SpdMatrix::Trusted{});
}

SpdMatrix operator*(double s, const SpdMatrix& a) {
  return SpdMatrix(s * a.m_, SpdMatrix::Trusted{});
}

Vector eigenvalues(const SpdMatrix& m) {
  if (m.dim() == 0) return Vector();
  return Eigen::SelfAdjointEigenSolver<Matrix>(m.matrix(), Eigen::EigenvaluesOnly)
      .eigenvalues();
}

double min_eigenvalue(const SpdMatrix& m) {
  if (m.dim() == 0) return 0.0;
  return eigenvalues(m)(0);
}

double psd_tolerance(const SpdMatrix& m) {
  if (m.dim() == 0) return 0.0;
  return 1e-10 * std::abs(m.trace()) / static_cast<double>(m.dim());
}

bool is_psd(const SpdMatrix& m) { return min_eigenvalue(m) >= -psd_tolerance(m); }

bool is_pd(const SpdMatrix& m) { return m.dim() > 0 && min_eigenvalue(m) > 0.0; }

void require_psd(const SpdMatrix& m, const char* what) {
  const double lo = min_eigenvalue(m);
  if (lo < -psd_tolerance(m)) {
    throw Error(ErrorCode::kNotPsd,
                std::string(what) + ": smallest eigenvalue " + std::to_string(lo));
  }
}

void require_pd(const SpdMatrix& m, const char* what) {
  if (m.dim() == 0) throw Error(ErrorCode::kNotPd, std::string(what) + ": empty matrix");
  const double lo = min_eigenvalue(m);
  if (!(lo > 0.0)) {
    throw Error(ErrorCode::kNotPd,
                std::string(what) + ": smallest eigenvalue " + std::to_string(lo));
  }
}

void require_same_dim(const SpdMatrix& a, const SpdMatrix& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimMismatch, std::string(what) + ": dimensions " +
                                             std::to_string(a.dim()) + " and " +
                                             std::to_string(b.dim()));
  }
}

SpdMatrix spd_sqrt(const SpdMatrix& m) {
  require_psd(m, "spd_sqrt");
  return spectral_apply(m, [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

SpdMatrix spd_inv_sqrt(const SpdMatrix& m) {
  require_pd(m, "spd_inv_sqrt");
  return spectral_apply(m, [](double x) { return 1.0 / std::sqrt(x); });
}

double spd_logdet(const SpdMatrix& m) {
  require_pd(m, "spd_logdet");
  // Cholesky is exact enough and cheaper than a full eigensolve here.
  Eigen::LLT<Matrix> llt(m.matrix());
  if (llt.info() == Eigen::Success) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }
  return eigenvalues(m).array().log().sum();
}

SpdMatrix spd_inv(const SpdMatrix& m) {
  require_pd(m, "spd_inv");
  return spectral_apply(m, [](double x) { return 1.0 / x; });
}

SpdMatrix sym_project(const Eigen::Ref<const Matrix>& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::kDimMismatch, "sym_project: matrix must be square");
  }
  return SpdMatrix(Matrix((a + a.transpose()) / 2.0), SpdMatrix::Trusted{});
}

SpdMatrix psd_floor(const SpdMatrix& m, double floor) {
  const auto es = eigen_solve(m);
  if (es.eigenvalues().minCoeff() >= floor) return m;
  return spectral_apply(m, [floor](double x) { return std::max(x, floor); });
}

SpdMatrix congruence(const Eigen::Ref<const Matrix>& a, const SpdMatrix& s) {
  if (a.rows() != s.dim()) {
    throw Error(ErrorCode::kDimMismatch, "congruence: A has " + std::to_string(a.rows()) +
                                             " rows, S has dim " + std::to_string(s.dim()));
  }
  return sym_project(a.transpose() * s.matrix() * a);
}

SpdMatrix block_diagonal(const std::vector<SpdMatrix>& blocks) {
  Index total = 0;
  for (const auto& b : blocks) total += b.dim();
  Matrix out = Matrix::Zero(total, total);
  Index offset = 0;
  for (const auto& b : blocks) {
    out.block(offset, offset, b.dim(), b.dim()) = b.matrix();
    offset += b.dim();
  }
  return sym_project(out);
}

}  // namespace sinkhorn_lqg

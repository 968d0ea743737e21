#pragma once

// Dense real/complex matrix kernel shared by every other module.
//
// Matrices are small (d <= 8, block systems 2d <= 16), so the aliases below
// use Eigen's fixed max-size storage: no heap allocation on the hot paths of
// the transform engine and the simulator.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "wishfx/errors.hpp"

namespace wishfx {

using cplx = std::complex<double>;

inline constexpr int kMaxDim = 8;

using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using RBlock = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 2 * kMaxDim, 2 * kMaxDim>;
using CBlock = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 2 * kMaxDim, 2 * kMaxDim>;

// Relative tolerance of the PSD cone membership test.
inline constexpr double kPsdRelTol = 1e-10;

/// Real symmetric matrix. Only the lower triangle of the source is read, so
/// entry (i,j) equals entry (j,i) bit for bit.
class SymMat {
 public:
  SymMat() = default;

  explicit SymMat(int d) : m_(RMat::Zero(check_dim(d), d)) {}

  template <typename Derived>
  static SymMat from_lower(const Eigen::MatrixBase<Derived>& m) {
    if (m.rows() != m.cols()) throw ShapeError("SymMat: matrix is not square");
    SymMat s(static_cast<int>(m.rows()));
    for (int j = 0; j < s.dim(); ++j)
      for (int i = j; i < s.dim(); ++i) s.m_(i, j) = s.m_(j, i) = m(i, j);
    return s;
  }

  // Accepts a full matrix whose asymmetry is below `tol` (relative to its max entry).
  template <typename Derived>
  static SymMat from_full(const Eigen::MatrixBase<Derived>& m, double tol = 1e-12) {
    if (m.rows() != m.cols()) throw ShapeError("SymMat: matrix is not square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale)
      throw ShapeError("SymMat: matrix is not symmetric");
    return from_lower(m);
  }

  static SymMat identity(int d) { return from_lower(RMat::Identity(check_dim(d), d)); }

  static SymMat diagonal(std::initializer_list<double> diag) {
    SymMat s(static_cast<int>(diag.size()));
    int i = 0;
    for (double v : diag) s.m_(i, i) = v, ++i;
    return s;
  }

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  const RMat& matrix() const noexcept { return m_; }

  friend SymMat operator+(const SymMat& a, const SymMat& b) { return from_lower(a.m_ + b.m_); }
  friend SymMat operator-(const SymMat& a, const SymMat& b) { return from_lower(a.m_ - b.m_); }
  friend SymMat operator*(double s, const SymMat& a) { return from_lower(s * a.m_); }
  friend bool operator==(const SymMat& a, const SymMat& b) {
    return a.dim() == b.dim() && a.m_ == b.m_;
  }

 private:
  static int check_dim(int d) {
    if (d < 1) throw ShapeError("SymMat: dimension must be >= 1");
    return d;
  }
  RMat m_;
};

inline double spectral_norm_sym(const RMat& m) {
  Eigen::SelfAdjointEigenSolver<RMat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline double psd_tolerance(const SymMat& s) { return kPsdRelTol * std::max(1.0, spectral_norm_sym(s.matrix())); }

/// Symmetric matrix in the PSD cone (up to the relative tolerance kPsdRelTol).
class PsdMat {
 public:
  PsdMat() = default;

  explicit PsdMat(SymMat s) : base_(std::move(s)) {
    Eigen::SelfAdjointEigenSolver<RMat> es(base_.matrix(), Eigen::EigenvaluesOnly);
    min_eig_ = es.eigenvalues().minCoeff();
    if (min_eig_ < -psd_tolerance(base_))
      throw DomainError("PsdMat: smallest eigenvalue " + std::to_string(min_eig_) + " is negative");
  }

  int dim() const noexcept { return base_.dim(); }
  double min_eig() const noexcept { return min_eig_; }
  const SymMat& sym() const noexcept { return base_; }
  const RMat& matrix() const noexcept { return base_.matrix(); }
  double operator()(int i, int j) const { return base_(i, j); }

 private:
  SymMat base_;
  double min_eig_ = 0.0;
};

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& a, const char* what) {
  if (!a.allFinite()) throw NumericError(std::string(what) + ": non-finite entries");
}

/// Matrix exponential (scaling and squaring with a diagonal Pade approximant).
template <typename Derived>
typename Derived::PlainObject expm(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) throw ShapeError("expm: matrix is not square");
  require_finite(a, "expm");
  typename Derived::PlainObject out = a.derived().exp();
  return out;
}

/// Principal square root of a PSD matrix. Eigenvalues inside the tolerance
/// band below zero are clamped.
inline SymMat sqrtm_psd(const PsdMat& a) {
  Eigen::SelfAdjointEigenSolver<RMat> es(a.matrix());
  auto lam = es.eigenvalues();
  const double tol = psd_tolerance(a.sym());
  for (int i = 0; i < lam.size(); ++i) {
    if (lam(i) < -tol) throw DomainError("sqrtm_psd: negative eigenvalue");
    lam(i) = std::sqrt(std::max(lam(i), 0.0));
  }
  const RMat& v = es.eigenvectors();
  return SymMat::from_lower(v * lam.asDiagonal() * v.transpose());
}

// Projection onto the PSD cone (eigenvalue clamping). Returns the number of
// clamped eigenvalues through `clamped`.
template <typename MatT>
MatT project_psd(const MatT& a, int* clamped = nullptr, MatT* sqrt_out = nullptr) {
  MatT sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<MatT> es(sym);
  auto lam = es.eigenvalues().eval();
  int n = 0;
  for (int i = 0; i < lam.size(); ++i)
    if (lam(i) < 0.0) lam(i) = 0.0, ++n;
  if (clamped) *clamped = n;
  const MatT& v = es.eigenvectors();
  if (sqrt_out) *sqrt_out = v * lam.cwiseSqrt().asDiagonal() * v.transpose();
  return v * lam.asDiagonal() * v.transpose();
}

/// Branch-continuous complex logarithm of a product of determinants.
///
/// Each factor is the determinant of one step ratio F(t_k)^{-1} F(t_{k+1});
/// summing principal logs is continuous as long as every step keeps
/// |arg| below pi, which callers enforce by refinement.
class LogDetAccumulator {
 public:
  static constexpr double kMaxStepArg = 0.9 * std::numbers::pi;

  // Returns false when the step's argument is too large to be unwound safely.
  bool admissible(cplx det_step) const { return std::abs(std::arg(det_step)) < kMaxStepArg; }
  void add(cplx det_step) { sum_ += std::log(det_step); }
  cplx value() const noexcept { return sum_; }

 private:
  cplx sum_{0.0, 0.0};
};

struct PathLog {
  cplx trace;      // Tr[log F(tau_end)] = branch-continuous log det F(tau_end)
  int steps = 0;   // subintervals actually used after refinement
};

/// Branch-continuous Tr[log F(tau_end)] for a continuous path of nonsingular
/// matrices with F(0) = I. Steps whose determinant ratio turns by 0.9*pi or
/// more are bisected, up to `max_depth` levels.
inline PathLog logm_path(const std::function<CMat(double)>& f, double tau_end, int n_steps,
                         int max_depth = 12) {
  if (n_steps < 1) throw DomainError("logm_path: n_steps must be >= 1");
  PathLog out{cplx{0.0, 0.0}, 0};
  if (tau_end == 0.0) return out;

  LogDetAccumulator acc;
  auto det_checked = [](const CMat& m, double t) {
    Eigen::PartialPivLU<CMat> lu(m);
    const cplx det = lu.determinant();
    if (det == cplx{0.0, 0.0} || !std::isfinite(det.real()) || !std::isfinite(det.imag()))
      throw SingularityError("logm_path: F is singular", t);
    return lu;
  };

  std::function<void(double, double, const CMat&, const CMat&, int)> step =
      [&](double t0, double t1, const CMat& f0, const CMat& f1, int depth) {
        auto lu0 = det_checked(f0, t0);
        det_checked(f1, t1);
        const cplx r = lu0.solve(f1).determinant();
        if (acc.admissible(r)) {
          acc.add(r);
          ++out.steps;
          return;
        }
        if (depth >= max_depth)
          throw SingularityError("logm_path: refinement cap exceeded", t0);
        const double tm = 0.5 * (t0 + t1);
        const CMat fm = f(tm);
        step(t0, tm, f0, fm, depth + 1);
        step(tm, t1, fm, f1, depth + 1);
      };

  const double h = tau_end / n_steps;
  CMat prev = f(0.0);
  for (int k = 0; k < n_steps; ++k) {
    const double t0 = k * h;
    const double t1 = (k + 1 == n_steps) ? tau_end : (k + 1) * h;
    CMat next = f(t1);
    step(t0, t1, prev, next, 0);
    prev = std::move(next);
  }
  out.trace = acc.value();
  return out;
}

// Trace of a product without forming it.
template <typename A, typename B>
auto trace_prod(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return a.cwiseProduct(b.transpose()).sum();
}

inline CMat to_complex(const RMat& m) { return m.cast<cplx>(); }

}  // namespace wishfx

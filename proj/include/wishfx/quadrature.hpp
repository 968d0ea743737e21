#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

#include "wishfx/errors.hpp"

namespace wishfx {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

namespace detail {

// Golub-Welsch: eigenvalues of the Jacobi matrix of the Legendre recurrence.
inline GaussRule compute_gauss_legendre(int n) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) j(k, k - 1) = j(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    r.nodes[k] = es.eigenvalues()(k);
    r.weights[k] = 2.0 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
  }
  // One Newton polish per node on P_n for full double accuracy.
  auto legendre = [n](double x, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int m = 2; m <= n; ++m) {
      const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    return p1;
  };
  for (int k = 0; k < n && n > 1; ++k) {
    double dp = 0.0;
    const double x = r.nodes[k] - legendre(r.nodes[k], dp) / dp;
    legendre(x, dp);
    r.nodes[k] = x;
    r.weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

}  // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1]; cached per n.
inline const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: n must be >= 1");
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, detail::compute_gauss_legendre(n)).first;
  return it->second;
}

/// Integral of f over [a, b] with an n-point rule.
template <typename F>
auto integrate_gl(const F& f, double a, double b, int n) {
  const GaussRule& r = gauss_legendre(n);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  auto sum = f(c + h * r.nodes[0]) * r.weights[0];
  for (int k = 1; k < n; ++k) sum += f(c + h * r.nodes[k]) * r.weights[k];
  return sum * h;
}

}  // namespace wishfx

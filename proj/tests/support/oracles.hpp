#pragma once

// Independent numerical oracles shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline double influence(double s, double zeta) {
  return std::min(s, zeta) * (1.0 - std::max(s, zeta));
}

inline double sensor_moment(double rho, double s) { return s < rho ? -s : 1.0 - s; }

// Composite Simpson over [0,1] with about n_points nodes, split at the kinks
// of the integrand.
template <class F>
double simpson_split(F&& f, std::vector<double> breaks, int n_points) {
  breaks.push_back(0.0);
  breaks.push_back(1.0);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double a = breaks[p];
    const double b = breaks[p + 1];
    int n = std::max(2, 2 * static_cast<int>(std::lround(0.5 * n_points * (b - a))));
    const double h = (b - a) / n;
    // endpoints taken as one-sided limits from inside the piece
    const double tiny = 1e-13 * (b - a);
    double acc = f(a + tiny) + f(b - tiny);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    total += acc * h / 3.0;
  }
  return total;
}

// Moving-load integral of the product of two moment influences.
inline double moment_product_quadrature(double s, double sbar, int n_points = 10000) {
  return simpson_split([&](double z) { return influence(s, z) * influence(sbar, z); }, {s, sbar},
                       n_points);
}

// Dense kernel on the midpoint grid, with measure weights L/n folded in so
// the eigenvalues approximate the integral operator on L2(0, L).
inline Eigen::MatrixXd fredholm_matrix(double rho, double scale, double length, int n) {
  Eigen::MatrixXd k(n, n);
  for (int i = 0; i < n; ++i) {
    const double s = (i + 0.5) / n;
    for (int j = 0; j < n; ++j) {
      const double t = (j + 0.5) / n;
      const double a = std::min(s, t), b = std::max(s, t);
      k(i, j) = scale * sensor_moment(rho, s) * sensor_moment(rho, t) * a * (1 - b) *
                (2 * b - a * a - b * b) / 6.0 * length / n;
    }
  }
  return 0.5 * (k + k.transpose());
}

inline Eigen::VectorXd top_eigenvalues(const Eigen::MatrixXd& m, int k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  Eigen::VectorXd out(k);
  for (int i = 0; i < k; ++i) out(i) = es.eigenvalues()(m.rows() - 1 - i);
  return out;
}

}  // namespace oracle

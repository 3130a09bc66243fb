#pragma once

// Fourth-order central differences combined by Richardson extrapolation over
// two step sizes. Works for real- and complex-valued functions of R^d.

#include <cmath>

#include <Eigen/Dense>

namespace madd::detail {

inline constexpr double kCoarseStep = 1e-3;
inline constexpr double kFineStep = 1e-4;

template <class F>
auto first_derivative_4(F&& f, const Eigen::VectorXd& x, const Eigen::VectorXd& dir, double h) {
  return (-f(x + 2 * h * dir) + 8.0 * f(x + h * dir) - 8.0 * f(x - h * dir) + f(x - 2 * h * dir)) / (12.0 * h);
}

template <class F, class V>
auto second_derivative_4(F&& f, const Eigen::VectorXd& x, const Eigen::VectorXd& dir, double h, const V& fx) {
  return (-f(x + 2 * h * dir) + 16.0 * f(x + h * dir) - 30.0 * fx + 16.0 * f(x - h * dir) - f(x - 2 * h * dir)) /
         (12.0 * h * h);
}

// Eliminates the h^4 error term between the two step sizes.
template <class T>
T richardson4(const T& coarse, const T& fine, double h1 = kCoarseStep, double h2 = kFineStep) {
  const double w1 = std::pow(h1, 4);
  const double w2 = std::pow(h2, 4);
  return (w1 * fine - w2 * coarse) / (w1 - w2);
}

template <class Scalar, class F>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> gradient(F&& f, const Eigen::VectorXd& x) {
  const Eigen::Index d = x.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> g(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const Eigen::VectorXd e = Eigen::VectorXd::Unit(d, k);
    const Scalar coarse = first_derivative_4(f, x, e, kCoarseStep);
    const Scalar fine = first_derivative_4(f, x, e, kFineStep);
    g[k] = richardson4(coarse, fine);
  }
  return g;
}

// Mixed partials come from directional second derivatives along e_k + e_l.
template <class Scalar, class F>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> hessian(F&& f, const Eigen::VectorXd& x) {
  const Eigen::Index d = x.size();
  const Scalar fx = f(x);
  auto directional = [&](const Eigen::VectorXd& dir) -> Scalar {
    const Scalar coarse = second_derivative_4(f, x, dir, kCoarseStep, fx);
    const Scalar fine = second_derivative_4(f, x, dir, kFineStep, fx);
    return richardson4(coarse, fine);
  };
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> h(d, d);
  for (Eigen::Index k = 0; k < d; ++k) h(k, k) = directional(Eigen::VectorXd::Unit(d, k));
  for (Eigen::Index k = 0; k < d; ++k) {
    for (Eigen::Index l = k + 1; l < d; ++l) {
      const Eigen::VectorXd dir = Eigen::VectorXd::Unit(d, k) + Eigen::VectorXd::Unit(d, l);
      h(k, l) = h(l, k) = (directional(dir) - h(k, k) - h(l, l)) / 2.0;
    }
  }
  return h;
}

}  // namespace madd::detail

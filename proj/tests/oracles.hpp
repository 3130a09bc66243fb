#pragma once

// Brute-force reference computations. Nothing here calls into the library
// beyond reading a ProcessSpec's atoms.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "madd/process_model.hpp"

namespace oracle {

using State = std::pair<std::vector<std::int64_t>, int>;
using Law = std::map<State, double>;

inline std::string data(const std::string& name) { return std::string(MADD_TEST_DATA) + "/" + name + ".json"; }

// One step of the chain applied to a law on Z^d x layers.
inline Law step(const madd::ProcessSpec& s, const Law& law) {
  Law next;
  for (const auto& [state, mass] : law) {
    const auto& [x, i] = state;
    for (int j = 0; j < s.states(); ++j) {
      for (const auto& [dx, q] : s.jump(i, j).atoms()) {
        std::vector<std::int64_t> y = x;
        for (std::size_t k = 0; k < y.size(); ++k) y[k] += dx.coords[k];
        next[{y, j}] += mass * q;
      }
    }
  }
  return next;
}

// Law of (A_n, M_n) from (0, i) by repeated dense stepping.
inline Law power(const madd::ProcessSpec& s, int i, int n) {
  Law law{{{std::vector<std::int64_t>(static_cast<std::size_t>(s.dim()), 0), i}, 1.0}};
  for (int k = 0; k < n; ++k) law = step(s, law);
  return law;
}

// Truncated sum of P(A_n = x, M_n = j) for n <= horizon.
inline double green(const madd::ProcessSpec& s, int i, const std::vector<std::int64_t>& x, int j, int horizon) {
  Law law{{{std::vector<std::int64_t>(static_cast<std::size_t>(s.dim()), 0), i}, 1.0}};
  double total = 0.0;
  for (int n = 0; n <= horizon; ++n) {
    auto it = law.find({x, j});
    if (it != law.end()) total += it->second;
    law = step(s, law);
    for (auto a = law.begin(); a != law.end();) a = a->second < 1e-18 ? law.erase(a) : std::next(a);
  }
  return total;
}

// Reachability from (0, i) inside the sup-norm box of radius r.
inline std::set<State> reachable(const madd::ProcessSpec& s, int i, std::int64_t r) {
  std::set<State> seen;
  std::queue<State> todo;
  State start{std::vector<std::int64_t>(static_cast<std::size_t>(s.dim()), 0), i};
  seen.insert(start);
  todo.push(start);
  while (!todo.empty()) {
    const State cur = todo.front();
    todo.pop();
    for (int j = 0; j < s.states(); ++j) {
      for (const auto& [dx, q] : s.jump(cur.second, j).atoms()) {
        std::vector<std::int64_t> y = cur.first;
        bool inside = true;
        for (std::size_t k = 0; k < y.size(); ++k) {
          y[k] += dx.coords[k];
          inside = inside && std::llabs(y[k]) <= r;
        }
        State nxt{y, j};
        if (inside && seen.insert(nxt).second) todo.push(nxt);
      }
    }
  }
  return seen;
}

// Every (±e_k, j) and (0, j) reachable from every (0, i) within the box.
inline bool irreducible_in_box(const madd::ProcessSpec& s, std::int64_t r) {
  const auto d = static_cast<std::size_t>(s.dim());
  for (int i = 0; i < s.states(); ++i) {
    const auto seen = reachable(s, i, r);
    for (int j = 0; j < s.states(); ++j) {
      std::vector<std::int64_t> z(d, 0);
      if (!seen.count({z, j})) return false;
      for (std::size_t k = 0; k < d; ++k) {
        for (std::int64_t sign : {-1, 1}) {
          std::vector<std::int64_t> e(d, 0);
          e[k] = sign;
          if (!seen.count({e, j})) return false;
        }
      }
    }
  }
  return true;
}

inline Eigen::MatrixXcd fourier(const madd::ProcessSpec& s, const Eigen::VectorXd& theta) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(s.states(), s.states());
  for (int i = 0; i < s.states(); ++i)
    for (int j = 0; j < s.states(); ++j)
      for (const auto& [dx, q] : s.jump(i, j).atoms()) {
        double phase = 0.0;
        for (int k = 0; k < s.dim(); ++k) phase += theta[k] * static_cast<double>(dx.coords[static_cast<std::size_t>(k)]);
        m(i, j) += q * std::polar(1.0, phase);
      }
  return m;
}

inline Eigen::MatrixXd laplace(const madd::ProcessSpec& s, const Eigen::VectorXd& c) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(s.states(), s.states());
  for (int i = 0; i < s.states(); ++i)
    for (int j = 0; j < s.states(); ++j)
      for (const auto& [dx, q] : s.jump(i, j).atoms()) {
        double e = 0.0;
        for (int k = 0; k < s.dim(); ++k) e += c[k] * static_cast<double>(dx.coords[static_cast<std::size_t>(k)]);
        m(i, j) += q * std::exp(e);
      }
  return m;
}

// Power iteration on a nonnegative primitive matrix.
inline double perron(const Eigen::MatrixXd& m, int iterations = 20000) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m.rows());
  double rho = 0.0;
  for (int n = 0; n < iterations; ++n) {
    Eigen::VectorXd w = m * v;
    rho = w.norm() / v.norm();
    v = w / w.norm();
  }
  return rho;
}

inline Eigen::VectorXd stationary(const madd::ProcessSpec& s) {
  Eigen::MatrixXd p = laplace(s, Eigen::VectorXd::Zero(s.dim()));
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(s.states(), 1.0 / s.states());
  // Lazy chain avoids periodic oscillation.
  const Eigen::MatrixXd lazy = 0.5 * (p + Eigen::MatrixXd::Identity(p.rows(), p.cols()));
  for (int n = 0; n < 100000; ++n) pi = pi * lazy;
  return pi.transpose() / pi.sum();
}

inline Eigen::VectorXd drift(const madd::ProcessSpec& s) {
  const Eigen::VectorXd pi = stationary(s);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(s.dim());
  for (int i = 0; i < s.states(); ++i)
    for (int j = 0; j < s.states(); ++j)
      for (const auto& [dx, q] : s.jump(i, j).atoms())
        for (int k = 0; k < s.dim(); ++k) m[k] += pi[i] * q * static_cast<double>(dx.coords[static_cast<std::size_t>(k)]);
  return m;
}

// Skip-free walk W1: G(0) = 1/m, left decay 0.4.
inline double w1_green(std::int64_t x) { return x >= 0 ? 10.0 / 3.0 : 10.0 / 3.0 * std::pow(0.4, static_cast<double>(-x)); }

}  // namespace oracle

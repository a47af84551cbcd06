#pragma once

// Test-only reference implementations, deliberately independent of the
// library's evaluation paths.

#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

// Direct extended-precision evaluation of the scaled Hermite function from
// its definition: h_n(t) e^{-t^2/2} / sqrt(2^n n!), raw polynomial recurrence
// in long double.
inline long double hermite_function_direct(int n, double alpha, double beta, double x) {
  const long double t = static_cast<long double>(alpha) * (x - beta);
  long double h_prev = 1.0L;  // H_0
  long double h = 2.0L * t;   // H_1
  if (n == 0) h = h_prev;
  for (int k = 1; k < n; ++k) {
    const long double h_next = 2.0L * t * h - 2.0L * k * h_prev;
    h_prev = h;
    h = h_next;
  }
  long double norm = 1.0L;
  for (int k = 1; k <= n; ++k) norm *= 2.0L * k;  // 2^n n!
  return h / std::sqrt(norm) * std::exp(-0.5L * t * t);
}

inline double central_derivative(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double central_second_derivative(const std::function<double(double)>& f, double x,
                                        double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// Heat kernel acting on a unit Gaussian: exact solution of u_t = nu u_xx with
// u0 = exp(-x^2/2).
inline double heat_gaussian(double x, double t, double nu) {
  const double s2 = 1.0 + 2.0 * nu * t;
  return std::exp(-0.5 * x * x / s2) / std::sqrt(s2);
}

// Composite Simpson integration on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, int cells) {
  if (cells % 2 == 1) ++cells;
  const double h = (b - a) / cells;
  double acc = f(a) + f(b);
  for (int i = 1; i < cells; ++i) acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// Continuous-time Kalman-Bucy filter for dx = a x dt + dv, dy = c x dt + dw
// with E[dv^2] = Q dt, E[dw^2] = S dt, driven by the sampled observation
// increments. The mean and Riccati equations are integrated with the same
// step as the observations (sub-stepped for the variance).
struct KalmanBucy {
  double a = 0.0, c = 1.0, q = 1.0, s = 1.0;
  double mean = 0.0, var = 1.0;

  void step(double dy, double dt) {
    const int sub = 10;
    const double h = dt / sub;
    double p = var;
    for (int i = 0; i < sub; ++i) {
      const double dp = 2.0 * a * p + q - c * c * p * p / s;
      p += h * dp;
    }
    const double gain = var * c / s;
    mean += a * mean * dt + gain * (dy - c * mean * dt);
    var = p;
  }
};

}  // namespace oracles

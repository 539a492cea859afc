#pragma once

// Riemannian metrics on a two-dimensional base chart.
//
// Two families are supported:
//   conformal      sigma = exp(2 lambda(x,y)) (dx^2 + dy^2), Cartesian chart
//   rot_symmetric  sigma = dr^2 + f(r)^2 dtheta^2,        polar chart (r, theta)
// A one-dimensional interval uses the conformal factor restricted to y = 0.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "mcflab/errors.hpp"

namespace mcflab {

using Point2 = std::array<double, 2>;

enum class MetricKind { euclidean, conformal, rot_symmetric };

inline const char* to_string(MetricKind k) {
  switch (k) {
    case MetricKind::euclidean: return "euclidean";
    case MetricKind::conformal: return "conformal";
    case MetricKind::rot_symmetric: return "rot_symmetric";
  }
  return "?";
}

/// lambda(x, y) with analytic gradient and Laplacian.
struct ConformalFactor {
  std::function<double(double, double)> value;
  std::function<Point2(double, double)> gradient;
  std::function<double(double, double)> laplacian;
  std::function<bool(double, double)> in_chart = [](double, double) { return true; };
};

/// f(r) with first and second derivatives.
struct WarpFunction {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;
};

/// Metric components at one chart point. Matrices are row-major 2x2.
struct MetricSample {
  std::array<double, 4> g{};
  std::array<double, 4> ginv{};
  double sqrt_det = 0.0;
  double gauss = 0.0;  // Gaussian curvature K
};

class MetricField {
 public:
  static MetricField euclidean() {
    ConformalFactor zero{[](double, double) { return 0.0; },
                         [](double, double) { return Point2{0.0, 0.0}; },
                         [](double, double) { return 0.0; }};
    return MetricField(MetricKind::euclidean, "euclidean", std::move(zero), {});
  }

  static MetricField conformal(std::string name, ConformalFactor lambda) {
    return MetricField(MetricKind::conformal, std::move(name), std::move(lambda), {});
  }

  static MetricField rot_symmetric(std::string name, WarpFunction warp) {
    return MetricField(MetricKind::rot_symmetric, std::move(name), {}, std::move(warp));
  }

  MetricKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  bool is_conformal() const noexcept { return kind_ != MetricKind::rot_symmetric; }

  const ConformalFactor& lambda() const { return lambda_; }
  const WarpFunction& warp() const { return warp_; }

  /// Conformal exponent at a Cartesian point; throws outside the chart.
  double conformal_exponent(double x, double y) const {
    if (!lambda_.in_chart(x, y)) {
      throw DomainError(name_ + ": point (" + std::to_string(x) + ", " + std::to_string(y) +
                        ") is outside the chart");
    }
    const double l = lambda_.value(x, y);
    if (!std::isfinite(l)) throw DomainError(name_ + ": conformal factor is not finite");
    return l;
  }

  /// Warp value f(r); throws at the pole or where the warp degenerates.
  double warp_value(double r) const {
    if (!(r > 0.0)) throw DomainError(name_ + ": polar query at r <= 0 (pole excluded)");
    const double f = warp_.f(r);
    if (!(f > 0.0) || !std::isfinite(f)) {
      throw DomainError(name_ + ": warp function vanishes at r = " + std::to_string(r));
    }
    return f;
  }

  /// Gaussian curvature in the field's native chart.
  double gaussian_curvature(const Point2& x) const {
    if (is_conformal()) {
      const double l = conformal_exponent(x[0], x[1]);
      return -std::exp(-2.0 * l) * lambda_.laplacian(x[0], x[1]);
    }
    const double f = warp_value(x[0]);
    return -warp_.d2f(x[0]) / f;
  }

 private:
  MetricField(MetricKind k, std::string name, ConformalFactor l, WarpFunction w)
      : kind_(k), name_(std::move(name)), lambda_(std::move(l)), warp_(std::move(w)) {}

  MetricKind kind_;
  std::string name_;
  ConformalFactor lambda_;
  WarpFunction warp_;
};

/// Components of sigma at a point of the field's native chart:
/// (x, y) for conformal metrics, (r, theta) for rotationally symmetric ones.
inline MetricSample metric_at(const MetricField& field, const Point2& x) {
  MetricSample s;
  if (field.is_conformal()) {
    const double e = std::exp(2.0 * field.conformal_exponent(x[0], x[1]));
    s.g = {e, 0.0, 0.0, e};
    s.ginv = {1.0 / e, 0.0, 0.0, 1.0 / e};
    s.sqrt_det = e;
  } else {
    const double f = field.warp_value(x[0]);
    s.g = {1.0, 0.0, 0.0, f * f};
    s.ginv = {1.0, 0.0, 0.0, 1.0 / (f * f)};
    s.sqrt_det = f;
  }
  s.gauss = field.gaussian_curvature(x);
  return s;
}

namespace metrics {

/// Poincare disk: lambda = log(2 / (1 - |x|^2)), K = -1.
inline MetricField poincare_disk() {
  ConformalFactor l;
  l.value = [](double x, double y) { return std::log(2.0 / (1.0 - x * x - y * y)); };
  l.gradient = [](double x, double y) {
    const double d = 1.0 - x * x - y * y;
    return Point2{2.0 * x / d, 2.0 * y / d};
  };
  l.laplacian = [](double x, double y) {
    const double d = 1.0 - x * x - y * y;
    return 4.0 / (d * d);
  };
  l.in_chart = [](double x, double y) { return x * x + y * y < 1.0; };
  return MetricField::conformal("poincare_disk", std::move(l));
}

/// Upper half plane: lambda = -log y, K = -1.
inline MetricField hyperbolic_halfplane() {
  ConformalFactor l;
  l.value = [](double, double y) { return -std::log(y); };
  l.gradient = [](double, double y) { return Point2{0.0, -1.0 / y}; };
  l.laplacian = [](double, double y) { return 1.0 / (y * y); };
  l.in_chart = [](double, double y) { return y > 0.0; };
  return MetricField::conformal("hyperbolic_halfplane", std::move(l));
}

/// lambda = sum_k c_k s^k with s = x^2 + y^2.
inline MetricField custom_conformal(std::vector<double> c) {
  auto poly = [c](double s, int deriv) {
    double acc = 0.0;
    for (std::size_t k = static_cast<std::size_t>(deriv); k < c.size(); ++k) {
      double coef = c[k];
      for (int d = 0; d < deriv; ++d) coef *= static_cast<double>(k - static_cast<std::size_t>(d));
      acc += coef * std::pow(s, static_cast<double>(k - static_cast<std::size_t>(deriv)));
    }
    return acc;
  };
  ConformalFactor l;
  l.value = [poly](double x, double y) { return poly(x * x + y * y, 0); };
  l.gradient = [poly](double x, double y) {
    const double d1 = poly(x * x + y * y, 1);
    return Point2{2.0 * x * d1, 2.0 * y * d1};
  };
  l.laplacian = [poly](double x, double y) {
    const double s = x * x + y * y;
    return 4.0 * poly(s, 1) + 4.0 * s * poly(s, 2);
  };
  return MetricField::conformal("custom_conformal", std::move(l));
}

/// Round sphere in geodesic polar coordinates: f = sin r, K = +1.
inline MetricField sphere() {
  return MetricField::rot_symmetric(
      "sphere", {[](double r) { return std::sin(r); }, [](double r) { return std::cos(r); },
                 [](double r) { return -std::sin(r); }});
}

/// Hyperbolic plane in geodesic polar coordinates: f = sinh r, K = -1.
inline MetricField hyperbolic_polar() {
  return MetricField::rot_symmetric(
      "hyperbolic_polar", {[](double r) { return std::sinh(r); },
                           [](double r) { return std::cosh(r); },
                           [](double r) { return std::sinh(r); }});
}

/// f(r) = sum_k c_k r^k.
inline MetricField custom_warp(std::vector<double> c) {
  auto poly = [c](double r, int deriv) {
    double acc = 0.0;
    for (std::size_t k = static_cast<std::size_t>(deriv); k < c.size(); ++k) {
      double coef = c[k];
      for (int d = 0; d < deriv; ++d) coef *= static_cast<double>(k - static_cast<std::size_t>(d));
      acc += coef * std::pow(r, static_cast<double>(k - static_cast<std::size_t>(deriv)));
    }
    return acc;
  };
  return MetricField::rot_symmetric(
      "custom_warp", {[poly](double r) { return poly(r, 0); },
                      [poly](double r) { return poly(r, 1); },
                      [poly](double r) { return poly(r, 2); }});
}

}  // namespace metrics
}  // namespace mcflab

#pragma once
// Closed-form metrics, surface parametrizations and fields, written as
// templates over the scalar type so that jets come from automatic
// differentiation.

#include <cmath>

#include "efimov/core/dual.hpp"
#include "efimov/core/linalg.hpp"

namespace efimov::models {

using namespace efimov::math;

// ---- ambient metrics on 3-dimensional charts ----

struct Euclidean3 {
  template <class T>
  Mat<T, 3> operator()(const Vec<T, 3>&) const {
    return Mat<T, 3>::identity();
  }
};

// Conformally flat metric c(x) * delta.
template <class T>
Mat<T, 3> conformal(const T& c) {
  Mat<T, 3> g;
  g(0, 0) = c;
  g(1, 1) = c;
  g(2, 2) = c;
  return g;
}

// Unit round 3-sphere in stereographic coordinates.
struct Sphere3 {
  template <class T>
  Mat<T, 3> operator()(const Vec<T, 3>& x) const {
    T s = T(1.0) + dot(x, x);
    return conformal<T>(T(4.0) / (s * s));
  }
};

// Hyperbolic 3-space in the Poincare ball.
struct Hyperbolic3 {
  template <class T>
  Mat<T, 3> operator()(const Vec<T, 3>& x) const {
    T s = T(1.0) - dot(x, x);
    return conformal<T>(T(4.0) / (s * s));
  }
};

// (1+2 l z) cosh^2 y cosh^2 z dx^2 + (1-2 l z) cosh^2 z dy^2 + dz^2.
struct GLambda {
  double lambda = 1.0;
  template <class T>
  Mat<T, 3> operator()(const Vec<T, 3>& p) const {
    T cy = cosh(p[1]), cz = cosh(p[2]);
    Mat<T, 3> g;
    g(0, 0) = (T(1.0) + 2.0 * lambda * p[2]) * cy * cy * cz * cz;
    g(1, 1) = (T(1.0) - 2.0 * lambda * p[2]) * cz * cz;
    g(2, 2) = T(1.0);
    return g;
  }
};

// dr^2 + r^2 dtheta^2 + dz^2.
struct PolarFlat3 {
  template <class T>
  Mat<T, 3> operator()(const Vec<T, 3>& p) const {
    Mat<T, 3> g;
    g(0, 0) = T(1.0);
    g(1, 1) = p[0] * p[0];
    g(2, 2) = T(1.0);
    return g;
  }
};

// ---- surface parametrizations (u, v) -> chart point ----

struct PlanePatch {
  template <class T>
  Vec<T, 3> operator()(const Vec<T, 2>& q) const {
    return Vec<T, 3>{{q[0], q[1], T(0.0)}};
  }
};

// Sphere of radius r; u is the colatitude, v the longitude. With positive
// orientation the normal points outwards.
struct RoundSpherePatch {
  double radius = 1.0;
  Vec3 center{};
  template <class T>
  Vec<T, 3> operator()(const Vec<T, 2>& q) const {
    T su = sin(q[0]);
    return Vec<T, 3>{{center[0] + radius * su * cos(q[1]), center[1] + radius * su * sin(q[1]),
                      center[2] + radius * cos(q[0])}};
  }
};

// z = a u v
struct SaddlePatch {
  double a = 1.0;
  template <class T>
  Vec<T, 3> operator()(const Vec<T, 2>& q) const {
    return Vec<T, 3>{{q[0], q[1], a * q[0] * q[1]}};
  }
};

// Tractroid of curvature -1/a^2.
struct PseudospherePatch {
  double a = 1.0;
  template <class T>
  Vec<T, 3> operator()(const Vec<T, 2>& q) const {
    T s = T(1.0) / cosh(q[0]);
    return Vec<T, 3>{{a * s * cos(q[1]), a * s * sin(q[1]), a * (q[0] - tanh(q[0]))}};
  }
};

// Clifford torus (cos u, sin u, cos v, sin v)/sqrt 2 in the unit 3-sphere,
// seen through stereographic projection from (0, 0, 0, 1).
struct CliffordTorusPatch {
  template <class T>
  Vec<T, 3> operator()(const Vec<T, 2>& q) const {
    T d = T(std::sqrt(2.0)) - sin(q[1]);
    return Vec<T, 3>{{cos(q[0]) / d, sin(q[0]) / d, cos(q[1]) / d}};
  }
};

// ---- metrics on 2-dimensional charts ----

struct FlatPlane2 {
  template <class T>
  Mat<T, 2> operator()(const Vec<T, 2>&) const {
    return Mat<T, 2>::identity();
  }
};

// d psi^2 + sin^2 psi d phi^2
struct RoundSphereSpherical2 {
  template <class T>
  Mat<T, 2> operator()(const Vec<T, 2>& q) const {
    T s = sin(q[0]);
    Mat<T, 2> g;
    g(0, 0) = T(1.0);
    g(1, 1) = s * s;
    return g;
  }
};

// 4 (du^2 + dv^2) / (1 + u^2 + v^2)^2, curvature +1.
struct RoundSphereStereo2 {
  template <class T>
  Mat<T, 2> operator()(const Vec<T, 2>& q) const {
    T s = T(1.0) + q[0] * q[0] + q[1] * q[1];
    T c = T(4.0) / (s * s);
    Mat<T, 2> g;
    g(0, 0) = c;
    g(1, 1) = c;
    return g;
  }
};

// 4 (du^2 + dv^2) / (1 - u^2 - v^2)^2, curvature -1.
struct PoincareDisk2 {
  template <class T>
  Mat<T, 2> operator()(const Vec<T, 2>& q) const {
    T s = T(1.0) - q[0] * q[0] - q[1] * q[1];
    T c = T(4.0) / (s * s);
    Mat<T, 2> g;
    g(0, 0) = c;
    g(1, 1) = c;
    return g;
  }
};

// dr^2 + sinh^2 r dtheta^2, curvature -1.
struct HyperbolicPolar2 {
  template <class T>
  Mat<T, 2> operator()(const Vec<T, 2>& q) const {
    T s = sinh(q[0]);
    Mat<T, 2> g;
    g(0, 0) = T(1.0);
    g(1, 1) = s * s;
    return g;
  }
};

// ---- torsion vector fields ----

struct ZeroTorsion {
  template <class T>
  Vec<T, 2> operator()(const Vec<T, 2>&) const {
    return Vec<T, 2>{};
  }
};

// t times the unit angular field of the polar hyperbolic chart.
struct AngularTorsion {
  double t = 1.0;
  template <class T>
  Vec<T, 2> operator()(const Vec<T, 2>& q) const {
    return Vec<T, 2>{{T(0.0), t / sinh(q[0])}};
  }
};

// Constant coordinate components.
struct ConstantTorsion {
  Vec2 value{};
  template <class T>
  Vec<T, 2> operator()(const Vec<T, 2>&) const {
    return Vec<T, 2>{{T(value[0]), T(value[1])}};
  }
};

}  // namespace efimov::models

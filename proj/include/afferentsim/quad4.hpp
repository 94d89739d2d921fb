#ifndef AFFERENTSIM_QUAD4_HPP
#define AFFERENTSIM_QUAD4_HPP

// Bilinear isoparametric quadrilateral kernels for plane strain. Corner order
// is counterclockwise starting at natural coordinates (-1, -1).

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Core>
#include <Eigen/LU>

namespace afferentsim::quad4 {

template <typename Scalar>
using Coordinates = Eigen::Matrix<Scalar, 4, 2>;

template <typename Scalar>
using StrainDisplacement = Eigen::Matrix<Scalar, 3, 8>;

template <typename Scalar>
using ElementMatrix = Eigen::Matrix<Scalar, 8, 8>;

inline constexpr std::array<double, 4> kCornerXi = {-1.0, 1.0, 1.0, -1.0};
inline constexpr std::array<double, 4> kCornerEta = {-1.0, -1.0, 1.0, 1.0};

/// 2x2 Gauss points, ordered like the corners they are nearest to.
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 2> gauss_points() {
  const Scalar g = Scalar(1) / std::sqrt(Scalar(3));
  Eigen::Matrix<Scalar, 4, 2> p;
  for (int a = 0; a < 4; ++a) {
    p(a, 0) = Scalar(kCornerXi[a]) * g;
    p(a, 1) = Scalar(kCornerEta[a]) * g;
  }
  return p;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 1, 4> shape(Scalar xi, Scalar eta) {
  Eigen::Matrix<Scalar, 1, 4> n;
  for (int a = 0; a < 4; ++a) {
    n(a) = Scalar(0.25) * (Scalar(1) + Scalar(kCornerXi[a]) * xi) *
           (Scalar(1) + Scalar(kCornerEta[a]) * eta);
  }
  return n;
}

/// Row 0: dN/dxi, row 1: dN/deta.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 4> shape_gradient(Scalar xi, Scalar eta) {
  Eigen::Matrix<Scalar, 2, 4> d;
  for (int a = 0; a < 4; ++a) {
    const Scalar sx = Scalar(kCornerXi[a]);
    const Scalar se = Scalar(kCornerEta[a]);
    d(0, a) = Scalar(0.25) * sx * (Scalar(1) + se * eta);
    d(1, a) = Scalar(0.25) * se * (Scalar(1) + sx * xi);
  }
  return d;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> jacobian(const Coordinates<Scalar>& xy, Scalar xi, Scalar eta) {
  return shape_gradient(xi, eta) * xy;
}

/// Plane-strain constitutive matrix in Voigt order (xx, yy, xy) with
/// engineering shear strain.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> plane_strain_elasticity(Scalar young, Scalar poisson) {
  const Scalar f = young / ((Scalar(1) + poisson) * (Scalar(1) - Scalar(2) * poisson));
  Eigen::Matrix<Scalar, 3, 3> d;
  d << Scalar(1) - poisson, poisson, Scalar(0),
       poisson, Scalar(1) - poisson, Scalar(0),
       Scalar(0), Scalar(0), (Scalar(1) - Scalar(2) * poisson) / Scalar(2);
  return f * d;
}

/// Strain-displacement matrix at (xi, eta); `det_j` receives the Jacobian
/// determinant.
template <typename Scalar>
StrainDisplacement<Scalar> strain_displacement(const Coordinates<Scalar>& xy, Scalar xi,
                                               Scalar eta, Scalar& det_j) {
  const Eigen::Matrix<Scalar, 2, 4> dn = shape_gradient(xi, eta);
  const Eigen::Matrix<Scalar, 2, 2> j = dn * xy;
  det_j = j.determinant();
  const Eigen::Matrix<Scalar, 2, 4> dxy = j.inverse() * dn;
  StrainDisplacement<Scalar> b = StrainDisplacement<Scalar>::Zero();
  for (int a = 0; a < 4; ++a) {
    b(0, 2 * a) = dxy(0, a);
    b(1, 2 * a + 1) = dxy(1, a);
    b(2, 2 * a) = dxy(1, a);
    b(2, 2 * a + 1) = dxy(0, a);
  }
  return b;
}

/// Smallest Jacobian determinant over the 2x2 Gauss points.
template <typename Scalar>
Scalar min_gauss_jacobian(const Coordinates<Scalar>& xy) {
  const auto gp = gauss_points<Scalar>();
  Scalar lowest = jacobian<Scalar>(xy, gp(0, 0), gp(0, 1)).determinant();
  for (int g = 1; g < 4; ++g) {
    lowest = std::min(lowest, jacobian<Scalar>(xy, gp(g, 0), gp(g, 1)).determinant());
  }
  return lowest;
}

/// Element stiffness for unit out-of-plane thickness, 2x2 Gauss rule.
/// Returns false if a Jacobian determinant is non-positive.
template <typename Scalar>
bool element_stiffness(const Coordinates<Scalar>& xy, const Eigen::Matrix<Scalar, 3, 3>& d,
                       ElementMatrix<Scalar>& k) {
  const auto gp = gauss_points<Scalar>();
  k.setZero();
  for (int g = 0; g < 4; ++g) {
    Scalar det_j;
    const StrainDisplacement<Scalar> b = strain_displacement<Scalar>(xy, gp(g, 0), gp(g, 1), det_j);
    if (!(det_j > Scalar(0))) return false;
    k.noalias() += b.transpose() * d * b * det_j;
  }
  return true;
}

/// Maps values at the four Gauss points to the corners by evaluating their
/// bilinear interpolant at xi, eta = +-sqrt(3).
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 4> gauss_to_corner_extrapolation() {
  const Scalar r = std::sqrt(Scalar(3));
  Eigen::Matrix<Scalar, 4, 4> e;
  for (int a = 0; a < 4; ++a) {
    e.row(a) = shape<Scalar>(Scalar(kCornerXi[a]) * r, Scalar(kCornerEta[a]) * r);
  }
  return e;
}

}  // namespace afferentsim::quad4

#endif  // AFFERENTSIM_QUAD4_HPP

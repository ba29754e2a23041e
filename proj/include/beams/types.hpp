#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>

namespace beams {

template <typename Scalar>
using Vector4 = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar>
using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

using Vec4 = Vector4<double>;
using Mat4 = Matrix4<double>;
using cplx = std::complex<double>;
using CVec4 = Vector4<cplx>;
using CMat4 = Matrix4<cplx>;

// d[k](mu, nu) = d_k g^{mu nu}
using Tensor3 = std::array<Mat4, 4>;
// dd[k][l](mu, nu) = d_k d_l g^{mu nu}
using Tensor4 = std::array<std::array<Mat4, 4>, 4>;

// Point of the cotangent bundle at affine parameter s.
struct CotangentState {
    double s = 0.0;
    Vec4 x = Vec4::Zero();
    Vec4 p = Vec4::Zero();
};

}  // namespace beams

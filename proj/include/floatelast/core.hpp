#pragma once

#include <Eigen/Dense>

namespace floatelast {

// Small dense types sized at runtime (2 or 3), stack-allocated up to 3.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

inline double det(const Mat& F) {
    if (F.rows() == 2)
        return F(0, 0) * F(1, 1) - F(0, 1) * F(1, 0);
    return F(0, 0) * (F(1, 1) * F(2, 2) - F(1, 2) * F(2, 1))
         - F(0, 1) * (F(1, 0) * F(2, 2) - F(1, 2) * F(2, 0))
         + F(0, 2) * (F(1, 0) * F(2, 1) - F(1, 1) * F(2, 0));
}

// Cofactor matrix, cof(F) = det(F) F^{-T}; equals d(det F)/dF. Valid for any F.
inline Mat cofactor(const Mat& F) {
    Mat c(F.rows(), F.cols());
    if (F.rows() == 2) {
        c(0, 0) = F(1, 1);
        c(0, 1) = -F(1, 0);
        c(1, 0) = -F(0, 1);
        c(1, 1) = F(0, 0);
        return c;
    }
    auto cross_into = [&](int dst, int a, int b) {
        c(0, dst) = F(1, a) * F(2, b) - F(2, a) * F(1, b);
        c(1, dst) = F(2, a) * F(0, b) - F(0, a) * F(2, b);
        c(2, dst) = F(0, a) * F(1, b) - F(1, a) * F(0, b);
    };
    cross_into(0, 1, 2);
    cross_into(1, 2, 0);
    cross_into(2, 0, 1);
    return c;
}

} // namespace floatelast

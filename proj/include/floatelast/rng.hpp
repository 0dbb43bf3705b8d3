#pragma once

#include "floatelast/core.hpp"

#include <cstdint>
#include <random>

namespace floatelast {

// Seeded generator with explicit bit-to-double mapping so streams are
// reproducible across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    Vec vector(int dim, double lo, double hi) {
        Vec v(dim);
        for (int k = 0; k < dim; ++k)
            v[k] = uniform(lo, hi);
        return v;
    }

    Eigen::VectorXd field(Eigen::Index n, double lo, double hi) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v[i] = uniform(lo, hi);
        return v;
    }

    // Uniform rotation: quaternion sampling in 3D, angle in 2D.
    Mat rotation(int dim) {
        if (dim == 2) {
            double th = uniform(0, 2 * 3.14159265358979323846);
            Mat q(2, 2);
            q << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
            return q;
        }
        double u1 = uniform(), u2 = uniform(), u3 = uniform();
        double a = std::sqrt(1 - u1) * std::sin(2 * M_PI * u2);
        double b = std::sqrt(1 - u1) * std::cos(2 * M_PI * u2);
        double c = std::sqrt(u1) * std::sin(2 * M_PI * u3);
        double d = std::sqrt(u1) * std::cos(2 * M_PI * u3);
        Mat q(3, 3);
        q << 1 - 2 * (c * c + d * d), 2 * (b * c - a * d), 2 * (b * d + a * c),
            2 * (b * c + a * d), 1 - 2 * (b * b + d * d), 2 * (c * d - a * b),
            2 * (b * d - a * c), 2 * (c * d + a * b), 1 - 2 * (b * b + c * c);
        return q;
    }

    std::mt19937_64& raw() { return gen_; }

private:
    std::mt19937_64 gen_;
};

} // namespace floatelast

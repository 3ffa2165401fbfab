#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace invpend {

/// Horizontal vector of the rod top, d in {1, 2}. Storage is inline (no heap).
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 2, 1>;
/// Packed phase vector [x; p] of length 2d.
using StateVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 4, 1>;
/// 2d x 2d matrix (Jacobians, monodromy).
using StateMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 4, 4>;
/// Row covector of length d (gradients with respect to x or p).
using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor, 1, 2>;
/// d x d matrix.
using DimMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 2, 2>;

enum class Problem { Linear = 1, Planar = 2 };

inline int dimension_of(Problem problem) { return static_cast<int>(problem); }

inline void check_dim(int dim) {
    if (dim != 1 && dim != 2) {
        throw std::invalid_argument("dimension must be 1 (linear) or 2 (planar), got " +
                                    std::to_string(dim));
    }
}

/// Rescaled position x of the rod top (|x| < 1) and its velocity p.
struct PhaseState {
    Vec x;
    Vec p;

    PhaseState() = default;
    PhaseState(Vec x_, Vec p_) : x(std::move(x_)), p(std::move(p_)) {}

    static PhaseState origin(int dim) {
        check_dim(dim);
        return {Vec::Zero(dim), Vec::Zero(dim)};
    }
    static PhaseState linear(double x, double p) {
        Vec xv(1), pv(1);
        xv << x;
        pv << p;
        return {xv, pv};
    }
    static PhaseState planar(double x1, double x2, double p1, double p2) {
        Vec xv(2), pv(2);
        xv << x1, x2;
        pv << p1, p2;
        return {xv, pv};
    }
    static PhaseState unpack(const Eigen::Ref<const Eigen::VectorXd>& y) {
        const auto d = y.size() / 2;
        return {y.head(d), y.segment(d, d)};
    }

    int dim() const { return static_cast<int>(x.size()); }

    StateVec packed() const {
        StateVec y(2 * dim());
        y << x, p;
        return y;
    }
};

inline double distance(const PhaseState& a, const PhaseState& b) {
    return (a.packed() - b.packed()).norm();
}

inline double norm(const PhaseState& s) { return s.packed().norm(); }

}  // namespace invpend

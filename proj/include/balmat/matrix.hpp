#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "balmat/graph.hpp"

namespace balmat {

// Exact arithmetic for the brute-force oracles and the rational process
// backend. Desk scale only (n <= 16, windows <= 64 rounds).
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// Dense square matrix, generic over the scalar (double for simulation,
// Rational for the exact backend).
template <typename S>
class Mat {
public:
    explicit Mat(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, S(0)) {}

    static Mat identity(int n) {
        Mat m(n);
        for (int i = 0; i < n; ++i) m(i, i) = S(1);
        return m;
    }

    static Mat uniform(int n) {
        Mat m(n);
        for (std::size_t k = 0; k < m.a_.size(); ++k) m.a_[k] = S(1) / S(n);
        return m;
    }

    int size() const { return n_; }
    S& operator()(int r, int c) { return a_[static_cast<std::size_t>(r) * n_ + c]; }
    const S& operator()(int r, int c) const {
        return a_[static_cast<std::size_t>(r) * n_ + c];
    }
    const S* row(int r) const { return a_.data() + static_cast<std::size_t>(r) * n_; }

    // M <- M * A(pairs), where A averages each matched pair. Acting on the
    // right averages columns.
    void right_mul_matching(const std::vector<Edge>& pairs) {
        for (const auto& [u, v] : pairs)
            for (int r = 0; r < n_; ++r) {
                S m = ((*this)(r, u) + (*this)(r, v)) / S(2);
                (*this)(r, u) = m;
                (*this)(r, v) = m;
            }
    }

    // M <- A(pairs) * M. Acting on the left averages rows.
    void left_mul_matching(const std::vector<Edge>& pairs) {
        for (const auto& [u, v] : pairs) {
            S* ru = a_.data() + static_cast<std::size_t>(u) * n_;
            S* rv = a_.data() + static_cast<std::size_t>(v) * n_;
            for (int c = 0; c < n_; ++c) {
                S m = (ru[c] + rv[c]) / S(2);
                ru[c] = m;
                rv[c] = m;
            }
        }
    }

    Mat operator*(const Mat& o) const {
        Mat out(n_);
        for (int i = 0; i < n_; ++i)
            for (int k = 0; k < n_; ++k) {
                const S& aik = (*this)(i, k);
                if (aik == S(0)) continue;
                for (int j = 0; j < n_; ++j) out(i, j) += aik * o(k, j);
            }
        return out;
    }

    bool operator==(const Mat& o) const { return n_ == o.n_ && a_ == o.a_; }

private:
    int n_;
    std::vector<S> a_;
};

using MatD = Mat<double>;
using MatQ = Mat<Rational>;

// Balancing matrix of a single matching: 1/2 between matched nodes and on
// their diagonal, 1 on the diagonal of unmatched nodes.
template <typename S>
Mat<S> matching_matrix(const std::vector<Edge>& pairs, int n) {
    Mat<S> m = Mat<S>::identity(n);
    m.right_mul_matching(pairs);
    return m;
}

// Largest absolute row/column stochasticity violation; entries must also be
// in [0,1] for a valid averaging matrix.
inline double doubly_stochastic_error(const MatD& m) {
    double worst = 0.0;
    int n = m.size();
    std::vector<double> col(n, 0.0);
    for (int r = 0; r < n; ++r) {
        double rs = 0.0;
        for (int c = 0; c < n; ++c) {
            double x = m(r, c);
            rs += x;
            col[c] += x;
            if (x < 0.0) worst = std::max(worst, -x);
            if (x > 1.0) worst = std::max(worst, x - 1.0);
        }
        worst = std::max(worst, std::fabs(rs - 1.0));
    }
    for (int c = 0; c < n; ++c) worst = std::max(worst, std::fabs(col[c] - 1.0));
    return worst;
}

inline bool is_doubly_stochastic(const MatD& m, double tol = 1e-12) {
    return doubly_stochastic_error(m) <= tol;
}

// Squared l2 distance of row r from the uniform vector.
template <typename S>
S row_dist_to_uniform_sq(const Mat<S>& m, int r) {
    S acc(0);
    S inv = S(1) / S(m.size());
    for (int c = 0; c < m.size(); ++c) {
        S d = m(r, c) - inv;
        acc += d * d;
    }
    return acc;
}

template <typename S>
S row_norm_sq(const Mat<S>& m, int r) {
    S acc(0);
    for (int c = 0; c < m.size(); ++c) acc += m(r, c) * m(r, c);
    return acc;
}

}  // namespace balmat

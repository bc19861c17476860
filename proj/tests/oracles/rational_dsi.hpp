#pragma once

// Exact Gaussian-rational evaluation of the DS I fields for A_1 = A_2 = J,
// J = [[0,1],[0,0]]. E_1 = I + (x+y)J, E_2 = I + (x-y)J, and R_k is the
// minimum-norm solution [[0,-s/2],[-s/2,0]] with s = sum |chat_k(0,j)|^2.
// S_y is obtained by differentiating S directly, with no identity.

#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <stdexcept>
#include <vector>

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;

struct QC {
    Rational re, im;

    QC() = default;
    QC(Rational r, Rational i = 0) : re(std::move(r)), im(std::move(i)) {}

    QC conj() const { return {re, -im}; }
    Rational norm() const { return re * re + im * im; }
    bool is_zero() const { return re == 0 && im == 0; }

    friend QC operator+(const QC& a, const QC& b) { return {a.re + b.re, a.im + b.im}; }
    friend QC operator-(const QC& a, const QC& b) { return {a.re - b.re, a.im - b.im}; }
    friend QC operator-(const QC& a) { return {-a.re, -a.im}; }
    friend QC operator*(const QC& a, const QC& b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
    friend QC operator/(const QC& a, const QC& b) {
        const Rational n = b.norm();
        if (n == 0) throw std::domain_error("division by zero");
        return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
    }

    std::complex<double> to_double() const { return {re.convert_to<double>(), im.convert_to<double>()}; }
};

class QMatrix {
public:
    QMatrix() = default;
    QMatrix(std::size_t r, std::size_t c) : rows_(r), cols_(c), v_(r * c) {}

    static QMatrix identity(std::size_t n) {
        QMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = QC(1);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    QC& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }
    const QC& operator()(std::size_t i, std::size_t j) const { return v_[i * cols_ + j]; }

    QMatrix adjoint() const {
        QMatrix m(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j).conj();
        return m;
    }

    friend QMatrix operator+(const QMatrix& a, const QMatrix& b) {
        QMatrix m(a.rows_, a.cols_);
        for (std::size_t k = 0; k < a.v_.size(); ++k) m.v_[k] = a.v_[k] + b.v_[k];
        return m;
    }
    friend QMatrix operator-(const QMatrix& a, const QMatrix& b) {
        QMatrix m(a.rows_, a.cols_);
        for (std::size_t k = 0; k < a.v_.size(); ++k) m.v_[k] = a.v_[k] - b.v_[k];
        return m;
    }
    friend QMatrix operator*(const QMatrix& a, const QMatrix& b) {
        if (a.cols_ != b.rows_) throw std::invalid_argument("QMatrix product dimension mismatch");
        QMatrix m(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t j = 0; j < b.cols_; ++j) {
                QC acc;
                for (std::size_t k = 0; k < a.cols_; ++k) acc = acc + a(i, k) * b(k, j);
                m(i, j) = acc;
            }
        return m;
    }
    friend QMatrix operator*(const QC& s, const QMatrix& a) {
        QMatrix m = a;
        for (auto& v : m.v_) v = s * v;
        return m;
    }

    /// Gauss-Jordan inverse; throws when singular.
    QMatrix inverse() const {
        const std::size_t n = rows_;
        QMatrix a = *this, inv = identity(n);
        for (std::size_t col = 0; col < n; ++col) {
            std::size_t piv = col;
            while (piv < n && a(piv, col).is_zero()) ++piv;
            if (piv == n) throw std::domain_error("singular matrix");
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(col, j), a(piv, j));
                std::swap(inv(col, j), inv(piv, j));
            }
            const QC p = a(col, col);
            for (std::size_t j = 0; j < n; ++j) {
                a(col, j) = a(col, j) / p;
                inv(col, j) = inv(col, j) / p;
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (i == col || a(i, col).is_zero()) continue;
                const QC f = a(i, col);
                for (std::size_t j = 0; j < n; ++j) {
                    a(i, j) = a(i, j) - f * a(col, j);
                    inv(i, j) = inv(i, j) - f * inv(col, j);
                }
            }
        }
        return inv;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<QC> v_;
};

struct RationalDsiData {
    QMatrix c1, c2;        // n x 2
    QMatrix chat1, chat2;  // 2 x m_k, second row zero
    QMatrix s0;            // n x n Hermitian
};

struct RationalDsiFields {
    QMatrix u, q1, q2;
};

inline QMatrix nilpotent_exp(const Rational& a) {
    QMatrix e = QMatrix::identity(2);
    e(0, 1) = QC(a);
    return e;
}

inline QMatrix nilpotent_r(const QMatrix& chat) {
    Rational s = 0;
    for (std::size_t j = 0; j < chat.cols(); ++j) s += chat(0, j).norm();
    QMatrix r(2, 2);
    r(0, 1) = QC(-s / 2);
    r(1, 0) = QC(-s / 2);
    return r;
}

/// Fields at (x, y); t does not enter because J^2 = 0.
inline RationalDsiFields rational_dsi_fields(const RationalDsiData& d, const Rational& x, const Rational& y) {
    const QMatrix r1 = nilpotent_r(d.chat1), r2 = nilpotent_r(d.chat2);
    const QMatrix e1 = nilpotent_exp(x + y), e2 = nilpotent_exp(x - y);
    QMatrix j(2, 2);
    j(0, 1) = QC(1);
    const QMatrix e1y = j;                 // d/dy (I + (x+y)J)
    const QMatrix e2y = QC(-1) * j;        // d/dy (I + (x-y)J)

    const QMatrix s = d.s0 + d.c1 * e1 * r1 * e1.adjoint() * d.c1.adjoint() -
                      d.c2 * e2 * r2 * e2.adjoint() * d.c2.adjoint();
    const QMatrix s_y = d.c1 * (e1y * r1 * e1.adjoint() + e1 * r1 * e1y.adjoint()) * d.c1.adjoint() -
                        d.c2 * (e2y * r2 * e2.adjoint() + e2 * r2 * e2y.adjoint()) * d.c2.adjoint();
    const QMatrix si = s.inverse();
    const QMatrix si_y = QC(-1) * (si * s_y * si);

    const QMatrix phi1 = d.c1 * e1 * d.chat1, phi2 = d.c2 * e2 * d.chat2;
    const QMatrix phi1_y = d.c1 * e1y * d.chat1, phi2_y = d.c2 * e2y * d.chat2;

    auto dq = [&](const QMatrix& phi, const QMatrix& phi_y) {
        return phi_y.adjoint() * si * phi + phi.adjoint() * si_y * phi + phi.adjoint() * si * phi_y;
    };
    RationalDsiFields f;
    f.u = QC(2) * (phi2.adjoint() * si * phi1);
    f.q1 = QC(Rational(1, 2)) * (f.u.adjoint() * f.u) - QC(2) * dq(phi1, phi1_y);
    f.q2 = QC(Rational(-1, 2)) * (f.u * f.u.adjoint()) + QC(2) * dq(phi2, phi2_y);
    return f;
}

}  // namespace oracle

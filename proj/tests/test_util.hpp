#pragma once

#include <gtest/gtest.h>

#include "pexp/numkernel.hpp"

namespace testutil {

inline ::testing::AssertionResult near(const pexp::CMatrix& a, const pexp::CMatrix& b, double tol) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        return ::testing::AssertionFailure() << "shape " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
                                             << b.cols();
    const double err = (a - b).norm();
    if (err <= tol) return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << "||a - b|| = " << err << " > " << tol << "\na =\n" << a << "\nb =\n" << b;
}

inline pexp::CMatrix mat(std::initializer_list<std::initializer_list<pexp::Complex>> rows) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = static_cast<Eigen::Index>(rows.begin()->size());
    pexp::CMatrix m(r, c);
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index j = 0;
        for (const auto& v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

}  // namespace testutil

#include "wishsv/matops.hpp"

#include <cmath>
#include <sstream>

namespace wishsv {

namespace {

constexpr double kPivotRelTol = 1e-12;
constexpr double kSingularRelTol = 1e-14;

void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw DimensionMismatch(std::string(what) + ": expected a nonempty square matrix, got " +
                                dim_string(m));
    }
}

}  // namespace

std::string dim_string(const Matrix& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

UpperTri::UpperTri(Matrix m) : m_(std::move(m)) {
    require_square(m_, "UpperTri");
    for (Eigen::Index j = 0; j < m_.cols(); ++j) {
        for (Eigen::Index i = j + 1; i < m_.rows(); ++i) {
            if (m_(i, j) != 0.0) {
                throw InvalidParameter("UpperTri: nonzero entry below the diagonal");
            }
        }
    }
}

UpperTri UpperTri::operator*(const UpperTri& rhs) const {
    if (dim() != rhs.dim()) throw DimensionMismatch("UpperTri product: dimension mismatch");
    const int q = dim();
    Matrix out = Matrix::Zero(q, q);
    for (int i = 0; i < q; ++i) {
        for (int j = i; j < q; ++j) {
            double s = 0.0;
            for (int l = i; l <= j; ++l) s += m_(i, l) * rhs.m_(l, j);
            out(i, j) = s;
        }
    }
    return UpperTri(std::move(out));
}

SymPD::SymPD(const Matrix& m, double sym_tol) {
    require_square(m, "SymPD");
    if (!m.allFinite()) throw InvalidParameter("SymPD: non-finite entry");
    const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale) {
        throw InvalidParameter("SymPD: matrix is not symmetric");
    }
    m_ = symmetrize(m);
    chol_ = uchol(m_);
}

Matrix symmetrize(const Matrix& m) {
    return 0.5 * (m + m.transpose());
}

UpperTri uchol(const Matrix& a) {
    require_square(a, "uchol");
    const int q = static_cast<int>(a.rows());
    const double tol = kPivotRelTol * a.diagonal().maxCoeff();
    Matrix r = Matrix::Zero(q, q);
    for (int i = 0; i < q; ++i) {
        double pivot = a(i, i);
        for (int l = 0; l < i; ++l) pivot -= r(l, i) * r(l, i);
        if (!(pivot > tol) || !(pivot > 0.0)) {
            std::ostringstream os;
            os << "uchol: pivot " << i << " = " << pivot << " not above tolerance " << tol;
            throw NotPositiveDefinite(os.str());
        }
        const double rii = std::sqrt(pivot);
        r(i, i) = rii;
        for (int j = i + 1; j < q; ++j) {
            double s = a(i, j);
            for (int l = 0; l < i; ++l) s -= r(l, i) * r(l, j);
            r(i, j) = s / rii;
        }
    }
    return UpperTri(std::move(r));
}

UpperTri inv_upper(const UpperTri& r) {
    const int q = r.dim();
    const Matrix& m = r.matrix();
    const double tol = kSingularRelTol * m.diagonal().cwiseAbs().maxCoeff();
    for (int i = 0; i < q; ++i) {
        if (!(std::abs(m(i, i)) >= tol) || m(i, i) == 0.0) {
            throw SingularMatrix("inv_upper: diagonal entry " + std::to_string(i) + " is (near) zero");
        }
    }
    Matrix inv = Matrix::Zero(q, q);
    // Column j of the inverse solves R x = e_j; only rows 0..j are nonzero.
    for (int j = 0; j < q; ++j) {
        inv(j, j) = 1.0 / m(j, j);
        for (int i = j - 1; i >= 0; --i) {
            double s = 0.0;
            for (int l = i + 1; l <= j; ++l) s += m(i, l) * inv(l, j);
            inv(i, j) = -s / m(i, i);
        }
    }
    return UpperTri(std::move(inv));
}

Vector solve_upper(const UpperTri& r, const Vector& b) {
    const int q = r.dim();
    if (b.size() != q) throw DimensionMismatch("solve_upper: length mismatch");
    const Matrix& m = r.matrix();
    Vector x(q);
    for (int i = q - 1; i >= 0; --i) {
        double s = b(i);
        for (int l = i + 1; l < q; ++l) s -= m(i, l) * x(l);
        x(i) = s / m(i, i);
    }
    return x;
}

double quad_form(const Vector& x, const SymPD& a) {
    if (x.size() != a.dim()) throw DimensionMismatch("quad_form: length mismatch");
    // a = R'R, so x'a^{-1}x = |R'^{-1} x|^2; forward substitution with R'.
    const Matrix& r = a.chol().matrix();
    const int q = a.dim();
    Vector w(q);
    for (int i = 0; i < q; ++i) {
        double s = x(i);
        for (int l = 0; l < i; ++l) s -= r(l, i) * w(l);
        w(i) = s / r(i, i);
    }
    return w.squaredNorm();
}

double logdet_spd(const SymPD& a) {
    return 2.0 * a.chol().matrix().diagonal().array().log().sum();
}

Matrix crossprod(const UpperTri& r) {
    const Matrix& m = r.matrix();
    return symmetrize(m.transpose() * m);
}

Matrix inverse_spd(const SymPD& a) {
    const UpperTri rinv = inv_upper(a.chol());
    // a^{-1} = R^{-1} R^{-1}'
    return symmetrize(rinv.matrix() * rinv.matrix().transpose());
}

}  // namespace wishsv

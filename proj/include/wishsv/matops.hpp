#ifndef WISHSV_MATOPS_HPP
#define WISHSV_MATOPS_HPP

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace wishsv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotPositiveDefinite : Error {
    using Error::Error;
};
struct SingularMatrix : Error {
    using Error::Error;
};
struct InvalidParameter : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};

// Upper-triangular q x q matrix. Entries below the diagonal are exactly zero.
class UpperTri {
public:
    UpperTri() = default;
    explicit UpperTri(Matrix m);

    static UpperTri identity(int q) { return UpperTri(Matrix::Identity(q, q)); }

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }

    // Product of two upper-triangular matrices stays upper-triangular.
    UpperTri operator*(const UpperTri& rhs) const;
    UpperTri scaled(double c) const { return UpperTri(m_ * c); }

private:
    Matrix m_;
};

// Symmetric positive-definite matrix. Construction validates symmetry and
// factorizes; the upper Cholesky factor (a = R'R) is cached.
class SymPD {
public:
    SymPD() = default;
    // Throws InvalidParameter when not symmetric within `sym_tol` (relative
    // to the largest entry), NotPositiveDefinite when factorization fails.
    // The stored matrix is exactly symmetric: (m + m')/2.
    explicit SymPD(const Matrix& m, double sym_tol = 1e-10);

    static SymPD identity(int q) { return SymPD(Matrix::Identity(q, q)); }

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }
    const UpperTri& chol() const { return chol_; }

private:
    Matrix m_;
    UpperTri chol_;
};

// Upper Cholesky factor R with a == R'R. Pivot tolerance is 1e-12 times the
// largest diagonal entry of a.
UpperTri uchol(const Matrix& a);
inline const UpperTri& uchol(const SymPD& a) { return a.chol(); }

// Inverse of an upper-triangular matrix by back-substitution.
UpperTri inv_upper(const UpperTri& r);

// x' a^{-1} x via two triangular solves against uchol(a).
double quad_form(const Vector& x, const SymPD& a);

double logdet_spd(const SymPD& a);

// (m + m')/2
Matrix symmetrize(const Matrix& m);

// R'R for an upper-triangular R (the Bartlett product).
Matrix crossprod(const UpperTri& r);

// Solves R x = b for upper-triangular R.
Vector solve_upper(const UpperTri& r, const Vector& b);

// Inverse of an SPD matrix through its Cholesky factor.
Matrix inverse_spd(const SymPD& a);

std::string dim_string(const Matrix& m);

}  // namespace wishsv

#endif  // WISHSV_MATOPS_HPP

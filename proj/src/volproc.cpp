#include "wishsv/volproc.hpp"

#include <cassert>
#include <cmath>
#include <string>

#include "wishsv/specfun.hpp"

namespace wishsv {

namespace {

void require_dim(const SymPD& m, int q, const char* what) {
    if (m.dim() != q) {
        throw DimensionMismatch(std::string(what) + ": expected dimension " + std::to_string(q) + ", got " +
                                std::to_string(m.dim()));
    }
}

// U of the Bartlett pair Phi = (UP)'(UP) for a given P.
UpperTri bartlett_u(const SymPD& phi, const UpperTri& p) {
    return uchol(phi) * inv_upper(p);
}

}  // namespace

const char* model_name(Model m) {
    return m == Model::UE ? "ue" : "bb";
}

UEHyper::UEHyper(double k_, double n_, double lambda_, SymPD d0_)
    : q(d0_.dim()), k(k_), n(n_), lambda(lambda_), d0(std::move(d0_)) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidParameter("UEHyper: lambda must lie in (0, 1)");
    if (!(n > q - 1)) throw InvalidParameter("UEHyper: n must exceed q - 1");
    if (!valid_wishart_df(k, q)) {
        throw InvalidParameter("UEHyper: k must be > q - 1 or a positive integer below q");
    }
}

BBHyper::BBHyper(double k_, double beta_, double b_, double k0_, SymPD d0_)
    : q(d0_.dim()), k(k_), beta(beta_), b(b_), k0(k0_), d0(std::move(d0_)) {
    if (!(k > 0.0)) throw InvalidParameter("BBHyper: k must be positive");
    if (!(beta > 0.0 && beta < 1.0)) throw InvalidParameter("BBHyper: beta must lie in (0, 1)");
    if (!(b > 0.0 && b < 1.0)) throw InvalidParameter("BBHyper: b must lie in (0, 1)");
    if (!(k0 > 0.0)) throw InvalidParameter("BBHyper: k0 must be positive");
    if (!(beta * min_df() > q - 1)) {
        throw InvalidParameter("BBHyper: beta * k_t must exceed q - 1 along the filtration (beta * min(k0, k/(1-beta)) = " +
                               std::to_string(beta * min_df()) + ")");
    }
}

double BBHyper::min_df() const {
    // k_t moves monotonically from k0 towards the fixed point k / (1 - beta).
    return std::min(k0, k / (1.0 - beta));
}

BBHyper match_ue_to_bb(const UEHyper& ue) {
    const double k0 = ue.n + ue.k;
    const double beta = ue.n / (ue.n + ue.k);
    // beta * k0 = n > q - 1 by the UEHyper invariants.
    assert(beta * k0 > ue.q - 1 - 1e-9);
    return BBHyper(ue.k, beta, ue.lambda, k0, ue.d0);
}

UEHyper match_bb_to_ue(const BBHyper& bb) {
    const double n = bb.k0 - bb.k;
    if (!(n > 0.0) || std::abs(n / (n + bb.k) - bb.beta) > 1e-12 * bb.beta) {
        throw InvalidParameter("match_bb_to_ue: hyperparameters do not satisfy k0 = n + k, beta = n/(n + k)");
    }
    return UEHyper(bb.k, n, bb.b, bb.d0);
}

std::pair<double, double> bb_equivalent_nk(const BBHyper& bb, double k_prev) {
    return {bb.beta * k_prev, (1.0 - bb.beta) * k_prev};
}

SymPD ue_evolve(const SymPD& phi_prev, const UEHyper& ue, Rng& rng) {
    require_dim(phi_prev, ue.q, "ue_evolve");
    const Matrix psi = sample_matrix_beta(ue.q, ue.n, ue.k, rng);
    const Matrix& up = uchol(phi_prev).matrix();
    return SymPD(symmetrize(up.transpose() * psi * up / ue.lambda));
}

SymPD bb_evolve_factors(const UpperTri& u_prev, const UpperTri& p_prev, double k_prev, const BBHyper& bb, Rng& rng) {
    const int q = bb.q;
    if (u_prev.dim() != q || p_prev.dim() != q) throw DimensionMismatch("bb_evolve: factor dimension mismatch");
    const double shape_b = 0.5 * (1.0 - bb.beta) * k_prev;
    if (!(bb.beta * k_prev - q + 1 > 0.0) || !(shape_b > 0.0)) {
        throw InvalidParameter("bb_evolve: Beta shape (beta k_prev - q + 1)/2 must be positive");
    }
    Matrix ut = u_prev.matrix();
    for (int i = 0; i < q; ++i) {
        // 1-based row index i + 1 gives shape (beta k - i)/2 here.
        const double eta = sample_beta(0.5 * (bb.beta * k_prev - i), shape_b, rng);
        ut(i, i) *= std::sqrt(eta);
    }
    const UpperTri utp = UpperTri(std::move(ut)) * p_prev;
    return SymPD(crossprod(utp) / bb.b);
}

SymPD bb_evolve(const SymPD& phi_prev, double k_prev, const BBHyper& bb, Rng& rng) {
    require_dim(phi_prev, bb.q, "bb_evolve");
    return bb_evolve_factors(UpperTri::identity(bb.q), uchol(phi_prev), k_prev, bb, rng);
}

SymPD expected_ue_step(const SymPD& phi_prev, const UEHyper& ue) {
    require_dim(phi_prev, ue.q, "expected_ue_step");
    return SymPD(phi_prev.matrix() * (ue.n / (ue.lambda * (ue.n + ue.k))));
}

Matrix expected_bartlett_crossprod(const UpperTri& u_prev, double n, double k) {
    const int q = u_prev.dim();
    const Matrix& u = u_prev.matrix();
    Matrix e = Matrix::Zero(q, q);
    for (int i = 0; i < q; ++i) {
        const int m = i + 1;  // 1-based index
        for (int j = i; j < q; ++j) {
            double s = 0.0;
            for (int l = 0; l < i; ++l) s += u(l, i) * u(l, j);
            if (i == j) {
                s += (n - m + 1.0) * u(i, i) * u(i, i) / (n - m + 1.0 + k);
            } else {
                s += sqrt_beta_moment(m, n, k) * u(i, i) * u(i, j);
            }
            e(i, j) = s;
            e(j, i) = s;
        }
    }
    return e;
}

SymPD expected_bb_step(const SymPD& phi_prev, const UpperTri& p_prev, const BBHyper& bb) {
    require_dim(phi_prev, bb.q, "expected_bb_step");
    const UEHyper ue = match_bb_to_ue(bb);
    const UpperTri u = bartlett_u(phi_prev, p_prev);
    const Matrix e = expected_bartlett_crossprod(u, ue.n, ue.k);
    const Matrix& p = p_prev.matrix();
    return SymPD(symmetrize(p.transpose() * e * p / bb.b));
}

Matrix expectation_difference(const SymPD& phi_prev, const UpperTri& p_prev, const UEHyper& matched) {
    require_dim(phi_prev, matched.q, "expectation_difference");
    const UpperTri u = bartlett_u(phi_prev, p_prev);
    const Matrix& um = u.matrix();
    const Matrix bracket = (matched.n / (matched.n + matched.k)) * (um.transpose() * um) -
                           expected_bartlett_crossprod(u, matched.n, matched.k);
    const Matrix& p = p_prev.matrix();
    return symmetrize(p.transpose() * bracket * p / matched.lambda);
}

MomentPair example1_moments(const UpperTri& upsilon, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidParameter("example1_moments: lambda must lie in (0, 1)");
    const int q = upsilon.dim();
    const Matrix& v = upsilon.matrix();
    for (int i = 0; i < q; ++i) {
        if (!(v(i, i) > 0.0)) throw InvalidParameter("example1_moments: upsilon needs a positive diagonal");
    }
    MomentPair out{{Matrix::Zero(q, q), Matrix::Zero(q, q)}, {Matrix::Zero(q, q), Matrix::Zero(q, q)}};
    for (int i = 0; i < q; ++i) {
        for (int j = i; j < q; ++j) {
            double head = 0.0;  // sum over l < i
            for (int l = 0; l < i; ++l) head += v(l, i) * v(l, j);
            const double full = head + v(i, i) * v(i, j);

            const double eu = lambda * full + (i == j ? 1.0 : 0.0);
            const double vu = i == j ? 2.0 : 1.0;

            double eb, vb;
            if (i == j) {
                eb = lambda * head + lambda * v(i, i) * v(i, i) + 1.0;
                vb = 2.0;
            } else {
                const double h = std::sqrt(2.0 * lambda) * v(i, j) *
                                 tricomi_u({-0.5, 0.0, 0.5 * lambda * v(i, i) * v(i, i)});
                eb = lambda * head + h;
                vb = lambda * lambda * v(i, j) * v(i, j) * v(i, i) * v(i, i) + lambda * v(i, j) * v(i, j) - h * h;
            }
            out.ue.mean(i, j) = out.ue.mean(j, i) = eu;
            out.ue.variance(i, j) = out.ue.variance(j, i) = vu;
            out.bb.mean(i, j) = out.bb.mean(j, i) = eb;
            out.bb.variance(i, j) = out.bb.variance(j, i) = vb;
        }
    }
    return out;
}

MomentPair diagonal_conditional_moments(const Vector& phi_next_diag, const Vector& d_diag, double lambda) {
    const Eigen::Index q = phi_next_diag.size();
    if (d_diag.size() != q || q == 0) throw DimensionMismatch("diagonal_conditional_moments: length mismatch");
    if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidParameter("diagonal_conditional_moments: lambda must lie in (0, 1)");
    if (!(phi_next_diag.minCoeff() > 0.0) || !(d_diag.minCoeff() > 0.0)) {
        throw InvalidParameter("diagonal_conditional_moments: diagonals must be positive");
    }
    const Matrix mean = (lambda * phi_next_diag + d_diag).asDiagonal();
    MomentPair out{{mean, Matrix::Zero(q, q)}, {mean, Matrix::Zero(q, q)}};
    for (Eigen::Index i = 0; i < q; ++i) {
        for (Eigen::Index j = 0; j < q; ++j) {
            out.ue.variance(i, j) = (i == j ? d_diag(i) * d_diag(i) : 0.0) + d_diag(i) * d_diag(j);
        }
        out.bb.variance(i, i) = 2.0 * d_diag(i) * d_diag(i);
    }
    return out;
}

}  // namespace wishsv

#ifndef WISHSV_VOLPROC_HPP
#define WISHSV_VOLPROC_HPP

#include <utility>

#include "wishsv/matops.hpp"
#include "wishsv/randsamp.hpp"

namespace wishsv {

enum class Model { UE, BB };

const char* model_name(Model m);

// Uhlig-extended hyperparameters. Validated at construction: 0 < lambda < 1,
// n > q - 1, k either > q - 1 or a positive integer < q, d0 of dimension q.
struct UEHyper {
    UEHyper(double k, double n, double lambda, SymPD d0);

    int q;
    double k;
    double n;
    double lambda;
    SymPD d0;
};

// Beta-Bartlett hyperparameters. Validated at construction: 0 < beta, b < 1,
// k > 0, k0 > 0 and beta * k0 > q - 1.
struct BBHyper {
    BBHyper(double k, double beta, double b, double k0, SymPD d0);

    int q;
    double k;
    double beta;
    double b;
    double k0;
    SymPD d0;

    // Smallest df the filtration k_t = beta k_{t-1} + k can reach.
    double min_df() const;
};

// k0 = n + k, beta = n/(n + k), b = lambda, same d0.
BBHyper match_ue_to_bb(const UEHyper& ue);
// Inverse of match_ue_to_bb: n = k0 - k, lambda = b. Throws InvalidParameter
// when the bundle is not of the matched form (beta != n/(n + k)).
UEHyper match_bb_to_ue(const BBHyper& bb);

// Equivalent (n, k) of a BB bundle: the Beta((n-i+1)/2, k/2) shocks of the
// evolution at df k_prev have n = beta k_prev and k = (1 - beta) k_prev.
std::pair<double, double> bb_equivalent_nk(const BBHyper& bb, double k_prev);

// Phi_t = (UP)' Psi (UP) / lambda with Psi ~ MatrixBeta_q(n/2, k/2); UP = uchol(phi_prev).
SymPD ue_evolve(const SymPD& phi_prev, const UEHyper& ue, Rng& rng);

// Phi_t = (U~ P)'(U~ P)/b where U~ copies the off-diagonal of U and scales
// the squared diagonal by eta_i ~ Beta((beta k_prev - i + 1)/2, (1-beta) k_prev/2).
// U and P are the Bartlett pair of phi_prev supplied by the caller.
SymPD bb_evolve_factors(const UpperTri& u_prev, const UpperTri& p_prev, double k_prev, const BBHyper& bb, Rng& rng);

// Standalone form: P = uchol(phi_prev), U = identity.
SymPD bb_evolve(const SymPD& phi_prev, double k_prev, const BBHyper& bb, Rng& rng);

// E(Phi_t | Phi_{t-1}) = n / (lambda (n + k)) Phi_{t-1}.
SymPD expected_ue_step(const SymPD& phi_prev, const UEHyper& ue);

// E[U~'U~] for the Bartlett factor U of Phi_{t-1} = (UP)'(UP): entries
// sum_{l<i^j} u_li u_lj + d_ij (n-i+1) u_ii^2 / (n-i+1+k) + (1-d_ij) g(i,j).
Matrix expected_bartlett_crossprod(const UpperTri& u_prev, double n, double k);

// P' E[U~'U~] P / b with (n, k) from bb_equivalent_nk(bb, bb.k0).
SymPD expected_bb_step(const SymPD& phi_prev, const UpperTri& p_prev, const BBHyper& bb);

// (1/lambda) P' [ n/(n+k) U'U - E(U~'U~) ] P, evaluated from the bracket
// directly. U = uchol(phi_prev) P^{-1}.
Matrix expectation_difference(const SymPD& phi_prev, const UpperTri& p_prev, const UEHyper& matched);

struct MomentTable {
    Matrix mean;
    Matrix variance;
};

struct MomentPair {
    MomentTable ue;
    MomentTable bb;
};

// Backward-conditional moments of Phi_t | Phi_{t+1} with k = 1 and
// P_t = identity, where upsilon = uchol(Phi_{t+1}).
MomentPair example1_moments(const UpperTri& upsilon, double lambda);

// Backward-conditional moments for Phi_{t+1} = diag(phi), D_t^{-1} = diag(d), k = 1.
MomentPair diagonal_conditional_moments(const Vector& phi_next_diag, const Vector& d_diag, double lambda);

}  // namespace wishsv

#endif  // WISHSV_VOLPROC_HPP

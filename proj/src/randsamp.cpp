#include "wishsv/randsamp.hpp"

#include <cmath>
#include <string>

namespace wishsv {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

bool is_positive_integer(double x) {
    return x >= 1.0 && std::floor(x) == x;
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::substream(std::uint64_t seed, std::uint64_t index) {
    Rng r(splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
    r.seed_ = seed;
    return r;
}

double Rng::uniform() {
    // 53 random bits, shifted by half an ulp so the result is never 0 or 1.
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Marsaglia polar method.
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

double Rng::gamma(double shape) {
    if (!(shape > 0.0) || !std::isfinite(shape)) {
        throw InvalidParameter("gamma: shape must be positive, got " + std::to_string(shape));
    }
    if (shape < 1.0) {
        // Boost to shape + 1, then scale by U^{1/shape}. Done on the log
        // scale because U^{1/shape} underflows for very small shapes.
        const double g = gamma(shape + 1.0);
        return std::exp(std::log(g) + std::log(uniform()) / shape);
    }
    // Marsaglia & Tsang (2000).
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double sample_chi2(double df, Rng& rng) {
    if (!(df > 0.0)) throw InvalidParameter("sample_chi2: df must be positive, got " + std::to_string(df));
    return 2.0 * rng.gamma(0.5 * df);
}

double sample_beta(double a, double b, Rng& rng) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw InvalidParameter("sample_beta: shapes must be positive, got (" + std::to_string(a) + ", " +
                               std::to_string(b) + ")");
    }
    for (;;) {
        const double x = rng.gamma(a);
        const double y = rng.gamma(b);
        const double s = x + y;
        if (!(s > 0.0)) continue;
        const double v = x / s;
        if (v > 0.0 && v < 1.0) return v;
    }
}

bool valid_wishart_df(double df, int q) {
    return df > q - 1 || (is_positive_integer(df) && df < q);
}

UpperTri sample_bartlett_factor(int q, double df, Rng& rng) {
    if (!(df > q - 1)) {
        throw InvalidParameter("sample_bartlett_factor: df " + std::to_string(df) + " must exceed q - 1 = " +
                               std::to_string(q - 1));
    }
    Matrix u = Matrix::Zero(q, q);
    for (int i = 0; i < q; ++i) {
        u(i, i) = std::sqrt(sample_chi2(df - i, rng));
        for (int j = i + 1; j < q; ++j) u(i, j) = rng.normal();
    }
    return UpperTri(std::move(u));
}

Matrix sample_wishart_bartlett(const WishartSpec& spec, Rng& rng) {
    const int q = spec.scale_chol.dim();
    if (!valid_wishart_df(spec.df, q)) {
        throw InvalidParameter("sample_wishart_bartlett: df " + std::to_string(spec.df) +
                               " is neither > q - 1 nor a positive integer < q");
    }
    const Matrix& p = spec.scale_chol.matrix();
    if (spec.df > q - 1) {
        const UpperTri up = sample_bartlett_factor(q, spec.df, rng) * spec.scale_chol;
        return crossprod(up);
    }
    const int h = static_cast<int>(spec.df);
    Matrix w = Matrix::Zero(q, q);
    Vector z(q);
    for (int s = 0; s < h; ++s) {
        for (int i = 0; i < q; ++i) z(i) = rng.normal();
        const Vector x = p.transpose() * z;  // cov P'P
        w.noalias() += x * x.transpose();
    }
    return symmetrize(w);
}

Matrix sample_matrix_beta(int q, double n1, double n2, Rng& rng) {
    if (q < 1) throw InvalidParameter("sample_matrix_beta: q must be positive");
    if (!valid_wishart_df(n1, q) || !valid_wishart_df(n2, q) || !(n1 + n2 > q - 1)) {
        throw InvalidParameter("sample_matrix_beta: invalid degrees of freedom (" + std::to_string(n1) + ", " +
                               std::to_string(n2) + ") for q = " + std::to_string(q));
    }
    const UpperTri eye = UpperTri::identity(q);
    const Matrix a1 = sample_wishart_bartlett({n1, eye}, rng);
    const Matrix a2 = sample_wishart_bartlett({n2, eye}, rng);
    const UpperTri t = uchol(symmetrize(a1 + a2));
    const Matrix tinv = inv_upper(t).matrix();
    return symmetrize(tinv.transpose() * a1 * tinv);
}

Vector sample_mvnormal_prec(const SymPD& prec, Rng& rng) {
    const int q = prec.dim();
    Vector z(q);
    for (int i = 0; i < q; ++i) z(i) = rng.normal();
    // prec = R'R; x = R^{-1} z has covariance R^{-1}R^{-1}' = prec^{-1}.
    return solve_upper(prec.chol(), z);
}

}  // namespace wishsv

#ifndef WISHSV_TEST_SUPPORT_HPP
#define WISHSV_TEST_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Cholesky>

#include "wishsv/filter.hpp"
#include "wishsv/matops.hpp"
#include "wishsv/randsamp.hpp"

namespace testsupport {

using wishsv::Matrix;
using wishsv::Vector;

// Running mean and variance (Welford).
struct Stat {
    double n = 0, mean = 0, m2 = 0;
    void add(double x) {
        n += 1;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    double var() const { return m2 / (n - 1); }
    double se() const { return std::sqrt(var() / n); }
    // |mean - target| in units of the standard error.
    double z(double target) const { return se() > 0 ? std::abs(mean - target) / se() : std::abs(mean - target) * 1e300; }
};

// Independent reference generator built on <random>, used by oracles so that
// they do not share code with the library's samplers.
struct Ref {
    std::mt19937_64 eng;
    explicit Ref(std::uint64_t seed) : eng(seed) {}
    double normal() { return std::normal_distribution<double>()(eng); }
    double chi2(double df) { return std::chi_squared_distribution<double>(df)(eng); }
    double beta(double a, double b) {
        const double x = std::gamma_distribution<double>(a)(eng);
        const double y = std::gamma_distribution<double>(b)(eng);
        return x / (x + y);
    }
    // Wishart(df, S) for integer df as a sum of outer products of N(0, S) vectors.
    Matrix wishart_int(int df, const Matrix& s) {
        const Matrix l = s.llt().matrixL();
        Matrix w = Matrix::Zero(s.rows(), s.cols());
        for (int i = 0; i < df; ++i) {
            Vector z(s.rows());
            for (auto& v : z) v = normal();
            const Vector x = l * z;
            w += x * x.transpose();
        }
        return w;
    }
};

// G'G + q I with standard normal G.
inline Matrix random_spd(int q, Ref& ref) {
    Matrix g(q, q);
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) g(i, j) = ref.normal();
    return g.transpose() * g + q * Matrix::Identity(q, q);
}

inline wishsv::ReturnsSeries random_returns(int q, std::size_t T, Ref& ref, double scale = 1.0) {
    wishsv::ReturnsSeries s;
    s.q = q;
    for (std::size_t t = 0; t < T; ++t) {
        Vector r(q);
        for (auto& v : r) v = scale * ref.normal();
        s.returns.push_back(r);
    }
    return s;
}

inline double det_cofactor(const Matrix& a) {
    const auto n = a.rows();
    if (n == 1) return a(0, 0);
    double d = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        Matrix minor(n - 1, n - 1);
        for (Eigen::Index r = 1; r < n; ++r) {
            Eigen::Index c2 = 0;
            for (Eigen::Index c = 0; c < n; ++c) {
                if (c == j) continue;
                minor(r - 1, c2++) = a(r, c);
            }
        }
        d += ((j % 2) ? -1.0 : 1.0) * a(0, j) * det_cofactor(minor);
    }
    return d;
}

// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
template <class Cdf>
double ks(std::vector<double> x, Cdf cdf) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, f - i / n, (i + 1) / n - f});
    }
    return d;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testsupport

#endif

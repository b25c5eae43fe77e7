#ifndef WISHSV_SMOOTHER_HPP
#define WISHSV_SMOOTHER_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wishsv/filter.hpp"
#include "wishsv/randsamp.hpp"
#include "wishsv/volproc.hpp"

namespace wishsv {

struct PrecisionPath {
    int q = 0;
    std::vector<SymPD> phi;  // Phi_0..Phi_T
    std::uint64_t seed = 0;
    std::uint64_t draw = 0;

    std::size_t steps() const { return phi.empty() ? 0 : phi.size() - 1; }
};

struct SmoothedEnsemble {
    Model model = Model::UE;
    std::vector<PrecisionPath> paths;
    std::vector<double> loglik;  // path_loglik of each path against the data
};

// Phi_T ~ Wishart(n + k, (k D_T)^{-1}), then Phi_t = lambda Phi_{t+1} + Z_t with
// Z_t ~ Wishart(k, (k D_t)^{-1}).
PrecisionPath ue_backward_sample(const FilterOutput& filt, const UEHyper& ue, Rng& rng);

// Per-draw internals of the BB backward sampler, for diagnostics.
struct BBTrace {
    std::vector<UpperTri> u_star;   // U*_t, t = 0..T
    std::vector<UpperTri> u_tilde;  // U~*_t, t = 1..T (stored at t - 1)
    std::vector<Vector> theta;      // chi-square increments at t = 0..T-1
};

// Backward sampler for the BB process: a Bartlett draw at t = T, then q
// chi-square variates per step, bridging with U~*_t = sqrt(b) U*_t P_t P_{t-1}^{-1}.
PrecisionPath bb_backward_sample(const FilterOutput& filt, const BBHyper& bb, Rng& rng, BBTrace* trace = nullptr);

// Single backward conditionals Phi_t | Phi_{t+1}, D_t. `p_t` is uchol((k D_t)^{-1}).
SymPD ue_backward_step(const SymPD& phi_next, const UpperTri& p_t, double lambda, double k, Rng& rng);
// U~* = uchol(b (P_t^{-1})' Phi_{t+1} P_t^{-1}); (u*_ii)^2 = (u~*_ii)^2 + chi2_{(1-beta) k_t}.
SymPD bb_backward_step(const SymPD& phi_next, const UpperTri& p_t, double b, double beta, double k_t, Rng& rng);

using Hyper = std::variant<UEHyper, BBHyper>;

PrecisionPath backward_sample(const FilterOutput& filt, const Hyper& hyper, Rng& rng);

// N independent paths; draw i uses Rng::substream(seed, i), so the result does
// not depend on `workers`.
SmoothedEnsemble sample_ensemble(const FilterOutput& filt, const Hyper& hyper, const ReturnsSeries& data,
                                 std::size_t n_draws, std::uint64_t seed, unsigned workers = 1);

// --- Joint-consistency harness for one time slice (Phi_t, Phi_{t+1}) | D_t ---

enum class JointRoute {
    Forward,   // Phi_t from the filtered posterior, then the state evolution
    Backward,  // Phi_{t+1} from the prior at t + 1, then the backward conditional
};

struct MomentStat {
    std::string label;
    int order = 1;          // 1: E[x_e]; 2: E[x_e x_f]
    bool offdiag = false;   // touches an off-diagonal matrix entry
    double mean_a = 0.0;
    double mean_b = 0.0;
    double z = 0.0;
};

struct MomentReport {
    std::vector<MomentStat> stats;
    double max_abs_z() const;
    double max_abs_z(int order, bool offdiag_only) const;
};

// Draws (Phi_t, Phi_{t+1}) along `route` for the given model at filtered
// state (d_t, k_t); k_t is ignored for UE (posterior df n + k).
std::pair<SymPD, SymPD> sample_joint_slice(const Hyper& hyper, JointRoute route, const SymPD& d_t, double k_t,
                                           Rng& rng);

// Two-sample z statistics for first moments and entrywise second moments of
// vech(Phi_t), vech(Phi_{t+1}) between sampler A and sampler B.
MomentReport joint_consistency_oracle(const Hyper& hyper_a, JointRoute route_a, const Hyper& hyper_b,
                                      JointRoute route_b, const SymPD& d_t, double k_t, std::size_t n_draws,
                                      Rng& rng);

// Forward route vs backward route of the same model.
MomentReport joint_consistency_oracle(const Hyper& hyper, const SymPD& d_t, double k_t, std::size_t n_draws,
                                      Rng& rng);

// Per-time empirical quantiles of rho_ij = S_ij / sqrt(S_ii S_jj), S = Phi_t^{-1}.
// Result is indexed [t][quantile].
std::vector<std::vector<double>> correlation_summary(const SmoothedEnsemble& ens, std::pair<int, int> pair,
                                                     const std::vector<double>& quantiles);

// Linear-interpolation empirical quantile of unsorted data.
double empirical_quantile(std::vector<double> values, double p);

}  // namespace wishsv

#endif  // WISHSV_SMOOTHER_HPP

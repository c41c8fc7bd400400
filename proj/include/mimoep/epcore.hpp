#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mimoep/constellation.hpp"

namespace mimoep {

// Per-antenna Gaussian approximating factors t_k = CN(mean_k, var_k).
struct GaussianFactorSet {
    Eigen::VectorXcd mean;
    Eigen::VectorXd var;  // all > 0
};

// Joint Gaussian posterior q(u): mean and full Hermitian covariance.
struct PosteriorGaussian {
    Eigen::VectorXcd mean;
    Eigen::MatrixXcd cov;
};

struct Cavity {
    cxd mean;
    double var = 0.0;
};

// Extrinsic marginals per antenna; valid[k]==0 marks a numerically
// degenerate cavity (factor variance ~ posterior variance).
struct CavitySet {
    Eigen::VectorXcd mean;
    Eigen::VectorXd var;
    std::vector<std::uint8_t> valid;
};

struct TiltedMoments {
    cxd mean;
    double var = 0.0;  // >= eps after flooring
};

struct Moments {
    cxd mean;
    double var = 0.0;
};

enum class NegVarPolicy { keep_old, use_tilted };

// Variant descriptor: self-iteration count, damping and variance-floor
// schedules, negative-variance policy, and whether moment matching sees the
// decoder prior or a uniform one.
struct DetectorParams {
    enum class BetaKind { turbo_ramp, constant };  // ramp: min(exp(t/1.5)/10, cap)
    enum class EpsKind { constant, step_decay };   // decay: 2^(-max(l-4,1))

    std::string name;
    int self_iters = 0;  // S
    NegVarPolicy policy = NegVarPolicy::keep_old;
    bool uniform_prior_in_mm = false;
    BetaKind beta_kind = BetaKind::constant;
    double beta_value = 1.0;  // constant value, or cap for turbo_ramp
    EpsKind eps_kind = EpsKind::constant;
    double eps_value = 0.0;

    double beta_at(int turbo_t) const;
    double eps_at(int self_l) const;  // self_l is 1-based

    // "nubep", "epd", "mpep", "lmmse"
    static DetectorParams variant(std::string_view name);
};

// Sigma_q = (H^H H / nv + diag(var_t)^-1)^-1, mu_q = Sigma_q (H^H y / nv +
// mean_t / var_t); one Cholesky factorization serves both.
PosteriorGaussian compute_posterior(const Eigen::MatrixXcd& H, double noise_var,
                                    const Eigen::VectorXcd& y, const GaussianFactorSet& factors);

// q_E = q_k / t_k; nullopt when factor_var - post_var <= 1e-12*factor_var
std::optional<Cavity> cavity(cxd post_mean, double post_var, cxd factor_mean, double factor_var);

// pmf over the alphabet proportional to prior_i * exp(-|x_i-mean|^2/var)
std::vector<double> tilted_pmf(cxd mean, double var, std::span<const double> prior,
                               const Constellation& c);

TiltedMoments tilted_moments(cxd cav_mean, double cav_var, std::span<const double> prior,
                             const Constellation& c, double eps);

// new factor from tilted vs cavity moments; var may come out <= 0 (flagged
// downstream as the negative-variance case)
Moments moment_match(const TiltedMoments& tilted, const Cavity& cav);

// precision-domain convex combination; beta in [0,1], endpoints exact
Moments damp(const Moments& fresh, const Moments& old, double beta);

struct MmdStats {
    int neg_var = 0;       // factors that hit the negative-variance branch
    int skipped = 0;       // antennas skipped for a degenerate cavity
};

// One full pass: posterior -> cavities -> tilted moments -> moment match ->
// damping, with the negative-variance policy applied per antenna.
MmdStats mmd_pass(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& H, double noise_var,
                  const std::vector<std::vector<double>>& priors, const Constellation& c,
                  double eps, double beta, NegVarPolicy policy, GaussianFactorSet& factors);

// Full detection: factor init from prior moments, S MMD passes, final
// extrinsic cavities. LMMSE is the S=0 degenerate case of the same path.
CavitySet detect(const DetectorParams& params, const Eigen::VectorXcd& y,
                 const Eigen::MatrixXcd& H, double noise_var,
                 const std::vector<std::vector<double>>& priors, int turbo_t,
                 const Constellation& c);

// argmax of the per-antenna symbol posterior (cavity x prior)
std::vector<int> hard_decisions(const CavitySet& cavities,
                                const std::vector<std::vector<double>>& priors,
                                const Constellation& c);

}  // namespace mimoep

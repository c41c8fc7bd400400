#include "mimoep/epcore.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mimoep {

namespace {
// numerical guards, not EP parameters: smallest representable factor/tilted
// variance, and the floor applied to prior moments at factor initialization
// (exact point-mass priors would otherwise make every cavity indeterminate)
constexpr double kVarFloor = 1e-13;
constexpr double kInitVarFloor = 1e-8;
constexpr double kCavityGuard = 1e-12;
}  // namespace

double DetectorParams::beta_at(int turbo_t) const {
    if (beta_kind == BetaKind::constant) return beta_value;
    return std::min(std::exp(turbo_t / 1.5) / 10.0, beta_value);
}

double DetectorParams::eps_at(int self_l) const {
    if (eps_kind == EpsKind::constant) return eps_value;
    return std::pow(2.0, -std::max(self_l - 4, 1));
}

DetectorParams DetectorParams::variant(std::string_view name) {
    DetectorParams p;
    p.name = std::string(name);
    if (name == "nubep") {
        p.self_iters = 3;
        p.policy = NegVarPolicy::keep_old;
        p.beta_kind = BetaKind::turbo_ramp;
        p.beta_value = 0.7;
        p.eps_kind = EpsKind::constant;
        p.eps_value = 1e-8;
    } else if (name == "epd") {
        p.self_iters = 10;
        p.policy = NegVarPolicy::keep_old;
        p.uniform_prior_in_mm = true;
        p.beta_kind = BetaKind::constant;
        p.beta_value = 0.95;
        p.eps_kind = EpsKind::step_decay;
    } else if (name == "mpep") {
        p.self_iters = 1;
        p.policy = NegVarPolicy::use_tilted;
        p.beta_kind = BetaKind::constant;
        p.beta_value = 1.0;  // no damping
        p.eps_kind = EpsKind::constant;
        p.eps_value = 0.0;  // no variance floor
    } else if (name == "lmmse") {
        p.self_iters = 0;
        p.beta_kind = BetaKind::constant;
        p.beta_value = 1.0;
    } else {
        throw std::invalid_argument("unknown detector variant: " + std::string(name));
    }
    return p;
}

PosteriorGaussian compute_posterior(const Eigen::MatrixXcd& H, double noise_var,
                                    const Eigen::VectorXcd& y, const GaussianFactorSet& factors) {
    const Eigen::Index nt = H.cols();
    assert(noise_var > 0.0);
    assert(factors.var.size() == nt && (factors.var.array() > 0.0).all());

    const double w = 1.0 / noise_var;
    Eigen::MatrixXcd prec = w * (H.adjoint() * H);
    prec.diagonal() += factors.var.cwiseInverse().cast<cxd>();
    Eigen::VectorXcd rhs = w * (H.adjoint() * y);
    rhs += factors.mean.cwiseQuotient(factors.var.cast<cxd>());

    Eigen::LLT<Eigen::MatrixXcd> llt(prec);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("compute_posterior: Cholesky factorization failed");

    PosteriorGaussian post;
    post.mean = llt.solve(rhs);
    post.cov = llt.solve(Eigen::MatrixXcd::Identity(nt, nt));
    return post;
}

std::optional<Cavity> cavity(cxd post_mean, double post_var, cxd factor_mean, double factor_var) {
    const double denom = factor_var - post_var;
    if (!(denom > kCavityGuard * factor_var)) return std::nullopt;
    Cavity cav;
    cav.var = post_var * factor_var / denom;
    cav.mean = (post_mean * factor_var - factor_mean * post_var) / denom;
    return cav;
}

std::vector<double> tilted_pmf(cxd mean, double var, std::span<const double> prior,
                               const Constellation& c) {
    const double ninf = -std::numeric_limits<double>::infinity();
    std::vector<double> logw(c.order);
    double mx = ninf;
    for (int i = 0; i < c.order; ++i) {
        const double lp = prior[i] > 0.0 ? std::log(prior[i]) : ninf;
        logw[i] = lp - std::norm(c.points[i] - mean) / var;
        mx = std::max(mx, logw[i]);
    }
    std::vector<double> pmf(c.order, 0.0);
    if (mx == ninf) {
        // every weight underflowed: nearest-point point mass
        int best = 0;
        double bestd = std::numeric_limits<double>::infinity();
        for (int i = 0; i < c.order; ++i) {
            const double d = std::norm(c.points[i] - mean);
            if (d < bestd) {
                bestd = d;
                best = i;
            }
        }
        pmf[best] = 1.0;
        return pmf;
    }
    double sum = 0.0;
    for (int i = 0; i < c.order; ++i) {
        pmf[i] = std::exp(logw[i] - mx);
        sum += pmf[i];
    }
    for (double& p : pmf) p /= sum;
    return pmf;
}

TiltedMoments tilted_moments(cxd cav_mean, double cav_var, std::span<const double> prior,
                             const Constellation& c, double eps) {
    const std::vector<double> pmf = tilted_pmf(cav_mean, cav_var, prior, c);
    const PmfMoments mm = pmf_moments(pmf, c);
    TiltedMoments t;
    t.mean = mm.mean;
    t.var = std::max({mm.var, eps, kVarFloor});
    return t;
}

Moments moment_match(const TiltedMoments& tilted, const Cavity& cav) {
    Moments out;
    const double denom = cav.var - tilted.var;
    out.var = tilted.var * cav.var / denom;  // may be <= 0 or inf
    out.mean = out.var * (tilted.mean / tilted.var - cav.mean / cav.var);
    return out;
}

Moments damp(const Moments& fresh, const Moments& old, double beta) {
    assert(beta >= 0.0 && beta <= 1.0);
    if (beta == 1.0) return fresh;
    if (beta == 0.0) return old;
    Moments out;
    const double prec = beta / fresh.var + (1.0 - beta) / old.var;
    out.var = 1.0 / prec;
    out.mean = out.var * (beta * (fresh.mean / fresh.var) + (1.0 - beta) * (old.mean / old.var));
    return out;
}

MmdStats mmd_pass(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& H, double noise_var,
                  const std::vector<std::vector<double>>& priors, const Constellation& c,
                  double eps, double beta, NegVarPolicy policy, GaussianFactorSet& factors) {
    MmdStats stats;
    const Eigen::Index nt = H.cols();
    const PosteriorGaussian post = compute_posterior(H, noise_var, y, factors);

    for (Eigen::Index k = 0; k < nt; ++k) {
        const auto cav = cavity(post.mean(k), post.cov(k, k).real(), factors.mean(k), factors.var(k));
        if (!cav) {
            ++stats.skipped;
            continue;
        }
        const TiltedMoments tm = tilted_moments(cav->mean, cav->var, priors[k], c, eps);
        const Moments matched = moment_match(tm, *cav);

        bool accepted = false;
        if (std::isfinite(matched.var) && matched.var != 0.0) {
            const Moments damped = damp(matched, {factors.mean(k), factors.var(k)}, beta);
            if (std::isfinite(damped.var) && damped.var > 0.0) {
                factors.mean(k) = damped.mean;
                factors.var(k) = damped.var;
                accepted = true;
            }
        }
        if (!accepted) {
            ++stats.neg_var;
            if (policy == NegVarPolicy::use_tilted) {
                factors.mean(k) = tm.mean;
                factors.var(k) = std::max(tm.var, kVarFloor);
            }
            // keep_old: factor left untouched
        }
    }
    return stats;
}

CavitySet detect(const DetectorParams& params, const Eigen::VectorXcd& y,
                 const Eigen::MatrixXcd& H, double noise_var,
                 const std::vector<std::vector<double>>& priors, int turbo_t,
                 const Constellation& c) {
    const Eigen::Index nt = H.cols();
    if (static_cast<Eigen::Index>(priors.size()) != nt)
        throw std::invalid_argument("detect: one prior pmf per transmit antenna required");

    GaussianFactorSet factors;
    factors.mean.resize(nt);
    factors.var.resize(nt);
    for (Eigen::Index k = 0; k < nt; ++k) {
        const PmfMoments pm = pmf_moments(priors[k], c);
        factors.mean(k) = pm.mean;
        factors.var(k) = std::max(pm.var, kInitVarFloor);
    }

    const std::vector<std::vector<double>>* mm_priors = &priors;
    std::vector<std::vector<double>> uniform;
    if (params.uniform_prior_in_mm) {
        uniform.assign(nt, uniform_prior(c));
        mm_priors = &uniform;
    }

    const double beta = params.beta_at(turbo_t);
    for (int l = 1; l <= params.self_iters; ++l)
        mmd_pass(y, H, noise_var, *mm_priors, c, params.eps_at(l), beta, params.policy, factors);

    const PosteriorGaussian post = compute_posterior(H, noise_var, y, factors);
    CavitySet out;
    out.mean.resize(nt);
    out.var.resize(nt);
    out.valid.assign(nt, 1);
    for (Eigen::Index k = 0; k < nt; ++k) {
        const auto cav = cavity(post.mean(k), post.cov(k, k).real(), factors.mean(k), factors.var(k));
        if (cav) {
            out.mean(k) = cav->mean;
            out.var(k) = cav->var;
        } else {
            out.mean(k) = post.mean(k);
            out.var(k) = post.cov(k, k).real();
            out.valid[k] = 0;
        }
    }
    return out;
}

std::vector<int> hard_decisions(const CavitySet& cavities,
                                const std::vector<std::vector<double>>& priors,
                                const Constellation& c) {
    std::vector<int> out(cavities.valid.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const std::vector<double> pmf =
            tilted_pmf(cavities.mean(k), cavities.var(k), priors[k], c);
        out[k] = static_cast<int>(std::max_element(pmf.begin(), pmf.end()) - pmf.begin());
    }
    return out;
}

}  // namespace mimoep

#include "mimoep/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mimoep {

namespace {

constexpr double kNinf = -std::numeric_limits<double>::infinity();

// streaming log-sum-exp accumulator
struct LseAcc {
    double mx = kNinf;
    double s = 0.0;
    void add(double x) {
        if (x == kNinf) return;
        if (x > mx) {
            s = s * std::exp(mx - x) + 1.0;
            mx = x;
        } else {
            s += std::exp(x - mx);
        }
    }
    double value() const { return mx == kNinf ? kNinf : mx + std::log(s); }
};

}  // namespace

ExactMarginals map_marginals(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& H,
                             double noise_var, const std::vector<std::vector<double>>& priors,
                             const Constellation& c) {
    const int nt = static_cast<int>(H.cols());
    const int m = c.order;
    const int q = c.bits_per_symbol;

    double hyp = 1.0;
    for (int k = 0; k < nt; ++k) {
        hyp *= m;
        if (hyp > 1e6) throw std::invalid_argument("map_marginals: M^Nt exceeds 1e6");
    }
    if (static_cast<int>(priors.size()) != nt)
        throw std::invalid_argument("map_marginals: one prior per antenna required");

    std::vector<double> log_prior(nt * m);
    for (int k = 0; k < nt; ++k)
        for (int i = 0; i < m; ++i)
            log_prior[k * m + i] = priors[k][i] > 0.0 ? std::log(priors[k][i]) : kNinf;

    // odometer over u in A^Nt, accumulating per-(antenna,symbol) log marginals
    std::vector<LseAcc> acc(nt * m);
    std::vector<int> idx(nt, 0);
    Eigen::VectorXcd u = Eigen::VectorXcd::Constant(nt, c.points[0]);
    Eigen::VectorXcd res(y.size());
    const long long total = static_cast<long long>(std::llround(hyp));
    for (long long it = 0;; ++it) {
        res.noalias() = y - H * u;
        double lw = -res.squaredNorm() / noise_var;
        for (int k = 0; k < nt; ++k) lw += log_prior[k * m + idx[k]];
        for (int k = 0; k < nt; ++k) acc[k * m + idx[k]].add(lw);
        if (it + 1 == total) break;
        for (int k = nt - 1; k >= 0; --k) {
            if (++idx[k] < m) {
                u(k) = c.points[idx[k]];
                break;
            }
            idx[k] = 0;
            u(k) = c.points[0];
        }
    }

    std::vector<std::vector<double>> logs(nt, std::vector<double>(m));
    for (int k = 0; k < nt; ++k)
        for (int i = 0; i < m; ++i) logs[k][i] = acc[k * m + i].value();

    ExactMarginals out;
    out.symbol_pmf.assign(nt, std::vector<double>(m, 0.0));
    for (int k = 0; k < nt; ++k) {
        LseAcc norm;
        for (int i = 0; i < m; ++i) norm.add(logs[k][i]);
        for (int i = 0; i < m; ++i)
            out.symbol_pmf[k][i] = logs[k][i] == kNinf ? 0.0 : std::exp(logs[k][i] - norm.value());
    }

    out.posterior_bit_llrs.assign(nt * q, 0.0);
    out.extrinsic_bit_llrs.assign(nt * q, 0.0);
    for (int k = 0; k < nt; ++k) {
        for (int b = 0; b < q; ++b) {
            LseAcc l0, l1;
            double p0 = 0.0, p1 = 0.0;
            for (int i = 0; i < m; ++i) {
                if (c.bit_of(i, b)) {
                    l1.add(logs[k][i]);
                    p1 += priors[k][i];
                } else {
                    l0.add(logs[k][i]);
                    p0 += priors[k][i];
                }
            }
            const double post = l0.value() - l1.value();
            const double pri = (p0 > 0.0 ? std::log(p0) : kNinf) - (p1 > 0.0 ? std::log(p1) : kNinf);
            out.posterior_bit_llrs[k * q + b] = post;
            out.extrinsic_bit_llrs[k * q + b] = post - pri;
        }
    }
    return out;
}

}  // namespace mimoep

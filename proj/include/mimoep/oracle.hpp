#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mimoep/constellation.hpp"

namespace mimoep {

// Ground truth by exhaustive enumeration of A^Nt; test-scale only.
struct ExactMarginals {
    std::vector<std::vector<double>> symbol_pmf;  // Nt x M posterior pmfs
    std::vector<double> posterior_bit_llrs;       // Nt*Q, antenna-major
    std::vector<double> extrinsic_bit_llrs;       // posterior minus own-bit prior
};

// p(u|y) ~ CN(y; Hu, noise_var I) * prod_k prior_k(u_k), evaluated in the log
// domain over all M^Nt hypotheses; throws if M^Nt > 1e6
ExactMarginals map_marginals(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& H,
                             double noise_var, const std::vector<std::vector<double>>& priors,
                             const Constellation& c);

}  // namespace mimoep

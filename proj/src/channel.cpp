#include "mimoep/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace mimoep {

Eigen::MatrixXcd sample_channel(int nt, int nr, Rng& rng) {
    if (nt < 1 || nr < nt)
        throw std::invalid_argument("sample_channel: requires Nr >= Nt >= 1, got Nt=" +
                                    std::to_string(nt) + " Nr=" + std::to_string(nr));
    Eigen::MatrixXcd h(nr, nt);
    for (int r = 0; r < nr; ++r)
        for (int c = 0; c < nt; ++c) h(r, c) = rng.cnormal(1.0);
    return h;
}

double snr_to_noise_var(double x_db, int nt, double es) {
    return nt * es / std::pow(10.0, x_db / 10.0);
}

Eigen::VectorXcd transmit(const Eigen::MatrixXcd& H, const Eigen::VectorXcd& u, double noise_var,
                          Rng& rng) {
    if (u.size() != H.cols())
        throw std::invalid_argument("transmit: symbol vector length " + std::to_string(u.size()) +
                                    " does not match Nt=" + std::to_string(H.cols()));
    Eigen::VectorXcd y = H * u;
    for (Eigen::Index r = 0; r < y.size(); ++r) y(r) += rng.cnormal(noise_var);
    return y;
}

Eigen::MatrixXcd perturb_csi(const Eigen::MatrixXcd& H, double sigma_h2, Rng& rng) {
    if (sigma_h2 < 0.0) throw std::invalid_argument("perturb_csi: sigma_h2 must be >= 0");
    if (sigma_h2 == 0.0) return H;
    Eigen::MatrixXcd out = H;
    for (Eigen::Index r = 0; r < out.rows(); ++r)
        for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) += rng.cnormal(sigma_h2);
    return out;
}

double detector_noise_var(const CsiModel& csi, int nt, double es, double noise_var) {
    return csi.compensate ? nt * csi.sigma_h2 * es + noise_var : noise_var;
}

}  // namespace mimoep

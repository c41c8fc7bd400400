#pragma once

#include <Eigen/Dense>

#include "mimoep/rng.hpp"

namespace mimoep {

// Detector-side CSI error model: the detector works with H + Delta where
// Delta entries are i.i.d. CN(0, sigma_h2). With compensate on, the noise
// variance handed to the detector is inflated to Nt*sigma_h2*Es + sigma_w2.
struct CsiModel {
    double sigma_h2 = 0.0;
    bool compensate = false;
};

// Nr x Nt, entries i.i.d. CN(0,1); requires Nr >= Nt
Eigen::MatrixXcd sample_channel(int nt, int nr, Rng& rng);

// x_db is Nt*Es/N0 in dB; sigma_w2 = Nt*Es / 10^(x_db/10)
double snr_to_noise_var(double x_db, int nt, double es = 1.0);

// y = H u + w with w entries i.i.d. CN(0, noise_var)
Eigen::VectorXcd transmit(const Eigen::MatrixXcd& H, const Eigen::VectorXcd& u, double noise_var,
                          Rng& rng);

Eigen::MatrixXcd perturb_csi(const Eigen::MatrixXcd& H, double sigma_h2, Rng& rng);

double detector_noise_var(const CsiModel& csi, int nt, double es, double noise_var);

}  // namespace mimoep

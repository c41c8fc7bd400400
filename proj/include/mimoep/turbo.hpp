#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "mimoep/constellation.hpp"
#include "mimoep/epcore.hpp"
#include "mimoep/ldpc.hpp"

namespace mimoep {

struct TurboConfig {
    int turbo_iters = 5;  // T; detector+decoder run T+1 times (t = 0..T)
    double llr_clip = 5.0;
    bool early_exit = true;
    int decoder_max_iter = 100;
    DetectorParams detector;
};

// codeword bit index for block p, antenna k, bit q (all 0-based):
// n = p*Nt*Q + k*Q + q
inline int coded_bit_index(int p, int k, int q, int nt, int bits_per_symbol) {
    return (p * nt + k) * bits_per_symbol + q;
}

struct TurboResult {
    std::vector<std::uint8_t> info_bits_hat;
    bool parity_ok = false;
    int iterations_run = 0;  // detector/decoder exchanges executed (<= T+1)
    // info-bit errors after each exchange, size T+1 when truth was supplied;
    // entries past an early exit repeat the final count
    std::vector<long long> per_iter_bit_errors;
};

using DecodeFn = std::function<DecodeResult(const std::vector<double>&)>;

// Turbo receiver over one codeword: y_blocks is Nr x P (one column per
// channel use), H fixed for the whole codeword. The decoder is injected so
// tests can substitute a genie.
TurboResult turbo_receive(const Eigen::MatrixXcd& y_blocks, const Eigen::MatrixXcd& H,
                          double noise_var, const Constellation& c, int codeword_len, int info_len,
                          const DecodeFn& decoder, const TurboConfig& cfg,
                          const std::vector<std::uint8_t>* true_info = nullptr);

// production overload wiring in the LDPC decoder
TurboResult turbo_receive(const Eigen::MatrixXcd& y_blocks, const Eigen::MatrixXcd& H,
                          double noise_var, const Constellation& c, const LdpcCode& code,
                          const TurboConfig& cfg,
                          const std::vector<std::uint8_t>* true_info = nullptr);

}  // namespace mimoep

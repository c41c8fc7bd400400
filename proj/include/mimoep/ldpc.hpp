#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mimoep {

// (dv,dc)-regular LDPC code with a systematic dense encoder derived from the
// parity matrix by one-time GF(2) elimination. Construction is PEG-style with
// 4-cycle avoidance and is deterministic for a given seed.
struct LdpcCode {
    int n = 0;   // codeword bits
    int k = 0;   // info bits
    int dv = 0;  // column weight
    int dc = 0;  // row weight

    std::vector<std::vector<int>> check_cols;  // per check: variable indices
    std::vector<std::vector<int>> var_checks;  // per variable: check indices

    std::vector<int> info_positions;    // k codeword positions carrying info bits
    std::vector<int> parity_positions;  // n-k positions computed by the encoder
    // parity bit r = <encoder_rows[r], info bits> over GF(2), packed 64-wide
    std::vector<std::vector<std::uint64_t>> encoder_rows;

    int build_attempts = 1;   // PEG restarts needed to reach full row rank
    int degree_repairs = 0;   // edges moved by rank repair (0 unless restarts failed)

    int num_checks() const { return n - k; }
};

// rate must satisfy (1-rate)*dc == dv; n even
LdpcCode build_code(int n, double rate, int dv = 3, int dc = 6, std::uint64_t seed = 1);

std::vector<std::uint8_t> encode(const LdpcCode& code, std::span<const std::uint8_t> info_bits);

bool parity_check(const LdpcCode& code, std::span<const std::uint8_t> codeword);

struct DecodeResult {
    std::vector<std::uint8_t> info_bits_hat;
    std::vector<double> extrinsic_llrs;  // posterior minus channel, length n
    int iterations_used = 0;
    bool parity_ok = false;
};

// flooding sum-product with the exact tanh rule; early exit on parity
DecodeResult decode(const LdpcCode& code, std::span<const double> channel_llrs, int max_iter = 100);

// standard alist text serialization of the parity matrix
std::string to_alist(const LdpcCode& code);

}  // namespace mimoep

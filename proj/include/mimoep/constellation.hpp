#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mimoep {

using cxd = std::complex<double>;

// Gray-labeled rectangular QAM alphabet with unit average energy.
// labels[i] is the Q-bit label of points[i]; bit 0 of a symbol's bit group is
// the most significant label bit (real-axis Gray field first, then imaginary).
struct Constellation {
    int order = 0;            // M
    int bits_per_symbol = 0;  // Q = log2(M)
    std::vector<cxd> points;
    std::vector<std::uint32_t> labels;
    std::vector<int> label_to_index;  // inverse of labels

    int bit_of(int point_index, int q) const {
        return static_cast<int>((labels[point_index] >> (bits_per_symbol - 1 - q)) & 1u);
    }
};

// M in {2,4,16,64,128,256}; odd log2(M) uses a rectangular grid
// (8x16 for M=128) with independent per-axis Gray coding.
Constellation build_qam(int order);

// "bpsk","qpsk","16qam","64qam","128qam","256qam"
Constellation constellation_by_name(std::string_view name);
std::string constellation_name(const Constellation& c);

std::vector<cxd> modulate(std::span<const std::uint8_t> bits, const Constellation& c);

// nearest-point hard demap, inverse of modulate on clean symbols
std::vector<std::uint8_t> hard_demap(std::span<const cxd> symbols, const Constellation& c);

struct PmfMoments {
    cxd mean;
    double var = 0.0;
};

// mean = sum p_i x_i, var = sum p_i |x_i|^2 - |mean|^2
PmfMoments pmf_moments(std::span<const double> pmf, const Constellation& c);

std::vector<double> uniform_prior(const Constellation& c);

// per-antenna symbol pmf from Q per-bit LLRs, L = ln P(b=0)/P(b=1)
std::vector<double> llrs_to_prior(std::span<const double> llrs, const Constellation& c);

// demap a Gaussian extrinsic (mean, var) into Q LLRs, log-sum-exp stabilized,
// clipped to +-clip; throws std::domain_error for var <= 0
std::vector<double> extrinsic_llr(cxd mean, double var, const Constellation& c, double clip);

}  // namespace mimoep

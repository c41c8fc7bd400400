#include "mimoep/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mimoep {

namespace {

std::uint32_t gray(std::uint32_t i) { return i ^ (i >> 1); }

// amplitude levels +(L-1), +(L-3), ..., -(L-1): index 0 is the most positive
// so that Gray label 0...0 lands on the top-right point
double level(int idx, int L) { return static_cast<double>(L - 1 - 2 * idx); }

}  // namespace

Constellation build_qam(int order) {
    switch (order) {
        case 2: case 4: case 16: case 64: case 128: case 256: break;
        default:
            throw std::invalid_argument("build_qam: unsupported constellation order " +
                                        std::to_string(order));
    }
    int q = 0;
    while ((1 << q) < order) ++q;
    const int qi = order == 2 ? 1 : q / 2;  // real-axis bits; bpsk stays on the real axis
    const int qq = q - qi;                  // imag-axis bits
    const int li = 1 << qi;                 // 8x16 grid for M=128
    const int lq = 1 << qq;

    // unit average energy: E = (Li^2-1)/3 + (Lq^2-1)/3 before scaling
    const double energy = (static_cast<double>(li) * li - 1.0 + static_cast<double>(lq) * lq - 1.0) / 3.0;
    const double scale = 1.0 / std::sqrt(energy);

    Constellation c;
    c.order = order;
    c.bits_per_symbol = q;
    c.points.resize(order);
    c.labels.resize(order);
    c.label_to_index.assign(order, -1);

    for (int i = 0; i < li; ++i) {
        for (int j = 0; j < lq; ++j) {
            const int idx = i * lq + j;
            c.points[idx] = cxd(level(i, li) * scale, level(j, lq) * scale);
            c.labels[idx] = (gray(static_cast<std::uint32_t>(i)) << qq) | gray(static_cast<std::uint32_t>(j));
            c.label_to_index[c.labels[idx]] = idx;
        }
    }
    return c;
}

Constellation constellation_by_name(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (s == "bpsk" || s == "2qam") return build_qam(2);
    if (s == "qpsk" || s == "4qam") return build_qam(4);
    if (s == "16qam") return build_qam(16);
    if (s == "64qam") return build_qam(64);
    if (s == "128qam") return build_qam(128);
    if (s == "256qam") return build_qam(256);
    throw std::invalid_argument("unknown constellation name: " + std::string(name));
}

std::string constellation_name(const Constellation& c) {
    switch (c.order) {
        case 2: return "bpsk";
        case 4: return "qpsk";
        default: return std::to_string(c.order) + "qam";
    }
}

std::vector<cxd> modulate(std::span<const std::uint8_t> bits, const Constellation& c) {
    const int q = c.bits_per_symbol;
    if (bits.size() % static_cast<std::size_t>(q) != 0)
        throw std::invalid_argument("modulate: bit count " + std::to_string(bits.size()) +
                                    " not divisible by bits per symbol " + std::to_string(q));
    std::vector<cxd> out(bits.size() / q);
    for (std::size_t s = 0; s < out.size(); ++s) {
        std::uint32_t label = 0;
        for (int b = 0; b < q; ++b) label = (label << 1) | (bits[s * q + b] & 1u);
        out[s] = c.points[c.label_to_index[label]];
    }
    return out;
}

std::vector<std::uint8_t> hard_demap(std::span<const cxd> symbols, const Constellation& c) {
    const int q = c.bits_per_symbol;
    std::vector<std::uint8_t> bits(symbols.size() * q);
    for (std::size_t s = 0; s < symbols.size(); ++s) {
        int best = 0;
        double bestd = std::numeric_limits<double>::infinity();
        for (int i = 0; i < c.order; ++i) {
            const double d = std::norm(symbols[s] - c.points[i]);
            if (d < bestd) {
                bestd = d;
                best = i;
            }
        }
        for (int b = 0; b < q; ++b) bits[s * q + b] = static_cast<std::uint8_t>(c.bit_of(best, b));
    }
    return bits;
}

PmfMoments pmf_moments(std::span<const double> pmf, const Constellation& c) {
    cxd mean(0.0, 0.0);
    double e2 = 0.0;
    for (int i = 0; i < c.order; ++i) {
        mean += pmf[i] * c.points[i];
        e2 += pmf[i] * std::norm(c.points[i]);
    }
    double var = e2 - std::norm(mean);
    if (var < 0.0) var = 0.0;  // rounding guard
    return {mean, var};
}

std::vector<double> uniform_prior(const Constellation& c) {
    return std::vector<double>(c.order, 1.0 / c.order);
}

std::vector<double> llrs_to_prior(std::span<const double> llrs, const Constellation& c) {
    const int q = c.bits_per_symbol;
    // log P(b=0) = -log1p(exp(-L)), log P(b=1) = -log1p(exp(L))
    std::vector<double> lp0(q), lp1(q);
    for (int b = 0; b < q; ++b) {
        const double l = llrs[b];
        if (l > 0) {
            lp0[b] = -std::log1p(std::exp(-l));
            lp1[b] = -l - std::log1p(std::exp(-l));
        } else {
            lp0[b] = l - std::log1p(std::exp(l));
            lp1[b] = -std::log1p(std::exp(l));
        }
    }
    std::vector<double> logp(c.order);
    double mx = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < c.order; ++i) {
        double lp = 0.0;
        for (int b = 0; b < q; ++b) lp += c.bit_of(i, b) ? lp1[b] : lp0[b];
        logp[i] = lp;
        mx = std::max(mx, lp);
    }
    std::vector<double> pmf(c.order);
    double sum = 0.0;
    for (int i = 0; i < c.order; ++i) {
        pmf[i] = std::exp(logp[i] - mx);
        sum += pmf[i];
    }
    for (double& p : pmf) p /= sum;
    return pmf;
}

std::vector<double> extrinsic_llr(cxd mean, double var, const Constellation& c, double clip) {
    if (!(var > 0.0)) throw std::domain_error("extrinsic_llr: invalid cavity variance");
    const int q = c.bits_per_symbol;
    std::vector<double> d(c.order);
    for (int i = 0; i < c.order; ++i) d[i] = -std::norm(c.points[i] - mean) / var;

    const double ninf = -std::numeric_limits<double>::infinity();
    std::vector<double> llr(q);
    for (int b = 0; b < q; ++b) {
        double m0 = ninf, m1 = ninf;
        for (int i = 0; i < c.order; ++i) {
            double& m = c.bit_of(i, b) ? m1 : m0;
            m = std::max(m, d[i]);
        }
        double s0 = 0.0, s1 = 0.0;
        for (int i = 0; i < c.order; ++i) {
            if (c.bit_of(i, b))
                s1 += std::exp(d[i] - m1);
            else
                s0 += std::exp(d[i] - m0);
        }
        const double lse0 = (m0 == ninf) ? ninf : m0 + std::log(s0);
        const double lse1 = (m1 == ninf) ? ninf : m1 + std::log(s1);
        double l;
        if (lse0 == ninf && lse1 == ninf)
            l = 0.0;  // every point underflowed, no bit information
        else
            l = lse0 - lse1;
        llr[b] = std::clamp(l, -clip, clip);
    }
    return llr;
}

}  // namespace mimoep

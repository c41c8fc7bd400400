#include "mimoep/turbo.hpp"

#include <stdexcept>

namespace mimoep {

namespace {

long long count_errors(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    long long e = 0;
    for (std::size_t i = 0; i < a.size(); ++i) e += (a[i] ^ b[i]) & 1;
    return e;
}

}  // namespace

TurboResult turbo_receive(const Eigen::MatrixXcd& y_blocks, const Eigen::MatrixXcd& H,
                          double noise_var, const Constellation& c, int codeword_len, int info_len,
                          const DecodeFn& decoder, const TurboConfig& cfg,
                          const std::vector<std::uint8_t>* true_info) {
    const int nt = static_cast<int>(H.cols());
    const int q = c.bits_per_symbol;
    const int blocks = static_cast<int>(y_blocks.cols());
    if (codeword_len % (nt * q) != 0 || blocks != codeword_len / (nt * q))
        throw std::invalid_argument("turbo_receive: codeword length must equal P*Nt*Q");
    if (y_blocks.rows() != H.rows())
        throw std::invalid_argument("turbo_receive: observation dimension mismatch");

    // per-(block, antenna) symbol priors; t=0 starts uniform
    std::vector<std::vector<std::vector<double>>> priors(
        blocks, std::vector<std::vector<double>>(nt, uniform_prior(c)));

    std::vector<double> detector_llrs(codeword_len, 0.0);
    TurboResult res;
    if (true_info) res.per_iter_bit_errors.assign(cfg.turbo_iters + 1, 0);

    for (int t = 0; t <= cfg.turbo_iters; ++t) {
        for (int p = 0; p < blocks; ++p) {
            const CavitySet cav =
                detect(cfg.detector, y_blocks.col(p), H, noise_var, priors[p], t, c);
            for (int k = 0; k < nt; ++k) {
                const int base = coded_bit_index(p, k, 0, nt, q);
                if (!cav.valid[k]) {
                    for (int b = 0; b < q; ++b) detector_llrs[base + b] = 0.0;
                    continue;
                }
                const std::vector<double> llr =
                    extrinsic_llr(cav.mean(k), cav.var(k), c, cfg.llr_clip);
                for (int b = 0; b < q; ++b) detector_llrs[base + b] = llr[b];
            }
        }

        DecodeResult dec = decoder(detector_llrs);
        if (dec.info_bits_hat.size() != static_cast<std::size_t>(info_len))
            throw std::invalid_argument("turbo_receive: decoder returned wrong info length");
        res.info_bits_hat = std::move(dec.info_bits_hat);
        res.parity_ok = dec.parity_ok;
        res.iterations_run = t + 1;
        if (true_info) res.per_iter_bit_errors[t] = count_errors(res.info_bits_hat, *true_info);

        if (cfg.early_exit && dec.parity_ok) break;
        if (t == cfg.turbo_iters) break;

        // decoder extrinsic LLRs become the next round's symbol priors
        std::vector<double> seg(q);
        for (int p = 0; p < blocks; ++p) {
            for (int k = 0; k < nt; ++k) {
                const int base = coded_bit_index(p, k, 0, nt, q);
                for (int b = 0; b < q; ++b) seg[b] = dec.extrinsic_llrs[base + b];
                priors[p][k] = llrs_to_prior(seg, c);
            }
        }
    }

    if (true_info) {
        for (int t = res.iterations_run; t <= cfg.turbo_iters; ++t)
            res.per_iter_bit_errors[t] = res.per_iter_bit_errors[res.iterations_run - 1];
    }
    return res;
}

TurboResult turbo_receive(const Eigen::MatrixXcd& y_blocks, const Eigen::MatrixXcd& H,
                          double noise_var, const Constellation& c, const LdpcCode& code,
                          const TurboConfig& cfg, const std::vector<std::uint8_t>* true_info) {
    DecodeFn dec = [&code, &cfg](const std::vector<double>& llrs) {
        return decode(code, llrs, cfg.decoder_max_iter);
    };
    return turbo_receive(y_blocks, H, noise_var, c, code.n, code.k, dec, cfg, true_info);
}

}  // namespace mimoep

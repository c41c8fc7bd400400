#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mimoep/channel.hpp"
#include "mimoep/constellation.hpp"
#include "mimoep/epcore.hpp"
#include "mimoep/ldpc.hpp"
#include "mimoep/oracle.hpp"
#include "mimoep/rng.hpp"
#include "mimoep/sim.hpp"

namespace {

using namespace mimoep;

int run_command(const std::string& config_path, ExperimentConfig cfg, const std::string& out_csv,
                const std::string& plot_prefix, const std::string& alist_path) {
    cfg.validate();
    if (!alist_path.empty()) {
        const LdpcCode code = build_code(cfg.code_n, cfg.code_rate, 3, 6, cfg.code_seed);
        std::ofstream os(alist_path);
        if (!os) {
            std::cerr << "cannot write alist file: " << alist_path << "\n";
            return 1;
        }
        os << to_alist(code);
        std::cout << "parity matrix written to " << alist_path << "\n";
    }

    std::cout << "running " << cfg.constellation << " " << cfg.nt << "x" << cfg.nr << ", "
              << cfg.channels << " channels x " << cfg.codewords << " codewords, T="
              << cfg.turbo_iters << ", seed=" << cfg.seed;
    if (!config_path.empty()) std::cout << " (config " << config_path << ")";
    std::cout << "\n";

    const ExperimentResult result = run_experiment(cfg, out_csv);
    for (const auto& rec : result.records) {
        const double ber = rec.bits_total ? static_cast<double>(rec.bit_errors) / rec.bits_total : 0.0;
        std::printf("%-6s  %6.2f dB  BER %.3e  (%lld/%lld bits, %lld/%lld frames, %.1fs)\n",
                    rec.variant.c_str(), rec.snr_db, ber, rec.bit_errors, rec.bits_total,
                    rec.frame_errors, rec.frames_total, rec.wall_time_s);
    }
    if (!plot_prefix.empty()) {
        for (const auto& path : emit_plot_data(result.records, plot_prefix))
            std::cout << "plot data written to " << path << "\n";
    }
    std::cout << "results written to " << out_csv << "\n";
    return 0;
}

int params_command(const std::vector<std::string>& variants, int turbo_iters) {
    for (const auto& name : variants) {
        const DetectorParams p = DetectorParams::variant(name);
        std::printf("%s: S=%d, policy=%s, moment-matching prior=%s\n", p.name.c_str(), p.self_iters,
                    p.policy == NegVarPolicy::keep_old ? "keep-old" : "use-tilted",
                    p.uniform_prior_in_mm ? "uniform" : "decoder");
        std::printf("  beta(t), t=0..%d:", turbo_iters);
        for (int t = 0; t <= turbo_iters; ++t) std::printf(" %.6g", p.beta_at(t));
        std::printf("\n");
        if (p.self_iters > 0) {
            std::printf("  eps(l), l=1..%d:", p.self_iters);
            for (int l = 1; l <= p.self_iters; ++l) std::printf(" %.6g", p.eps_at(l));
            std::printf("\n");
        }
    }
    return 0;
}

// compact self-check battery: algebraic identities, schedules, and
// oracle agreement on small instances
int verify_command(std::uint64_t seed) {
    int failures = 0;
    auto report = [&](const std::string& name, bool ok, const std::string& detail = "") {
        std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(),
                    detail.empty() ? "" : ": ", detail.c_str());
        if (!ok) ++failures;
    };
    Rng rng(seed);

    {  // constellation invariants for every supported order
        bool ok = true;
        for (int m : {2, 4, 16, 64, 128, 256}) {
            const Constellation c = build_qam(m);
            double e = 0.0;
            for (const auto& p : c.points) e += std::norm(p);
            ok = ok && std::abs(e / m - 1.0) < 1e-12;
            std::vector<bool> seen(m, false);
            for (auto l : c.labels) seen[l] = true;
            for (bool s : seen) ok = ok && s;
        }
        report("constellation energy and label bijection (all M)", ok);
    }

    {  // cavity/recombination and moment-matching identities on random draws
        bool ok = true;
        for (int i = 0; i < 1000 && ok; ++i) {
            const double post_var = 0.1 + rng.uniform_open();
            const double factor_var = post_var * (1.05 + rng.uniform_open());
            const cxd post_mean(rng.normal(), rng.normal());
            const cxd factor_mean(rng.normal(), rng.normal());
            const auto cav = cavity(post_mean, post_var, factor_mean, factor_var);
            if (!cav) { ok = false; break; }
            // gaussian product of cavity and factor must recover the marginal
            const double rvar = 1.0 / (1.0 / cav->var + 1.0 / factor_var);
            const cxd rmean = rvar * (cav->mean / cav->var + factor_mean / factor_var);
            ok = std::abs(rvar - post_var) < 1e-9 && std::abs(rmean - post_mean) < 1e-9;
        }
        report("cavity/recombination round trip (1000 random)", ok);
    }

    {  // schedules from the parameter table
        const DetectorParams nubep = DetectorParams::variant("nubep");
        const DetectorParams epd = DetectorParams::variant("epd");
        bool ok = true;
        for (int t = 0; t <= 5; ++t)
            ok = ok && nubep.beta_at(t) == std::min(std::exp(t / 1.5) / 10.0, 0.7);
        for (int l = 1; l <= 10; ++l)
            ok = ok && epd.eps_at(l) == std::pow(2.0, -std::max(l - 4, 1));
        report("nuBEP beta / EPD eps schedules", ok);
    }

    {  // Nt=1: detector extrinsic equals exact demap for every M
        bool ok = true;
        for (int m : {2, 4, 16, 64, 128, 256}) {
            const Constellation c = build_qam(m);
            Rng r = rng.derive({0x6e743141ULL, static_cast<std::uint64_t>(m)});
            Eigen::MatrixXcd h(1, 1);
            h(0, 0) = r.cnormal(1.0);
            const Eigen::VectorXcd u = Eigen::VectorXcd::Constant(1, c.points[r.index(m)]);
            const double nv = 0.3;
            Eigen::VectorXcd y = h * u;
            y(0) += r.cnormal(nv);
            const std::vector<std::vector<double>> priors{uniform_prior(c)};
            const CavitySet cav = detect(DetectorParams::variant("nubep"), y, h, nv, priors, 0, c);
            const auto exact = map_marginals(y, h, nv, priors, c);
            const auto llr = extrinsic_llr(cav.mean(0), cav.var(0), c, 1e30);
            for (int b = 0; b < c.bits_per_symbol; ++b)
                ok = ok && std::abs(llr[b] - exact.extrinsic_bit_llrs[b]) < 1e-6;
        }
        report("Nt=1 extrinsic LLRs match exhaustive MAP (all M)", ok);
    }

    {  // 2x2 QPSK: nuBEP tracks MAP closely, oracle never loses
        const Constellation c = build_qam(4);
        const std::vector<std::vector<double>> priors{uniform_prior(c), uniform_prior(c)};
        const DetectorParams nubep = DetectorParams::variant("nubep");
        const double nv = 0.1;
        int map_err = 0, ep_err = 0, n_draws = 20000;
        Rng r = rng.derive({0x32783251ULL});
        for (int i = 0; i < n_draws; ++i) {
            const Eigen::MatrixXcd h = sample_channel(2, 2, r);
            Eigen::VectorXcd u(2);
            int s0 = static_cast<int>(r.index(4)), s1 = static_cast<int>(r.index(4));
            u << c.points[s0], c.points[s1];
            const Eigen::VectorXcd y = transmit(h, u, nv, r);
            const auto exact = map_marginals(y, h, nv, priors, c);
            const CavitySet cav = detect(nubep, y, h, nv, priors, 0, c);
            const auto hd = hard_decisions(cav, priors, c);
            auto argmax = [](const std::vector<double>& v) {
                return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
            };
            map_err += (argmax(exact.symbol_pmf[0]) != s0) + (argmax(exact.symbol_pmf[1]) != s1);
            ep_err += (hd[0] != s0) + (hd[1] != s1);
        }
        const double rel = std::abs(ep_err - map_err) / std::max(1.0, static_cast<double>(map_err));
        char detail[128];
        std::snprintf(detail, sizeof detail, "MAP SER %.4f, nuBEP SER %.4f",
                      map_err / (2.0 * n_draws), ep_err / (2.0 * n_draws));
        report("2x2 QPSK nuBEP SER within 15% of MAP", rel < 0.15 && ep_err + 20 >= map_err, detail);
    }

    {  // LMMSE is the S=0 degenerate case, bit-exact
        const Constellation c = build_qam(16);
        bool ok = true;
        Rng r = rng.derive({0x6c6d6d73ULL});
        DetectorParams s0 = DetectorParams::variant("nubep");
        s0.self_iters = 0;
        for (int i = 0; i < 100 && ok; ++i) {
            const Eigen::MatrixXcd h = sample_channel(4, 4, r);
            Eigen::VectorXcd u(4);
            for (int k = 0; k < 4; ++k) u(k) = c.points[r.index(16)];
            const Eigen::VectorXcd y = transmit(h, u, 0.05, r);
            std::vector<std::vector<double>> priors(4, uniform_prior(c));
            const CavitySet a = detect(DetectorParams::variant("lmmse"), y, h, 0.05, priors, 0, c);
            const CavitySet b = detect(s0, y, h, 0.05, priors, 0, c);
            for (int k = 0; k < 4; ++k)
                ok = ok && a.mean(k) == b.mean(k) && a.var(k) == b.var(k);
        }
        report("LMMSE equals detect with S=0 (bitwise, 100 random)", ok);
    }

    std::printf("%s\n", failures == 0 ? "verify: all checks passed" : "verify: FAILURES present");
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EP-based MIMO turbo detection link-level simulator"};
    app.require_subcommand(1);

    // ---- run ----
    auto* run = app.add_subcommand("run", "run a Monte-Carlo BER experiment");
    std::string config_path, out_csv = "ber_results.csv", plot_prefix, alist_path;
    run->add_option("-c,--config", config_path, "INI config file (flags override its keys)")
        ->check(CLI::ExistingFile);
    run->add_option("-o,--out", out_csv, "output CSV path");
    run->add_option("--plot-prefix", plot_prefix, "emit per-variant gnuplot data files");
    run->add_option("--export-alist", alist_path, "write the LDPC parity matrix in alist format");

    std::string o_constellation, o_variants;
    int o_nt = 0, o_nr = 0, o_code_n = 0, o_turbo = -1, o_channels = 0, o_codewords = 0,
        o_threads = -1, o_dec_iter = 0, o_self_iters = -1;
    double o_clip = 0, o_csi_sigma2 = -1, o_beta_cap = 0, o_eps = -1;
    std::uint64_t o_seed = 0, o_code_seed = 0;
    std::vector<double> o_snr;
    bool o_csi_comp = false, o_no_early_exit = false, o_per_iter = false;
    auto* opt_const = run->add_option("--constellation", o_constellation, "bpsk|qpsk|16qam|64qam|128qam|256qam");
    auto* opt_nt = run->add_option("--nt", o_nt, "transmit antennas");
    auto* opt_nr = run->add_option("--nr", o_nr, "receive antennas");
    auto* opt_snr = run->add_option("--snr", o_snr, "SNR grid, Nt*Es/N0 in dB")->expected(-1);
    auto* opt_var = run->add_option("--variants", o_variants, "comma list: nubep,epd,mpep,lmmse");
    auto* opt_code_n = run->add_option("--code-n", o_code_n, "LDPC codeword length");
    auto* opt_code_seed = run->add_option("--code-seed", o_code_seed, "LDPC construction seed");
    auto* opt_dec_iter = run->add_option("--decoder-max-iter", o_dec_iter, "BP iteration cap");
    auto* opt_turbo = run->add_option("--turbo-iters", o_turbo, "turbo iterations T");
    auto* opt_clip = run->add_option("--llr-clip", o_clip, "detector-to-decoder LLR clip");
    auto* opt_no_ee = run->add_flag("--no-early-exit", o_no_early_exit, "disable parity early exit");
    auto* opt_csi_s = run->add_option("--csi-sigma2", o_csi_sigma2, "CSI perturbation variance");
    auto* opt_csi_c = run->add_flag("--csi-compensate", o_csi_comp, "inflate detector noise variance");
    auto* opt_ch = run->add_option("--channels", o_channels, "channel realizations C");
    auto* opt_cw = run->add_option("--codewords", o_codewords, "codewords per channel W");
    auto* opt_seed = run->add_option("--seed", o_seed, "master seed");
    auto* opt_threads = run->add_option("--threads", o_threads, "worker threads (0 = all cores)");
    auto* opt_per_iter = run->add_flag("--per-iteration", o_per_iter, "record per-turbo-iteration BER");
    auto* opt_s = run->add_option("--detector-self-iters", o_self_iters, "override S for all variants");
    auto* opt_bc = run->add_option("--detector-beta-cap", o_beta_cap, "override damping cap/value");
    auto* opt_eps = run->add_option("--detector-eps", o_eps, "override variance floor");

    // ---- verify ----
    auto* verify = app.add_subcommand("verify", "run the oracle/property self-check suite");
    std::uint64_t verify_seed = 7;
    verify->add_option("--seed", verify_seed, "seed for randomized checks");

    // ---- params ----
    auto* params = app.add_subcommand("params", "print detector variant schedules");
    std::vector<std::string> param_variants{"nubep", "epd", "mpep", "lmmse"};
    int param_turbo = 5;
    params->add_option("--variant", param_variants, "variants to print")->expected(-1);
    params->add_option("--turbo-iters", param_turbo, "turbo horizon for beta schedule");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            ExperimentConfig cfg;
            if (!config_path.empty()) cfg = load_config(config_path);
            if (opt_const->count()) cfg.constellation = o_constellation;
            if (opt_nt->count()) cfg.nt = o_nt;
            if (opt_nr->count()) cfg.nr = o_nr;
            if (opt_snr->count()) cfg.snr_grid_db = o_snr;
            if (opt_var->count()) {
                cfg.variants.clear();
                std::string item;
                std::istringstream is(o_variants);
                while (std::getline(is, item, ',')) if (!item.empty()) cfg.variants.push_back(item);
            }
            if (opt_code_n->count()) cfg.code_n = o_code_n;
            if (opt_code_seed->count()) cfg.code_seed = o_code_seed;
            if (opt_dec_iter->count()) cfg.decoder_max_iter = o_dec_iter;
            if (opt_turbo->count()) cfg.turbo_iters = o_turbo;
            if (opt_clip->count()) cfg.llr_clip = o_clip;
            if (opt_no_ee->count()) cfg.early_exit = false;
            if (opt_csi_s->count()) cfg.csi_sigma2 = o_csi_sigma2;
            if (opt_csi_c->count()) cfg.csi_compensate = true;
            if (opt_ch->count()) cfg.channels = o_channels;
            if (opt_cw->count()) cfg.codewords = o_codewords;
            if (opt_seed->count()) cfg.seed = o_seed;
            if (opt_threads->count()) cfg.threads = o_threads;
            if (opt_per_iter->count()) cfg.record_per_iteration = o_per_iter;
            if (opt_s->count()) cfg.override_self_iters = o_self_iters;
            if (opt_bc->count()) cfg.override_beta_cap = o_beta_cap;
            if (opt_eps->count()) cfg.override_eps = o_eps;
            return run_command(config_path, cfg, out_csv, plot_prefix, alist_path);
        }
        if (verify->parsed()) return verify_command(verify_seed);
        if (params->parsed()) return params_command(param_variants, param_turbo);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

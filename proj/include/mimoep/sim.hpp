#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mimoep {

struct ExperimentConfig {
    std::string constellation = "16qam";
    int nt = 6;
    int nr = 6;
    std::vector<double> snr_grid_db;                       // Nt*Es/N0 in dB, strictly increasing
    std::vector<std::string> variants = {"nubep", "lmmse"};

    int code_n = 1008;
    double code_rate = 0.5;
    std::uint64_t code_seed = 1;
    int decoder_max_iter = 100;

    int turbo_iters = 5;
    double llr_clip = 5.0;
    bool early_exit = true;

    double csi_sigma2 = 0.0;
    bool csi_compensate = false;

    int channels = 10;    // C
    int codewords = 100;  // W per channel
    std::uint64_t seed = 1;
    int threads = 0;  // 0 = hardware concurrency
    bool record_per_iteration = false;

    // ablation overrides applied to every selected variant
    std::optional<int> override_self_iters;
    std::optional<double> override_beta_cap;
    std::optional<double> override_eps;

    void validate() const;  // throws std::invalid_argument with precise messages
};

struct BerRecord {
    std::string variant;
    double snr_db = 0.0;
    long long bit_errors = 0;
    long long bits_total = 0;
    long long frame_errors = 0;
    long long frames_total = 0;
    double wall_time_s = 0.0;
};

struct IterRecord {
    std::string variant;
    double snr_db = 0.0;
    int turbo_iter = 0;
    long long bit_errors = 0;
    long long bits_total = 0;
};

struct ExperimentResult {
    std::vector<BerRecord> records;
    std::vector<IterRecord> iter_records;  // filled when record_per_iteration
};

// Monte-Carlo sweep over snr_grid x variants x channels x codewords.
// Common-random-numbers contract: every draw depends only on (seed, channel,
// codeword), never on variant or SNR, so comparisons are paired. When
// csv_path is set the CSV is flushed after every SNR point.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& csv_path = "");

inline const char* kCsvHeader = "variant,snr_db,bit_errors,bits_total,frame_errors,frames_total,wall_time_s";

std::string csv_row(const BerRecord& r);

// one gnuplot-friendly file per variant: "snr_db ber", ascending SNR
std::vector<std::string> emit_plot_data(const std::vector<BerRecord>& records,
                                        const std::string& prefix);

// INI-style config: key=value lines, [section] headers allowed and flattened,
// '#' or ';' comments; unknown keys are an error
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

}  // namespace mimoep

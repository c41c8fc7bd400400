#include "mimoep/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mimoep/channel.hpp"
#include "mimoep/constellation.hpp"
#include "mimoep/ldpc.hpp"
#include "mimoep/rng.hpp"
#include "mimoep/turbo.hpp"

namespace mimoep {

namespace {

// stream tags for derived rngs
constexpr std::uint64_t kTagChannel = 0x4348414eULL;
constexpr std::uint64_t kTagCsi = 0x43534931ULL;
constexpr std::uint64_t kTagBits = 0x42495453ULL;
constexpr std::uint64_t kTagNoise = 0x4e4f4953ULL;

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    const Constellation c = constellation_by_name(constellation);
    if (nt < 1) fail("nt must be >= 1");
    if (nr < nt) fail("nr must be >= nt (got nt=" + std::to_string(nt) + ", nr=" + std::to_string(nr) + ")");
    if (snr_grid_db.empty()) fail("snr_grid_db must contain at least one point");
    for (std::size_t i = 1; i < snr_grid_db.size(); ++i)
        if (!(snr_grid_db[i] > snr_grid_db[i - 1])) fail("snr_grid_db must be strictly increasing");
    if (variants.empty()) fail("at least one detector variant required");
    for (const auto& v : variants) DetectorParams::variant(v);  // throws on unknown name
    if (code_n <= 0 || code_n % 2 != 0) fail("code_n must be positive and even");
    const int group = nt * c.bits_per_symbol;
    if (code_n % group != 0)
        fail("code_n=" + std::to_string(code_n) + " must be divisible by Nt*Q=" + std::to_string(group) +
             " (no partial blocks)");
    if (decoder_max_iter < 1) fail("decoder_max_iter must be >= 1");
    if (turbo_iters < 0) fail("turbo_iters must be >= 0");
    if (llr_clip <= 0) fail("llr_clip must be > 0");
    if (csi_sigma2 < 0) fail("csi_sigma2 must be >= 0");
    if (channels < 1) fail("channels must be >= 1");
    if (codewords < 1) fail("codewords must be >= 1");
    if (threads < 0) fail("threads must be >= 0");
}

std::string csv_row(const BerRecord& r) {
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.6f", r.wall_time_s);
    std::ostringstream os;
    os << r.variant << ',' << fmt_double(r.snr_db) << ',' << r.bit_errors << ',' << r.bits_total
       << ',' << r.frame_errors << ',' << r.frames_total << ',' << wall;
    return os.str();
}

namespace {

struct UnitTally {
    long long bit_errors = 0;
    long long frame_errors = 0;
    double seconds = 0.0;
    std::vector<long long> per_iter;  // info-bit errors after each turbo exchange
};

DetectorParams make_params(const ExperimentConfig& cfg, const std::string& name) {
    DetectorParams p = DetectorParams::variant(name);
    if (cfg.override_self_iters) p.self_iters = *cfg.override_self_iters;
    if (cfg.override_beta_cap) p.beta_value = *cfg.override_beta_cap;
    if (cfg.override_eps) {
        p.eps_kind = DetectorParams::EpsKind::constant;
        p.eps_value = *cfg.override_eps;
    }
    return p;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& csv_path) {
    cfg.validate();
    const Constellation c = constellation_by_name(cfg.constellation);
    const LdpcCode code = build_code(cfg.code_n, cfg.code_rate, 3, 6, cfg.code_seed);
    const int q = c.bits_per_symbol;
    const int blocks = cfg.code_n / (cfg.nt * q);
    const int num_variants = static_cast<int>(cfg.variants.size());
    const int units = cfg.channels * cfg.codewords;

    std::vector<DetectorParams> params;
    params.reserve(num_variants);
    for (const auto& v : cfg.variants) params.push_back(make_params(cfg, v));

    const Rng master(cfg.seed);

    // one channel per (channel index); fixed across the whole codeword and
    // across SNR points (paired comparisons)
    std::vector<Eigen::MatrixXcd> h_true(cfg.channels), h_det(cfg.channels);
    for (int ch = 0; ch < cfg.channels; ++ch) {
        Rng r = master.derive({kTagChannel, static_cast<std::uint64_t>(ch)});
        h_true[ch] = sample_channel(cfg.nt, cfg.nr, r);
        if (cfg.csi_sigma2 > 0.0) {
            Rng rc = master.derive({kTagCsi, static_cast<std::uint64_t>(ch)});
            h_det[ch] = perturb_csi(h_true[ch], cfg.csi_sigma2, rc);
        } else {
            h_det[ch] = h_true[ch];
        }
    }

    std::ofstream csv;
    if (!csv_path.empty()) {
        csv.open(csv_path);
        if (!csv) throw std::runtime_error("cannot open CSV output file: " + csv_path);
        csv << kCsvHeader << '\n' << std::flush;
    }

    const CsiModel csi{cfg.csi_sigma2, cfg.csi_compensate};
    const int nthreads = cfg.threads > 0
                             ? cfg.threads
                             : std::max(1u, std::thread::hardware_concurrency());

    ExperimentResult result;
    for (double snr_db : cfg.snr_grid_db) {
        const double noise_var = snr_to_noise_var(snr_db, cfg.nt, 1.0);
        const double det_noise_var = detector_noise_var(csi, cfg.nt, 1.0, noise_var);

        std::vector<std::vector<UnitTally>> tallies(units, std::vector<UnitTally>(num_variants));
        std::atomic<int> next{0};

        auto worker = [&] {
            std::vector<std::uint8_t> info(code.k);
            for (;;) {
                const int unit = next.fetch_add(1);
                if (unit >= units) break;
                const int ch = unit / cfg.codewords;
                const int w = unit % cfg.codewords;

                Rng rbits = master.derive({kTagBits, static_cast<std::uint64_t>(ch),
                                           static_cast<std::uint64_t>(w)});
                for (auto& b : info) b = static_cast<std::uint8_t>(rbits.bit());
                const std::vector<std::uint8_t> cw = encode(code, info);
                const std::vector<cxd> symbols = modulate(cw, c);

                Eigen::MatrixXcd y(cfg.nr, blocks);
                Rng rnoise = master.derive({kTagNoise, static_cast<std::uint64_t>(ch),
                                            static_cast<std::uint64_t>(w)});
                for (int p = 0; p < blocks; ++p) {
                    Eigen::VectorXcd u(cfg.nt);
                    for (int k = 0; k < cfg.nt; ++k) u(k) = symbols[p * cfg.nt + k];
                    y.col(p) = h_true[ch] * u;
                    for (int r = 0; r < cfg.nr; ++r) y(r, p) += rnoise.cnormal(noise_var);
                }

                for (int v = 0; v < num_variants; ++v) {
                    TurboConfig tc;
                    tc.turbo_iters = cfg.turbo_iters;
                    tc.llr_clip = cfg.llr_clip;
                    tc.early_exit = cfg.early_exit;
                    tc.decoder_max_iter = cfg.decoder_max_iter;
                    tc.detector = params[v];

                    const auto t0 = std::chrono::steady_clock::now();
                    const TurboResult tr =
                        turbo_receive(y, h_det[ch], det_noise_var, c, code, tc, &info);
                    const auto t1 = std::chrono::steady_clock::now();

                    UnitTally& tally = tallies[unit][v];
                    tally.bit_errors = tr.per_iter_bit_errors.back();
                    tally.frame_errors = tally.bit_errors > 0 ? 1 : 0;
                    tally.seconds = std::chrono::duration<double>(t1 - t0).count();
                    if (cfg.record_per_iteration) tally.per_iter = tr.per_iter_bit_errors;
                }
            }
        };

        std::vector<std::thread> pool;
        for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();

        // deterministic merge in (channel, codeword) order
        for (int v = 0; v < num_variants; ++v) {
            BerRecord rec;
            rec.variant = cfg.variants[v];
            rec.snr_db = snr_db;
            std::vector<long long> iter_err(cfg.turbo_iters + 1, 0);
            for (int unit = 0; unit < units; ++unit) {
                const UnitTally& t = tallies[unit][v];
                rec.bit_errors += t.bit_errors;
                rec.frame_errors += t.frame_errors;
                rec.wall_time_s += t.seconds;
                if (cfg.record_per_iteration)
                    for (int i = 0; i <= cfg.turbo_iters; ++i) iter_err[i] += t.per_iter[i];
            }
            rec.bits_total = static_cast<long long>(units) * code.k;
            rec.frames_total = units;
            result.records.push_back(rec);
            if (cfg.record_per_iteration) {
                for (int i = 0; i <= cfg.turbo_iters; ++i)
                    result.iter_records.push_back(
                        {cfg.variants[v], snr_db, i, iter_err[i], rec.bits_total});
            }
            if (csv.is_open()) csv << csv_row(rec) << '\n' << std::flush;
        }
    }
    return result;
}

std::vector<std::string> emit_plot_data(const std::vector<BerRecord>& records,
                                        const std::string& prefix) {
    if (records.empty()) throw std::invalid_argument("emit_plot_data: no records");
    std::map<std::string, std::vector<const BerRecord*>> by_variant;
    for (const auto& r : records) by_variant[r.variant].push_back(&r);

    std::vector<std::string> paths;
    for (auto& [variant, recs] : by_variant) {
        std::sort(recs.begin(), recs.end(),
                  [](const BerRecord* a, const BerRecord* b) { return a->snr_db < b->snr_db; });
        const std::string path = prefix + "_" + variant + ".dat";
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot open plot data file: " + path);
        os << "# snr_db ber\n";
        for (const BerRecord* r : recs) {
            const double ber =
                r->bits_total > 0 ? static_cast<double>(r->bit_errors) / r->bits_total : 0.0;
            os << fmt_double(r->snr_db) << ' ' << fmt_double(ber) << '\n';
        }
        paths.push_back(path);
    }
    return paths;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config: key '" + key + "' expects a boolean, got '" + v + "'");
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') continue;  // sections are organizational
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        auto bad_value = [&]() {
            return std::invalid_argument("config line " + std::to_string(lineno) +
                                         ": cannot parse value '" + val + "' for key '" + key + "'");
        };
        auto to_int = [&](const std::string& s) {
            try { return std::stoi(s); } catch (const std::exception&) { throw bad_value(); }
        };
        auto to_double = [&](const std::string& s) {
            try { return std::stod(s); } catch (const std::exception&) { throw bad_value(); }
        };
        auto to_u64 = [&](const std::string& s) -> std::uint64_t {
            try { return std::stoull(s); } catch (const std::exception&) { throw bad_value(); }
        };

        if (key == "constellation") cfg.constellation = val;
        else if (key == "nt") cfg.nt = to_int(val);
        else if (key == "nr") cfg.nr = to_int(val);
        else if (key == "snr_grid_db") {
            cfg.snr_grid_db.clear();
            for (const auto& s : split_list(val)) cfg.snr_grid_db.push_back(to_double(s));
        } else if (key == "variants") cfg.variants = split_list(val);
        else if (key == "code_n") cfg.code_n = to_int(val);
        else if (key == "code_rate") cfg.code_rate = to_double(val);
        else if (key == "code_seed") cfg.code_seed = to_u64(val);
        else if (key == "decoder_max_iter") cfg.decoder_max_iter = to_int(val);
        else if (key == "turbo_iters") cfg.turbo_iters = to_int(val);
        else if (key == "llr_clip") cfg.llr_clip = to_double(val);
        else if (key == "early_exit") cfg.early_exit = parse_bool(val, key);
        else if (key == "csi_sigma2") cfg.csi_sigma2 = to_double(val);
        else if (key == "csi_compensate") cfg.csi_compensate = parse_bool(val, key);
        else if (key == "channels") cfg.channels = to_int(val);
        else if (key == "codewords") cfg.codewords = to_int(val);
        else if (key == "seed") cfg.seed = to_u64(val);
        else if (key == "threads") cfg.threads = to_int(val);
        else if (key == "record_per_iteration") cfg.record_per_iteration = parse_bool(val, key);
        else if (key == "detector_self_iters") cfg.override_self_iters = to_int(val);
        else if (key == "detector_beta_cap") cfg.override_beta_cap = to_double(val);
        else if (key == "detector_eps") cfg.override_eps = to_double(val);
        else
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": unknown key '" + key + "'");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return parse_config(in);
}

}  // namespace mimoep

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mimoep/channel.hpp"
#include "mimoep/constellation.hpp"
#include "mimoep/epcore.hpp"
#include "mimoep/ldpc.hpp"
#include "mimoep/oracle.hpp"
#include "mimoep/rng.hpp"
#include "mimoep/sim.hpp"
#include "mimoep/turbo.hpp"

namespace py = pybind11;
using namespace mimoep;

PYBIND11_MODULE(_mimoep, m) {
    m.doc() = "EP-based soft MIMO detection and turbo decoding simulator";

    // ---- rng ----
    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("derive", [](const Rng& r, const std::vector<std::uint64_t>& tags) {
            Rng out = r;
            for (auto t : tags) out = out.derive({t});
            return out;
        })
        .def("normal", &Rng::normal)
        .def("bit", &Rng::bit)
        .def("cnormal", &Rng::cnormal, py::arg("var"));

    // ---- constellation ----
    py::class_<Constellation>(m, "Constellation")
        .def_readonly("order", &Constellation::order)
        .def_readonly("bits_per_symbol", &Constellation::bits_per_symbol)
        .def_readonly("points", &Constellation::points)
        .def_readonly("labels", &Constellation::labels)
        .def("bit_of", &Constellation::bit_of, py::arg("point_index"), py::arg("q"))
        .def("__repr__", [](const Constellation& c) {
            return "<Constellation " + constellation_name(c) + ">";
        });
    m.def("build_qam", &build_qam, py::arg("order"));
    m.def("constellation_by_name", &constellation_by_name, py::arg("name"));
    m.def("modulate", [](const std::vector<std::uint8_t>& bits, const Constellation& c) {
        return modulate(bits, c);
    }, py::arg("bits"), py::arg("constellation"));
    m.def("hard_demap", [](const std::vector<cxd>& sym, const Constellation& c) {
        return hard_demap(sym, c);
    }, py::arg("symbols"), py::arg("constellation"));
    m.def("pmf_moments", [](const std::vector<double>& pmf, const Constellation& c) {
        const PmfMoments pm = pmf_moments(pmf, c);
        return py::make_tuple(pm.mean, pm.var);
    }, py::arg("pmf"), py::arg("constellation"));
    m.def("uniform_prior", &uniform_prior, py::arg("constellation"));
    m.def("llrs_to_prior", [](const std::vector<double>& llrs, const Constellation& c) {
        return llrs_to_prior(llrs, c);
    }, py::arg("llrs"), py::arg("constellation"));
    m.def("extrinsic_llr", &extrinsic_llr, py::arg("mean"), py::arg("var"),
          py::arg("constellation"), py::arg("clip"));

    // ---- channel ----
    py::class_<CsiModel>(m, "CsiModel")
        .def(py::init<>())
        .def(py::init([](double s2, bool comp) { return CsiModel{s2, comp}; }),
             py::arg("sigma_h2"), py::arg("compensate"))
        .def_readwrite("sigma_h2", &CsiModel::sigma_h2)
        .def_readwrite("compensate", &CsiModel::compensate);
    m.def("sample_channel", &sample_channel, py::arg("nt"), py::arg("nr"), py::arg("rng"));
    m.def("snr_to_noise_var", &snr_to_noise_var, py::arg("x_db"), py::arg("nt"),
          py::arg("es") = 1.0);
    m.def("transmit", &transmit, py::arg("h"), py::arg("u"), py::arg("noise_var"), py::arg("rng"));
    m.def("perturb_csi", &perturb_csi, py::arg("h"), py::arg("sigma_h2"), py::arg("rng"));
    m.def("detector_noise_var", &detector_noise_var, py::arg("csi"), py::arg("nt"), py::arg("es"),
          py::arg("noise_var"));

    // ---- ldpc ----
    py::class_<LdpcCode>(m, "LdpcCode")
        .def_readonly("n", &LdpcCode::n)
        .def_readonly("k", &LdpcCode::k)
        .def_readonly("dv", &LdpcCode::dv)
        .def_readonly("dc", &LdpcCode::dc)
        .def_readonly("info_positions", &LdpcCode::info_positions)
        .def_readonly("check_cols", &LdpcCode::check_cols)
        .def_readonly("build_attempts", &LdpcCode::build_attempts)
        .def_property_readonly("num_checks", &LdpcCode::num_checks);
    m.def("build_code", &build_code, py::arg("n"), py::arg("rate"), py::arg("dv") = 3,
          py::arg("dc") = 6, py::arg("seed") = 1);
    m.def("encode", [](const LdpcCode& code, const std::vector<std::uint8_t>& info) {
        return encode(code, info);
    }, py::arg("code"), py::arg("info_bits"));
    m.def("parity_check", [](const LdpcCode& code, const std::vector<std::uint8_t>& cw) {
        return parity_check(code, cw);
    }, py::arg("code"), py::arg("codeword"));
    py::class_<DecodeResult>(m, "DecodeResult")
        .def_readonly("info_bits_hat", &DecodeResult::info_bits_hat)
        .def_readonly("extrinsic_llrs", &DecodeResult::extrinsic_llrs)
        .def_readonly("iterations_used", &DecodeResult::iterations_used)
        .def_readonly("parity_ok", &DecodeResult::parity_ok);
    m.def("decode", [](const LdpcCode& code, const std::vector<double>& llrs, int max_iter) {
        return decode(code, llrs, max_iter);
    }, py::arg("code"), py::arg("channel_llrs"), py::arg("max_iter") = 100);
    m.def("to_alist", &to_alist, py::arg("code"));

    // ---- ep core ----
    py::enum_<NegVarPolicy>(m, "NegVarPolicy")
        .value("keep_old", NegVarPolicy::keep_old)
        .value("use_tilted", NegVarPolicy::use_tilted);
    py::class_<DetectorParams>(m, "DetectorParams")
        .def_static("variant", &DetectorParams::variant, py::arg("name"))
        .def_readwrite("name", &DetectorParams::name)
        .def_readwrite("self_iters", &DetectorParams::self_iters)
        .def_readwrite("policy", &DetectorParams::policy)
        .def_readwrite("uniform_prior_in_mm", &DetectorParams::uniform_prior_in_mm)
        .def("beta_at", &DetectorParams::beta_at, py::arg("turbo_t"))
        .def("eps_at", &DetectorParams::eps_at, py::arg("self_l"));
    py::class_<GaussianFactorSet>(m, "GaussianFactorSet")
        .def(py::init([](const Eigen::VectorXcd& mean, const Eigen::VectorXd& var) {
            return GaussianFactorSet{mean, var};
        }), py::arg("mean"), py::arg("var"))
        .def_readwrite("mean", &GaussianFactorSet::mean)
        .def_readwrite("var", &GaussianFactorSet::var);
    py::class_<PosteriorGaussian>(m, "PosteriorGaussian")
        .def_readonly("mean", &PosteriorGaussian::mean)
        .def_readonly("cov", &PosteriorGaussian::cov);
    py::class_<CavitySet>(m, "CavitySet")
        .def_readonly("mean", &CavitySet::mean)
        .def_readonly("var", &CavitySet::var)
        .def_readonly("valid", &CavitySet::valid);
    m.def("compute_posterior", &compute_posterior, py::arg("h"), py::arg("noise_var"),
          py::arg("y"), py::arg("factors"));
    m.def("tilted_pmf", [](cxd mean, double var, const std::vector<double>& prior,
                           const Constellation& c) { return tilted_pmf(mean, var, prior, c); },
          py::arg("mean"), py::arg("var"), py::arg("prior"), py::arg("constellation"));
    m.def("detect", &detect, py::arg("params"), py::arg("y"), py::arg("h"), py::arg("noise_var"),
          py::arg("priors"), py::arg("turbo_t"), py::arg("constellation"));
    m.def("hard_decisions", &hard_decisions, py::arg("cavities"), py::arg("priors"),
          py::arg("constellation"));

    // ---- oracle ----
    py::class_<ExactMarginals>(m, "ExactMarginals")
        .def_readonly("symbol_pmf", &ExactMarginals::symbol_pmf)
        .def_readonly("posterior_bit_llrs", &ExactMarginals::posterior_bit_llrs)
        .def_readonly("extrinsic_bit_llrs", &ExactMarginals::extrinsic_bit_llrs);
    m.def("map_marginals", &map_marginals, py::arg("y"), py::arg("h"), py::arg("noise_var"),
          py::arg("priors"), py::arg("constellation"));

    // ---- turbo ----
    py::class_<TurboConfig>(m, "TurboConfig")
        .def(py::init<>())
        .def_readwrite("turbo_iters", &TurboConfig::turbo_iters)
        .def_readwrite("llr_clip", &TurboConfig::llr_clip)
        .def_readwrite("early_exit", &TurboConfig::early_exit)
        .def_readwrite("decoder_max_iter", &TurboConfig::decoder_max_iter)
        .def_readwrite("detector", &TurboConfig::detector);
    py::class_<TurboResult>(m, "TurboResult")
        .def_readonly("info_bits_hat", &TurboResult::info_bits_hat)
        .def_readonly("parity_ok", &TurboResult::parity_ok)
        .def_readonly("iterations_run", &TurboResult::iterations_run)
        .def_readonly("per_iter_bit_errors", &TurboResult::per_iter_bit_errors);
    m.def("coded_bit_index", &coded_bit_index, py::arg("p"), py::arg("k"), py::arg("q"),
          py::arg("nt"), py::arg("bits_per_symbol"));
    m.def("turbo_receive",
          [](const Eigen::MatrixXcd& y_blocks, const Eigen::MatrixXcd& h, double noise_var,
             const Constellation& c, const LdpcCode& code, const TurboConfig& cfg,
             const std::vector<std::uint8_t>& true_info) {
              return turbo_receive(y_blocks, h, noise_var, c, code, cfg,
                                   true_info.empty() ? nullptr : &true_info);
          },
          py::arg("y_blocks"), py::arg("h"), py::arg("noise_var"), py::arg("constellation"),
          py::arg("code"), py::arg("config"), py::arg("true_info") = std::vector<std::uint8_t>{});

    // ---- simulation harness ----
    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("constellation", &ExperimentConfig::constellation)
        .def_readwrite("nt", &ExperimentConfig::nt)
        .def_readwrite("nr", &ExperimentConfig::nr)
        .def_readwrite("snr_grid_db", &ExperimentConfig::snr_grid_db)
        .def_readwrite("variants", &ExperimentConfig::variants)
        .def_readwrite("code_n", &ExperimentConfig::code_n)
        .def_readwrite("code_rate", &ExperimentConfig::code_rate)
        .def_readwrite("code_seed", &ExperimentConfig::code_seed)
        .def_readwrite("decoder_max_iter", &ExperimentConfig::decoder_max_iter)
        .def_readwrite("turbo_iters", &ExperimentConfig::turbo_iters)
        .def_readwrite("llr_clip", &ExperimentConfig::llr_clip)
        .def_readwrite("early_exit", &ExperimentConfig::early_exit)
        .def_readwrite("csi_sigma2", &ExperimentConfig::csi_sigma2)
        .def_readwrite("csi_compensate", &ExperimentConfig::csi_compensate)
        .def_readwrite("channels", &ExperimentConfig::channels)
        .def_readwrite("codewords", &ExperimentConfig::codewords)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("threads", &ExperimentConfig::threads)
        .def_readwrite("record_per_iteration", &ExperimentConfig::record_per_iteration)
        .def("validate", &ExperimentConfig::validate);
    py::class_<BerRecord>(m, "BerRecord")
        .def_readonly("variant", &BerRecord::variant)
        .def_readonly("snr_db", &BerRecord::snr_db)
        .def_readonly("bit_errors", &BerRecord::bit_errors)
        .def_readonly("bits_total", &BerRecord::bits_total)
        .def_readonly("frame_errors", &BerRecord::frame_errors)
        .def_readonly("frames_total", &BerRecord::frames_total)
        .def_readonly("wall_time_s", &BerRecord::wall_time_s)
        .def_property_readonly("ber", [](const BerRecord& r) {
            return r.bits_total ? static_cast<double>(r.bit_errors) / r.bits_total : 0.0;
        });
    py::class_<IterRecord>(m, "IterRecord")
        .def_readonly("variant", &IterRecord::variant)
        .def_readonly("snr_db", &IterRecord::snr_db)
        .def_readonly("turbo_iter", &IterRecord::turbo_iter)
        .def_readonly("bit_errors", &IterRecord::bit_errors)
        .def_readonly("bits_total", &IterRecord::bits_total);
    py::class_<ExperimentResult>(m, "ExperimentResult")
        .def_readonly("records", &ExperimentResult::records)
        .def_readonly("iter_records", &ExperimentResult::iter_records);
    m.def("run_experiment",
          [](const ExperimentConfig& cfg, const std::string& csv_path) {
              py::gil_scoped_release release;
              return run_experiment(cfg, csv_path);
          },
          py::arg("config"), py::arg("csv_path") = std::string{});
    m.def("emit_plot_data", &emit_plot_data, py::arg("records"), py::arg("prefix"));
    m.def("load_config", &load_config, py::arg("path"));
}

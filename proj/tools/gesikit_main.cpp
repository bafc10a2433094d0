// Copyright 2026 The Gesikit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gesi/csv.hpp"
#include "gesi/pipeline.hpp"
#include "gesi/synth.hpp"
#include "gesi/wav.hpp"

namespace {

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::vector<std::string> parse_names(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int run_synth(const std::string& out_dir, int n, uint64_t seed, double noise_s,
              int bits) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "clean");
  gesi::CsvWriter manifest((fs::path(out_dir) / "corpus_manifest.csv").string(),
                           {"utterance_id", "wav_path"});
  double longest = 0.0;
  for (int i = 0; i < n; ++i) {
    const gesi::AudioBuffer u = gesi::synth_utterance(seed + i);
    longest = std::max(longest, u.duration_s());
    char id[32];
    std::snprintf(id, sizeof(id), "utt%03d", i);
    const std::string rel = std::string("clean/") + id + ".wav";
    gesi::write_wav((fs::path(out_dir) / rel).string(), u, bits);
    manifest.row({id, rel});
  }
  const double duration = std::max(noise_s, longest + 2.0);
  const gesi::AudioBuffer noise = gesi::synth_babble(seed ^ 0xbabb1eULL, duration);
  gesi::write_wav((fs::path(out_dir) / "babble.wav").string(), noise, bits);
  std::cout << "synth: wrote " << n << " utterances and babble noise under "
            << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speech intelligibility prediction toolkit (GESI, STOI/ESTOI, "
               "hearing-loss simulation, psychometric analysis)"};
  app.require_subcommand(1);
  app.set_config("--config");

  // ---- prepare ----------------------------------------------------------
  gesi::PrepareConfig prep;
  std::string prep_snrs = "-3,0,3,6,9";
  std::string prep_conditions = "unprocessed,70yr,80yr,m20db";
  auto* sc_prepare = app.add_subcommand(
      "prepare", "mix a corpus at each SNR and degrade per hearing-loss condition");
  sc_prepare->add_option("--manifest", prep.manifest_path,
                         "corpus manifest CSV (utterance_id, wav_path)")
      ->required();
  sc_prepare->add_option("--noise", prep.noise_path, "noise WAV")->required();
  sc_prepare->add_option("--out", prep.out_dir, "output directory")->required();
  sc_prepare->add_option("--snr", prep_snrs, "comma separated SNR list (dB)");
  sc_prepare->add_option("--conditions", prep_conditions,
                         "subset of unprocessed,70yr,80yr,m20db");
  sc_prepare->add_option("--seed", prep.seed, "seed fixing all stochastic choices");
  sc_prepare->add_option("--level-db", prep.presentation_leq_db_spl,
                         "speech presentation level, dB SPL Leq");
  sc_prepare->add_option("--spl-ref", prep.spl_ref,
                         "dB SPL assigned to a full-scale sinusoid");
  sc_prepare->add_option("--bits", prep.bits, "output WAV bit depth (16 or 24)");
  sc_prepare->add_flag("--force", prep.force, "overwrite an existing output corpus");
  sc_prepare->add_option("--workers", prep.num_workers,
                         "worker threads (default: GESI_NUM_WORKERS or cores)");

  // ---- predict ----------------------------------------------------------
  gesi::PredictConfig pred;
  double pred_npip = -1.0;
  std::string pred_params_file, pred_test_profile;
  bool pred_linear = false;
  auto* sc_predict =
      app.add_subcommand("predict", "score a prepared corpus with gesi, stoi or estoi");
  sc_predict->add_option("--manifest", pred.manifest_path, "prepared manifest CSV")
      ->required();
  sc_predict->add_option("--method", pred.method, "gesi | stoi | estoi");
  sc_predict->add_option("--out", pred.out_csv, "scores CSV path")->required();
  sc_predict->add_option("--rho", pred.params.rho, "similarity asymmetry weight");
  sc_predict->add_option("--npip", pred_npip,
                         "mean audible pip count; sets rho = 0.5 + 0.02*(15 - npip)");
  sc_predict->add_option("--h-max", pred.params.h_max, "SSI weight upper limit");
  sc_predict->add_option("--sigmoid-a", pred.params.sigmoid_a, "sigmoid slope");
  sc_predict->add_option("--sigmoid-b", pred.params.sigmoid_b, "sigmoid offset");
  sc_predict->add_option("--params", pred_params_file,
                         "params file from calibrate (sigmoid_a/sigmoid_b)");
  sc_predict->add_flag("--linear-frontend", pred_linear,
                       "bypass the compressive front end");
  sc_predict->add_option("--test-profile", pred_test_profile,
                         "hearing profile text file for the test-signal path");
  sc_predict->add_option("--workers", pred.num_workers, "worker threads");

  // ---- calibrate --------------------------------------------------------
  std::string cal_scores, cal_observed, cal_out = "gesi_params.txt";
  auto* sc_calibrate = app.add_subcommand(
      "calibrate", "fit the sigmoid on unprocessed-condition scores");
  sc_calibrate->add_option("--scores", cal_scores, "scores CSV from predict")
      ->required();
  sc_calibrate
      ->add_option("--observed", cal_observed,
                   "observed CSV (condition, snr_db, percent_correct)")
      ->required();
  sc_calibrate->add_option("--out-params", cal_out, "params file to write");

  // ---- analyze ----------------------------------------------------------
  gesi::AnalyzeConfig ana;
  auto* sc_analyze = app.add_subcommand(
      "analyze", "psychometric fits, SRTs, screening and correlation reports");
  sc_analyze->add_option("--trials", ana.trials_csv, "trials CSV")->required();
  sc_analyze->add_option("--screening", ana.screening_csv,
                         "screening CSV (optional)");
  sc_analyze->add_option("--out", ana.out_dir, "output directory")->required();
  sc_analyze->add_option("--threshold", ana.screening_threshold,
                         "screening threshold on mean pip count");

  // ---- pips -------------------------------------------------------------
  gesi::TonePipSpec pip_spec;
  std::string pips_out = "pips.wav";
  int pips_fs = 48000, pips_bits = 24;
  auto* sc_pips = app.add_subcommand("pips", "generate a tone pip sequence WAV");
  sc_pips->add_option("--freq", pip_spec.frequency_hz, "tone frequency (Hz)");
  sc_pips->add_option("--n-pips", pip_spec.n_pips, "number of pips");
  sc_pips->add_option("--step", pip_spec.step_db, "level step per pip (dB, negative)");
  sc_pips->add_option("--start-db", pip_spec.start_level_db_spl,
                      "level of the first pip (dB SPL)");
  sc_pips->add_option("--pip-ms", pip_spec.pip_duration_ms, "pip duration (ms)");
  sc_pips->add_option("--ramp-ms", pip_spec.ramp_ms, "raised-cosine ramp (ms)");
  sc_pips->add_option("--gap-ms", pip_spec.gap_ms, "gap between pips (ms)");
  sc_pips->add_option("--fs", pips_fs, "sample rate");
  sc_pips->add_option("--bits", pips_bits, "WAV bit depth (24 keeps the low pips)");
  sc_pips->add_option("--out", pips_out, "output WAV");

  // ---- screen -----------------------------------------------------------
  std::string scr_in, scr_out = "screening_report.csv";
  double scr_threshold = 9.0;
  auto* sc_screen =
      app.add_subcommand("screen", "partition participants by mean pip count");
  sc_screen->add_option("--screening", scr_in, "screening CSV")->required();
  sc_screen->add_option("--out", scr_out, "report CSV");
  sc_screen->add_option("--threshold", scr_threshold, "exclusion threshold");

  // ---- synth ------------------------------------------------------------
  std::string synth_out;
  int synth_n = 12, synth_bits = 16;
  uint64_t synth_seed = 1;
  double synth_noise_s = 20.0;
  auto* sc_synth = app.add_subcommand(
      "synth", "generate a deterministic demo corpus (speech-like utterances + babble)");
  sc_synth->add_option("--out", synth_out, "output directory")->required();
  sc_synth->add_option("--n", synth_n, "number of utterances");
  sc_synth->add_option("--seed", synth_seed, "seed");
  sc_synth->add_option("--noise-duration", synth_noise_s, "babble duration (s)");
  sc_synth->add_option("--bits", synth_bits, "WAV bit depth");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sc_prepare->parsed()) {
      prep.snr_list = parse_list(prep_snrs);
      prep.conditions = parse_names(prep_conditions);
      const auto res = gesi::cmd_prepare(prep);
      std::cout << "prepare: " << res.n_files << " files, " << res.n_failures
                << " failures, manifest " << res.manifest_out << "\n";
      return res.n_failures == 0 ? 0 : 1;
    }
    if (sc_predict->parsed()) {
      if (!pred_params_file.empty())
        gesi::load_sigmoid_params(pred_params_file, pred.params);
      if (sc_predict->count("--npip") > 0)
        pred.params.rho = gesi::rho_from_npip(pred_npip);
      pred.compressive_frontend = !pred_linear;
      if (!pred_test_profile.empty()) {
        std::ifstream in(pred_test_profile);
        if (!in) throw gesi::ConfigError("cannot open " + pred_test_profile);
        std::stringstream ss;
        ss << in.rdbuf();
        pred.test_profile = gesi::profile_from_text(ss.str());
      }
      const auto res = gesi::cmd_predict(pred);
      std::cout << "predict: " << res.n_rows << " rows, " << res.n_failures
                << " failures, wrote " << pred.out_csv << "\n";
      return res.n_failures == 0 ? 0 : 1;
    }
    if (sc_calibrate->parsed()) {
      const auto [a, b] = gesi::cmd_calibrate(cal_scores, cal_observed, cal_out);
      std::cout << "calibrate: sigmoid_a " << a << ", sigmoid_b " << b
                << ", wrote " << cal_out << "\n";
      return 0;
    }
    if (sc_analyze->parsed()) {
      const auto res = gesi::cmd_analyze(ana);
      std::cout << "analyze: " << res.n_fits << " fits over "
                << res.n_participants << " participants";
      if (!res.screening_done) std::cout << " (screening: skipped, no input)";
      std::cout << ", outputs under " << ana.out_dir << "\n";
      return 0;
    }
    if (sc_pips->parsed()) {
      const auto buf = gesi::generate_tone_pips(pip_spec, pips_fs);
      gesi::write_wav(pips_out, buf, pips_bits);
      std::cout << "pips: wrote " << pips_out << " (" << buf.duration_s()
                << " s)\n";
      return 0;
    }
    if (sc_screen->parsed()) {
      const gesi::CsvTable scr = gesi::read_csv(scr_in);
      const int c_id = scr.require_column("participant_id", scr_in);
      const int c500 = scr.require_column("npip_500", scr_in);
      const int c1k = scr.require_column("npip_1000", scr_in);
      const int c2k = scr.require_column("npip_2000", scr_in);
      const int c4k = scr.require_column("npip_4000", scr_in);
      std::vector<gesi::ScreeningRecord> records;
      for (size_t r = 0; r < scr.rows.size(); ++r) {
        const std::string context = scr_in + " row " + std::to_string(r + 2);
        gesi::ScreeningRecord rec;
        rec.participant_id = scr.rows[r][c_id];
        rec.n_pip = {gesi::parse_double(scr.rows[r][c500], context),
                     gesi::parse_double(scr.rows[r][c1k], context),
                     gesi::parse_double(scr.rows[r][c2k], context),
                     gesi::parse_double(scr.rows[r][c4k], context)};
        rec.validate();
        records.push_back(rec);
      }
      const auto part = gesi::screen(records, scr_threshold);
      gesi::CsvWriter out(scr_out, {"participant_id", "npip_mean",
                                    "dynamic_range_db", "included"});
      auto emit = [&](const gesi::ScreeningRecord& r, bool inc) {
        out.row({r.participant_id, gesi::format_double(r.n_pip_mean()),
                 gesi::format_double(gesi::dynamic_range(r.n_pip_mean())),
                 inc ? "1" : "0"});
      };
      for (const auto& r : part.included) emit(r, true);
      for (const auto& r : part.excluded) emit(r, false);
      std::cout << "screen: " << part.included.size() << " included, "
                << part.excluded.size() << " excluded, wrote " << scr_out << "\n";
      return 0;
    }
    if (sc_synth->parsed())
      return run_synth(synth_out, synth_n, synth_seed, synth_noise_s, synth_bits);
  } catch (const gesi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

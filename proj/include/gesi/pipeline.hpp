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

#ifndef GESI_PIPELINE_HPP_
#define GESI_PIPELINE_HPP_

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "gesi/audio.hpp"
#include "gesi/common.hpp"
#include "gesi/csv.hpp"
#include "gesi/hlsim.hpp"
#include "gesi/metric.hpp"
#include "gesi/psycho.hpp"
#include "gesi/stoi.hpp"
#include "gesi/wav.hpp"

namespace gesi {

inline constexpr int kPipelineFs = 48000;

inline int default_workers() {
  if (const char* env = std::getenv("GESI_NUM_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 2;
}

namespace pipeline_detail {

inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <typename Fn>
inline void parallel_for(size_t n, int workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int count = std::min<int>(workers, static_cast<int>(n));
  pool.reserve(count);
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

inline std::string resolve_path(const std::string& base_dir, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

inline std::string snr_tag(double snr) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+g", snr);
  return buf;
}

class RunLog {
 public:
  explicit RunLog(const std::string& path) : out_(path, std::ios::app) {}
  void line(const std::string& msg) {
    std::lock_guard<std::mutex> lock(mu_);
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%d %H:%M:%S", std::gmtime(&now));
    out_ << stamp << " " << msg << "\n";
    out_.flush();
  }

 private:
  std::ofstream out_;
  std::mutex mu_;
};

}  // namespace pipeline_detail

// ---------------------------------------------------------------- prepare

struct PrepareConfig {
  std::string manifest_path;  // CSV: utterance_id, wav_path
  std::string noise_path;
  std::string out_dir;
  std::vector<double> snr_list = {-3.0, 0.0, 3.0, 6.0, 9.0};
  std::vector<std::string> conditions = {"unprocessed", "70yr", "80yr", "m20db"};
  uint64_t seed = 1;
  double presentation_leq_db_spl = 65.0;
  double spl_ref = 100.0;
  int bits = 16;
  bool force = false;
  int num_workers = 0;
  FilterbankSpec fb;

  void validate() const {
    if (snr_list.empty()) throw ConfigError("prepare: empty snr_list");
    for (size_t i = 1; i < snr_list.size(); ++i)
      if (snr_list[i] <= snr_list[i - 1])
        throw ConfigError("prepare: snr_list must be strictly increasing");
    if (conditions.empty()) throw ConfigError("prepare: no conditions");
    static const std::set<std::string> known = {"unprocessed", "70yr", "80yr", "m20db"};
    for (const auto& c : conditions)
      if (!known.count(c)) throw ConfigError("prepare: unknown condition '" + c + "'");
    if (bits != 16 && bits != 24) throw ConfigError("prepare: bits must be 16 or 24");
  }
};

struct PrepareResult {
  int n_files = 0;
  int n_failures = 0;
  std::string manifest_out;
};

inline PrepareResult cmd_prepare(const PrepareConfig& cfg) {
  namespace fs = std::filesystem;
  using namespace pipeline_detail;
  cfg.validate();

  const fs::path out_dir(cfg.out_dir);
  const fs::path manifest_out = out_dir / "manifest.csv";
  if (fs::exists(manifest_out) && !cfg.force)
    throw ConfigError("prepare: " + manifest_out.string() +
                      " exists; pass force to overwrite");
  fs::create_directories(out_dir / "wavs");
  fs::create_directories(out_dir / "refs");
  RunLog log((out_dir / "log.txt").string());
  log.line("prepare: start, seed " + std::to_string(cfg.seed));

  const CsvTable manifest = read_csv(cfg.manifest_path);
  const int col_id = manifest.require_column("utterance_id", cfg.manifest_path);
  const int col_wav = manifest.require_column("wav_path", cfg.manifest_path);
  const std::string manifest_dir = fs::path(cfg.manifest_path).parent_path().string();
  {
    std::set<std::string> seen;
    for (const auto& row : manifest.rows)
      if (!seen.insert(row[col_id]).second)
        throw ConfigError("prepare: duplicate utterance_id '" + row[col_id] + "' in " +
                          cfg.manifest_path);
  }

  AudioBuffer noise = read_wav(cfg.noise_path, kPipelineFs);
  noise.spl_ref = cfg.spl_ref;

  FilterbankSpec fb = cfg.fb;
  fb.fs = kPipelineFs;
  const Filterbank bank(fb);

  struct Row {
    std::string utterance_id, condition, snr, wav_path, ref_path;
  };
  std::vector<Row> rows;
  std::vector<std::string> failures;
  std::mutex collect_mu;

  const bool want_70 = std::count(cfg.conditions.begin(), cfg.conditions.end(), "70yr");
  const bool want_80 = std::count(cfg.conditions.begin(), cfg.conditions.end(), "80yr");
  HlSimConfig hl70, hl80;
  hl70.fb = fb;
  hl80.fb = fb;
  hl70.profile = want_70 ? preset_profile("70yr") : HearingProfile{};
  hl80.profile = want_80 ? preset_profile("80yr") : HearingProfile{};

  parallel_for(manifest.rows.size(),
               cfg.num_workers > 0 ? cfg.num_workers : default_workers(),
               [&](size_t idx) {
    const auto& in_row = manifest.rows[idx];
    const std::string id = in_row[col_id];
    try {
      AudioBuffer speech =
          read_wav(resolve_path(manifest_dir, in_row[col_wav]), kPipelineFs);
      speech.spl_ref = cfg.spl_ref;
      speech = apply_gain_db(speech,
                             cfg.presentation_leq_db_spl - rms_db_spl(speech));

      const std::string ref_rel = "refs/" + id + "__ref.wav";
      write_wav((out_dir / ref_rel).string(), speech, cfg.bits);

      std::vector<Row> local;
      size_t clipped = 0;
      for (double snr : cfg.snr_list) {
        const uint64_t mix_seed =
            cfg.seed ^ fnv1a(id + "|" + snr_tag(snr));
        const AudioBuffer mix = mix_at_snr(speech, noise, snr, mix_seed);
        for (const auto& cond : cfg.conditions) {
          AudioBuffer out;
          if (cond == "unprocessed") out = mix;
          else if (cond == "m20db") out = apply_gain_db(mix, -20.0);
          else if (cond == "70yr") out = simulate_hl(mix, hl70, &bank);
          else out = simulate_hl(mix, hl80, &bank);
          for (double v : out.samples)
            if (v >= 1.0 || v < -1.0) ++clipped;
          const std::string rel =
              "wavs/" + id + "__" + cond + "__snr" + snr_tag(snr) + ".wav";
          write_wav((out_dir / rel).string(), out, cfg.bits);
          local.push_back({id, cond, format_double(snr), rel, ref_rel});
        }
      }
      if (clipped > 0)
        log.line("prepare: WARNING " + id + ": " + std::to_string(clipped) +
                 " samples clipped; lower the presentation level or spl_ref");
      std::lock_guard<std::mutex> lock(collect_mu);
      for (auto& r : local) rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(collect_mu);
      failures.push_back(id + ": " + e.what());
    }
  });

  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.utterance_id, a.condition, a.snr) <
           std::tie(b.utterance_id, b.condition, b.snr);
  });
  CsvWriter writer(manifest_out.string(),
                   {"utterance_id", "condition", "snr_db", "wav_path", "ref_path",
                    "spl_ref"});
  for (const auto& r : rows)
    writer.row({r.utterance_id, r.condition, r.snr, r.wav_path, r.ref_path,
                format_double(cfg.spl_ref)});

  for (const auto& f : failures) log.line("prepare: FAILED " + f);
  log.line("prepare: wrote " + std::to_string(rows.size()) + " files");
  return {static_cast<int>(rows.size()), static_cast<int>(failures.size()),
          manifest_out.string()};
}

// ---------------------------------------------------------------- predict

struct PredictConfig {
  std::string manifest_path;  // prepared manifest
  std::string method = "gesi";  // gesi | stoi | estoi
  std::string out_csv;
  GesiParams params;
  bool compressive_frontend = true;
  std::optional<HearingProfile> test_profile;
  int num_workers = 0;
  FilterbankSpec fb;

  void validate() const {
    if (method != "gesi" && method != "stoi" && method != "estoi")
      throw ConfigError("predict: unknown method '" + method + "'");
    params.validate();
  }
};

struct PredictResult {
  int n_rows = 0;
  int n_failures = 0;
};

inline PredictResult cmd_predict(const PredictConfig& cfg) {
  namespace fs = std::filesystem;
  using namespace pipeline_detail;
  cfg.validate();

  const CsvTable manifest = read_csv(cfg.manifest_path);
  const std::string dir = fs::path(cfg.manifest_path).parent_path().string();
  const int col_id = manifest.require_column("utterance_id", cfg.manifest_path);
  const int col_cond = manifest.require_column("condition", cfg.manifest_path);
  const int col_snr = manifest.require_column("snr_db", cfg.manifest_path);
  const int col_wav = manifest.require_column("wav_path", cfg.manifest_path);
  const int col_ref = manifest.require_column("ref_path", cfg.manifest_path);
  const int col_spl = manifest.column("spl_ref");

  struct Item {
    std::string condition, snr, wav_path;
    size_t manifest_row;
  };
  struct Group {
    std::string utterance_id, ref_path;
    double spl_ref = 100.0;
    std::vector<Item> items;
  };
  std::map<std::string, Group> grouped;
  for (size_t r = 0; r < manifest.rows.size(); ++r) {
    const auto& row = manifest.rows[r];
    auto& g = grouped[row[col_id]];
    g.utterance_id = row[col_id];
    g.ref_path = resolve_path(dir, row[col_ref]);
    if (col_spl >= 0)
      g.spl_ref = parse_double(row[col_spl], cfg.manifest_path);
    g.items.push_back({row[col_cond], row[col_snr], resolve_path(dir, row[col_wav]), r});
  }
  std::vector<const Group*> groups;
  for (const auto& [id, g] : grouped) groups.push_back(&g);

  FilterbankSpec fb = cfg.fb;
  fb.fs = kPipelineFs;
  const Filterbank bank(fb);
  GesiOptions options;
  options.fb = fb;
  options.bank = &bank;
  options.compressive_frontend = cfg.compressive_frontend;
  options.test_profile = cfg.test_profile;

  const HearingProfile nh = normal_hearing_profile();
  const HearingProfile* test_io = nullptr;
  if (cfg.compressive_frontend)
    test_io = cfg.test_profile ? &*cfg.test_profile : &nh;

  struct OutRow {
    std::string utterance_id, condition, snr;
    double score = 0.0, intelligibility = 0.0;
    bool has_intelligibility = false;
  };
  std::vector<OutRow> rows;
  std::vector<std::string> failures;
  std::mutex collect_mu;

  parallel_for(groups.size(), cfg.num_workers > 0 ? cfg.num_workers : default_workers(),
               [&](size_t gi) {
    const Group& g = *groups[gi];
    std::vector<OutRow> local;
    std::vector<std::string> local_failures;
    try {
      AudioBuffer ref = read_wav(g.ref_path, kPipelineFs);
      ref.spl_ref = g.spl_ref;
      std::optional<ModulationRepresentation> m_ref;
      std::optional<double> f0;
      if (cfg.method == "gesi") {
        f0 = estimate_f0_geomean(ref);
        m_ref = gesi_modulation(bank, ref,
                                cfg.compressive_frontend ? &nh : nullptr, options);
      }
      for (const auto& item : g.items) {
        try {
          AudioBuffer test = read_wav(item.wav_path, kPipelineFs);
          test.spl_ref = g.spl_ref;
          OutRow out{g.utterance_id, item.condition, item.snr, 0.0, 0.0, false};
          if (cfg.method == "gesi") {
            GesiResult res;
            if (test.size() == ref.size()) {
              const auto m_test = gesi_modulation(bank, test, test_io, options);
              res = gesi_score_tensors(*m_ref, m_test, bank.peak_freqs(), *f0,
                                       cfg.params);
            } else {
              GesiOptions per_pair = options;
              per_pair.f0_geomean_hz = *f0;
              res = gesi_score(ref, test, cfg.params, per_pair);
            }
            out.score = res.metric_d;
            out.intelligibility = res.intelligibility_pct;
            out.has_intelligibility = true;
          } else if (cfg.method == "stoi") {
            out.score = stoi(ref, test).value;
          } else {
            out.score = estoi(ref, test).value;
          }
          local.push_back(std::move(out));
        } catch (const std::exception& e) {
          local_failures.push_back(item.wav_path + ": " + e.what());
        }
      }
    } catch (const std::exception& e) {
      local_failures.push_back(g.ref_path + ": " + e.what());
    }
    std::lock_guard<std::mutex> lock(collect_mu);
    for (auto& r : local) rows.push_back(std::move(r));
    for (auto& f : local_failures) failures.push_back(std::move(f));
  });

  std::sort(rows.begin(), rows.end(), [](const OutRow& a, const OutRow& b) {
    return std::tie(a.utterance_id, a.condition, a.snr) <
           std::tie(b.utterance_id, b.condition, b.snr);
  });

  // Per-cell mean and standard deviation across words, appended after the
  // per-utterance rows.
  std::map<std::pair<std::string, std::string>, std::vector<const OutRow*>> cells;
  for (const auto& r : rows) cells[{r.condition, r.snr}].push_back(&r);

  CsvWriter writer(cfg.out_csv, {"utterance_id", "condition", "snr_db", "method",
                                 "score", "intelligibility_pct"});
  auto emit = [&](const OutRow& r) {
    writer.row({r.utterance_id, r.condition, r.snr, cfg.method,
                format_double(r.score, 12),
                r.has_intelligibility ? format_double(r.intelligibility, 12) : ""});
  };
  for (const auto& r : rows) emit(r);
  for (const auto& [key, cell] : cells) {
    double sum = 0.0, sum_i = 0.0;
    for (const auto* r : cell) {
      sum += r->score;
      sum_i += r->intelligibility;
    }
    const double n = static_cast<double>(cell.size());
    const double mean_score = sum / n;
    const double mean_intel = sum_i / n;
    double var = 0.0, var_i = 0.0;
    for (const auto* r : cell) {
      var += (r->score - mean_score) * (r->score - mean_score);
      var_i += (r->intelligibility - mean_intel) * (r->intelligibility - mean_intel);
    }
    const double denom = cell.size() > 1 ? n - 1.0 : 1.0;
    const bool has_intel = cfg.method == "gesi";
    writer.row({"MEAN", key.first, key.second, cfg.method,
                format_double(mean_score, 12),
                has_intel ? format_double(mean_intel, 12) : ""});
    writer.row({"SD", key.first, key.second, cfg.method,
                format_double(std::sqrt(var / denom), 12),
                has_intel ? format_double(std::sqrt(var_i / denom), 12) : ""});
  }
  return {static_cast<int>(rows.size()), static_cast<int>(failures.size())};
}

// -------------------------------------------------------------- calibrate

// Fits the sigmoid on unprocessed-condition cell means against observed
// word-correct percentages, one point per SNR.
inline std::pair<double, double> cmd_calibrate(const std::string& scores_csv,
                                               const std::string& observed_csv,
                                               const std::string& params_out) {
  const CsvTable scores = read_csv(scores_csv);
  const int s_id = scores.require_column("utterance_id", scores_csv);
  const int s_cond = scores.require_column("condition", scores_csv);
  const int s_snr = scores.require_column("snr_db", scores_csv);
  const int s_score = scores.require_column("score", scores_csv);

  std::map<double, double> d_by_snr;
  for (const auto& row : scores.rows) {
    if (row[s_id] != "MEAN" || row[s_cond] != "unprocessed") continue;
    d_by_snr[parse_double(row[s_snr], scores_csv)] =
        parse_double(row[s_score], scores_csv);
  }
  if (d_by_snr.empty())
    throw ConfigError("calibrate: no unprocessed MEAN rows in " + scores_csv);

  const CsvTable observed = read_csv(observed_csv);
  const int o_cond = observed.column("condition");
  const int o_snr = observed.require_column("snr_db", observed_csv);
  const int o_pct = observed.require_column("percent_correct", observed_csv);

  std::vector<std::pair<double, double>> points;
  for (const auto& row : observed.rows) {
    if (o_cond >= 0 && row[o_cond] != "unprocessed") continue;
    const double snr = parse_double(row[o_snr], observed_csv);
    const auto it = d_by_snr.find(snr);
    if (it == d_by_snr.end())
      throw ConfigError("calibrate: no unprocessed score for snr " +
                        format_double(snr));
    points.emplace_back(it->second, parse_double(row[o_pct], observed_csv));
  }
  if (points.size() < 2)
    throw ConfigError("calibrate: need observed percentages for >= 2 SNRs");

  const auto [a, b] = fit_sigmoid(points);
  std::ofstream out(params_out, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("calibrate: cannot write " + params_out);
  out << "sigmoid_a " << format_double(a, 12) << "\n"
      << "sigmoid_b " << format_double(b, 12) << "\n";
  return {a, b};
}

inline void load_sigmoid_params(const std::string& path, GesiParams& params) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open params file " + path);
  std::string key;
  double value;
  while (in >> key >> value) {
    if (key == "sigmoid_a") params.sigmoid_a = value;
    else if (key == "sigmoid_b") params.sigmoid_b = value;
    else if (key == "rho") params.rho = value;
    else if (key == "h_max") params.h_max = value;
  }
}

// ---------------------------------------------------------------- analyze

struct AnalyzeConfig {
  std::string trials_csv;
  std::string screening_csv;  // optional, may be empty
  std::string out_dir;
  double screening_threshold = 9.0;
};

struct AnalyzeResult {
  int n_fits = 0;
  int n_participants = 0;
  bool screening_done = false;
};

inline AnalyzeResult cmd_analyze(const AnalyzeConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const fs::path out_dir(cfg.out_dir);

  const CsvTable trials = read_csv(cfg.trials_csv);
  const int t_id = trials.require_column("participant_id", cfg.trials_csv);
  const int t_cond = trials.require_column("condition", cfg.trials_csv);
  const int t_snr = trials.require_column("snr_db", cfg.trials_csv);
  const int t_k = trials.require_column("n_correct", cfg.trials_csv);
  const int t_n = trials.require_column("n_total", cfg.trials_csv);

  std::map<std::pair<std::string, std::string>, std::vector<TrialRecord>> by_cell;
  for (size_t r = 0; r < trials.rows.size(); ++r) {
    const auto& row = trials.rows[r];
    const std::string context = cfg.trials_csv + " row " + std::to_string(r + 2);
    TrialRecord rec;
    rec.participant_id = row[t_id];
    rec.condition = row[t_cond];
    rec.snr_db = parse_double(row[t_snr], context);
    rec.n_correct = parse_int(row[t_k], context);
    rec.n_total = parse_int(row[t_n], context);
    try {
      rec.validate();
    } catch (const Error& e) {
      throw ConfigError(context + ": " + e.what());
    }
    by_cell[{rec.participant_id, rec.condition}].push_back(rec);
  }

  struct FitRow {
    std::string participant, condition;
    PsychometricFit fit;
    std::optional<double> srt_db;
  };
  std::vector<FitRow> fits;
  for (const auto& [key, records] : by_cell) {
    FitRow fr;
    fr.participant = key.first;
    fr.condition = key.second;
    fr.fit = fit_psychometric(records);
    try {
      fr.srt_db = srt(fr.fit);
    } catch (const NoSrtError&) {
      fr.srt_db.reset();
    }
    fits.push_back(std::move(fr));
  }

  CsvWriter fit_writer((out_dir / "fits.csv").string(),
                       {"participant_id", "condition", "mu", "sigma", "lapse",
                        "srt_db", "boundary_warning"});
  for (const auto& f : fits)
    fit_writer.row({f.participant, f.condition, format_double(f.fit.mu),
                    format_double(f.fit.sigma), format_double(f.fit.lapse),
                    f.srt_db ? format_double(*f.srt_db) : "",
                    f.fit.boundary_warning ? "1" : "0"});

  // Fig. 1-style plot data: mean and SD of percent correct per condition/SNR.
  std::map<std::pair<std::string, double>, std::vector<double>> pct_cells;
  std::set<std::string> participants;
  for (const auto& [key, records] : by_cell) {
    participants.insert(key.first);
    std::map<double, std::pair<int, int>> per_snr;
    for (const auto& r : records) {
      per_snr[r.snr_db].first += r.n_correct;
      per_snr[r.snr_db].second += r.n_total;
    }
    for (const auto& [snr, kn] : per_snr)
      pct_cells[{key.second, snr}].push_back(100.0 * kn.first / kn.second);
  }
  CsvWriter psy_writer((out_dir / "psychofunc.csv").string(),
                       {"condition", "snr_db", "mean_pct", "sd_pct", "n"});
  for (const auto& [key, values] : pct_cells) {
    const double m = mean(values);
    double sd = 0.0;
    if (values.size() > 1) {
      double acc = 0.0;
      for (double v : values) acc += (v - m) * (v - m);
      sd = std::sqrt(acc / (values.size() - 1.0));
    }
    psy_writer.row({key.first, format_double(key.second), format_double(m),
                    format_double(sd), std::to_string(values.size())});
  }

  // Fig. 2-style plot data: mean and SD of SRT per condition.
  std::map<std::string, std::vector<double>> srt_by_cond;
  for (const auto& f : fits)
    if (f.srt_db) srt_by_cond[f.condition].push_back(*f.srt_db);
  CsvWriter srt_writer((out_dir / "srt_summary.csv").string(),
                       {"condition", "mean_srt_db", "sd_srt_db", "n"});
  for (const auto& [cond, values] : srt_by_cond) {
    const double m = mean(values);
    double sd = 0.0;
    if (values.size() > 1) {
      double acc = 0.0;
      for (double v : values) acc += (v - m) * (v - m);
      sd = std::sqrt(acc / (values.size() - 1.0));
    }
    srt_writer.row({cond, format_double(m), format_double(sd),
                    std::to_string(values.size())});
  }

  AnalyzeResult result;
  result.n_fits = static_cast<int>(fits.size());
  result.n_participants = static_cast<int>(participants.size());

  if (!cfg.screening_csv.empty()) {
    const CsvTable scr = read_csv(cfg.screening_csv);
    const int c_id = scr.require_column("participant_id", cfg.screening_csv);
    const int c500 = scr.require_column("npip_500", cfg.screening_csv);
    const int c1k = scr.require_column("npip_1000", cfg.screening_csv);
    const int c2k = scr.require_column("npip_2000", cfg.screening_csv);
    const int c4k = scr.require_column("npip_4000", cfg.screening_csv);
    std::vector<ScreeningRecord> records;
    for (size_t r = 0; r < scr.rows.size(); ++r) {
      const auto& row = scr.rows[r];
      const std::string context = cfg.screening_csv + " row " + std::to_string(r + 2);
      ScreeningRecord rec;
      rec.participant_id = row[c_id];
      rec.n_pip = {parse_double(row[c500], context), parse_double(row[c1k], context),
                   parse_double(row[c2k], context), parse_double(row[c4k], context)};
      try {
        rec.validate();
      } catch (const Error& e) {
        throw ConfigError(context + ": " + e.what());
      }
      records.push_back(std::move(rec));
    }
    const auto part = screen(records, cfg.screening_threshold);

    CsvWriter scr_writer((out_dir / "screening_report.csv").string(),
                         {"participant_id", "npip_500", "npip_1000", "npip_2000",
                          "npip_4000", "npip_mean", "dynamic_range_db", "included"});
    auto emit_record = [&](const ScreeningRecord& r, bool included) {
      scr_writer.row({r.participant_id, format_double(r.n_pip[0]),
                      format_double(r.n_pip[1]), format_double(r.n_pip[2]),
                      format_double(r.n_pip[3]), format_double(r.n_pip_mean()),
                      format_double(dynamic_range(r.n_pip_mean())),
                      included ? "1" : "0"});
    };
    std::map<std::string, const ScreeningRecord*> by_participant;
    for (const auto& r : records) by_participant[r.participant_id] = &r;
    for (const auto& [id, rec] : by_participant) {
      bool included = false;
      for (const auto& inc : part.included)
        if (inc.participant_id == id) included = true;
      emit_record(*rec, included);
    }

    // Fig. 3-style analysis: pip count vs SRT, per condition.
    CsvWriter scatter_writer((out_dir / "pip_vs_srt.csv").string(),
                             {"condition", "participant_id", "npip_mean", "srt_db"});
    CsvWriter corr_writer((out_dir / "correlations.csv").string(),
                          {"condition", "n", "pearson_r", "p_value"});
    std::map<std::string, std::vector<std::pair<double, double>>> cond_points;
    for (const auto& f : fits) {
      const auto it = by_participant.find(f.participant);
      if (it == by_participant.end() || !f.srt_db) continue;
      const double np = it->second->n_pip_mean();
      scatter_writer.row({f.condition, f.participant, format_double(np),
                          format_double(*f.srt_db)});
      cond_points[f.condition].emplace_back(np, *f.srt_db);
    }
    for (const auto& [cond, pts] : cond_points) {
      if (pts.size() < 3) continue;
      std::vector<double> x, y;
      for (const auto& [a, b] : pts) {
        x.push_back(a);
        y.push_back(b);
      }
      try {
        const auto pr = pearson(x, y);
        corr_writer.row({cond, std::to_string(pr.n), format_double(pr.r),
                         format_double(pr.p)});
      } catch (const UndefinedCorrelationError&) {
        // constant input; leave the condition out
      }
    }
    result.screening_done = true;
  }

  // gnuplot companion for the emitted data files
  std::ofstream gp((out_dir / "plots.gp").string(), std::ios::binary | std::ios::trunc);
  gp << "set datafile separator ','\n"
        "set key outside\n"
        "set style data yerrorlines\n"
        "set xlabel 'SNR (dB)'\n"
        "set ylabel 'word correct (%)'\n"
        "plot for [c in 'unprocessed 70yr 80yr m20db'] \\\n"
        "  'psychofunc.csv' using 2:($1 eq c ? $3 : 1/0):4 title c\n"
        "pause -1\n"
        "set ylabel 'SRT (dB)'\n"
        "set style data histograms\n"
        "set style histogram errorbars\n"
        "plot 'srt_summary.csv' using 2:3:xtic(1) title 'SRT'\n"
        "pause -1\n"
        "set xlabel 'mean N_pip'\n"
        "set ylabel 'SRT (dB)'\n"
        "set style data points\n"
        "plot for [c in 'unprocessed 70yr 80yr m20db'] \\\n"
        "  'pip_vs_srt.csv' using 3:($1 eq c ? $4 : 1/0) title c\n";
  return result;
}

}  // namespace gesi

#endif  // GESI_PIPELINE_HPP_

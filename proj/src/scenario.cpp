#include "qss/scenario.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>

#include "qss/grid.hpp"
#include "qss/linkbudget.hpp"
#include "qss/mzi.hpp"
#include "qss/protocol.hpp"
#include "qss/qstate.hpp"

namespace qss {

namespace {

constexpr double k_inf = std::numeric_limits<double>::infinity();

const char* const k_state_keys[4] = {"phi_plus", "phi_minus", "varphi_plus", "varphi_minus"};

std::string fmt_num(double v) {
  if (!std::isfinite(v)) {
    throw std::runtime_error("refusing to write a non-finite value");
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_num(*v) : std::string(); }

std::string sanitize_name(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '_' || c == '-';
    out.push_back(ok ? c : '_');
  }
  return out.empty() ? std::string("scenario") : out;
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Overlays src onto dst, descending into objects; keys absent from the
// defaults are collected as unknown.
void merge_overlay(json& dst, const json& src, const std::string& prefix,
                   std::vector<std::string>& unknown) {
  for (const auto& [key, value] : src.items()) {
    if (!dst.contains(key)) {
      unknown.push_back("unknown key: " + prefix + key);
      continue;
    }
    json& slot = dst[key];
    if (slot.is_object() && value.is_object()) {
      merge_overlay(slot, value, prefix + key + ".", unknown);
    } else {
      slot = value;
    }
  }
}

const json* at_path(const json& root, const std::string& dotted) {
  const json* cur = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot - start);
    if (!cur->is_object() || !cur->contains(key)) return nullptr;
    cur = &(*cur)[key];
    if (dot == std::string::npos) return cur;
    start = dot + 1;
  }
}

class Checker {
 public:
  Checker(const json& params, std::vector<std::string>& issues)
      : params_(params), issues_(issues) {}

  void range(const std::string& path, const std::string& display, double lo, double hi,
             bool lo_open = false, bool hi_open = false) {
    const json* v = at_path(params_, path);
    if (v == nullptr || v->is_null()) return;
    if (!v->is_number()) {
      issues_.push_back(display + " must be a number");
      return;
    }
    const double x = v->get<double>();
    const bool lo_ok = lo_open ? x > lo : x >= lo;
    const bool hi_ok = hi_open ? x < hi : x <= hi;
    if (!std::isfinite(x) || !lo_ok || !hi_ok) {
      char buf[200];
      std::snprintf(buf, sizeof(buf), "%s must lie in %s%g, %g%s, got %g", display.c_str(),
                    lo_open ? "(" : "[", lo, hi, hi_open ? ")" : "]", x);
      issues_.push_back(buf);
    }
  }

  void min_int(const std::string& path, const std::string& display, std::int64_t lo) {
    const json* v = at_path(params_, path);
    if (v == nullptr || v->is_null()) return;
    if (!v->is_number_integer()) {
      issues_.push_back(display + " must be an integer");
      return;
    }
    if (v->get<std::int64_t>() < lo) {
      issues_.push_back(display + " must be at least " + std::to_string(lo) + ", got " +
                        std::to_string(v->get<std::int64_t>()));
    }
  }

  void boolean(const std::string& path, const std::string& display) {
    const json* v = at_path(params_, path);
    if (v != nullptr && !v->is_boolean()) {
      issues_.push_back(display + " must be true or false");
    }
  }

 private:
  const json& params_;
  std::vector<std::string>& issues_;
};

json linkbudget_defaults() {
  return json{
      {"source", {{"brightness_b", 4.7e6}, {"heralding_eta", 0.046}}},
      {"detector",
       {{"dead_time_s", 40e-9}, {"dark_rate_sdc", 500.0}, {"coincidence_window_s", 100e-12}}},
      {"link", {{"alpha_db_per_km", 0.2}, {"noise_singles", 0.0}, {"e_meas", 0.053}}},
      {"n_mux", 2},
      {"sift_factor_q", 0.5},
      {"visibility", nullptr},
  };
}

json kind_defaults(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::session:
      return json{{"rounds", 100000}, {"channel_j", 11.5},      {"v_eff", 1.0},
                  {"mzi_phase", 0.0}, {"p_accidental", 0.0},    {"partitions", 1},
                  {"abort_threshold", 0.11}, {"write_transcript", true}};
    case ScenarioKind::table1:
      // Measured visibilities from the 200 GHz channel pair 13-60; v_zz
      // derived from the reported fidelities where that stays physical.
      return json{
          {"states",
           {{"phi_plus",
             {{"v_xx", 0.853}, {"v_yy", -0.923}, {"v_xy", nullptr}, {"v_yx", nullptr},
              {"v_zz", 0.944}}},
            {"phi_minus",
             {{"v_xx", -0.864}, {"v_yy", 0.913}, {"v_xy", nullptr}, {"v_yx", nullptr},
              {"v_zz", 0.939}}},
            {"varphi_plus",
             {{"v_xx", nullptr}, {"v_yy", nullptr}, {"v_xy", 0.930}, {"v_yx", 0.929},
              {"v_zz", 0.753}}},
            {"varphi_minus",
             {{"v_xx", nullptr}, {"v_yy", nullptr}, {"v_xy", -0.917}, {"v_yx", -0.826},
              {"v_zz", nullptr}}}}}};
    case ScenarioKind::sweep_distance: {
      json d = linkbudget_defaults();
      d["distances_km"] = json{{"start", 0.0}, {"stop", 120.0}, {"step", 5.0}};
      return d;
    }
    case ScenarioKind::sweep_users: {
      json d = linkbudget_defaults();
      d["n_min"] = 2;
      d["n_max"] = 30;
      d["length_km"] = 0.0;
      return d;
    }
    case ScenarioKind::stabilizer:
      return json{{"duration_s", 120.0},
                  {"sigma_rw", DriftModel{}.sigma_rw},
                  {"dither_fraction", 0.10},
                  {"update_rate_hz", 20.0},
                  {"monitor_channel_j", 10.0},
                  {"rounds_per_estimate", 250},
                  {"v_eff", 1.0},
                  {"stabilizer_on", true}};
    case ScenarioKind::plan:
      return json{{"spacing_thz", 0.2},   {"degeneracy_thz", 193.65}, {"bandwidth_nm", 70.0},
                  {"n_users", 7},         {"reserved_j", json::array({10.0})}};
  }
  throw std::logic_error("unhandled scenario kind");
}

void check_linkbudget(Checker& check, const json& params, const json& overlay,
                      std::vector<std::string>& issues) {
  check.range("source.brightness_b", "SourceParams.brightness_b", 0.0, k_inf, true);
  check.range("source.heralding_eta", "SourceParams.heralding_eta", 0.0, 1.0, true);
  check.range("detector.dead_time_s", "DetectorParams.dead_time_s", 0.0, k_inf);
  check.range("detector.dark_rate_sdc", "DetectorParams.dark_rate_sdc", 0.0, k_inf);
  check.range("detector.coincidence_window_s", "DetectorParams.coincidence_window_s", 0.0, k_inf);
  check.range("link.alpha_db_per_km", "LinkParams.alpha_db_per_km", 0.0, k_inf);
  check.range("link.noise_singles", "LinkParams.noise_singles", 0.0, k_inf);
  check.range("link.e_meas", "LinkParams.e_meas", 0.0, 0.5);
  check.min_int("n_mux", "n_mux", 2);
  check.range("sift_factor_q", "sift_factor_q", 0.0, 1.0, true);
  check.range("visibility", "visibility", 0.0, 1.0);
  const json* vis = at_path(overlay, "visibility");
  const json* emeas = at_path(overlay, "link.e_meas");
  if (vis != nullptr && !vis->is_null() && emeas != nullptr) {
    issues.push_back("specify either link.e_meas or visibility, not both");
  }
}

void check_kind(ScenarioKind kind, const json& params, const json& overlay,
                std::vector<std::string>& issues) {
  Checker check(params, issues);
  switch (kind) {
    case ScenarioKind::session:
      check.min_int("rounds", "rounds", 1);
      check.range("channel_j", "channel_j", 0.0, k_inf);
      check.range("v_eff", "v_eff", 0.0, 1.0);
      check.range("mzi_phase", "mzi_phase", -k_inf, k_inf);
      check.range("p_accidental", "p_accidental", 0.0, 1.0);
      check.min_int("partitions", "partitions", 1);
      check.range("abort_threshold", "abort_threshold", 0.0, 0.5, true);
      check.boolean("write_transcript", "write_transcript");
      {
        const json* transcript = at_path(params, "write_transcript");
        const json* parts = at_path(params, "partitions");
        if (transcript && parts && transcript->is_boolean() && parts->is_number_integer() &&
            transcript->get<bool>() && parts->get<std::int64_t>() > 1) {
          issues.push_back("transcript export requires partitions = 1");
        }
      }
      break;
    case ScenarioKind::table1:
      for (const char* state : k_state_keys) {
        for (const char* v : {"v_xx", "v_yy", "v_xy", "v_yx", "v_zz"}) {
          const std::string path = std::string("states.") + state + "." + v;
          check.range(path, "VisibilitySet." + std::string(state) + "." + v, -1.0, 1.0);
        }
      }
      break;
    case ScenarioKind::sweep_distance: {
      check_linkbudget(check, params, overlay, issues);
      const json* d = at_path(params, "distances_km");
      if (d != nullptr && d->is_array()) {
        if (d->empty()) issues.push_back("distances_km must not be empty");
        for (const auto& v : *d) {
          if (!v.is_number() || v.get<double>() < 0.0) {
            issues.push_back("distances_km entries must be non-negative numbers");
            break;
          }
        }
      } else {
        check.range("distances_km.start", "distances_km.start", 0.0, k_inf);
        check.range("distances_km.stop", "distances_km.stop", 0.0, k_inf);
        check.range("distances_km.step", "distances_km.step", 0.0, k_inf, true);
        const json* start = at_path(params, "distances_km.start");
        const json* stop = at_path(params, "distances_km.stop");
        if (start && stop && start->is_number() && stop->is_number() &&
            stop->get<double>() < start->get<double>()) {
          issues.push_back("distances_km.stop must not be below distances_km.start");
        }
      }
      break;
    }
    case ScenarioKind::sweep_users: {
      check_linkbudget(check, params, overlay, issues);
      check.min_int("n_min", "n_min", 2);
      check.min_int("n_max", "n_max", 2);
      check.range("length_km", "length_km", 0.0, k_inf);
      const json* lo = at_path(params, "n_min");
      const json* hi = at_path(params, "n_max");
      if (lo && hi && lo->is_number_integer() && hi->is_number_integer() &&
          hi->get<int>() < lo->get<int>()) {
        issues.push_back("n_max must not be below n_min");
      }
      break;
    }
    case ScenarioKind::stabilizer:
      check.range("duration_s", "duration_s", 0.0, k_inf, true);
      check.range("sigma_rw", "DriftModel.sigma_rw", 0.0, k_inf);
      check.range("dither_fraction", "StabilizerConfig.dither_fraction", 0.0, 1.0, true, true);
      check.range("update_rate_hz", "StabilizerConfig.update_rate_hz", 0.0, k_inf, true);
      check.range("monitor_channel_j", "StabilizerConfig.monitor_channel_j", 0.0, k_inf);
      check.min_int("rounds_per_estimate", "StabilizerConfig.rounds_per_estimate", 1);
      check.range("v_eff", "v_eff", 0.0, 1.0);
      check.boolean("stabilizer_on", "stabilizer_on");
      break;
    case ScenarioKind::plan: {
      check.range("spacing_thz", "GridSpec.spacing_thz", 0.0, k_inf, true);
      check.range("degeneracy_thz", "GridSpec.degeneracy_thz", 0.0, k_inf, true);
      check.range("bandwidth_nm", "GridSpec.bandwidth_nm", 0.0, k_inf);
      check.min_int("n_users", "n_users", 2);
      const json* reserved = at_path(params, "reserved_j");
      if (reserved != nullptr) {
        if (!reserved->is_array()) {
          issues.push_back("reserved_j must be an array of channel indices");
        } else {
          for (const auto& v : *reserved) {
            if (!v.is_number() || v.get<double>() < 0.0) {
              issues.push_back("reserved_j entries must be non-negative numbers");
              break;
            }
          }
        }
      }
      break;
    }
  }
}

struct Resolution {
  json params;
  std::vector<std::string> issues;
};

Resolution resolve_and_check(ScenarioKind kind, const json& overlay) {
  Resolution res;
  res.params = kind_defaults(kind);
  if (!overlay.is_null()) {
    if (!overlay.is_object()) {
      res.issues.push_back("parameters must be an object");
      return res;
    }
    merge_overlay(res.params, overlay, "", res.issues);
  }
  check_kind(kind, res.params, overlay.is_object() ? overlay : json::object(), res.issues);
  if (res.issues.empty()) {
    // Fig. 5 style presets: a target visibility V sets e_meas = (1 - V)/2.
    const json* vis = at_path(res.params, "visibility");
    if (vis != nullptr && vis->is_number()) {
      res.params["link"]["e_meas"] = (1.0 - vis->get<double>()) / 2.0;
    }
  }
  return res;
}

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path) : path_(path.string()), out_(path) {
    if (!out_) {
      throw std::runtime_error("cannot open output file " + path_);
    }
  }

  void comment(const std::string& text) { out_ << "# " << text << "\n"; }
  void line(const std::string& text) { out_ << text << "\n"; }

  void close() {
    out_.flush();
    if (!out_) {
      throw std::runtime_error("failed while writing " + path_);
    }
    out_.close();
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
};

struct RunContext {
  std::string name;
  ScenarioKind kind = ScenarioKind::session;
  std::uint64_t seed = 1;
  json params;
  RunOptions options;
  std::filesystem::path out_dir;
  RunResult result;
};

CsvFile open_csv(RunContext& ctx, const std::string& suffix) {
  CsvFile file(ctx.out_dir / (ctx.name + "." + suffix));
  file.comment("qss-sim scenario: " + ctx.name);
  file.comment(std::string("kind: ") + scenario_kind_name(ctx.kind));
  file.comment("seed: " + std::to_string(ctx.seed));
  file.comment("parameters: " + ctx.params.dump());
  if (ctx.options.write_timestamp) {
    file.comment("generated: " + utc_timestamp());
  }
  ctx.result.files_written.push_back(file.path());
  return file;
}

double num_at(const json& params, const std::string& path) {
  const json* v = at_path(params, path);
  if (v == nullptr || !v->is_number()) {
    throw std::logic_error("resolved parameter missing: " + path);
  }
  return v->get<double>();
}

std::optional<double> opt_num_at(const json& params, const std::string& path) {
  const json* v = at_path(params, path);
  if (v == nullptr || v->is_null()) return std::nullopt;
  return v->get<double>();
}

RateModelInput rate_input_from(const json& params) {
  RateModelInput input;
  input.source.brightness_b = num_at(params, "source.brightness_b");
  input.source.heralding_eta = num_at(params, "source.heralding_eta");
  input.detector.dead_time_s = num_at(params, "detector.dead_time_s");
  input.detector.dark_rate_sdc = num_at(params, "detector.dark_rate_sdc");
  input.detector.coincidence_window_s = num_at(params, "detector.coincidence_window_s");
  input.link_a.alpha_db_per_km = num_at(params, "link.alpha_db_per_km");
  input.link_a.noise_singles = num_at(params, "link.noise_singles");
  input.link_a.e_meas = num_at(params, "link.e_meas");
  input.link_b = input.link_a;
  input.n_mux = static_cast<int>(num_at(params, "n_mux"));
  input.sift_factor_q = num_at(params, "sift_factor_q");
  return input;
}

std::vector<double> expand_distances(const json& spec) {
  std::vector<double> distances;
  if (spec.is_array()) {
    for (const auto& v : spec) distances.push_back(v.get<double>());
    return distances;
  }
  const double start = spec.at("start").get<double>();
  const double stop = spec.at("stop").get<double>();
  const double step = spec.at("step").get<double>();
  for (double d = start; d <= stop + step * 1e-9; d += step) distances.push_back(d);
  return distances;
}

const char* encoding_name(EncodingBasis basis) {
  return basis == EncodingBasis::phi ? "phi" : "varphi";
}

char basis_letter(MeasBasis basis) {
  switch (basis) {
    case MeasBasis::x: return 'X';
    case MeasBasis::y: return 'Y';
    case MeasBasis::z: return 'Z';
  }
  return '?';
}

void run_session_scenario(RunContext& ctx) {
  SessionConfig cfg;
  cfg.rounds = static_cast<std::uint64_t>(num_at(ctx.params, "rounds"));
  cfg.channel_j = num_at(ctx.params, "channel_j");
  cfg.v_eff = num_at(ctx.params, "v_eff");
  cfg.mzi_phase = num_at(ctx.params, "mzi_phase");
  cfg.p_accidental = num_at(ctx.params, "p_accidental");
  cfg.abort_threshold = num_at(ctx.params, "abort_threshold");
  cfg.seed = ctx.seed;
  const auto partitions = static_cast<unsigned>(num_at(ctx.params, "partitions"));
  const bool write_transcript = ctx.params.at("write_transcript").get<bool>();
  if (write_transcript && partitions > 1) {
    throw ConfigError("transcript export requires partitions = 1");
  }

  SessionStats stats;
  if (write_transcript) {
    CsvFile transcript = open_csv(ctx, "transcript.csv");
    transcript.line("round_id,channel_j,C,c,A,a,B,b,kept,error");
    char buf[128];
    stats = run_session(cfg, [&](const TranscriptRow& row) {
      std::snprintf(buf, sizeof(buf), "%llu,%g,%s,%d,%c,%d,%c,%d,%d,%d",
                    static_cast<unsigned long long>(row.round_id), row.channel_j,
                    encoding_name(row.public_c), row.private_c, basis_letter(row.basis_a), row.a,
                    basis_letter(row.basis_b), row.b, row.kept ? 1 : 0, row.error ? 1 : 0);
      transcript.line(buf);
    });
    transcript.close();
  } else {
    stats = run_session_parallel(cfg, partitions);
  }

  CsvFile out = open_csv(ctx, "stats.csv");
  out.line("combination,rounds,epsilon_hat,qber");
  json combos = json::array();
  for (int i = 0; i < 4; ++i) {
    const auto combo = static_cast<Combination>(i);
    out.line(std::string(combination_name(combo)) + "," +
             std::to_string(stats.tally.combos[i].rounds) + "," + fmt_opt(stats.epsilon_hat[i]) +
             "," + fmt_opt(stats.qber[i]));
    combos.push_back({{"combination", combination_name(combo)},
                      {"rounds", stats.tally.combos[i].rounds},
                      {"epsilon_hat", stats.epsilon_hat[i] ? json(*stats.epsilon_hat[i]) : json()},
                      {"qber", stats.qber[i] ? json(*stats.qber[i]) : json()}});
  }
  out.close();

  ctx.result.summary["outputs"] = {
      {"total_rounds", stats.tally.total_rounds},
      {"sifted_rounds", stats.tally.sifted_rounds},
      {"sifted_fraction", stats.sifted_fraction},
      {"mean_abs_epsilon", stats.mean_abs_epsilon},
      {"mean_qber", stats.mean_qber},
      {"abort", stats.abort_flag},
      {"combinations", combos},
  };
}

void run_table1_scenario(RunContext& ctx) {
  const json& states = ctx.params.at("states");

  std::array<std::optional<double>, 4> fidelity;
  for (int i = 0; i < 4; ++i) {
    const json& st = states.at(k_state_keys[i]);
    VisibilitySet vis;
    vis.v_xx = opt_num_at(st, "v_xx");
    vis.v_yy = opt_num_at(st, "v_yy");
    vis.v_xy = opt_num_at(st, "v_xy");
    vis.v_yx = opt_num_at(st, "v_yx");
    vis.v_zz = opt_num_at(st, "v_zz");
    const StateLabel label{i < 2 ? EncodingBasis::phi : EncodingBasis::varphi,
                           (i % 2 == 0) ? +1 : -1};
    try {
      fidelity[i] = fidelity_from_visibilities(label, vis);
    } catch (const std::invalid_argument&) {
      fidelity[i] = std::nullopt;  // visibility set incomplete for this state
    }
  }

  struct ComboCol {
    const char* name;
    const char* state_plus;
    const char* state_minus;
    const char* vis_key;
    int ideal;
  };
  const ComboCol columns[4] = {
      {"xx_phi", "phi_plus", "phi_minus", "v_xx", +1},
      {"yy_phi", "phi_plus", "phi_minus", "v_yy", -1},
      {"xy_varphi", "varphi_plus", "varphi_minus", "v_xy", +1},
      {"yx_varphi", "varphi_plus", "varphi_minus", "v_yx", +1},
  };

  std::array<std::optional<double>, 4> eps, qber, r_inf;
  for (int i = 0; i < 4; ++i) {
    const auto vp = opt_num_at(states.at(columns[i].state_plus), columns[i].vis_key);
    const auto vm = opt_num_at(states.at(columns[i].state_minus), columns[i].vis_key);
    if (!vp || !vm) continue;
    eps[i] = correlation_parameter(*vp, *vm);
    qber[i] = qber_from_epsilon(*eps[i]);
    r_inf[i] = key_fraction(*qber[i]);
  }

  CsvFile out = open_csv(ctx, "table1.csv");
  out.line("quantity,phi_plus,phi_minus,varphi_plus,varphi_minus");
  auto state_row = [&](const std::string& label, auto getter) {
    std::string row = label;
    for (int i = 0; i < 4; ++i) row += "," + getter(i);
    out.line(row);
  };
  state_row("fidelity", [&](int i) { return fmt_opt(fidelity[i]); });
  for (const char* key : {"v_xx", "v_yy", "v_xy", "v_yx", "v_zz"}) {
    state_row(key, [&](int i) { return fmt_opt(opt_num_at(states.at(k_state_keys[i]), key)); });
  }
  out.line("");
  out.line("quantity,xx_phi,yy_phi,xy_varphi,yx_varphi");
  auto combo_row = [&](const std::string& label, auto getter) {
    std::string row = label;
    for (int i = 0; i < 4; ++i) row += "," + getter(i);
    out.line(row);
  };
  combo_row("epsilon_ideal", [&](int i) { return std::to_string(columns[i].ideal); });
  combo_row("epsilon", [&](int i) { return fmt_opt(eps[i]); });
  combo_row("qber_percent",
            [&](int i) { return qber[i] ? fmt_num(*qber[i] * 100.0) : std::string(); });
  combo_row("r_inf", [&](int i) { return fmt_opt(r_inf[i]); });
  out.close();

  json summary;
  for (int i = 0; i < 4; ++i) {
    summary["fidelity"][k_state_keys[i]] = fidelity[i] ? json(*fidelity[i]) : json();
    summary["epsilon"][columns[i].name] = eps[i] ? json(*eps[i]) : json();
    summary["qber"][columns[i].name] = qber[i] ? json(*qber[i]) : json();
    summary["r_inf"][columns[i].name] = r_inf[i] ? json(*r_inf[i]) : json();
  }
  ctx.result.summary["outputs"] = summary;
}

void write_rate_rows(CsvFile& out, json& rows, const std::string& axis_label, double axis_value,
                     const RateReport& report) {
  out.line(fmt_num(axis_value) + "," + fmt_num(report.singles_a) + "," +
           fmt_num(report.accidental_rate) + "," + fmt_num(report.true_coincidence_rate) + "," +
           fmt_num(report.qber) + "," + fmt_num(report.key_fraction) + "," +
           fmt_num(report.key_rate));
  rows.push_back({{axis_label, axis_value},
                  {"singles", report.singles_a},
                  {"r_acc", report.accidental_rate},
                  {"c_true", report.true_coincidence_rate},
                  {"qber", report.qber},
                  {"r_inf", report.key_fraction},
                  {"key_rate", report.key_rate}});
}

void run_sweep_distance_scenario(RunContext& ctx) {
  const RateModelInput input = rate_input_from(ctx.params);
  const std::vector<double> distances = expand_distances(ctx.params.at("distances_km"));
  const std::vector<RateReport> reports = sweep_distance(input, distances);

  CsvFile out = open_csv(ctx, "sweep.csv");
  out.comment("distance_km is the total symmetric separation; each arm carries half");
  out.line("distance_km,singles,r_acc,c_true,qber,r_inf,key_rate");
  json rows = json::array();
  for (std::size_t i = 0; i < distances.size(); ++i) {
    write_rate_rows(out, rows, "distance_km", distances[i], reports[i]);
  }
  out.close();
  ctx.result.summary["outputs"] = {{"rows", rows}};
}

void run_sweep_users_scenario(RunContext& ctx) {
  RateModelInput input = rate_input_from(ctx.params);
  const double length = num_at(ctx.params, "length_km");
  input.link_a.length_km = length;
  input.link_b.length_km = length;
  const int n_min = static_cast<int>(num_at(ctx.params, "n_min"));
  const int n_max = static_cast<int>(num_at(ctx.params, "n_max"));

  CsvFile out = open_csv(ctx, "sweep.csv");
  out.line("n_mux,singles,r_acc,c_true,qber,r_inf,key_rate");
  json rows = json::array();
  int last_positive = 0;
  for (int n = n_min; n <= n_max; ++n) {
    input.n_mux = n;
    const RateReport report = key_rate(input);
    if (report.key_rate > 0.0) last_positive = n;
    write_rate_rows(out, rows, "n_mux", n, report);
  }
  out.close();
  ctx.result.summary["outputs"] = {{"rows", rows}, {"max_users_positive_key", last_positive}};
}

void run_stabilizer_scenario(RunContext& ctx) {
  DriftModel drift;
  drift.sigma_rw = num_at(ctx.params, "sigma_rw");
  drift.seed = ctx.seed;
  StabilizerConfig config;
  config.dither_fraction = num_at(ctx.params, "dither_fraction");
  config.update_rate_hz = num_at(ctx.params, "update_rate_hz");
  config.monitor_channel_j = num_at(ctx.params, "monitor_channel_j");
  config.rounds_per_estimate = static_cast<int>(num_at(ctx.params, "rounds_per_estimate"));
  const double v_eff = num_at(ctx.params, "v_eff");
  const bool on = ctx.params.at("stabilizer_on").get<bool>();

  const StabilizerRun run =
      run_stabilized_session(num_at(ctx.params, "duration_s"), drift, config, v_eff, on);

  CsvFile out = open_csv(ctx, "trace.csv");
  out.line("time_s,theta_total_rad,commanded_phase_rad,qber_estimate");
  for (const TracePoint& p : run.trace) {
    out.line(fmt_num(p.time_s) + "," + fmt_num(p.theta_total) + "," +
             fmt_num(p.commanded_phase) + "," + fmt_num(p.qber_estimate));
  }
  out.close();
  ctx.result.summary["outputs"] = {{"samples", run.trace.size()},
                                   {"mean_visibility", run.mean_visibility},
                                   {"mean_qber", run.mean_qber},
                                   {"stabilizer_on", on}};
}

void run_plan_scenario(RunContext& ctx) {
  GridSpec grid;
  grid.spacing_thz = num_at(ctx.params, "spacing_thz");
  grid.degeneracy_thz = num_at(ctx.params, "degeneracy_thz");
  grid.bandwidth_nm = num_at(ctx.params, "bandwidth_nm");
  const int n_users = static_cast<int>(num_at(ctx.params, "n_users"));
  std::vector<double> reserved;
  for (const auto& v : ctx.params.at("reserved_j")) reserved.push_back(v.get<double>());

  const NetworkPlan plan = allocate_fully_connected(grid, n_users, reserved);

  CsvFile out = open_csv(ctx, "plan.csv");
  const std::string serialized = serialize_plan(plan);
  std::size_t start = 0;
  while (start < serialized.size()) {
    const std::size_t end = serialized.find('\n', start);
    out.line(serialized.substr(start, end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  out.close();

  const int pairs = available_pair_count(grid);
  ctx.result.summary["outputs"] = {{"n_users", plan.n_users},
                                   {"assignments", plan.assignments.size()},
                                   {"available_pairs", pairs},
                                   {"max_fully_connected_users", max_fully_connected_users(pairs)}};
}

}  // namespace

const char* scenario_kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::session: return "SESSION";
    case ScenarioKind::table1: return "TABLE1";
    case ScenarioKind::sweep_distance: return "SWEEP_DISTANCE";
    case ScenarioKind::sweep_users: return "SWEEP_USERS";
    case ScenarioKind::stabilizer: return "STABILIZER";
    case ScenarioKind::plan: return "PLAN";
  }
  return "?";
}

json default_reference() {
  json doc;
  doc["seed"] = 1;
  for (ScenarioKind kind :
       {ScenarioKind::session, ScenarioKind::table1, ScenarioKind::sweep_distance,
        ScenarioKind::sweep_users, ScenarioKind::stabilizer, ScenarioKind::plan}) {
    doc["kinds"][scenario_kind_name(kind)] = kind_defaults(kind);
  }
  return doc;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read scenario file " + path);
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("scenario file " + path + ": " + e.what());
  }
}

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) {
    throw ConfigError("scenario document must be a JSON object");
  }
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (key != "name" && key != "kind" && key != "seed" && key != "parameters") {
      throw ConfigError("unknown top-level key: " + key);
    }
  }
  if (!doc.contains("kind") || !doc["kind"].is_string()) {
    throw ConfigError("scenario requires a string 'kind'");
  }
  const std::string kind_str = doc["kind"].get<std::string>();
  Scenario scenario;
  bool found = false;
  for (ScenarioKind kind :
       {ScenarioKind::session, ScenarioKind::table1, ScenarioKind::sweep_distance,
        ScenarioKind::sweep_users, ScenarioKind::stabilizer, ScenarioKind::plan}) {
    if (kind_str == scenario_kind_name(kind)) {
      scenario.kind = kind;
      found = true;
      break;
    }
  }
  if (!found) {
    throw ConfigError("unknown scenario kind '" + kind_str +
                      "' (expected SESSION, TABLE1, SWEEP_DISTANCE, SWEEP_USERS, STABILIZER or "
                      "PLAN)");
  }
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ConfigError("scenario name must be a string");
    scenario.name = doc["name"].get<std::string>();
  } else {
    std::string lowered = kind_str;
    for (char& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    scenario.name = lowered;
  }
  if (doc.contains("seed")) {
    const json& seed = doc["seed"];
    if (!seed.is_number_integer() ||
        (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
      throw ConfigError("seed must be a non-negative integer");
    }
    scenario.seed = seed.get<std::uint64_t>();
  }
  if (doc.contains("parameters")) {
    scenario.parameters = doc["parameters"];
  }
  return scenario;
}

ValidationReport validate_scenario(const json& doc) {
  ValidationReport report;
  Scenario scenario;
  try {
    scenario = parse_scenario(doc);
  } catch (const ConfigError& e) {
    report.issues.push_back(e.what());
    return report;
  }
  Resolution res = resolve_and_check(scenario.kind, scenario.parameters);
  report.issues = std::move(res.issues);
  report.resolved = {{"name", scenario.name},
                     {"kind", scenario_kind_name(scenario.kind)},
                     {"seed", scenario.seed},
                     {"parameters", res.params}};
  report.ok = report.issues.empty();
  return report;
}

json resolve_parameters(ScenarioKind kind, const json& overlay) {
  Resolution res = resolve_and_check(kind, overlay);
  if (!res.issues.empty()) {
    std::string msg = "invalid scenario parameters:";
    for (const std::string& issue : res.issues) msg += "\n  - " + issue;
    throw ConfigError(msg);
  }
  return res.params;
}

RunResult run_scenario(const Scenario& scenario, const RunOptions& options) {
  RunContext ctx;
  ctx.name = sanitize_name(scenario.name);
  ctx.kind = scenario.kind;
  ctx.seed = options.seed_override.value_or(scenario.seed);
  ctx.params = resolve_parameters(scenario.kind, scenario.parameters);
  ctx.options = options;
  ctx.out_dir = options.out_dir;
  std::filesystem::create_directories(ctx.out_dir);

  ctx.result.summary = {{"scenario",
                         {{"name", ctx.name},
                          {"kind", scenario_kind_name(ctx.kind)},
                          {"seed", ctx.seed},
                          {"parameters", ctx.params}}}};

  switch (scenario.kind) {
    case ScenarioKind::session: run_session_scenario(ctx); break;
    case ScenarioKind::table1: run_table1_scenario(ctx); break;
    case ScenarioKind::sweep_distance: run_sweep_distance_scenario(ctx); break;
    case ScenarioKind::sweep_users: run_sweep_users_scenario(ctx); break;
    case ScenarioKind::stabilizer: run_stabilizer_scenario(ctx); break;
    case ScenarioKind::plan: run_plan_scenario(ctx); break;
  }

  if (ctx.options.write_timestamp) {
    ctx.result.summary["generated"] = utc_timestamp();
  }
  const std::filesystem::path summary_path = ctx.out_dir / (ctx.name + ".summary.json");
  std::ofstream summary_out(summary_path);
  if (!summary_out) {
    throw std::runtime_error("cannot open output file " + summary_path.string());
  }
  ctx.result.files_written.push_back(summary_path.string());
  ctx.result.summary["files"] = ctx.result.files_written;
  summary_out << ctx.result.summary.dump(2) << "\n";
  if (!summary_out) {
    throw std::runtime_error("failed while writing " + summary_path.string());
  }
  return ctx.result;
}

}  // namespace qss

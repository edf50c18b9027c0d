// noseheat command-line front end. Talks to the library only through the C API.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "noseheat/noseheat.h"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// Carries a library status (or a usage problem) up to main.
struct Failure : std::runtime_error {
  nh_status status;
  Failure(nh_status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
};

void check(nh_status s) {
  if (s != NH_OK) throw Failure(s, std::string(nh_status_name(s)) + ": " + nh_last_error());
}

[[noreturn]] void usage(const std::string& msg) { throw Failure(NH_ERR_INVALID_ARGUMENT, msg); }

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Sequence = std::unique_ptr<nh_sequence, Deleter<nh_sequence, nh_sequence_free>>;
using Trajectory = std::unique_ptr<nh_trajectory, Deleter<nh_trajectory, nh_trajectory_free>>;
using Signal = std::unique_ptr<nh_signal, Deleter<nh_signal, nh_signal_free>>;
using Compare = std::unique_ptr<nh_compare, Deleter<nh_compare, nh_compare_free>>;
using Report = std::unique_ptr<nh_report, Deleter<nh_report, nh_report_free>>;
using Cohort = std::unique_ptr<nh_cohort, Deleter<nh_cohort, nh_cohort_free>>;

template <class Handle, class Raw>
Handle adopt(nh_status s, Raw*& raw) {
  check(s);
  return Handle(raw);
}

std::pair<double, double> parse_pair(const std::string& text, const char* what) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) usage(std::string(what) + " expects two comma-separated numbers");
  try {
    std::size_t used_a = 0, used_b = 0;
    const std::string a = text.substr(0, comma), b = text.substr(comma + 1);
    const double x = std::stod(a, &used_a), y = std::stod(b, &used_b);
    if (used_a != a.size() || used_b != b.size()) throw std::invalid_argument(text);
    return {x, y};
  } catch (const std::logic_error&) {
    usage(std::string(what) + ": cannot parse '" + text + "'");
  }
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Failure(NH_ERR_IO, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ojson parse_json_file(const fs::path& p) {
  try {
    return ojson::parse(read_file(p));
  } catch (const nlohmann::json::exception& e) {
    throw Failure(NH_ERR_IO, p.string() + ": " + e.what());
  }
}

// Temp file + rename so readers never observe a partial output.
void write_file(const fs::path& p, const std::string& content) {
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Failure(NH_ERR_IO, "cannot write " + p.string());
    out << content;
    if (!out.flush()) throw Failure(NH_ERR_IO, "cannot write " + p.string());
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) throw Failure(NH_ERR_IO, "cannot write " + p.string() + ": " + ec.message());
}

void write_json(const fs::path& p, const ojson& j) { write_file(p, j.dump(2) + "\n"); }

std::string num(double v) {
  // Shortest round-trip text, same as the JSON writer.
  return ojson(v).dump();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// ---- run configuration -------------------------------------------------

struct RunConfig {
  std::vector<std::string> inputs;
  std::optional<std::pair<double, double>> seed_point;
  std::pair<double, double> roi_scale{2.75, 1.9};
  nh_tracker_config tracker = nh_tracker_config_default();
  nh_outlier_config outlier = nh_outlier_config_default();
  double cutoff = 0.08;
  std::pair<double, double> band{0.1, 0.85};
  std::string norm = "pooled";
  std::string output = ".";
  std::string format = "json";
  std::string participant = "P01";
  std::map<std::string, double> self_report;
  std::vector<std::string> sessions;
  bool emit_plotdata = false;
  ojson synth = ojson::object();
};

const char* template_name(nh_template_update u) { return u == NH_TEMPLATE_BLEND ? "blend" : "anchor"; }

nh_template_update parse_template(const std::string& s) {
  if (s == "anchor") return NH_TEMPLATE_ANCHOR;
  if (s == "blend") return NH_TEMPLATE_BLEND;
  usage("template update must be anchor or blend, got '" + s + "'");
}

ojson to_json(const RunConfig& c) {
  ojson j;
  j["inputs"] = c.inputs;
  if (c.seed_point) j["seed_point"] = {c.seed_point->first, c.seed_point->second};
  j["roi_scale"] = {c.roi_scale.first, c.roi_scale.second};
  j["tracker"] = {{"max_step", c.tracker.max_step},
                  {"min_confidence", c.tracker.min_confidence},
                  {"update", template_name(c.tracker.update)},
                  {"blend_alpha", c.tracker.blend_alpha}};
  j["outlier"] = {{"g", c.outlier.g},
                  {"window_fraction", c.outlier.window_fraction},
                  {"min_window_seconds", c.outlier.min_window_seconds}};
  j["cutoff"] = c.cutoff;
  j["band"] = {c.band.first, c.band.second};
  j["norm"] = c.norm;
  j["format"] = c.format;
  j["participant"] = c.participant;
  if (!c.self_report.empty()) j["self_report"] = c.self_report;
  if (!c.sessions.empty()) j["sessions"] = c.sessions;
  j["emit_plotdata"] = c.emit_plotdata;
  if (!c.synth.empty()) j["synth"] = c.synth;
  return j;
}

std::pair<double, double> json_pair(const ojson& v, const char* key) {
  if (!v.is_array() || v.size() != 2) usage(std::string("config: ") + key + " must be a 2-element array");
  return {v[0].get<double>(), v[1].get<double>()};
}

// Fills c from a config file. Unknown keys are rejected.
void apply_config(RunConfig& c, const ojson& j) {
  if (!j.is_object()) usage("config must be a JSON object");
  try {
    for (auto& [key, v] : j.items()) {
      if (key == "inputs") c.inputs = v.get<std::vector<std::string>>();
      else if (key == "seed_point") c.seed_point = json_pair(v, "seed_point");
      else if (key == "roi_scale") c.roi_scale = json_pair(v, "roi_scale");
      else if (key == "tracker") {
        for (auto& [k, tv] : v.items()) {
          if (k == "max_step") c.tracker.max_step = tv.get<int>();
          else if (k == "min_confidence") c.tracker.min_confidence = tv.get<double>();
          else if (k == "update") c.tracker.update = parse_template(tv.get<std::string>());
          else if (k == "blend_alpha") c.tracker.blend_alpha = tv.get<double>();
          else usage("config: unknown tracker key '" + k + "'");
        }
      } else if (key == "outlier") {
        for (auto& [k, ov] : v.items()) {
          if (k == "g") c.outlier.g = ov.get<double>();
          else if (k == "window_fraction") c.outlier.window_fraction = ov.get<double>();
          else if (k == "min_window_seconds") c.outlier.min_window_seconds = ov.get<double>();
          else usage("config: unknown outlier key '" + k + "'");
        }
      } else if (key == "cutoff") c.cutoff = v.get<double>();
      else if (key == "band") c.band = json_pair(v, "band");
      else if (key == "norm") c.norm = v.get<std::string>();
      else if (key == "format") c.format = v.get<std::string>();
      else if (key == "output") c.output = v.get<std::string>();
      else if (key == "participant") c.participant = v.get<std::string>();
      else if (key == "self_report") c.self_report = v.get<std::map<std::string, double>>();
      else if (key == "sessions") c.sessions = v.get<std::vector<std::string>>();
      else if (key == "emit_plotdata") c.emit_plotdata = v.get<bool>();
      else if (key == "synth") c.synth = v;
      else usage("config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    usage(std::string("config: ") + e.what());
  }
}

void check_config(const RunConfig& c) {
  if (c.norm != "pooled" && c.norm != "per-session") usage("--norm must be pooled or per-session");
  if (c.format != "json" && c.format != "csv") usage("--format must be json or csv");
  if (!(c.cutoff > 0.0)) usage("--cutoff must be positive");
  if (!(c.band.first >= 0.0 && c.band.first < c.band.second)) usage("--band needs 0 <= lo < hi");
  if (c.tracker.max_step < 1) usage("max_step must be at least 1");
  if (!(c.outlier.g > 0.0)) usage("outlier g must be positive");
}

ojson manifest(const std::string& command, const RunConfig& c) {
  ojson m;
  m["tool"] = "noseheat";
  m["version"] = nh_version();
  m["command"] = command;
  m["config"] = to_json(c);
  return m;
}

// "Label=path" or a bare path (label from the file stem).
std::pair<std::string, std::string> labelled(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) return {fs::path(spec).stem().string(), spec};
  if (eq == 0) usage("empty label in '" + spec + "'");
  return {spec.substr(0, eq), spec.substr(eq + 1)};
}

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw Failure(NH_ERR_IO, "no such file: " + path);
}

// ---- track ---------------------------------------------------------------

void cmd_track(const RunConfig& c) {
  if (c.inputs.size() != 1) usage("track takes exactly one --input");
  if (!c.seed_point) usage("track needs --seed-point X,Y");
  const fs::path out = c.output;
  fs::create_directories(out);

  nh_sequence* raw_seq = nullptr;
  Sequence seq = adopt<Sequence>(nh_sequence_read(c.inputs[0].c_str(), &raw_seq), raw_seq);
  nh_roi roi{};
  check(nh_select_large_roi(seq.get(), c.seed_point->first, c.seed_point->second, c.roi_scale.first,
                            c.roi_scale.second, &roi));
  nh_trajectory* raw_traj = nullptr;
  Trajectory traj = adopt<Trajectory>(nh_track(seq.get(), &roi, &c.tracker, &raw_traj), raw_traj);
  nh_signal* raw_sig = nullptr;
  Signal sig = adopt<Signal>(nh_signal_extract(seq.get(), traj.get(), &raw_sig), raw_sig);

  check(nh_trajectory_write_csv(traj.get(), seq.get(), (out / "trajectory.csv").string().c_str()));
  check(nh_signal_write_csv(sig.get(), (out / "signal.csv").string().c_str()));

  std::size_t low = 0;
  for (std::size_t k = 0; k < nh_trajectory_length(traj.get()); ++k) {
    nh_roi r{};
    double conf = 0.0;
    int flag = 0;
    check(nh_trajectory_at(traj.get(), k, &r, &conf, &flag));
    low += flag != 0;
  }
  ojson m = manifest("track", c);
  m["frames"] = nh_sequence_frame_count(seq.get());
  m["frame_size"] = {nh_sequence_width(seq.get()), nh_sequence_height(seq.get())};
  m["sample_rate"] = nh_signal_rate(sig.get());
  m["initial_roi"] = {{"cx", roi.center_x}, {"cy", roi.center_y}, {"w", roi.width}, {"h", roi.height}};
  m["low_confidence_frames"] = low;
  m["outputs"] = {"trajectory.csv", "signal.csv", "signal.json"};
  write_json(out / "manifest.json", m);
}

// ---- metrics -------------------------------------------------------------

ojson units_block() {
  ojson u;
  for (std::size_t k = 0; k < NH_METRIC_COUNT; ++k) {
    const std::string name = nh_metric_name(k);
    const bool normalized = name.back() == 'n';
    const bool slope = name.rfind("STV", 0) == 0;
    u[name] = normalized ? (slope ? "1/s" : "1") : (slope ? "degC/s" : "degC");
  }
  u["pSQI"] = "1";
  return u;
}

ojson range_json(const nh_person_context& p) {
  return {{"original", {{"min", p.original.min}, {"max", p.original.max}}},
          {"lowpassed", {{"min", p.lowpassed.min}, {"max", p.lowpassed.max}}}};
}

void cmd_metrics(const RunConfig& c) {
  if (c.inputs.empty()) usage("metrics needs at least one --input Label=signal.csv");
  const fs::path out = c.output;
  fs::create_directories(out);

  struct Session {
    std::string label, path;
    Signal cleaned;
    std::size_t removed = 0, window = 0;
  };
  std::vector<Session> sessions;
  for (const auto& spec : c.inputs) {
    auto [label, path] = labelled(spec);
    for (const auto& s : sessions)
      if (s.label == label) usage("session label '" + label + "' given twice");
    require_file(path);
    nh_signal* raw = nullptr;
    Signal sig = adopt<Signal>(nh_signal_read_csv(path.c_str(), &raw), raw);
    Session s{label, path, nullptr};
    nh_signal* cleaned = nullptr;
    s.cleaned = adopt<Signal>(nh_reject_outliers(sig.get(), &c.outlier, &cleaned, &s.removed, &s.window), cleaned);
    sessions.push_back(std::move(s));
  }
  for (const auto& [label, v] : c.self_report) {
    if (std::none_of(sessions.begin(), sessions.end(), [&](const Session& s) { return s.label == label; }))
      usage("self report for unknown session '" + label + "'");
    if (!(v >= 0.0 && v <= 10.0)) usage("self report must lie in [0, 10]");
  }

  std::vector<nh_person_context> contexts;
  if (c.norm == "pooled") {
    std::vector<const nh_signal*> all;
    for (const auto& s : sessions) all.push_back(s.cleaned.get());
    nh_person_context p{};
    check(nh_person_context_compute(all.data(), all.size(), c.cutoff, &p));
    contexts.assign(sessions.size(), p);
  } else {
    for (const auto& s : sessions) {
      const nh_signal* one = s.cleaned.get();
      nh_person_context p{};
      check(nh_person_context_compute(&one, 1, c.cutoff, &p));
      contexts.push_back(p);
    }
  }

  ojson m = manifest("metrics", c);
  ojson norm;
  norm["scope"] = c.norm;
  if (c.norm == "pooled") norm["range"] = range_json(contexts[0]);
  ojson outputs = ojson::array();
  ojson per_session = ojson::array();

  for (std::size_t i = 0; i < sessions.size(); ++i) {
    const Session& s = sessions[i];
    nh_metric_set ms{};
    check(nh_metric_set_compute(s.cleaned.get(), &contexts[i], c.cutoff, &ms));
    double psqi = 0.0;
    check(nh_psqi(s.cleaned.get(), c.band.first, c.band.second, &psqi));
    const auto sr = c.self_report.find(s.label);

    const std::string name = "metrics_" + s.label + "." + c.format;
    if (c.format == "json") {
      ojson j;
      j["participant"] = c.participant;
      j["session"] = s.label;
      ojson values;
      for (std::size_t k = 0; k < NH_METRIC_COUNT; ++k) values[nh_metric_name(k)] = ms.values[k];
      j["metrics"] = values;
      j["pSQI"] = psqi;
      if (sr != c.self_report.end()) j["self_report"] = sr->second;
      j["units"] = units_block();
      j["samples"] = nh_signal_length(s.cleaned.get());
      j["sample_rate"] = nh_signal_rate(s.cleaned.get());
      j["outliers_removed"] = s.removed;
      j["outlier_window"] = s.window;
      write_json(out / name, j);
    } else {
      const ojson units = units_block();
      std::string csv = "participant,session,metric,value,unit\n";
      auto row = [&](const std::string& metric, double v) {
        csv += csv_field(c.participant) + "," + csv_field(s.label) + "," + metric + "," + num(v) + "," +
               units[metric].get<std::string>() + "\n";
      };
      for (std::size_t k = 0; k < NH_METRIC_COUNT; ++k) row(nh_metric_name(k), ms.values[k]);
      row("pSQI", psqi);
      if (sr != c.self_report.end())
        csv += csv_field(c.participant) + "," + csv_field(s.label) + ",VAS," + num(sr->second) + ",0-10\n";
      write_file(out / name, csv);
    }
    outputs.push_back(name);
    ojson entry = {{"session", s.label}, {"input", s.path}, {"outliers_removed", s.removed},
                   {"outlier_window", s.window}};
    if (c.norm == "per-session") entry["range"] = range_json(contexts[i]);
    per_session.push_back(entry);
  }
  norm["sessions"] = per_session;
  m["normalization"] = norm;
  m["outputs"] = outputs;
  write_json(out / "manifest.json", m);
}

// ---- compare -------------------------------------------------------------

struct Record {
  std::string participant, session;
  nh_metric_set metrics{};
  std::optional<double> self_report;
};

int metric_index(const std::string& name) {
  for (std::size_t k = 0; k < NH_METRIC_COUNT; ++k)
    if (name == nh_metric_name(k)) return static_cast<int>(k);
  return -1;
}

Record record_from_json(const fs::path& p) {
  const ojson j = parse_json_file(p);
  Record r;
  try {
    r.participant = j.at("participant").get<std::string>();
    r.session = j.at("session").get<std::string>();
    const auto& values = j.at("metrics");
    for (std::size_t k = 0; k < NH_METRIC_COUNT; ++k) r.metrics.values[k] = values.at(nh_metric_name(k)).get<double>();
    if (j.contains("self_report")) r.self_report = j["self_report"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Failure(NH_ERR_IO, p.string() + ": " + e.what());
  }
  return r;
}

Record record_from_csv(const fs::path& p) {
  std::istringstream in(read_file(p));
  std::string line;
  std::getline(in, line);
  if (line.rfind("participant,session,metric,value", 0) != 0)
    throw Failure(NH_ERR_IO, p.string() + ": not a metrics CSV");
  Record r;
  std::vector<bool> seen(NH_METRIC_COUNT, false);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() < 4) throw Failure(NH_ERR_IO, p.string() + ": short row");
    r.participant = f[0];
    r.session = f[1];
    char* end = nullptr;
    const double v = std::strtod(f[3].c_str(), &end);
    if (end == f[3].c_str() || *end != '\0') throw Failure(NH_ERR_IO, p.string() + ": bad value " + f[3]);
    if (f[2] == "VAS") r.self_report = v;
    const int k = metric_index(f[2]);
    if (k >= 0) {
      r.metrics.values[k] = v;
      seen[static_cast<std::size_t>(k)] = true;
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw Failure(NH_ERR_IO, p.string() + ": missing metrics");
  return r;
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    require_file(in);
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::recursive_directory_iterator(in)) {
        const auto name = e.path().filename().string();
        if (name.rfind("metrics_", 0) == 0 && (e.path().extension() == ".json" || e.path().extension() == ".csv"))
          found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.emplace_back(in);
    }
  }
  return out;
}

void cmd_compare(const RunConfig& c) {
  if (c.inputs.empty()) usage("compare needs --input metrics files or directories");
  const fs::path out = c.output;
  fs::create_directories(out);

  std::vector<Record> records;
  for (const auto& p : expand_inputs(c.inputs))
    records.push_back(p.extension() == ".csv" ? record_from_csv(p) : record_from_json(p));

  nh_compare* raw_cmp = nullptr;
  Compare cmp = adopt<Compare>(nh_compare_create(&raw_cmp), raw_cmp);
  for (const auto& r : records)
    check(nh_compare_add(cmp.get(), r.participant.c_str(), r.session.c_str(), &r.metrics,
                         r.self_report ? &*r.self_report : nullptr));
  if (!c.sessions.empty()) {
    std::vector<const char*> order;
    for (const auto& s : c.sessions) order.push_back(s.c_str());
    check(nh_compare_set_session_order(cmp.get(), order.data(), order.size()));
  }
  nh_report* raw_rep = nullptr;
  Report rep = adopt<Report>(nh_compare_run(cmp.get(), &raw_rep), raw_rep);

  ojson rows = ojson::array();
  std::string csv = "metric,F,df_effect,df_error,p,partial_eta_sq,stars,session_a,session_b,t,df,p_raw,p_bonferroni\n";
  for (std::size_t i = 0; i < nh_report_row_count(rep.get()); ++i) {
    nh_report_row row{};
    check(nh_report_row_at(rep.get(), i, &row));
    ojson jr;
    jr["metric"] = row.metric;
    std::string anova_cells = ",,,,,";
    if (row.has_anova) {
      jr["anova"] = {{"F", row.anova.F},
                     {"df", {row.anova.df_effect, row.anova.df_error}},
                     {"p", row.anova.p},
                     {"partial_eta_sq", row.anova.partial_eta_sq}};
      anova_cells = num(row.anova.F) + "," + std::to_string(row.anova.df_effect) + "," +
                    std::to_string(row.anova.df_error) + "," + num(row.anova.p) + "," +
                    num(row.anova.partial_eta_sq);
    } else {
      jr["anova"] = nullptr;
    }
    jr["stars"] = row.stars;
    ojson posthoc = ojson::array();
    for (std::size_t k = 0; k < row.posthoc_count; ++k) {
      nh_posthoc ph{};
      check(nh_report_posthoc_at(rep.get(), i, k, &ph));
      ojson jp = {{"a", ph.session_a}, {"b", ph.session_b}};
      std::string test_cells = ",,";
      if (ph.has_test) {
        jp["t"] = ph.test.t;
        jp["df"] = ph.test.df;
        jp["p"] = ph.test.p;
        test_cells = num(ph.test.t) + "," + std::to_string(ph.test.df) + "," + num(ph.test.p);
      }
      jp["p_bonferroni"] = ph.p_adjusted;
      posthoc.push_back(jp);
      csv += csv_field(row.metric) + "," + anova_cells + "," + row.stars + "," + csv_field(ph.session_a) + "," +
             csv_field(ph.session_b) + "," + test_cells + "," + num(ph.p_adjusted) + "\n";
    }
    if (row.posthoc_count == 0) csv += csv_field(row.metric) + "," + anova_cells + "," + row.stars + ",,,,,,\n";
    jr["posthoc"] = posthoc;
    rows.push_back(jr);
  }

  std::vector<std::string> participants, sessions;
  for (const auto& r : records) {
    if (std::find(participants.begin(), participants.end(), r.participant) == participants.end())
      participants.push_back(r.participant);
    if (std::find(sessions.begin(), sessions.end(), r.session) == sessions.end()) sessions.push_back(r.session);
  }
  if (!c.sessions.empty()) sessions = c.sessions;

  ojson report;
  report["participants"] = participants;
  report["sessions"] = sessions;
  report["rows"] = rows;
  write_json(out / "report.json", report);
  write_file(out / "report.csv", csv);
  ojson outputs = {"report.json", "report.csv"};

  if (c.emit_plotdata) {
    std::string plot = "participant,session,metric,value\n";
    for (const auto& r : records) {
      for (std::size_t k = 0; k < NH_METRIC_COUNT; ++k)
        plot += csv_field(r.participant) + "," + csv_field(r.session) + "," + nh_metric_name(k) + "," +
                num(r.metrics.values[k]) + "\n";
      if (r.self_report)
        plot += csv_field(r.participant) + "," + csv_field(r.session) + ",VAS," + num(*r.self_report) + "\n";
    }
    write_file(out / "plotdata.csv", plot);
    outputs.push_back("plotdata.csv");
  }

  ojson m = manifest("compare", c);
  m["records"] = records.size();
  m["outputs"] = outputs;
  write_json(out / "manifest.json", m);
}

// ---- synth ---------------------------------------------------------------

template <class T>
void take(const ojson& j, const char* key, T& field, std::vector<std::string>& used) {
  if (j.contains(key)) {
    field = j.at(key).get<T>();
    used.emplace_back(key);
  }
}

void reject_unknown(const ojson& j, const std::vector<std::string>& used, const char* what) {
  for (auto& [k, v] : j.items())
    if (std::find(used.begin(), used.end(), k) == used.end())
      usage(std::string(what) + ": unknown key '" + k + "'");
}

ojson signal_spec_json(const nh_signal_spec& s) {
  return {{"duration", s.duration},         {"rate", s.rate},
          {"baseline", s.baseline},         {"drift_slope", s.drift_slope},
          {"breathing_amp", s.breathing_amp}, {"breathing_freq", s.breathing_freq},
          {"noise_sd", s.noise_sd},         {"spike_fraction", s.spike_fraction},
          {"spike_amp", s.spike_amp},       {"seed", s.seed}};
}

nh_signal_spec signal_spec_from(const ojson& j, std::optional<std::uint64_t> seed) {
  nh_signal_spec s = nh_signal_spec_default();
  std::vector<std::string> used;
  if (j.contains("preset")) {
    const std::string p = j["preset"].get<std::string>();
    used.emplace_back("preset");
    nh_preset preset;
    if (p == "rest") preset = NH_PRESET_REST;
    else if (p == "easy") preset = NH_PRESET_MATH_EASY;
    else if (p == "hard") preset = NH_PRESET_MATH_HARD;
    else if (p == "breathing") preset = NH_PRESET_BREATHING_DOMINANT;
    else usage("unknown preset '" + p + "' (rest, easy, hard, breathing)");
    check(nh_signal_spec_preset(preset, 0, &s));
  }
  take(j, "duration", s.duration, used);
  take(j, "rate", s.rate, used);
  take(j, "baseline", s.baseline, used);
  take(j, "drift_slope", s.drift_slope, used);
  take(j, "breathing_amp", s.breathing_amp, used);
  take(j, "breathing_freq", s.breathing_freq, used);
  take(j, "noise_sd", s.noise_sd, used);
  take(j, "spike_fraction", s.spike_fraction, used);
  take(j, "spike_amp", s.spike_amp, used);
  take(j, "seed", s.seed, used);
  reject_unknown(j, used, "signal spec");
  if (seed) s.seed = *seed;
  return s;
}

ojson scene_spec_json(const nh_scene_spec& s) {
  return {{"width", s.width},
          {"height", s.height},
          {"duration", s.duration},
          {"rate", s.rate},
          {"background", s.background},
          {"blob_peak", s.blob_peak},
          {"blob_sigma", s.blob_sigma},
          {"blob_peak_slope", s.blob_peak_slope},
          {"blob_breathing_amp", s.blob_breathing_amp},
          {"blob_breathing_freq", s.blob_breathing_freq},
          {"start", {s.start_x, s.start_y}},
          {"velocity", {s.velocity_x, s.velocity_y}},
          {"wobble", {s.wobble_x, s.wobble_y}},
          {"wobble_freq", s.wobble_freq},
          {"pixel_noise_sd", s.pixel_noise_sd},
          {"seed", s.seed}};
}

nh_scene_spec scene_spec_from(const ojson& j, std::optional<std::uint64_t> seed) {
  nh_scene_spec s = nh_scene_spec_default();
  std::vector<std::string> used;
  take(j, "width", s.width, used);
  take(j, "height", s.height, used);
  take(j, "duration", s.duration, used);
  take(j, "rate", s.rate, used);
  take(j, "background", s.background, used);
  take(j, "blob_peak", s.blob_peak, used);
  take(j, "blob_sigma", s.blob_sigma, used);
  take(j, "blob_peak_slope", s.blob_peak_slope, used);
  take(j, "blob_breathing_amp", s.blob_breathing_amp, used);
  take(j, "blob_breathing_freq", s.blob_breathing_freq, used);
  take(j, "wobble_freq", s.wobble_freq, used);
  take(j, "pixel_noise_sd", s.pixel_noise_sd, used);
  take(j, "seed", s.seed, used);
  auto pair = [&](const char* key, double& x, double& y) {
    if (j.contains(key)) {
      std::tie(x, y) = json_pair(j[key], key);
      used.emplace_back(key);
    }
  };
  pair("start", s.start_x, s.start_y);
  pair("velocity", s.velocity_x, s.velocity_y);
  pair("wobble", s.wobble_x, s.wobble_y);
  reject_unknown(j, used, "scene spec");
  if (seed) s.seed = *seed;
  return s;
}

nh_cohort_spec cohort_spec_from(const ojson& j, std::optional<std::uint64_t> seed) {
  nh_cohort_spec s = nh_cohort_spec_default();
  std::vector<std::string> used;
  take(j, "participants", s.participants, used);
  take(j, "duration", s.duration, used);
  take(j, "rate", s.rate, used);
  take(j, "baseline_sd", s.baseline_sd, used);
  take(j, "noise_scale_sd", s.noise_scale_sd, used);
  take(j, "session_drift_sd", s.session_drift_sd, used);
  take(j, "session_noise_sd", s.session_noise_sd, used);
  take(j, "seed", s.seed, used);
  reject_unknown(j, used, "cohort spec");
  if (seed) s.seed = *seed;
  return s;
}

ojson cohort_spec_json(const nh_cohort_spec& s) {
  return {{"participants", s.participants},         {"duration", s.duration},
          {"rate", s.rate},                         {"baseline_sd", s.baseline_sd},
          {"noise_scale_sd", s.noise_scale_sd},     {"session_drift_sd", s.session_drift_sd},
          {"session_noise_sd", s.session_noise_sd}, {"seed", s.seed}};
}

void cmd_synth(const RunConfig& c, const std::string& kind, const std::string& spec_path,
               const std::string& preset, std::optional<std::uint64_t> seed) {
  ojson spec = c.synth.contains(kind) ? c.synth[kind] : ojson::object();
  if (!spec_path.empty()) {
    require_file(spec_path);
    spec = parse_json_file(spec_path);
  }
  if (!spec.is_object()) usage("synth spec must be a JSON object");
  if (!preset.empty()) {
    if (kind != "signal") usage("--preset applies to synth signal only");
    spec["preset"] = preset;
  }
  const fs::path out = c.output;
  fs::create_directories(out);
  ojson truth;
  ojson outputs = ojson::array();

  try {
    if (kind == "signal") {
      const nh_signal_spec s = signal_spec_from(spec, seed);
      nh_signal* raw = nullptr;
      Signal sig = adopt<Signal>(nh_synth_signal(&s, &raw), raw);
      check(nh_signal_write_csv(sig.get(), (out / "signal.csv").string().c_str()));
      truth["kind"] = "signal";
      truth["spec"] = signal_spec_json(s);
      outputs = {"signal.csv", "signal.json", "truth.json"};
    } else if (kind == "scene") {
      const nh_scene_spec s = scene_spec_from(spec, seed);
      nh_sequence* raw = nullptr;
      Sequence seq = adopt<Sequence>(nh_synth_scene(&s, &raw), raw);
      if (c.format == "csv") {
        check(nh_sequence_write_csv(seq.get(), (out / "scene").string().c_str()));
        outputs = {"scene/", "truth.json"};
      } else {
        check(nh_sequence_write(seq.get(), (out / "scene.nhtf").string().c_str()));
        outputs = {"scene.nhtf", "truth.json"};
      }
      ojson frames = ojson::array();
      for (std::size_t k = 0; k < nh_sequence_frame_count(seq.get()); ++k) {
        double x = 0, y = 0, peak = 0;
        check(nh_scene_truth(&s, k, &x, &y, &peak));
        frames.push_back({{"frame", k}, {"cx", x}, {"cy", y}, {"peak", peak}});
      }
      truth["kind"] = "scene";
      truth["spec"] = scene_spec_json(s);
      truth["frames"] = frames;
    } else if (kind == "cohort") {
      const nh_cohort_spec s = cohort_spec_from(spec, seed);
      nh_cohort* raw = nullptr;
      Cohort cohort = adopt<Cohort>(nh_synth_cohort(&s, &raw), raw);
      ojson entries = ojson::array();
      for (std::size_t i = 0; i < nh_cohort_size(cohort.get()); ++i) {
        const char *participant = nullptr, *session = nullptr;
        const nh_signal* sig = nullptr;
        check(nh_cohort_entry(cohort.get(), i, &participant, &session, &sig));
        const std::string name = std::string(participant) + "_" + session + ".csv";
        check(nh_signal_write_csv(sig, (out / name).string().c_str()));
        entries.push_back({{"participant", participant}, {"session", session}, {"file", name}});
        outputs.push_back(name);
      }
      truth["kind"] = "cohort";
      truth["spec"] = cohort_spec_json(s);
      truth["entries"] = entries;
      outputs.push_back("truth.json");
    } else {
      usage("synth kind must be signal, scene or cohort");
    }
  } catch (const nlohmann::json::exception& e) {
    usage(std::string("synth spec: ") + e.what());
  }
  write_json(out / "truth.json", truth);
  ojson m = manifest("synth", c);
  m["kind"] = kind;
  m["spec"] = truth["spec"];
  m["outputs"] = outputs;
  write_json(out / "manifest.json", m);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noseheat: nasal thermal variability pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(nh_version()));

  std::string config_path, output, format, seed_point, band, norm, roi_scale, template_update;
  double cutoff = 0.0;
  auto* o_config = app.add_option("--config", config_path, "JSON run configuration");
  auto* o_output = app.add_option("--output", output, "output directory (default .)");
  auto* o_format = app.add_option("--format", format, "json | csv");
  auto* o_seed = app.add_option("--seed-point", seed_point, "tracking seed X,Y (pixels)");
  auto* o_cutoff = app.add_option("--cutoff", cutoff, "low-pass cut-off in Hz (default 0.08)");
  auto* o_band = app.add_option("--band", band, "pSQI band lo,hi in Hz (default 0.1,0.85)");
  auto* o_norm = app.add_option("--norm", norm, "pooled | per-session normalization");

  std::vector<std::string> inputs;
  auto add_inputs = [&](CLI::App* sub, const char* help) { return sub->add_option("--input,-i", inputs, help); };

  auto* track = app.add_subcommand("track", "track the nasal ROI and extract its raw signal");
  add_inputs(track, "NHTF file or CSV bundle");
  int max_step = 0;
  double min_conf = 0.0, alpha = 0.0;
  auto* o_step = track->add_option("--max-step", max_step, "search radius in pixels (default 5)");
  auto* o_conf = track->add_option("--min-confidence", min_conf, "NCC threshold (default 0.4)");
  auto* o_tmpl = track->add_option("--template", template_update, "anchor | blend");
  auto* o_alpha = track->add_option("--blend-alpha", alpha, "template blend weight (default 0.05)");
  auto* o_scale = track->add_option("--roi-scale", roi_scale, "large ROI scale W,H (default 2.75,1.9)");

  auto* metrics = app.add_subcommand("metrics", "compute the 16 variability metrics and pSQI per session");
  add_inputs(metrics, "Session=signal.csv, repeatable");
  std::string participant;
  std::vector<std::string> reports;
  double g = 0.0, frac = 0.0, min_window = 0.0;
  auto* o_part = metrics->add_option("--participant", participant, "participant id (default P01)");
  metrics->add_option("--self-report", reports, "Session=VAS score, repeatable");
  auto* o_g = metrics->add_option("--outlier-g", g, "Tukey fence multiplier (default 1.5)");
  auto* o_frac = metrics->add_option("--outlier-window-fraction", frac, "window share of the input (default 1/3)");
  auto* o_minw = metrics->add_option("--outlier-min-window", min_window, "minimum window in seconds (default 30)");

  auto* compare = app.add_subcommand("compare", "repeated-measures comparison across sessions");
  add_inputs(compare, "metrics files or directories, repeatable");
  std::string session_list, emit;
  auto* o_sessions = compare->add_option("--sessions", session_list, "session order, comma-separated");
  auto* o_emit = compare->add_option("--emit", emit, "plotdata: also write the long-format table");

  auto* synth = app.add_subcommand("synth", "generate synthetic signals, scenes or cohorts");
  std::string kind, spec_path, preset;
  std::uint64_t seed = 0;
  synth->add_option("kind", kind, "signal | scene | cohort")->required()->check(CLI::IsMember({"signal", "scene", "cohort"}));
  synth->add_option("--spec", spec_path, "JSON spec (fields default when absent)");
  synth->add_option("--preset", preset, "signal preset: rest | easy | hard | breathing");
  auto* o_rng = synth->add_option("--seed", seed, "RNG seed, overrides the spec");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig c;
    if (*o_config) {
      require_file(config_path);
      apply_config(c, parse_json_file(config_path));
    }
    if (!inputs.empty()) c.inputs = inputs;
    if (*o_output) c.output = output;
    if (*o_format) c.format = format;
    if (*o_seed) c.seed_point = parse_pair(seed_point, "--seed-point");
    if (*o_cutoff) c.cutoff = cutoff;
    if (*o_band) c.band = parse_pair(band, "--band");
    if (*o_norm) c.norm = norm;
    if (*o_step) c.tracker.max_step = max_step;
    if (*o_conf) c.tracker.min_confidence = min_conf;
    if (*o_tmpl) c.tracker.update = parse_template(template_update);
    if (*o_alpha) c.tracker.blend_alpha = alpha;
    if (*o_scale) c.roi_scale = parse_pair(roi_scale, "--roi-scale");
    if (*o_part) c.participant = participant;
    for (const auto& r : reports) {
      const auto eq = r.find('=');
      if (eq == std::string::npos) usage("--self-report expects Session=score");
      c.self_report[r.substr(0, eq)] = parse_pair("0," + r.substr(eq + 1), "--self-report").second;
    }
    if (*o_g) c.outlier.g = g;
    if (*o_frac) c.outlier.window_fraction = frac;
    if (*o_minw) c.outlier.min_window_seconds = min_window;
    if (*o_sessions) {
      c.sessions.clear();
      std::stringstream ss(session_list);
      for (std::string s; std::getline(ss, s, ',');)
        if (!s.empty()) c.sessions.push_back(s);
    }
    if (*o_emit) {
      if (emit != "plotdata") usage("--emit accepts only plotdata");
      c.emit_plotdata = true;
    }
    check_config(c);

    if (*track) cmd_track(c);
    else if (*metrics) cmd_metrics(c);
    else if (*compare) cmd_compare(c);
    else if (*synth) cmd_synth(c, kind, spec_path, preset, *o_rng ? std::optional<std::uint64_t>(seed) : std::nullopt);
    return 0;
  } catch (const Failure& f) {
    std::cerr << "noseheat: error: " << f.what() << "\n";
    return nh_exit_code(f.status);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "noseheat: error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "noseheat: error: " << e.what() << "\n";
    return 1;
  }
}

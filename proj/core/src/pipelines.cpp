#include "nla/pipelines.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "nla/amplifiers.hpp"
#include "nla/errors.hpp"
#include "nla/fock.hpp"
#include "nla/homodyne.hpp"
#include "nla/io.hpp"
#include "nla/physical_model.hpp"
#include "nla/tomography.hpp"
#include "nla/version.hpp"
#include "nla/wigner.hpp"

namespace nla {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

constexpr double kDefaultCurveStep = 0.05;
constexpr double kDefaultCurveStop = 1.5;

// Rethrows an nla error with the pipeline stage prepended, keeping its type
// (and therefore its exit code).
template <class F>
auto staged(std::string_view stage, F&& fn) -> decltype(fn()) {
  auto tagged = [stage](const std::exception& e) {
    return "stage '" + std::string(stage) + "': " + e.what();
  };
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(tagged(e));
  } catch (const PreconditionError& e) {
    throw PreconditionError(tagged(e));
  } catch (const TruncationError& e) {
    throw TruncationError(tagged(e));
  } catch (const ZeroNormError& e) {
    throw ZeroNormError(tagged(e));
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(tagged(e));
  } catch (const IoError& e) {
    throw IoError(tagged(e));
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream seed for (alpha index, stage).
std::uint64_t derive_seed(std::uint64_t seed, std::size_t alpha_index, std::uint64_t stage) {
  return splitmix64(splitmix64(seed ^ (static_cast<std::uint64_t>(alpha_index) << 16)) ^ stage);
}

std::pair<int, int> line_and_column(const std::string& text, std::size_t byte) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

[[noreturn]] void field_error(std::string_view field, const std::string& msg) {
  throw ConfigError("config field '" + std::string(field) + "': " + msg);
}

double get_number(const nlohmann::json& j, std::string_view field) {
  if (!j.is_number()) {
    field_error(field, "expected a number, got " + std::string(j.type_name()));
  }
  return j.get<double>();
}

long long get_integer(const nlohmann::json& j, std::string_view field) {
  if (!j.is_number_integer()) {
    field_error(field, "expected an integer, got " + std::string(j.type_name()));
  }
  return j.get<long long>();
}

std::vector<double> alpha_range(double start, double stop, double step) {
  if (!(step > 0.0) || stop < start) {
    field_error("alpha", "range needs step > 0 and stop >= start");
  }
  std::vector<double> out;
  const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
  for (long long i = 0; i <= n; ++i) {
    // Round to the step's decimal grid so 0.65 prints as 0.65.
    out.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
  }
  return out;
}

std::vector<double> parse_alphas(const nlohmann::json& j) {
  if (j.is_number()) {
    return {j.get<double>()};
  }
  if (j.is_array()) {
    std::vector<double> out;
    for (const auto& v : j) {
      out.push_back(get_number(v, "alpha"));
    }
    return out;
  }
  if (j.is_object()) {
    for (const auto& [key, _] : j.items()) {
      if (key != "start" && key != "stop" && key != "step") {
        field_error("alpha", "unknown range key '" + key + "'");
      }
    }
    return alpha_range(get_number(j.value("start", nlohmann::json(0.0)), "alpha.start"),
                       get_number(j.at("stop"), "alpha.stop"),
                       get_number(j.value("step", nlohmann::json(kDefaultCurveStep)), "alpha.step"));
  }
  field_error("alpha", "expected a number, an array, or {start, stop, step}");
}

std::vector<double> default_alphas(Pipeline p) {
  switch (p) {
  case Pipeline::curves:
    return alpha_range(0.0, kDefaultCurveStop, kDefaultCurveStep);
  case Pipeline::simulate:
    return {0.65};
  case Pipeline::wigner_demo:
    return {1.0};
  case Pipeline::reconstruct:
    return {};
  }
  return {};
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

io::Provenance provenance(const ExperimentConfig& cfg) {
  return {config_hash(cfg), cfg.seed.value_or(0)};
}

// Symmetric axis with the given spacing covering at least `half`, never
// narrower than the default +/-8 panel.
std::vector<double> wigner_axis(double half, double step) {
  const double h = std::max(8.0, std::ceil(half / step - 1e-9) * step);
  const auto n = static_cast<long long>(std::llround(h / step));
  std::vector<double> axis;
  axis.reserve(static_cast<std::size_t>(2 * n + 1));
  for (long long i = -n; i <= n; ++i) {
    axis.push_back(static_cast<double>(i) * step);
  }
  return axis;
}

std::string alpha_dir(double alpha) { return "alpha_" + io::format_double(alpha); }

class OutputWriter {
public:
  OutputWriter(fs::path root, io::Provenance prov) : root_(std::move(root)), prov_(std::move(prov)) {}

  void text(const fs::path& rel, const std::string& content) {
    io::write_text(root_ / rel, content);
    files_.push_back(rel);
  }

  void json(const fs::path& rel, ojson j) {
    j["config_hash"] = prov_.config_hash;
    j["seed"] = prov_.seed;
    text(rel, j.dump(2) + "\n");
  }

  void dataset(const fs::path& rel, const QuadratureDataset& data) {
    io::write_dataset(root_ / rel, data, prov_);
    files_.push_back(rel);
    files_.push_back(io::dataset_sidecar(rel));
  }

  void density_matrix(const fs::path& stem, const DensityMatrix& rho) {
    ojson j = io::density_matrix_to_json(rho);
    json(fs::path(stem.string() + ".json"), std::move(j));
    text(fs::path(stem.string() + "_real.csv"), io::matrix_part_csv(rho, false, prov_));
    text(fs::path(stem.string() + "_imag.csv"), io::matrix_part_csv(rho, true, prov_));
  }

  void wigner(const fs::path& stem, const WignerGrid& w) {
    json(fs::path(stem.string() + ".json"), io::wigner_to_json(w));
    text(fs::path(stem.string() + ".csv"), io::wigner_csv(w, prov_));
  }

  [[nodiscard]] const io::Provenance& provenance() const { return prov_; }
  [[nodiscard]] const std::vector<fs::path>& files() const { return files_; }

  // Manifest goes last so it can list every other file.
  RunSummary finish(const ExperimentConfig& cfg, ojson report) {
    ojson manifest;
    manifest["tool"] = "nla";
    manifest["version"] = kVersion;
    manifest["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                                std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION);
    manifest["pipeline"] = std::string(to_string(cfg.pipeline));
    ojson echoed = config_to_json(cfg);
    echoed.erase("output_dir");
    manifest["config"] = std::move(echoed);
    manifest["config_hash"] = prov_.config_hash;
    ojson listed = ojson::array();
    for (const auto& f : files_) {
      listed.push_back(f.generic_string());
    }
    manifest["files"] = std::move(listed);
    json("report.json", report);
    json("manifest.json", std::move(manifest));
    return {files_, std::move(report)};
  }

private:
  fs::path root_;
  io::Provenance prov_;
  std::vector<fs::path> files_;
};

double sample_variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) {
    mean += x;
  }
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) {
    ss += (x - mean) * (x - mean);
  }
  return ss / static_cast<double>(v.size() - 1);
}

TomographySettings tomography_settings(const ExperimentConfig& cfg, FockCutoff cutoff, double eta) {
  TomographySettings s;
  s.cutoff = cutoff;
  s.eta = eta;
  s.max_iters = cfg.max_iters;
  s.ll_tol = cfg.ll_tol;
  s.diag_tol = cfg.diag_tol;
  return s;
}

} // namespace

std::string_view to_string(Pipeline p) {
  switch (p) {
  case Pipeline::curves:
    return "curves";
  case Pipeline::simulate:
    return "simulate";
  case Pipeline::reconstruct:
    return "reconstruct";
  case Pipeline::wigner_demo:
    return "wigner-demo";
  }
  return "unknown";
}

std::optional<Pipeline> parse_pipeline(std::string_view name) {
  for (Pipeline p : {Pipeline::curves, Pipeline::simulate, Pipeline::reconstruct, Pipeline::wigner_demo}) {
    if (name == to_string(p)) {
      return p;
    }
  }
  return std::nullopt;
}

ExperimentConfig parse_config(const std::string& text, Pipeline pipeline) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = line_and_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError("config: line " + std::to_string(line) + ", column " + std::to_string(col) +
                      ": malformed JSON (" + e.what() + ")");
  }
  if (!j.is_object()) {
    throw ConfigError("config: top level must be a JSON object");
  }

  ExperimentConfig cfg;
  cfg.pipeline = pipeline;
  cfg.alphas = default_alphas(pipeline);
  static const std::set<std::string> known = {
      "pipeline", "alpha",    "g",       "lambda",   "R",       "eta",     "phases",
      "samples",  "seed",     "output_dir", "n_max", "max_iters", "ll_tol", "diag_tol",
      "dataset",  "correct_efficiency", "wigner_step"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw ConfigError("config: unknown field '" + key + "'");
    }
    if (key == "pipeline") {
      if (!value.is_string()) {
        field_error(key, "expected a string");
      }
      const auto p = parse_pipeline(value.get<std::string>());
      if (!p) {
        field_error(key, "unknown pipeline '" + value.get<std::string>() + "'");
      }
      if (*p != pipeline) {
        field_error(key, "config is for '" + value.get<std::string>() + "' but '" +
                             std::string(to_string(pipeline)) + "' was requested");
      }
    } else if (key == "alpha") {
      cfg.alphas = parse_alphas(value);
    } else if (key == "g") {
      cfg.g = get_number(value, key);
    } else if (key == "lambda") {
      cfg.lambda = get_number(value, key);
    } else if (key == "R") {
      cfg.reflectivity = get_number(value, key);
    } else if (key == "eta") {
      cfg.eta = get_number(value, key);
    } else if (key == "phases") {
      cfg.phases = static_cast<int>(get_integer(value, key));
    } else if (key == "samples") {
      cfg.samples = static_cast<int>(get_integer(value, key));
    } else if (key == "seed") {
      if (value.is_null()) {
        cfg.seed.reset();
        continue;
      }
      const long long s = get_integer(value, key);
      if (s < 0) {
        field_error(key, "must be non-negative");
      }
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "output_dir") {
      if (!value.is_string()) {
        field_error(key, "expected a string");
      }
      cfg.output_dir = value.get<std::string>();
    } else if (key == "n_max") {
      if (value.is_null()) {
        cfg.n_max.reset();
        continue;
      }
      cfg.n_max = static_cast<int>(get_integer(value, key));
    } else if (key == "max_iters") {
      cfg.max_iters = static_cast<int>(get_integer(value, key));
    } else if (key == "ll_tol") {
      cfg.ll_tol = get_number(value, key);
    } else if (key == "diag_tol") {
      cfg.diag_tol = get_number(value, key);
    } else if (key == "dataset") {
      if (!value.is_string()) {
        field_error(key, "expected a string");
      }
      cfg.dataset = value.get<std::string>();
    } else if (key == "correct_efficiency") {
      if (!value.is_boolean()) {
        field_error(key, "expected true or false");
      }
      cfg.correct_efficiency = value.get<bool>();
    } else if (key == "wigner_step") {
      cfg.wigner_step = get_number(value, key);
    }
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const fs::path& path, Pipeline pipeline) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const IoError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config(text, pipeline);
}

void validate_config(const ExperimentConfig& cfg) {
  for (double a : cfg.alphas) {
    if (!std::isfinite(a) || a < 0.0) {
      field_error("alpha", "values must be finite and >= 0");
    }
  }
  if (cfg.pipeline != Pipeline::reconstruct && cfg.alphas.empty()) {
    field_error("alpha", "at least one value is required");
  }
  if (!(cfg.g > 1.0) || !std::isfinite(cfg.g)) {
    field_error("g", "nominal gain must exceed 1");
  }
  if (!(cfg.lambda > 0.0 && cfg.lambda <= 0.3)) {
    field_error("lambda", "must lie in (0, 0.3]");
  }
  if (!(cfg.reflectivity > 0.0 && cfg.reflectivity < 0.5)) {
    field_error("R", "must lie in (0, 0.5)");
  }
  if (!(cfg.eta > 0.0 && cfg.eta <= 1.0)) {
    field_error("eta", "must lie in (0, 1]");
  }
  if (cfg.phases < 1) {
    field_error("phases", "must be >= 1");
  }
  if (cfg.samples < 1) {
    field_error("samples", "must be >= 1");
  }
  if (cfg.n_max && *cfg.n_max < 1) {
    field_error("n_max", "must be >= 1");
  }
  if (cfg.max_iters < 1) {
    field_error("max_iters", "must be >= 1");
  }
  if (!(cfg.ll_tol > 0.0)) {
    field_error("ll_tol", "must be positive");
  }
  if (!(cfg.diag_tol > 0.0)) {
    field_error("diag_tol", "must be positive");
  }
  if (!(cfg.wigner_step > 0.0 && cfg.wigner_step <= 0.5)) {
    field_error("wigner_step", "must lie in (0, 0.5]");
  }
  if (cfg.pipeline == Pipeline::simulate && !cfg.seed) {
    field_error("seed", "required for the stochastic 'simulate' pipeline");
  }
  if (cfg.pipeline == Pipeline::simulate && cfg.samples < 2 * cfg.phases) {
    field_error("samples", "need at least two samples per phase");
  }
  if (cfg.pipeline == Pipeline::reconstruct && cfg.dataset.empty()) {
    field_error("dataset", "required for 'reconstruct'");
  }
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
  ojson j;
  j["pipeline"] = std::string(to_string(cfg.pipeline));
  j["alpha"] = cfg.alphas;
  j["g"] = cfg.g;
  j["lambda"] = cfg.lambda;
  j["R"] = cfg.reflectivity;
  j["eta"] = cfg.eta;
  j["phases"] = cfg.phases;
  j["samples"] = cfg.samples;
  j["seed"] = cfg.seed ? ojson(*cfg.seed) : ojson(nullptr);
  j["output_dir"] = cfg.output_dir.generic_string();
  j["n_max"] = cfg.n_max ? ojson(*cfg.n_max) : ojson(nullptr);
  j["max_iters"] = cfg.max_iters;
  j["ll_tol"] = cfg.ll_tol;
  j["diag_tol"] = cfg.diag_tol;
  j["dataset"] = cfg.dataset.generic_string();
  j["correct_efficiency"] = cfg.correct_efficiency;
  j["wigner_step"] = cfg.wigner_step;
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  // The output directory does not change results, so it stays out of the hash.
  ojson j = config_to_json(cfg);
  j.erase("output_dir");
  const std::string canonical = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return hex64(h);
}

RunSummary run_curves(const ExperimentConfig& cfg) {
  validate_config(cfg);
  OutputWriter out(cfg.output_dir, provenance(cfg));
  const double g = cfg.g;

  std::string csv = io::provenance_comment(out.provenance());
  csv += "alpha,g_eff_addsub,g_eff_qs,F_addsub,F_qs,n_eq,var_x,var_p,det_bound\n";
  std::string phase_csv = io::provenance_comment(out.provenance());
  phase_csv += "alpha,v_sql,r_v_lossless,r_v_eta\n";

  ojson rows = ojson::array();
  for (double alpha : cfg.alphas) {
    staged("curves", [&] {
      const FockCutoff cutoff = cfg.n_max ? FockCutoff(*cfg.n_max) : FockCutoff::covering(g * alpha);
      const double g_eff = effective_gain_analytic(g, alpha);
      const double fid = fidelity_analytic(g, alpha);
      const ScissorsMetrics qs = scissors_metrics(g, alpha);
      const PureState amplified = amplify_ideal(coherent_state(alpha, cutoff), g).state.normalized();
      const double var_x = quadrature_variance(amplified, 0.0);
      const double var_p = quadrature_variance(amplified, std::numbers::pi / 2.0);
      const double n_eq = equivalent_input_noise(var_x, g_eff, 1.0);
      const double bound = deterministic_noise_bounds(g_eff).best_deterministic_variance;

      for (double v : {alpha, g_eff, qs.g_eff, fid, qs.fidelity, n_eq, var_x, var_p}) {
        csv += io::format_double(v);
        csv += ',';
      }
      csv += io::format_double(bound);
      csv += '\n';

      if (alpha > 0.0) {
        const DensityMatrix rho = DensityMatrix::from_pure(amplified);
        const PhaseEstimation lossless = phase_estimation_metrics(rho, alpha, g_eff);
        // Coherent inputs stay coherent under loss, so var_p(in) is still 1.
        const PhaseEstimation lossy = phase_estimation_metrics(loss_channel(rho, cfg.eta), alpha, g_eff);
        for (double v : {alpha, lossless.v_sql, lossless.r_v}) {
          phase_csv += io::format_double(v);
          phase_csv += ',';
        }
        phase_csv += io::format_double(lossy.r_v);
        phase_csv += '\n';
      }
      rows.push_back({{"alpha", alpha}, {"g_eff", g_eff}, {"F", fid}, {"n_eq", n_eq}});
    });
  }
  out.text("curves.csv", csv);
  out.text("phase_estimation.csv", phase_csv);

  const NoiseBounds nominal = deterministic_noise_bounds(g);
  ojson report;
  report["pipeline"] = "curves";
  report["g"] = g;
  report["deterministic_bounds"] = {{"quantum_limited_added", nominal.quantum_limited_added},
                                    {"classical_added", nominal.classical_added},
                                    {"best_deterministic_variance", nominal.best_deterministic_variance}};
  report["rows"] = std::move(rows);
  return out.finish(cfg, std::move(report));
}

RunSummary run_full_pipeline(const ExperimentConfig& cfg) {
  validate_config(cfg);
  OutputWriter out(cfg.output_dir, provenance(cfg));
  const std::uint64_t seed = *cfg.seed;
  const std::vector<double> phases = phase_grid(cfg.phases);
  const int counts = (cfg.samples + cfg.phases - 1) / cfg.phases;
  const std::vector<double> locked{0.0};

  ojson results = ojson::array();
  for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
    const double alpha = cfg.alphas[ai];
    const fs::path dir = alpha_dir(alpha);
    const FockCutoff cutoff = cfg.n_max ? FockCutoff(*cfg.n_max) : FockCutoff::default_for(alpha);

    const auto phys = staged("physical_model", [&] {
      return physical_amplifier(alpha, cfg.lambda, cfg.reflectivity, cutoff);
    });
    const DensityMatrix reference = staged("physical_model", [&] {
      return physical_reference(alpha, cfg.lambda, cfg.reflectivity, cutoff);
    });
    const DensityMatrix vacuum = DensityMatrix::from_pure(PureState::vacuum(cutoff));
    // The amplifier sees the input after the tap, so targets use this amplitude.
    const double alpha_in = std::abs(expectation(reference, Observable::annihilation()));

    auto sample = [&](const DensityMatrix& rho, std::span<const double> ph, int n, std::uint64_t stage,
                      SampleTag tag, const std::string& what) {
      return staged("homodyne", [&] {
        QuadratureDataset d = sample_quadratures(rho, ph, n, cfg.eta, derive_seed(seed, ai, stage), tag);
        d.description = what + ", |alpha| = " + io::format_double(alpha);
        return d;
      });
    };
    const QuadratureDataset amplified_data =
        sample(phys.output.state, phases, counts, 1, SampleTag::amplified, "heralded a a^dagger output");
    const QuadratureDataset input_data =
        sample(reference, phases, counts, 1, SampleTag::input, "un-amplified reference");
    const QuadratureDataset vacuum_data = sample(vacuum, phases, counts, 1, SampleTag::vacuum, "vacuum");
    const QuadratureDataset gain_amp =
        sample(phys.output.state, locked, cfg.samples, 2, SampleTag::amplified, "phase-locked amplified");
    const QuadratureDataset gain_in =
        sample(reference, locked, cfg.samples, 2, SampleTag::input, "phase-locked reference");

    // Shot-noise self-check before anything is reported.
    std::vector<double> vac_values;
    for (const auto& r : vacuum_data.records) {
      vac_values.push_back(r.x);
    }
    const double vac_var = sample_variance(vac_values);
    const double vac_tol = 5.0 * std::sqrt(2.0 / static_cast<double>(vac_values.size() - 1));
    if (std::abs(vac_var - 1.0) > vac_tol) {
      throw ConvergenceError("stage 'homodyne': vacuum variance " + io::format_double(vac_var) +
                             " is not one shot-noise unit");
    }

    const std::vector<double> amp0 = gain_amp.values_at(0);
    const std::vector<double> in0 = gain_in.values_at(0);
    const GainEstimate gain = staged("gain", [&] { return gain_from_samples(amp0, in0); });
    const double gain_theory = effective_gain_analytic(2.0, alpha_in);

    const ReconstructionResult rec = staged("tomography", [&] {
      return maxlik_reconstruct(amplified_data, tomography_settings(cfg, cutoff, cfg.eta));
    });
    if (!rec.converged) {
      throw ConvergenceError("stage 'tomography': no convergence within " + std::to_string(cfg.max_iters) +
                             " iterations");
    }

    const auto report_alpha = staged("report", [&] {
      const double diag = amplified_fidelity_diagnostic(rec.rho, alpha_in);
      const PureState ideal = amplify_ideal(coherent_state(alpha_in, cutoff), 2.0).state.normalized();
      const double var_x_amp = quadrature_variance(rec.rho, 0.0);
      const double var_x_in = sample_variance(in0);
      const double n_eq = equivalent_input_noise(var_x_amp, gain.gain, var_x_in);
      const PhaseEstimation pe = phase_estimation_metrics(rec.rho, alpha_in, gain.gain);

      ojson r;
      r["alpha"] = alpha;
      r["alpha_in"] = alpha_in;
      r["n_max"] = cutoff.n_max();
      r["herald"] = {{"addition_prob", phys.addition_prob},
                     {"subtraction_prob", phys.subtraction_prob},
                     {"coincidence_prob", phys.output.success_prob},
                     {"fidelity_to_ideal", phys.fidelity_to_ideal}};
      r["vacuum_variance"] = vac_var;
      r["gain"] = {{"estimate", gain.gain},
                   {"std_error", gain.std_error},
                   {"analytic", gain_theory},
                   {"z_score", (gain.gain - gain_theory) / gain.std_error}};
      r["tomography"] = {{"iterations", rec.iterations_used},
                         {"converged", rec.converged},
                         {"final_log_likelihood", rec.log_likelihood_trace.back()},
                         {"fidelity_to_physical_state", uhlmann_fidelity(rec.rho, phys.output.state)},
                         {"fidelity_to_ideal_state", state_fidelity(rec.rho, ideal)},
                         {"warnings", rec.warnings}};
      r["fidelity_to_target"] = {{"reconstructed", diag}, {"analytic", fidelity_analytic(2.0, alpha_in)}};
      r["var_x_amp"] = var_x_amp;
      r["var_p_amp"] = quadrature_variance(rec.rho, std::numbers::pi / 2.0);
      r["var_x_in"] = var_x_in;
      r["n_eq"] = n_eq;
      if (alpha_in > 0.0) {
        r["phase_estimation"] = {{"v_sql", pe.v_sql}, {"r_v", pe.r_v}};
      }
      return r;
    });

    const WignerGrid w = staged("wigner", [&] {
      const auto axis = wigner_axis(required_wigner_halfwidth(rec.rho), cfg.wigner_step);
      return wigner_function(rec.rho, axis, axis);
    });

    staged("output", [&] {
      out.dataset(dir / "amplified.csv", amplified_data);
      out.dataset(dir / "input.csv", input_data);
      out.dataset(dir / "vacuum.csv", vacuum_data);
      out.dataset(dir / "gain_amplified.csv", gain_amp);
      out.dataset(dir / "gain_input.csv", gain_in);
      out.density_matrix(dir / "rho", rec.rho);
      out.text(dir / "loglik.csv", io::log_likelihood_csv(rec.log_likelihood_trace, out.provenance()));
      out.wigner(dir / "wigner", w);
      out.json(dir / "report.json", report_alpha);
    });
    results.push_back(report_alpha);
  }

  ojson report;
  report["pipeline"] = "simulate";
  report["results"] = std::move(results);
  return staged("output", [&] { return out.finish(cfg, std::move(report)); });
}

RunSummary run_reconstruct(const ExperimentConfig& cfg) {
  validate_config(cfg);
  OutputWriter out(cfg.output_dir, provenance(cfg));
  const QuadratureDataset data = staged("input", [&] { return io::read_dataset(cfg.dataset); });
  const double alpha = cfg.alphas.empty() ? 0.0 : cfg.alphas.front();
  const FockCutoff cutoff = cfg.n_max ? FockCutoff(*cfg.n_max) : FockCutoff::default_for(alpha);
  const double eta = cfg.correct_efficiency ? data.eta : 1.0;

  const ReconstructionResult rec = staged("tomography", [&] {
    return maxlik_reconstruct(data, tomography_settings(cfg, cutoff, eta));
  });
  if (!rec.converged) {
    throw ConvergenceError("stage 'tomography': no convergence within " + std::to_string(cfg.max_iters) +
                           " iterations");
  }
  const WignerGrid w = staged("wigner", [&] {
    const auto axis = wigner_axis(required_wigner_halfwidth(rec.rho), cfg.wigner_step);
    return wigner_function(rec.rho, axis, axis);
  });

  ojson report;
  report["pipeline"] = "reconstruct";
  report["dataset"] = cfg.dataset.generic_string();
  report["samples"] = data.records.size();
  report["eta_in_povm"] = eta;
  report["n_max"] = cutoff.n_max();
  report["iterations"] = rec.iterations_used;
  report["converged"] = rec.converged;
  report["warnings"] = rec.warnings;
  report["mean_photon_number"] = expectation(rec.rho, Observable::number()).real();
  report["var_x"] = quadrature_variance(rec.rho, 0.0);
  report["var_p"] = quadrature_variance(rec.rho, std::numbers::pi / 2.0);
  report["purity"] = rec.rho.purity();
  if (!cfg.alphas.empty()) {
    report["fidelity_to_2alpha"] =
        staged("report", [&] { return amplified_fidelity_diagnostic(rec.rho, alpha); });
  }

  staged("output", [&] {
    out.density_matrix("rho", rec.rho);
    out.text("loglik.csv", io::log_likelihood_csv(rec.log_likelihood_trace, out.provenance()));
    out.wigner("wigner", w);
  });
  return staged("output", [&] { return out.finish(cfg, std::move(report)); });
}

RunSummary run_wigner_demo(const ExperimentConfig& cfg) {
  validate_config(cfg);
  OutputWriter out(cfg.output_dir, provenance(cfg));
  const double alpha = cfg.alphas.front();
  const FockCutoff cutoff = cfg.n_max ? FockCutoff(*cfg.n_max) : FockCutoff::covering(cfg.g * alpha);
  const double quarter = std::numbers::pi / 2.0;

  const auto [before, after] = staged("states", [&] {
    const DensityMatrix coh = DensityMatrix::from_pure(coherent_state(alpha, cutoff));
    const DensityMatrix amp =
        DensityMatrix::from_pure(amplify_ideal(coherent_state(alpha, cutoff), cfg.g).state.normalized());
    return std::pair{std::array{coh, phase_shift(coh, quarter)}, std::array{amp, phase_shift(amp, quarter)}};
  });

  const double half = std::max(required_wigner_halfwidth(after[0]), required_wigner_halfwidth(before[0]));
  const std::vector<double> axis = wigner_axis(half, cfg.wigner_step);
  const std::array<double, 2> weights{0.5, 0.5};

  ojson report;
  report["pipeline"] = "wigner-demo";
  report["alpha"] = alpha;
  report["g"] = cfg.g;
  report["grid_halfwidth"] = axis.back();
  report["grid_step"] = cfg.wigner_step;

  auto panel = [&](const std::array<DensityMatrix, 2>& comps, const std::string& name) {
    return staged("wigner", [&] {
      const WignerGrid w0 = wigner_function(comps[0], axis, axis);
      const WignerGrid w1 = wigner_function(comps[1], axis, axis);
      const DensityMatrix mix = mixture(comps, weights);
      const WignerGrid wm = wigner_function(mix, axis, axis);
      const double overlap = overlap_integral(w0, w1);
      const complex mean = expectation(comps[0], Observable::annihilation());
      ojson r;
      r["overlap_integral"] = overlap;
      r["overlap_trace"] = 4.0 * std::numbers::pi * overlap;
      // Lobes sit at 2<a> and 2i<a>: their distance is 2 sqrt(2) |<a>|.
      r["lobe_separation"] = 2.0 * std::sqrt(2.0) * std::abs(mean);
      r["mixture_integral"] = grid_integral(wm);
      r["mixture_min"] = wm.values.minCoeff();
      r["mixture_max"] = wm.values.maxCoeff();
      out.wigner("wigner_" + name, wm);
      return r;
    });
  };
  report["before"] = panel(before, "before");
  report["after"] = panel(after, "after");
  report["separation_ratio"] =
      report["after"]["lobe_separation"].get<double>() / report["before"]["lobe_separation"].get<double>();
  report["g_eff"] = effective_gain_analytic(cfg.g, alpha);
  return staged("output", [&] { return out.finish(cfg, std::move(report)); });
}

RunSummary run(const ExperimentConfig& cfg) {
  switch (cfg.pipeline) {
  case Pipeline::curves:
    return run_curves(cfg);
  case Pipeline::simulate:
    return run_full_pipeline(cfg);
  case Pipeline::reconstruct:
    return run_reconstruct(cfg);
  case Pipeline::wigner_demo:
    return run_wigner_demo(cfg);
  }
  throw ConfigError("unknown pipeline");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const PreconditionError*>(&e)) {
    return 2;
  }
  if (dynamic_cast<const IoError*>(&e)) {
    return 4;
  }
  if (dynamic_cast<const Error*>(&e)) {
    return 3;
  }
  return 1;
}

} // namespace nla

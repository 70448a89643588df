#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "nla/errors.hpp"
#include "nla/io.hpp"
#include "nla/pipelines.hpp"

using namespace nla;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nla_pipe_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string config_error_message(const std::string& text, Pipeline p) {
  try {
    (void)parse_config(text, p);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

ExperimentConfig small_simulation(const fs::path& out) {
  ExperimentConfig cfg = parse_config(
      R"({"alpha": 0.4, "phases": 6, "samples": 1200, "seed": 2024, "n_max": 16, "max_iters": 500, "ll_tol": 1e-8})",
      Pipeline::simulate);
  cfg.output_dir = out;
  return cfg;
}

void check_same_tree(const fs::path& a, const fs::path& b) {
  std::size_t count = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) {
      continue;
    }
    const fs::path rel = fs::relative(entry.path(), a);
    REQUIRE(fs::exists(b / rel));
    CHECK_MESSAGE(io::read_text(entry.path()) == io::read_text(b / rel), rel.string());
    ++count;
  }
  CHECK(count > 5);
}

} // namespace

TEST_CASE("pipeline names") {
  for (Pipeline p : {Pipeline::curves, Pipeline::simulate, Pipeline::reconstruct, Pipeline::wigner_demo}) {
    CHECK(parse_pipeline(to_string(p)) == p);
  }
  CHECK(to_string(Pipeline::wigner_demo) == "wigner-demo");
  CHECK_FALSE(parse_pipeline("plot").has_value());
}

TEST_CASE("config parsing") {
  SUBCASE("defaults") {
    const ExperimentConfig c = parse_config("{}", Pipeline::curves);
    CHECK(c.g == 2.0);
    CHECK(c.eta == 0.6);
    CHECK(c.phases == 11);
    CHECK(c.samples == 100000);
    CHECK(c.alphas.size() == 31);
    CHECK(c.alphas.back() == doctest::Approx(1.5));
  }
  SUBCASE("alpha forms") {
    CHECK(parse_config(R"({"alpha": 0.65})", Pipeline::curves).alphas == std::vector<double>{0.65});
    CHECK(parse_config(R"({"alpha": [0.1, 0.2]})", Pipeline::curves).alphas.size() == 2);
    CHECK(parse_config(R"({"alpha": {"start": 0, "stop": 1, "step": 0.25}})", Pipeline::curves).alphas.size() == 5);
  }
  SUBCASE("malformed JSON reports a position") {
    const std::string msg = config_error_message("{\n  \"g\": 2,\n  \"eta\": ,\n}", Pipeline::curves);
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("column") != std::string::npos);
  }
  SUBCASE("field errors name the field") {
    CHECK(config_error_message(R"({"gain": 2})", Pipeline::curves).find("gain") != std::string::npos);
    CHECK(config_error_message(R"({"samples": 0})", Pipeline::curves).find("samples") != std::string::npos);
    CHECK(config_error_message(R"({"g": "two"})", Pipeline::curves).find("g") != std::string::npos);
    CHECK(config_error_message(R"({"eta": 1.5})", Pipeline::curves).find("eta") != std::string::npos);
    CHECK(config_error_message(R"({"R": 0.5})", Pipeline::curves).find("R") != std::string::npos);
    CHECK(config_error_message(R"({"alpha": 0.5})", Pipeline::simulate).find("seed") != std::string::npos);
    CHECK(config_error_message("{}", Pipeline::reconstruct).find("dataset") != std::string::npos);
    CHECK_THROWS_AS(parse_config("[1, 2]", Pipeline::curves), ConfigError);
  }
  SUBCASE("hash ignores the output directory only") {
    ExperimentConfig a = parse_config(R"({"alpha": 0.5, "seed": 3})", Pipeline::simulate);
    ExperimentConfig b = a;
    b.output_dir = "elsewhere";
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b.seed = 4;
    CHECK(config_hash(a) != config_hash(b));
    const ExperimentConfig echoed = parse_config(config_to_json(a).dump(), Pipeline::simulate);
    CHECK(config_hash(echoed) == config_hash(a));
  }
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(PreconditionError("x")) == 2);
  CHECK(exit_code_for(TruncationError("x")) == 3);
  CHECK(exit_code_for(ConvergenceError("x")) == 3);
  CHECK(exit_code_for(IoError("x")) == 4);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("curves pipeline") {
  const fs::path dir = scratch_dir("curves");
  ExperimentConfig cfg = parse_config(R"({"alpha": {"start": 0, "stop": 1.0, "step": 0.05}})", Pipeline::curves);
  cfg.output_dir = dir;
  const RunSummary s = run(cfg);
  const auto rows = io::parse_csv(io::read_text(dir / "curves.csv"));
  REQUIRE(rows.size() == 22);
  CHECK(rows[0][0] == "alpha");
  CHECK(io::parse_double(rows[1][1]) == 2.0);
  CHECK(io::parse_double(rows[14][1]) == doctest::Approx(1.5815602474441757).epsilon(1e-12));
  CHECK(io::read_text(dir / "curves.csv").rfind("# config_hash=" + config_hash(cfg), 0) == 0);
  CHECK(fs::exists(dir / "phase_estimation.csv"));
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(s.report.at("pipeline") == "curves");
  fs::remove_all(dir);
}

TEST_CASE("simulate and reconstruct") {
  const fs::path first = scratch_dir("sim_a");
  const fs::path second = scratch_dir("sim_b");
  const RunSummary a = run(small_simulation(first));
  const RunSummary b = run(small_simulation(second));
  CHECK(a.report.dump() == b.report.dump());
  check_same_tree(first, second);

  const auto& r = a.report.at("results").at(0);
  CHECK(r.at("tomography").at("converged") == true);
  CHECK(std::abs(r.at("vacuum_variance").get<double>() - 1.0) < 0.2);
  CHECK(r.at("gain").at("std_error").get<double>() > 0.0);

  ExperimentConfig other = small_simulation(scratch_dir("sim_c"));
  other.seed = 2025;
  const RunSummary c = run(other);
  CHECK(c.report.dump() != a.report.dump());

  const fs::path rec_dir = scratch_dir("rec");
  nlohmann::json rc_json = {{"n_max", 16}, {"max_iters", 500}, {"ll_tol", 1e-8}, {"alpha", 0.4}};
  rc_json["dataset"] = (first / "alpha_0.4" / "amplified.csv").string();
  ExperimentConfig rc = parse_config(rc_json.dump(), Pipeline::reconstruct);
  rc.output_dir = rec_dir;
  validate_config(rc);
  const RunSummary rs = run(rc);
  CHECK(rs.report.at("converged") == true);
  CHECK(rs.report.at("samples") == 1200);
  CHECK(fs::exists(rec_dir / "rho.json"));

  ExperimentConfig missing = rc;
  missing.dataset = rec_dir / "nope.csv";
  try {
    run(missing);
    FAIL("expected an I/O error");
  } catch (const std::exception& e) {
    CHECK(exit_code_for(e) == 4);
  }
  for (const auto& d : {first, second, other.output_dir, rec_dir}) {
    fs::remove_all(d);
  }
}

TEST_CASE("wigner-demo pipeline") {
  const fs::path dir = scratch_dir("wdemo");
  ExperimentConfig cfg = parse_config("{}", Pipeline::wigner_demo);
  cfg.output_dir = dir;
  const RunSummary s = run(cfg);
  CHECK(s.report.at("after").at("overlap_integral").get<double>() <
        s.report.at("before").at("overlap_integral").get<double>());
  CHECK(s.report.at("separation_ratio").get<double>() > 1.0);
  CHECK(fs::exists(dir / "wigner_before.csv"));
  fs::remove_all(dir);
}

TEST_CASE("command-line tool") {
  const char* tool = std::getenv("NLA_TOOL");
  if (tool == nullptr) {
    MESSAGE("NLA_TOOL not set; skipping command-line checks");
    return;
  }
  const fs::path dir = scratch_dir("cli");
  io::write_text(dir / "good.json", R"({"alpha": [0.3, 0.6]})");
  io::write_text(dir / "bad.json", R"({"alpha": [0.3, 0.6], "typo": 1})");
  auto status = [&](const std::string& args) {
    const std::string cmd = std::string(tool) + " " + args + " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WEXITSTATUS(raw);
  };
  CHECK(status("curves --config " + (dir / "good.json").string() + " --out " + (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "curves.csv"));
  CHECK(status("curves --config " + (dir / "bad.json").string() + " --out " + (dir / "out2").string()) == 2);
  CHECK(status("curves --config " + (dir / "missing.json").string()) == 2);
  CHECK(status("simulate --config " + (dir / "good.json").string() + " --out " + (dir / "out3").string()) == 2);
  CHECK(status("frobnicate") == 2);
  fs::remove_all(dir);
}

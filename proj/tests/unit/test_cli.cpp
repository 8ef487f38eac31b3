#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <unistd.h>

#include <gtest/gtest.h>

#include "cdlab/tools/commands.hpp"
#include "cdlab/tools/config.hpp"
#include "cdlab/tools/csv.hpp"

namespace fs = std::filesystem;
using namespace cdlab::tools;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string last_line(const std::string& text) {
  std::string t = text;
  while (!t.empty() && t.back() == '\n') t.pop_back();
  const auto pos = t.rfind('\n');
  return pos == std::string::npos ? t : t.substr(pos + 1);
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("cdlab_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

std::string config_path(const std::string& name) { return std::string(CDLAB_CONFIG_DIR) + "/" + name; }

int run_command(const std::string& command, const std::string& config, const fs::path& out,
                const Overrides& overrides = {}) {
  std::ostringstream log;
  return run({command, config, out.string(), overrides}, log);
}

}  // namespace

TEST(Config, DefaultsWhenSectionsOmitted) {
  const ExperimentConfig c = parse_config_text(R"({"model": {"lambda0": 1.5, "valency": 2, "n": 3}})");
  EXPECT_DOUBLE_EQ(c.model.lambda0, 1.5);
  EXPECT_EQ(c.model.n, 3u);
  EXPECT_EQ(c.model.trunc, 512u);
  EXPECT_EQ(c.model.mu, Eigen::MatrixXcd::Identity(3, 3));
  EXPECT_EQ(c.seed, 1u);
  EXPECT_DOUBLE_EQ(c.tolerance, 1e-9);
  EXPECT_EQ(c.geometry.angles, 16u);
  EXPECT_EQ(c.sylvester.shifts.size(), 3u);
  EXPECT_EQ(c.commutant.max_degree, 8u);
  EXPECT_FALSE(c.powerbound.reduce);
}

TEST(Config, CoefficientEntries) {
  const ExperimentConfig c = parse_config_text(
      R"({"model": {"n": 3, "valency": 2, "mu": [[0, 1, 0.5], [1, 2, 1.0, -2.0]]}})");
  EXPECT_EQ(c.model.mu(0, 1), cdlab::cplx(0.5, 0.0));
  EXPECT_EQ(c.model.mu(1, 2), cdlab::cplx(1.0, -2.0));
  EXPECT_EQ(c.model.mu(0, 2), cdlab::cplx(0.0, 0.0));
}

TEST(Config, DiagnosticsCarryFieldAndLine) {
  try {
    parse_config_text("{\n  \"model\": {\n    \"lambda0\": -1\n  }\n}\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "model.lambda0");
    EXPECT_EQ(e.line(), 3u);
  }
  try {
    parse_config_text("{\"model\": {\"bogus\": 1}}");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "model.bogus");
    EXPECT_EQ(e.line(), 1u);
  }
  EXPECT_THROW(parse_config_text("{\n\"model\": {,}\n}"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"model": {"n": 2, "mu": [[1, 0, 1.0]]}})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"model": {"n": 2, "trunc": 1}})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"geometry": {"radii": [1.2]}, "model": {}})"), ConfigError);
  EXPECT_THROW(parse_config_file("/nonexistent/cdlab.json"), ConfigError);
}

TEST(Config, ShippedConfigsParse) {
  for (const char* name : {"default.json", "halmos_valency1.json", "forced_zero.json", "line_bundle.json"}) {
    EXPECT_NO_THROW(parse_config_file(config_path(name))) << name;
  }
}

TEST(Config, OverridesApply) {
  ExperimentConfig c = parse_config_text(R"({"model": {"n": 2}})");
  apply_overrides(c, {std::size_t{64}, std::uint64_t{99}, 1e-6});
  EXPECT_EQ(c.model.trunc, 64u);
  EXPECT_EQ(c.sylvester.trunc, 64u);
  EXPECT_EQ(c.powerbound.trunc, 64u);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_DOUBLE_EQ(c.tolerance, 1e-6);
  EXPECT_ANY_THROW(apply_overrides(c, {std::size_t{1}, std::nullopt, std::nullopt}));
}

TEST(Csv, NumberFormatting) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(-0.125), "-0.125");
  EXPECT_EQ(format_number(-1.5e-12), "-1.5000000000000001e-12");
  EXPECT_EQ(format_number(std::size_t{4096}), "4096");
  EXPECT_EQ(std::stod(format_number(M_PI)), M_PI);
  EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Csv, StatusRowsAndQuoting) {
  CsvTable t({"a", "b"});
  t.add_row({"1", "x,y"});
  EXPECT_EQ(t.render({}), "a,b\n1,\"x,y\"\nstatus,ok\n");
  EXPECT_EQ(last_line(t.render({false, "domain", "lambda0 must be positive"})),
            "status,error,domain,lambda0 must be positive");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("plain"), "plain");
}

TEST(Commands, NamesAreStable) {
  const std::vector<std::string> expected{"classify", "assemble", "geometry", "sylvester", "reduce",
                                          "commutant", "powerbound", "suite", "validate"};
  for (const std::string& name : expected) {
    EXPECT_NE(std::find(command_names().begin(), command_names().end(), name), command_names().end()) << name;
  }
}

TEST(Commands, ClassifyMarksForcedZero) {
  TempDir dir;
  ASSERT_EQ(run_command("classify", config_path("forced_zero.json"), dir.path()), kExitOk);
  const std::string csv = slurp(dir.path() / "classify.csv");
  EXPECT_NE(csv.find("forced-zero"), std::string::npos);
  EXPECT_EQ(last_line(csv), "status,ok");
  EXPECT_TRUE(fs::exists(dir.path() / "manifest.json"));
}

TEST(Commands, AssembleRejectsOccupiedForcedZero) {
  TempDir dir;
  EXPECT_EQ(run_command("assemble", config_path("forced_zero.json"), dir.path()), kExitUnboundedEntry);
  const std::string csv = slurp(dir.path() / "assemble.csv");
  EXPECT_EQ(last_line(csv).rfind("status,error,", 0), 0u);
}

TEST(Commands, ReduceNeedsValencyTwo) {
  TempDir dir;
  const fs::path cfg =
      write_file(dir.path(), "low.json", R"({"model": {"n": 2, "valency": 1.5, "trunc": 64, "mu": [[0, 1, 1]]}})");
  EXPECT_EQ(run_command("reduce", cfg.string(), dir.path() / "out"), kExitValencyTooSmall);
}

TEST(Commands, InvalidConfigExitCode) {
  TempDir dir;
  const fs::path cfg = write_file(dir.path(), "bad.json", R"({"model": {"lambda0": 0}})");
  EXPECT_EQ(run_command("classify", cfg.string(), dir.path() / "out"), kExitInvalidInput);
  EXPECT_EQ(run_command("validate", cfg.string(), ""), kExitInvalidInput);
  EXPECT_EQ(run_command("validate", config_path("default.json"), ""), kExitOk);
  EXPECT_EQ(run_command("classify", "", dir.path() / "out2"), kExitInvalidInput);
  EXPECT_EQ(run_command("nonsense", config_path("default.json"), dir.path() / "out3"), kExitInvalidInput);
}

TEST(Commands, GeometryLineBundleCurvature) {
  TempDir dir;
  ASSERT_EQ(run_command("geometry", config_path("line_bundle.json"), dir.path()), kExitOk);
  std::istringstream csv(slurp(dir.path() / "geometry.csv"));
  std::string header, row;
  std::getline(csv, header);
  EXPECT_EQ(header.rfind("re_w,im_w,", 0), 0u);
  const auto curv_col = [&] {
    std::istringstream h(header);
    std::string f;
    std::size_t i = 0;
    while (std::getline(h, f, ',')) {
      if (f == "curvature_0_0_re") return i;
      ++i;
    }
    return std::string::npos;
  }();
  ASSERT_NE(curv_col, std::string::npos);
  bool saw_origin = false;
  while (std::getline(csv, row)) {
    if (row.rfind("status", 0) == 0) break;
    std::vector<std::string> fields;
    std::istringstream r(row);
    std::string f;
    while (std::getline(r, f, ',')) fields.push_back(f);
    if (std::stod(fields[0]) == 0.0 && std::stod(fields[1]) == 0.0) {
      saw_origin = true;
      EXPECT_NEAR(std::stod(fields[curv_col]), -2.0, 1e-5);
    }
  }
  EXPECT_TRUE(saw_origin);
}

TEST(Commands, ManifestRecordsOverrides) {
  TempDir dir;
  Overrides o;
  o.seed = 77;
  ASSERT_EQ(run_command("classify", config_path("default.json"), dir.path(), o), kExitOk);
  const std::string manifest = slurp(dir.path() / "manifest.json");
  EXPECT_NE(manifest.find("\"command\""), std::string::npos);
  EXPECT_NE(manifest.find("77"), std::string::npos);
  EXPECT_NE(manifest.find("\"status\""), std::string::npos);
}

TEST(Executable, ExitCodesFromProcess) {
  TempDir dir;
  const std::string exe = CDLAB_EXE;
  const auto code = [](int raw) { return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1; };
  EXPECT_EQ(code(std::system((exe + " --help > /dev/null").c_str())), 0);
  EXPECT_EQ(code(std::system((exe + " classify > /dev/null 2>&1").c_str())), 2);
  EXPECT_EQ(code(std::system((exe + " validate --config " + config_path("default.json") + " 2>/dev/null").c_str())), 0);
  EXPECT_EQ(code(std::system((exe + " assemble --config " + config_path("forced_zero.json") + " --out " +
                              (dir.path() / "a").string() + " 2>/dev/null")
                                 .c_str())),
            3);
}

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mfbm/config.hpp"
#include "mfbm/io.hpp"

using namespace mfbm;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("mfbm_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, DefaultsValidate) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.seed, kDefaultSeed);
  EXPECT_EQ(c.effective_schedule().size(), 5u);
}

TEST(Config, ParsesSectionsAndDottedKeys) {
  std::istringstream in(
      "# comment\n"
      "model.N = 3\n"
      "[model]\n"
      "H = 0.25   # trailing comment\n"
      "[limits]\n"
      "example = global_lil\n"
      "schedule = 5, 10, 20\n"
      "[]\n"
      "seed = 42\n");
  const RunConfig c = parse_config(in);
  EXPECT_EQ(c.params.N, 3);
  EXPECT_DOUBLE_EQ(c.params.H, 0.25);
  EXPECT_EQ(c.example, Example::global_lil);
  EXPECT_EQ(c.schedule, (std::vector<double>{5, 10, 20}));
  EXPECT_EQ(c.seed, 42u);
}

TEST(Config, UnknownKeyIsAnError) {
  std::istringstream in("model.HH = 0.5\n");
  EXPECT_THROW(parse_config(in), ConfigError);
}

TEST(Config, MalformedValuesAreErrors) {
  for (const char* text : {"model.H = abc\n", "seed = -3\n", "model.N = 2.5\n", "just words\n", "[model\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(parse_config(in), ConfigError) << text;
  }
}

TEST(Config, ValidationCatchesBadValues) {
  RunConfig c;
  c.params.H = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.covcheck_radii = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.simulate_method = "fft";
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.simulate_points = {0.1, 0.2, 0.3};
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Io, FormatsSeventeenDigits) {
  EXPECT_EQ(io::fmt(0.1), "0.10000000000000001");
  EXPECT_EQ(io::fmt(1.0), "1");
  EXPECT_EQ(io::fmt(std::numeric_limits<double>::quiet_NaN()), "nan");
}

TEST(Io, CsvRoundTripWithLfEndings) {
  const fs::path d = scratch_dir("csv");
  {
    io::CsvWriter w(d / "t.csv", {"a", "b"});
    w.row(1, 0.25);
    w.row("x", 1e-300);
    EXPECT_THROW(w.row(1), std::logic_error);
  }
  const std::string text = slurp(d / "t.csv");
  EXPECT_EQ(text.find('\r'), std::string::npos);
  EXPECT_EQ(text, "a,b\n1,0.25\nx,1e-300\n");
  const io::CsvTable t = io::read_csv(d / "t.csv");
  EXPECT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.column("b"), 1u);
}

TEST(Io, KernelFixturesRoundTrip) {
  const fs::path d = scratch_dir("fix");
  const std::vector<io::KernelFixture> rows{{2, 0.5, 3, 0.25, 0.75, 1.0 / 3}};
  io::write_kernel_fixtures(d / "k.csv", rows);
  const auto back = io::read_kernel_fixtures(d / "k.csv");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].b, 1.0 / 3);
  EXPECT_EQ(back[0].m, 3);
}

TEST(Io, EigensystemBundleLayout) {
  const fs::path d = scratch_dir("eig");
  const EigenSystem es = mercer_decompose([](double r, double s) { return std::min(r, s); }, 6, 2);
  io::write_eigensystem(d / "e.csv", es);
  const io::CsvTable t = io::read_csv(d / "e.csv");
  EXPECT_EQ(t.header, (std::vector<std::string>{"kind", "r", "w", "v1", "v2"}));
  ASSERT_EQ(t.rows.size(), 7u);
  EXPECT_EQ(t.rows[0][0], "lambda");
  EXPECT_EQ(std::stod(t.rows[0][3]), es.lambdas[0]);
  EXPECT_EQ(t.rows[1][0], "node");
}

TEST(Io, FieldSamplesWithSidecar) {
  const fs::path d = scratch_dir("samples");
  const std::vector<Point> pts{{0.1, 0.2}, {0.3, 0.4}, {0.5, 0.1}};
  std::vector<FieldSample> s{cholesky_synthesize({2, 0.5}, pts, 1, 0), cholesky_synthesize({2, 0.5}, pts, 1, 1)};
  io::write_field_samples(d / "s.csv", s);
  EXPECT_EQ(io::read_csv(d / "s.csv").rows.size(), 6u);
  const auto meta = nlohmann::json::parse(slurp(d / "s.json"));
  EXPECT_EQ(meta["method"], "cholesky");
  EXPECT_EQ(meta["replicas"], 2);
}

TEST(Io, SvgIsWellFormedEnough) {
  const fs::path d = scratch_dir("svg");
  io::write_svg_lines(d / "p.svg", "t", "x", {{"a", {0.1, 0.01}, {1.0, 2.0}}}, true);
  const std::string s = slurp(d / "p.svg");
  EXPECT_NE(s.find("<polyline"), std::string::npos);
  EXPECT_NE(s.find("</svg>"), std::string::npos);
}

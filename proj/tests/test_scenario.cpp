#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_support.hpp"

using namespace test;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("chern_extremal_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::InvalidArgument;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Evaluate, CosineTerm) {
  const GridSpec g(2, 8);
  const ScalarField u = evaluate({term({1, 0, 0, 2}, 0.5, 0.25)}, g);
  const ScalarField expect = sample(g, [](auto& x) {
    return 0.5 * std::cos(2 * pi * (x[0] + 2 * x[3]) + 0.25);
  });
  EXPECT_LT(sup_norm(u - expect), 1e-15);
  EXPECT_EQ(max_mode({term({1, 0, -3, 2}, 1.0)}), 3);
}

TEST(Evaluate, RejectsAliasedAndMisshapenModes) {
  const GridSpec g(2, 8);
  EXPECT_EQ(kind_of([&] { evaluate({term({4, 0, 0, 0}, 1.0)}, g); }), ErrorKind::AliasedMode);
  EXPECT_EQ(kind_of([&] { evaluate({term({1, 0}, 1.0)}, g); }), ErrorKind::InvalidArgument);
}

TEST(Realize, Examples) {
  const GridSpec g(2, 8);
  const HermitianMetricField flat = realize(FlatMetric{}, g);
  EXPECT_EQ(flat.at(5)[0], Complex(1.0));
  EXPECT_EQ(flat.at(5)[1], Complex(0.0));

  const HermitianMetricField cf = realize(conformal_flat(0.2), g);
  EXPECT_NEAR(cf.at(0)[0].real(), std::exp(0.2), 1e-15);
  EXPECT_NEAR(cf.at(0)[3].real(), std::exp(0.2), 1e-15);

  const HermitianMetricField od = realize(offdiagonal(), g);
  for (std::size_t p = 0; p < g.size(); p += 37) {
    EXPECT_EQ(od.at(p)[1], std::conj(od.at(p)[2]));
  }
}

TEST(Realize, PositivityMargin) {
  const GridSpec g(2, 8);
  EXPECT_NO_THROW(realize(nonkahler(0.9), g));
  const std::string msg = message_of([&] { realize(nonkahler(0.95), g); });
  EXPECT_NE(msg.find("LostPositivity"), std::string::npos);
  EXPECT_NE(msg.find("grid point"), std::string::npos);
}

TEST(Realize, Deterministic) {
  const GridSpec g(2, 8);
  const HermitianMetricField a = realize(offdiagonal(), g);
  const HermitianMetricField b = realize(offdiagonal(), g);
  EXPECT_EQ(0, std::memcmp(a.entries().data(), b.entries().data(),
                           a.entries().size() * sizeof(Complex)));
}

TEST(Cexf, RoundTripIsBitIdentical) {
  const fs::path d = scratch_dir("roundtrip");
  const GridSpec g(2, 8);
  const ScalarField u = random_band_limited(g, 3, 3, 1.0);
  write_field(u, d / "u.cexf");
  EXPECT_EQ(fs::file_size(d / "u.cexf"), 64 + 8 * g.size());
  const ScalarField v = read_field(d / "u.cexf");
  EXPECT_TRUE(v.spec() == g);
  EXPECT_EQ(0, std::memcmp(u.data(), v.data(), u.size() * sizeof(double)));

  std::ifstream is(d / "u.cexf", std::ios::binary);
  std::string header(64, '\0');
  is.read(header.data(), 64);
  EXPECT_EQ(header.rfind("CEXF1 n=2 N=8 axes=x1y1x2y2 count=4096", 0), 0u);
  EXPECT_EQ(header.back(), '\n');
}

TEST(Cexf, ConcatenatedRecords) {
  const fs::path d = scratch_dir("concat");
  const GridSpec g(2, 4);
  {
    std::ofstream os(d / "two.cexf", std::ios::binary);
    write_field(os, ScalarField(g, 1.0));
    write_field(os, ScalarField(g, 2.0));
  }
  const auto fields = read_fields(d / "two.cexf");
  ASSERT_EQ(fields.size(), 2u);
  EXPECT_EQ(fields[1][17], 2.0);
  EXPECT_EQ(kind_of([&] { read_field(d / "two.cexf"); }), ErrorKind::ShapeMismatch);
}

TEST(Cexf, Errors) {
  const fs::path d = scratch_dir("errors");
  const GridSpec g(2, 4);
  write_field(ScalarField(g, 1.0), d / "ok.cexf");
  const std::uintmax_t size = fs::file_size(d / "ok.cexf");

  fs::copy_file(d / "ok.cexf", d / "short.cexf");
  fs::resize_file(d / "short.cexf", size - 8);
  EXPECT_EQ(kind_of([&] { read_field(d / "short.cexf"); }), ErrorKind::ShapeMismatch);

  auto patch = [&](const std::string& name, const std::string& header) {
    fs::copy_file(d / "ok.cexf", d / name);
    std::fstream f(d / name, std::ios::in | std::ios::out | std::ios::binary);
    std::string h = header;
    h.resize(63, ' ');
    f.write((h + "\n").data(), 64);
  };
  patch("magic.cexf", "CEXF2 n=2 N=4 axes=x1y1x2y2 count=256");
  EXPECT_EQ(kind_of([&] { read_field(d / "magic.cexf"); }), ErrorKind::MalformedHeader);
  patch("axes.cexf", "CEXF1 n=2 N=4 axes=x1x2y1y2 count=256");
  EXPECT_EQ(kind_of([&] { read_field(d / "axes.cexf"); }), ErrorKind::MalformedHeader);
  patch("count.cexf", "CEXF1 n=2 N=4 axes=x1y1x2y2 count=255");
  EXPECT_EQ(kind_of([&] { read_field(d / "count.cexf"); }), ErrorKind::ShapeMismatch);
  patch("token.cexf", "CEXF1 n=2 N=4 axes=x1y1x2y2 count");
  EXPECT_EQ(kind_of([&] { read_field(d / "token.cexf"); }), ErrorKind::MalformedHeader);
  EXPECT_EQ(kind_of([&] { read_field(d / "missing.cexf"); }), ErrorKind::IoError);
}

TEST(Csv, LayoutAndRowCount) {
  const GridSpec g(2, 4);
  std::ostringstream os;
  write_csv(random_band_limited(g, 1, 1, 1.0), os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "x1,y1,x2,y2,value");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 256u);
}

TEST(ExplicitFile, MatchesPerturbedFamily) {
  const fs::path d = scratch_dir("explicit");
  const GridSpec g(2, 8);
  const HermitianMetricField m = realize(offdiagonal(), g);
  {
    std::ofstream os(d / "metric.cexf", std::ios::binary);
    for (const auto& [i, j, im] : {std::tuple{0, 0, false}, {0, 1, false}, {0, 1, true},
                                   {1, 1, false}}) {
      const ComplexField c = m.component(i, j);
      ScalarField part(g);
      for (std::size_t p = 0; p < g.size(); ++p) part[p] = im ? c[p].imag() : c[p].real();
      write_field(os, part);
    }
  }
  const HermitianMetricField back = realize(ExplicitFileMetric{d / "metric.cexf"}, g);
  for (std::size_t k = 0; k < m.entries().size(); ++k) {
    EXPECT_EQ(m.entries()[k], back.entries()[k]);
  }
  EXPECT_EQ(kind_of([&] { realize(ExplicitFileMetric{d / "metric.cexf"}, GridSpec(2, 4)); }),
            ErrorKind::ShapeMismatch);
}

TEST(Scenario, ParsesFullDocument) {
  const Scenario s = parse_scenario(R"(
name: demo
n: 2
N: 16
seed: 9
metric:
  family: perturbed_hermitian
  entries:
    - {i: 1, j: 2, part: im, terms: [{mode: [0, 1, 1, 0], amplitude: 0.1, phase: 0.5}]}
task:
  kind: calabi
  p: [2, 3.5]
  t: [0, 0.1]
tolerances: {spectral: 1.0e-9}
)");
  EXPECT_EQ(s.name, "demo");
  EXPECT_EQ(s.seed, 9u);
  EXPECT_EQ(s.task.kind, TaskKind::Calabi);
  EXPECT_EQ(s.task.p, (std::vector<double>{2.0, 3.5}));
  EXPECT_EQ(s.task.t, (std::vector<double>{0.0, 0.1}));
  EXPECT_EQ(s.tolerances.spectral, 1e-9);
  EXPECT_EQ(s.tolerances.machine, 1e-12);
  const auto& e = std::get<PerturbedHermitianMetric>(s.metric).entries.at(0);
  EXPECT_EQ(e.i, 0);
  EXPECT_EQ(e.j, 1);
  EXPECT_TRUE(e.imaginary);
  EXPECT_EQ(e.terms.at(0).phase, 0.5);
}

TEST(Scenario, Defaults) {
  const Scenario s = parse_scenario("name: f\nn: 3\nN: 8\nmetric: {family: flat}\n");
  EXPECT_EQ(s.task.kind, TaskKind::Solve);
  EXPECT_EQ(s.task.p, (std::vector<double>{2.0, 3.0}));
  EXPECT_EQ(s.seed, 0u);
}

TEST(Scenario, ErrorsCarryLineAndField) {
  auto msg = [](const std::string& text) {
    return message_of([&] { parse_scenario(text, "bad.yaml"); });
  };
  const std::string base = "name: x\nn: 2\nN: 8\n";
  std::string m = msg(base + "metric:\n  family: sphere\n");
  EXPECT_NE(m.find("ConfigError"), std::string::npos);
  EXPECT_NE(m.find("bad.yaml:5"), std::string::npos);
  EXPECT_NE(m.find("metric.family"), std::string::npos);

  m = msg(base + "metric: {family: flat}\ntask: {kind: sweep, N: [16, 8]}\n");
  EXPECT_NE(m.find("task.N"), std::string::npos);

  m = msg(base + "metric: {family: flat}\ntask: {kind: calabi, p: [1]}\n");
  EXPECT_NE(m.find("task.p"), std::string::npos);

  m = msg(base + "metric: {family: flat}\ncolour: red\n");
  EXPECT_NE(m.find("colour"), std::string::npos);

  m = msg("name: x\nn: 2\nN: 12\nmetric: {family: flat}\n");
  EXPECT_NE(m.find("bad.yaml:3"), std::string::npos);

  m = msg(base + "metric:\n  family: conformal_flat\n  phi: [{mode: [1, 0], amplitude: 1}]\n");
  EXPECT_NE(m.find("metric.phi[0].mode"), std::string::npos);

  m = msg(base + "metric: {family: flat}\ntolerances: {machine: -1}\n");
  EXPECT_NE(m.find("tolerances.machine"), std::string::npos);

  EXPECT_EQ(kind_of([&] { parse_scenario("name: [unclosed", "bad.yaml"); }),
            ErrorKind::ConfigError);
}

TEST(Scenario, ShippedScenariosLoad) {
  const fs::path dir = fs::path(CHERN_EXTREMAL_SOURCE_DIR) / "scenarios";
  int count = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".yaml") continue;
    const Scenario s = load_scenario(entry.path());
    EXPECT_EQ(s.name, entry.path().stem().string());
    EXPECT_NO_THROW(realize(s.metric, s.grid())) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 5);
}

TEST(Scenario, FilePathResolvesAgainstScenarioDirectory) {
  const fs::path d = scratch_dir("scenario_file");
  {
    std::ofstream os(d / "s.yaml");
    os << "name: s\nn: 2\nN: 8\nmetric: {family: file, path: m.cexf}\n";
  }
  const Scenario s = load_scenario(d / "s.yaml");
  EXPECT_EQ(std::get<ExplicitFileMetric>(s.metric).path, d / "m.cexf");
}

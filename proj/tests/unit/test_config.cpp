#include <filesystem>
#include <fstream>
#include <sstream>

#include "bloch/config.hpp"
#include "bloch/experiment.hpp"
#include "bloch/io.hpp"
#include "doctest.h"

using namespace bloch;

namespace {

std::vector<std::string> problems_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("bloch_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("defaults") {
  const auto c = parse_config("{}");
  CHECK(c.dimension == 3);
  CHECK(c.grid == 16);
  CHECK(c.J == 16);
  CHECK(c.K == 64);
  CHECK(c.metric.kind == MetricConfig::Kind::flat);
  CHECK(c.potential.potential.is_zero());
  CHECK(c.lp.restarts == 20);
  CHECK(c.bands.half_width == std::vector<int>{3, 3, 3});
  CHECK(c.format == "csv");
}

TEST_CASE("singular exponent outside L^{n/2} is rejected") {
  const auto p = problems_of(R"({"potential": {"kind": "singular", "alpha": 2.5}})");
  REQUIRE(p.size() == 1);
  CHECK(p[0].rfind("potential.alpha:", 0) == 0);
  CHECK(p[0].find("L^{n/2}") != std::string::npos);
  CHECK(p[0].find("2.5") != std::string::npos);
}

TEST_CASE("every problem is reported") {
  const auto p = problems_of(R"({"grid": 15, "lp": {"restarts": 0}, "colour": 1, "output": {"format": "xml"},
                                 "metric": {"kind": "round"}})");
  CHECK(p.size() == 5);
  CHECK(mentions(p, "grid: must be even"));
  CHECK(mentions(p, "lp.restarts"));
  CHECK(mentions(p, "colour"));
  CHECK(mentions(p, "output.format"));
  CHECK(mentions(p, "metric.kind"));
  CHECK(!problems_of("{not json").empty());
  CHECK(mentions(problems_of(R"({"potential": {"kind": "samples", "file": "no/such/file"}})"), "potential.file"));
}

TEST_CASE("normalized echo is a fixed point") {
  const std::string text = R"({"grid": 24, "tau": "4..64",
    "metric": {"kind": "transversal", "conformal": {"form": "exp", "terms": [{"wave": [1,0,0], "sin": 0.2}]},
               "g0": [[{"constant": 1, "terms": [{"wave": [1,0], "cos": 0.2}]}, {"constant": 0}],
                      [{"constant": 0}, {"constant": 1}]]},
    "potential": {"kind": "trig", "terms": [{"wave": [1,0,0], "cos": 3}]}})";
  const auto c = parse_config(text);
  const std::string once = normalized_json(c);
  const auto again = parse_config(once);
  CHECK(normalized_json(again) == once);
  CHECK(config_hash(again) == config_hash(c));
  CHECK(config_hash(c).size() == 16);
}

TEST_CASE("hash ignores threads and output, not physics") {
  const auto a = parse_config("{}");
  const auto b = parse_config(R"({"threads": 8, "output": {"dir": "elsewhere", "format": "json"}})");
  const auto d = parse_config(R"({"seed": 2})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(d));
  CHECK(config_hash(a) == "046f6991840925f3");
}

TEST_CASE("tau lists") {
  CHECK(parse_tau_list("1,2,5,10") == std::vector<double>{1, 2, 5, 10});
  CHECK(parse_tau_list("4..64") == std::vector<double>{4, 8, 16, 32, 64});
  CHECK(parse_tau_list("4..20:4") == std::vector<double>{4, 8, 12, 16, 20});
  CHECK(parse_tau_list("1.5") == std::vector<double>{1.5});
  CHECK_THROWS_AS(parse_tau_list("4..x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_tau_list("8..4"), std::invalid_argument);
  CHECK_THROWS_AS(parse_tau_list(""), std::invalid_argument);
  CHECK(parse_config(R"({"tau": "4..16"})").tau == std::vector<double>{4, 8, 16});
  CHECK(parse_config(R"({"tau": [1, 2]})").tau == std::vector<double>{1, 2});
}

TEST_CASE("dotted overrides") {
  std::string t = apply_override("{}", "lp.restarts", "5");
  t = apply_override(t, "output.dir", "runs/a");
  const auto c = parse_config(t);
  CHECK(c.lp.restarts == 5);
  CHECK(c.out_dir == "runs/a");
  CHECK_THROWS_AS(apply_override("{}", "", "1"), ConfigError);
  CHECK_THROWS_AS(parse_config(apply_override("{}", "lp.bogus", "1")), ConfigError);
}

TEST_CASE("sampled potential files") {
  const auto dir = scratch("samples");
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "q.txt");
    for (int i = 0; i < 4 * 4 * 4; ++i) f << 0.5 * i << "\n";
  }
  const auto c = parse_config(R"({"grid": 4, "potential": {"kind": "samples", "file": "q.txt"}})", dir.string());
  const auto q = sample_potential(c);
  REQUIRE(q.size() == 64);
  CHECK(q[3] == 1.5);
  const auto bad = parse_config(R"({"grid": 6, "potential": {"kind": "samples", "file": "q.txt"}})", dir.string());
  CHECK_THROWS_AS(sample_potential(bad), ConfigError);
}

TEST_CASE("table formats") {
  Table t({"a", "b", "ok"});
  t.add({Table::cell(0.1), Table::cell(3), Table::cell(true)});
  t.add({Table::cell(1.0 / 0.0), Table::cell(-2), Table::cell(false)});
  CHECK(t.csv() == "a,b,ok\n0.1,3,true\ninf,-2,false\n");
  CHECK(t.json().find("\"a\": \"inf\"") != std::string::npos);
  CHECK_THROWS_AS(t.add({"1"}), std::invalid_argument);
}

TEST_CASE("runs write artifacts and are reproducible across thread counts") {
  const auto a = scratch("run_a"), b = scratch("run_b");
  for (const std::string& name : {std::string("gelfand-check"), std::string("bands")}) {
    auto ca = parse_config(R"({"grid": 12, "gelfand": {"samples": 4}, "bands": {"count": 4}})");
    auto cb = ca;
    ca.out_dir = a.string();
    cb.out_dir = b.string();
    cb.threads = 4;
    const auto ra = run_subcommand(name, ca);
    const auto rb = run_subcommand(name, cb);
    CHECK(ra.pass);
    CHECK(ra.artifacts == rb.artifacts);
    for (const auto& f : ra.artifacts) {
      if (f.find("manifest") != std::string::npos) continue;
      CHECK(slurp(a / f) == slurp(b / f));
    }
  }
  CHECK(std::filesystem::exists(a / "bands.csv"));
  CHECK(std::filesystem::exists(a / "gelfand_check_manifest.json"));
  CHECK(slurp(a / "bands.csv").rfind("theta_1,theta_2,theta_3,band_index,re_lambda,im_lambda\n", 0) == 0);
  CHECK(slurp(a / "bands_manifest.json").find(config_hash(parse_config(
            R"({"grid": 12, "gelfand": {"samples": 4}, "bands": {"count": 4}})"))) != std::string::npos);
}

TEST_CASE("unknown and unresolvable runs") {
  auto c = parse_config("{}");
  c.out_dir = scratch("bad").string();
  CHECK_THROWS_AS(run_subcommand("nope", c), ConfigError);
  auto curved = parse_config(R"({"metric": {"kind": "transversal",
      "g0": [[{"constant": 1}, {"constant": 0, "terms": [{"wave": [1,1], "cos": 0.1}]}],
             [{"constant": 0, "terms": [{"wave": [1,1], "cos": 0.1}]}, {"constant": 1}]]}})");
  curved.out_dir = c.out_dir;
  CHECK_THROWS_AS(run_subcommand("sogge", curved), ConfigError);
  CHECK(is_subcommand("thomas"));
  CHECK(subcommand_names().size() == 11);
}

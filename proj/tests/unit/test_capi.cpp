#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "bloch/bloch.h"
#include "doctest.h"

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  bloch_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("version and subcommand listing") {
  CHECK(std::string(bloch_version()).find('.') != std::string::npos);
  CHECK(bloch_subcommand_count() == 11);
  CHECK(std::string(bloch_subcommand_name(0)) == "transverse-spec");
  CHECK(bloch_subcommand_name(11) == nullptr);
}

TEST_CASE("configuration errors carry every field") {
  char* normalized = nullptr;
  CHECK(bloch_config_validate(R"({"grid": 15, "K": 0})", ".", &normalized) == BLOCH_ERR_CONFIG);
  CHECK(normalized == nullptr);
  const std::string err = bloch_last_error();
  CHECK(err.find("grid:") != std::string::npos);
  CHECK(err.find("K:") != std::string::npos);
  CHECK(err.find('\n') != std::string::npos);

  CHECK(bloch_config_validate("{}", nullptr, &normalized) == BLOCH_OK);
  CHECK(std::string(bloch_last_error()).empty());
  CHECK(take(normalized).find("\"grid\": 16") != std::string::npos);
  CHECK(bloch_config_validate(nullptr, nullptr, nullptr) == BLOCH_ERR_INVALID_ARGUMENT);
}

TEST_CASE("session lifecycle") {
  bloch_session* s = nullptr;
  REQUIRE(bloch_session_create(R"({"grid": 12})", ".", &s) == BLOCH_OK);
  REQUIRE(s != nullptr);

  char* h = nullptr;
  REQUIRE(bloch_session_hash(s, &h) == BLOCH_OK);
  const std::string h0 = take(h);
  CHECK(h0.size() == 16);

  CHECK(bloch_session_set(s, "lp.restarts", "3") == BLOCH_OK);
  CHECK(bloch_session_set(s, "lp.restarts", "0") == BLOCH_ERR_CONFIG);
  CHECK(std::string(bloch_last_error()).find("lp.restarts") != std::string::npos);
  CHECK(bloch_session_set_tau(s, "4..16") == BLOCH_OK);
  CHECK(bloch_session_set_tau(s, "4..x") == BLOCH_ERR_CONFIG);
  CHECK(bloch_session_set_threads(s, 0) == BLOCH_ERR_CONFIG);
  CHECK(bloch_session_set_seed(s, 7) == BLOCH_OK);

  // a rejected edit leaves the session as it was
  char* cfg = nullptr;
  REQUIRE(bloch_session_config(s, &cfg) == BLOCH_OK);
  const std::string text = take(cfg);
  CHECK(text.find("\"restarts\": 3") != std::string::npos);
  CHECK(text.find("\"seed\": 7") != std::string::npos);

  REQUIRE(bloch_session_hash(s, &h) == BLOCH_OK);
  CHECK(take(h) != h0);

  const auto out = std::filesystem::temp_directory_path() / "bloch_capi_run";
  std::filesystem::remove_all(out);
  CHECK(bloch_session_set_output(s, out.c_str(), "json") == BLOCH_OK);
  CHECK(bloch_session_set_output(s, nullptr, "xml") == BLOCH_ERR_CONFIG);

  int passed = 0;
  char* report = nullptr;
  CHECK(bloch_session_run(s, "carleman", &passed, &report) == BLOCH_OK);
  CHECK(passed == 1);
  CHECK(take(report).find("\"name\": \"carleman\"") != std::string::npos);
  CHECK(std::filesystem::exists(out / "carleman.json"));
  CHECK(std::filesystem::exists(out / "carleman_manifest.json"));

  CHECK(bloch_session_run(s, "nope", &passed, nullptr) == BLOCH_ERR_UNKNOWN_SUBCOMMAND);
  bloch_session_destroy(s);
  bloch_session_destroy(nullptr);
}

TEST_CASE("numeric helpers") {
  double v = 0.0;
  CHECK(bloch_im_sqrt_shift(100.0, 1.0, &v) == BLOCH_OK);
  CHECK(std::abs(v - 0.4999937) < 1e-6);
  CHECK(bloch_carleman_min(3, 16, 64, 16, 1.0, &v) == BLOCH_OK);
  CHECK(std::abs(v - std::sqrt(17.0) / 4.0) < 1e-12);
  CHECK(bloch_carleman_min(1, 16, 64, 16, 1.0, &v) == BLOCH_ERR_INVALID_ARGUMENT);
  CHECK(bloch_carleman_min(3, 16, 64, 16, 1.0, nullptr) == BLOCH_ERR_INVALID_ARGUMENT);
}

#include "bloch/bloch.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <stdexcept>
#include <string>

#include "bloch/config.hpp"
#include "bloch/estimates.hpp"
#include "bloch/experiment.hpp"
#include "bloch/io.hpp"
#include "bloch/resolvent.hpp"

struct bloch_session {
  std::string json;  // always a document parse_config accepts
  std::string base_dir;
  bloch::ExperimentConfig config;
};

namespace {

thread_local std::string last_error;

bloch_status fail(bloch_status s, std::string msg) {
  last_error = std::move(msg);
  return s;
}

std::string joined(const bloch::ConfigError& e) {
  std::string s;
  for (const auto& p : e.problems()) s += (s.empty() ? "" : "\n") + p;
  return s;
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

template <class F>
bloch_status guarded(F&& f) {
  last_error.clear();
  try {
    return f();
  } catch (const bloch::ConfigError& e) {
    return fail(BLOCH_ERR_CONFIG, joined(e));
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(BLOCH_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(BLOCH_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::domain_error& e) {
    return fail(BLOCH_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(BLOCH_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(BLOCH_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(BLOCH_ERR_INTERNAL, "unknown error");
  }
}

// Re-parses after an edit so the session never holds an invalid document.
bloch_status reparse(bloch_session* s, std::string json) {
  s->config = bloch::parse_config(json, s->base_dir);
  s->json = std::move(json);
  return BLOCH_OK;
}

}  // namespace

extern "C" {

const char* bloch_version(void) { return BLOCH_VERSION_STRING; }

const char* bloch_last_error(void) { return last_error.c_str(); }

void bloch_string_free(char* s) { std::free(s); }

bloch_status bloch_config_validate(const char* json, const char* base_dir, char** normalized) {
  if (!json) return fail(BLOCH_ERR_INVALID_ARGUMENT, "json: null");
  return guarded([&] {
    const auto c = bloch::parse_config(json, base_dir ? base_dir : ".");
    if (normalized) *normalized = dup(bloch::normalized_json(c));
    return BLOCH_OK;
  });
}

bloch_status bloch_session_create(const char* json, const char* base_dir, bloch_session** out) {
  if (!out) return fail(BLOCH_ERR_INVALID_ARGUMENT, "out: null");
  *out = nullptr;
  return guarded([&] {
    auto s = std::make_unique<bloch_session>();
    s->base_dir = base_dir ? base_dir : ".";
    reparse(s.get(), json ? json : "{}");
    *out = s.release();
    return BLOCH_OK;
  });
}

void bloch_session_destroy(bloch_session* s) { delete s; }

bloch_status bloch_session_set(bloch_session* s, const char* field, const char* value) {
  if (!s || !field || !value) return fail(BLOCH_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { return reparse(s, bloch::apply_override(s->json, field, value)); });
}

bloch_status bloch_session_set_tau(bloch_session* s, const char* tau_list) {
  if (!s || !tau_list) return fail(BLOCH_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::vector<double> taus;
    try {
      taus = bloch::parse_tau_list(tau_list);
    } catch (const std::invalid_argument& e) {
      throw bloch::ConfigError({e.what()});
    }
    std::string arr = "[";
    for (std::size_t i = 0; i < taus.size(); ++i) arr += (i ? "," : "") + bloch::Table::cell(taus[i]);
    return reparse(s, bloch::apply_override(s->json, "tau", arr + "]"));
  });
}

bloch_status bloch_session_set_seed(bloch_session* s, uint64_t seed) {
  if (!s) return fail(BLOCH_ERR_INVALID_ARGUMENT, "session: null");
  return guarded([&] { return reparse(s, bloch::apply_override(s->json, "seed", std::to_string(seed))); });
}

bloch_status bloch_session_set_threads(bloch_session* s, int threads) {
  if (!s) return fail(BLOCH_ERR_INVALID_ARGUMENT, "session: null");
  return guarded([&] { return reparse(s, bloch::apply_override(s->json, "threads", std::to_string(threads))); });
}

bloch_status bloch_session_set_output(bloch_session* s, const char* dir, const char* format) {
  if (!s) return fail(BLOCH_ERR_INVALID_ARGUMENT, "session: null");
  return guarded([&] {
    std::string j = s->json;
    if (dir) j = bloch::apply_override(j, "output.dir", std::string("\"") + dir + "\"");
    if (format) j = bloch::apply_override(j, "output.format", std::string("\"") + format + "\"");
    return reparse(s, std::move(j));
  });
}

bloch_status bloch_session_config(const bloch_session* s, char** normalized) {
  if (!s || !normalized) return fail(BLOCH_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *normalized = dup(bloch::normalized_json(s->config));
    return BLOCH_OK;
  });
}

bloch_status bloch_session_hash(const bloch_session* s, char** hash) {
  if (!s || !hash) return fail(BLOCH_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *hash = dup(bloch::config_hash(s->config));
    return BLOCH_OK;
  });
}

size_t bloch_subcommand_count(void) { return bloch::subcommand_names().size(); }

const char* bloch_subcommand_name(size_t i) {
  const auto& v = bloch::subcommand_names();
  return i < v.size() ? v[i].c_str() : nullptr;
}

bloch_status bloch_session_run(bloch_session* s, const char* subcommand, int* passed, char** report) {
  if (!s || !subcommand) return fail(BLOCH_ERR_INVALID_ARGUMENT, "null argument");
  if (!bloch::is_subcommand(subcommand))
    return fail(BLOCH_ERR_UNKNOWN_SUBCOMMAND, std::string("subcommand: unknown '") + subcommand + "'");
  return guarded([&] {
    const auto r = bloch::run_subcommand(subcommand, s->config);
    if (passed) *passed = r.pass ? 1 : 0;
    if (report) *report = dup(bloch::reports_json(r.reports));
    return BLOCH_OK;
  });
}

bloch_status bloch_im_sqrt_shift(double tau, double rho, double* out) {
  if (!out) return fail(BLOCH_ERR_INVALID_ARGUMENT, "out: null");
  return guarded([&] {
    *out = bloch::im_sqrt_shift(tau, rho);
    return BLOCH_OK;
  });
}

bloch_status bloch_carleman_min(int n, int grid, int K, int J, double tau, double* out) {
  if (!out) return fail(BLOCH_ERR_INVALID_ARGUMENT, "out: null");
  if (n < 2 || grid < 2 || K < 1 || J < 0) return fail(BLOCH_ERR_INVALID_ARGUMENT, "n >= 2, grid >= 2, K >= 1, J >= 0");
  return guarded([&] {
    const auto basis = bloch::TransverseBasis::plane_waves(bloch::TorusGrid(n - 1, grid), K);
    *out = bloch::carleman_min_modulus(tau, basis, J).min_modulus;
    return BLOCH_OK;
  });
}

}  // extern "C"

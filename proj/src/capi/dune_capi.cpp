// SPDX-License-Identifier: Apache-2.0
#include "dune/dune.h"

#include <algorithm>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "dune/app/pipeline.hpp"
#include "dune/common/error.hpp"
#include "dune/nn/checkpoint.hpp"

struct dune_context {
  std::unique_ptr<dune::app::Context> ctx;
  dune_log_fn log_fn = nullptr;
  void* log_user = nullptr;
  std::string last_error;
  std::string result = "{}";
  std::string scratch;
};

struct dune_model {
  dune::nn::Checkpoint ckpt;
  std::unique_ptr<dune::nn::DuneNet<float>> net;
  std::string last_error;
};

namespace {

template <class F>
dune_status guarded(std::string& error, F&& body) {
  try {
    body();
    error.clear();
    return DUNE_OK;
  } catch (const dune::UsageError& e) {
    error = e.what();
    return DUNE_E_USAGE;
  } catch (const dune::DataError& e) {
    error = e.what();
    return DUNE_E_DATA;
  } catch (const dune::NumericError& e) {
    error = e.what();
    return DUNE_E_NUMERIC;
  } catch (const std::filesystem::filesystem_error& e) {
    error = e.what();
    return DUNE_E_DATA;
  } catch (const std::bad_alloc&) {
    error = "out of memory";
    return DUNE_E_INTERNAL;
  } catch (const std::exception& e) {
    error = std::string("internal error: ") + e.what();
    return DUNE_E_INTERNAL;
  } catch (...) {
    error = "internal error: unknown exception";
    return DUNE_E_INTERNAL;
  }
}

dune_status command(dune_context* c, auto&& run) {
  if (!c) return DUNE_E_USAGE;
  return guarded(c->last_error, [&] { c->result = run(*c->ctx).dump(2); });
}

void require(bool ok, const char* what) {
  if (!ok) throw dune::UsageError(what);
}

std::optional<std::string> opt(const char* s) {
  if (!s || !*s) return std::nullopt;
  return std::string(s);
}

void install_sink(dune_context* c) {
  if (!c->log_fn) {
    c->ctx->sink = nullptr;
    return;
  }
  c->ctx->sink = [c](dune::app::LogLevel lvl, const std::string& msg) {
    c->log_fn(static_cast<dune_log_level>(lvl), msg.c_str(), c->log_user);
  };
}

}  // namespace

extern "C" {

const char* dune_version(void) { return dune::app::kVersion; }

const char* dune_status_name(dune_status s) {
  switch (s) {
    case DUNE_OK: return "ok";
    case DUNE_E_USAGE: return "usage error";
    case DUNE_E_DATA: return "data error";
    case DUNE_E_NUMERIC: return "numeric error";
    case DUNE_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

dune_status dune_context_create(const char* out_dir, dune_context** out) {
  if (!out) return DUNE_E_USAGE;
  *out = nullptr;
  std::string ignored;
  return guarded(ignored, [&] {
    require(out_dir && *out_dir, "output directory must be given");
    auto c = std::make_unique<dune_context>();
    c->ctx = std::make_unique<dune::app::Context>(out_dir);
    *out = c.release();
  });
}

void dune_context_destroy(dune_context* ctx) { delete ctx; }

dune_status dune_context_add_config_file(dune_context* c, const char* path) {
  if (!c) return DUNE_E_USAGE;
  return guarded(c->last_error, [&] {
    require(path && *path, "config path must be given");
    if (!std::filesystem::exists(path)) throw dune::DataError(std::string("config file not found: ") + path);
    c->ctx->layers.files.emplace_back(path);
    c->ctx->resolve();
  });
}

dune_status dune_context_set(dune_context* c, const char* key, const char* value) {
  if (!c) return DUNE_E_USAGE;
  return guarded(c->last_error, [&] {
    require(key && value, "key and value must be given");
    // Validate against a scratch copy first so a bad value leaves the context intact.
    dune::Config probe = c->ctx->config;
    probe.set(key, value);
    c->ctx->layers.overrides.emplace_back(key, value);
    c->ctx->resolve();
  });
}

dune_status dune_context_use_environment(dune_context* c, int enabled) {
  if (!c) return DUNE_E_USAGE;
  return guarded(c->last_error, [&] {
    c->ctx->layers.environment = enabled != 0;
    c->ctx->resolve();
  });
}

dune_status dune_context_set_log_level(dune_context* c, dune_log_level level) {
  if (!c) return DUNE_E_USAGE;
  return guarded(c->last_error, [&] {
    require(level >= DUNE_LOG_ERROR && level <= DUNE_LOG_DEBUG, "log level out of range");
    static const char* const names[] = {"error", "warn", "info", "debug"};
    c->ctx->layers.overrides.emplace_back("log.level", names[level]);
    c->ctx->resolve();
  });
}

dune_status dune_context_set_log_callback(dune_context* c, dune_log_fn fn, void* user) {
  if (!c) return DUNE_E_USAGE;
  c->log_fn = fn;
  c->log_user = user;
  install_sink(c);
  return DUNE_OK;
}

const char* dune_context_get(dune_context* c, const char* key) {
  if (!c || !key || !c->ctx->config.has(key)) return nullptr;
  c->scratch = c->ctx->config.get(key);
  return c->scratch.c_str();
}

const char* dune_context_config_dump(dune_context* c) {
  if (!c) return "";
  c->scratch = c->ctx->config.dump();
  return c->scratch.c_str();
}

const char* dune_context_last_error(const dune_context* c) { return c ? c->last_error.c_str() : "null context"; }
const char* dune_context_result_json(const dune_context* c) { return c ? c->result.c_str() : "{}"; }

dune_status dune_synth(dune_context* c, int n_lat, int n_lon, int years, int last_year, uint64_t seed,
                       double noise_scale) {
  return command(c, [&](dune::app::Context& ctx) {
    require(n_lat > 0 && n_lon > 0, "grid dimensions must be positive");
    require(noise_scale >= 0, "noise scale must be non-negative");
    dune::ingest::SyntheticOptions o;
    o.n_lat = static_cast<std::size_t>(n_lat);
    o.n_lon = static_cast<std::size_t>(n_lon);
    o.years = years;
    o.last_year = last_year;
    o.seed = seed;
    o.noise_scale = noise_scale;
    return dune::app::run_synth(ctx, o);
  });
}

dune_status dune_ingest(dune_context* c, const char* const* sources, size_t n, const char* range) {
  return command(c, [&](dune::app::Context& ctx) {
    require(sources || n == 0, "sources array is null");
    std::vector<std::filesystem::path> src;
    for (size_t i = 0; i < n; ++i) {
      require(sources[i] != nullptr, "null source path");
      src.emplace_back(sources[i]);
    }
    std::optional<dune::StampRange> r;
    if (auto s = opt(range)) r = dune::StampRange::parse(*s);
    return dune::app::run_ingest(ctx, src, r);
  });
}

dune_status dune_climatology(dune_context* c) { return command(c, dune::app::run_climatology); }
dune_status dune_train(dune_context* c) { return command(c, dune::app::run_train); }

dune_status dune_forecast(dune_context* c, const char* range) {
  return command(c, [&](dune::app::Context& ctx) {
    std::optional<dune::StampRange> r;
    if (auto s = opt(range)) r = dune::StampRange::parse(*s);
    return dune::app::run_forecast(ctx, r);
  });
}

dune_status dune_rollout(dune_context* c, const char* start, int horizon, int truth_feedback) {
  return command(c, [&](dune::app::Context& ctx) {
    require(start && *start, "rollout needs a start stamp");
    return dune::app::run_rollout(ctx, dune::Stamp::parse(start), horizon, truth_feedback != 0);
  });
}

dune_status dune_baseline(dune_context* c, const char* kinds) {
  return command(c, [&](dune::app::Context& ctx) {
    std::vector<dune::baselines::BaselineKind> ks;
    if (auto s = opt(kinds))
      for (const auto& k : dune::split(*s, ',')) ks.push_back(dune::baselines::parse_baseline_kind(dune::trim(k)));
    return dune::app::run_baseline(ctx, ks);
  });
}

dune_status dune_score(dune_context* c, const char* const* files, size_t n) {
  return command(c, [&](dune::app::Context& ctx) {
    require(files || n == 0, "category file array is null");
    std::vector<std::filesystem::path> f;
    for (size_t i = 0; i < n; ++i) {
      require(files[i] != nullptr, "null category file path");
      f.emplace_back(files[i]);
    }
    return dune::app::run_score(ctx, f);
  });
}

dune_status dune_ensemble(dune_context* c, const char* members_dir, int coarsen) {
  return command(c, [&](dune::app::Context& ctx) {
    require(coarsen >= 1, "coarsen factor must be >= 1");
    std::optional<std::filesystem::path> m;
    if (auto s = opt(members_dir)) m = *s;
    return dune::app::run_ensemble(ctx, m, coarsen);
  });
}

dune_status dune_plot(dune_context* c, const char* what, const char* map_stamp) {
  return command(c, [&](dune::app::Context& ctx) {
    std::optional<dune::Stamp> s;
    if (auto t = opt(map_stamp)) s = dune::Stamp::parse(*t);
    return dune::app::run_plot(ctx, opt(what).value_or("all"), s);
  });
}

dune_status dune_model_summary(dune_context* c) { return command(c, dune::app::run_model_summary); }

dune_status dune_model_open(const char* path, dune_model** out) {
  if (!out) return DUNE_E_USAGE;
  *out = nullptr;
  auto m = std::make_unique<dune_model>();
  const auto st = guarded(m->last_error, [&] {
    require(path && *path, "checkpoint path must be given");
    m->ckpt = dune::nn::load_checkpoint(path);
    m->net = std::make_unique<dune::nn::DuneNet<float>>(m->ckpt.model);
    std::copy(m->ckpt.params.begin(), m->ckpt.params.end(), m->net->params().begin());
  });
  if (st == DUNE_OK) *out = m.release();
  return st;
}

void dune_model_close(dune_model* m) { delete m; }
const char* dune_model_last_error(const dune_model* m) { return m ? m->last_error.c_str() : "null model"; }
size_t dune_model_parameter_count(const dune_model* m) { return m ? m->net->parameter_count() : 0; }
int dune_model_in_channels(const dune_model* m) { return m ? m->ckpt.model.in_channels : 0; }
int dune_model_out_channels(const dune_model* m) { return m ? m->ckpt.model.out_channels : 0; }
int dune_model_n_lat(const dune_model* m) { return m ? m->ckpt.model.n_lat : 0; }
int dune_model_n_lon(const dune_model* m) { return m ? m->ckpt.model.n_lon : 0; }

dune_status dune_model_forward(dune_model* m, const float* input, size_t in_len, float* mean_out, size_t out_len,
                               float* heads) {
  if (!m) return DUNE_E_USAGE;
  return guarded(m->last_error, [&] {
    const auto& mc = m->ckpt.model;
    const std::size_t plane = static_cast<std::size_t>(mc.n_lat) * mc.n_lon;
    require(input && mean_out, "input and output buffers must be given");
    if (in_len != plane * mc.in_channels || out_len != plane * mc.out_channels)
      throw dune::UsageError("buffer sizes do not match the model: expected " +
                             std::to_string(plane * mc.in_channels) + " inputs and " +
                             std::to_string(plane * mc.out_channels) + " outputs");
    dune::nn::Tensor<float> x(mc.in_channels, mc.n_lat, mc.n_lon);
    std::copy(input, input + in_len, x.data.begin());
    const auto y = m->net->forward(x);
    std::copy(y.mean.data.begin(), y.mean.data.end(), mean_out);
    if (heads)
      for (int h = 0; h < 4; ++h) std::copy(y.heads[h].data.begin(), y.heads[h].data.end(), heads + h * out_len);
  });
}

}  // extern "C"

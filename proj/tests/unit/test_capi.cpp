// SPDX-License-Identifier: Apache-2.0
// Exercises the shared library through its C interface only.
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "dune/dune.h"
#include "helpers.hpp"
#include "json.hpp"

namespace {

struct Ctx {
  dune_context* p = nullptr;
  explicit Ctx(const std::string& dir) {
    REQUIRE(dune_context_create(dir.c_str(), &p) == DUNE_OK);
    dune_context_use_environment(p, 0);
    dune_context_set_log_level(p, DUNE_LOG_ERROR);
  }
  ~Ctx() { dune_context_destroy(p); }
  nlohmann::json result() const { return nlohmann::json::parse(dune_context_result_json(p)); }
};

}  // namespace

TEST_CASE("context configuration through the C interface") {
  const auto dir = testutil::temp_dir("capi_cfg");
  Ctx c(dir.string());
  CHECK(std::string(dune_version()) == "0.1.0");
  CHECK(std::string(dune_status_name(DUNE_E_DATA)) != "");
  CHECK(dune_context_set(c.p, "train.patience", "7") == DUNE_OK);
  CHECK(std::string(dune_context_get(c.p, "train.patience")) == "7");
  CHECK(dune_context_get(c.p, "no.such.key") == nullptr);
  CHECK(dune_context_set(c.p, "no.such.key", "1") == DUNE_E_USAGE);
  CHECK(std::string(dune_context_last_error(c.p)).find("no.such.key") != std::string::npos);
  CHECK(std::string(dune_context_config_dump(c.p)).find("train.patience = 7") != std::string::npos);
  CHECK(dune_context_create(nullptr, nullptr) == DUNE_E_USAGE);
  CHECK(dune_context_add_config_file(c.p, (dir / "missing.cfg").string().c_str()) != DUNE_OK);
  // Bad values surface when a command reads them.
  CHECK(dune_context_set(c.p, "train.max_epochs", "many") == DUNE_OK);
  CHECK(dune_context_set(c.p, "model.depth", "2") == DUNE_OK);
  CHECK(dune_context_set(c.p, "model.channels", "4,8,16") == DUNE_OK);
  CHECK(dune_synth(c.p, 8, 16, 11, 2023, 7, 1.0) == DUNE_OK);
  CHECK(dune_train(c.p) == DUNE_E_USAGE);
}

TEST_CASE("a small end-to-end run through the C interface") {
  const auto dir = testutil::temp_dir("capi_run");
  Ctx c(dir.string());
  int logged = 0;
  dune_context_set_log_level(c.p, DUNE_LOG_INFO);
  dune_context_set_log_callback(
      c.p, [](dune_log_level, const char*, void* u) { ++*static_cast<int*>(u); }, &logged);
  REQUIRE(dune_synth(c.p, 16, 32, 12, 2023, 3, 1.0) == DUNE_OK);
  CHECK(logged > 0);
  CHECK(c.result()["command"] == "synth");

  for (const auto& [k, v] : std::vector<std::pair<const char*, const char*>>{
           {"model.depth", "2"}, {"model.channels", "4,8,16"}, {"train.max_epochs", "2"}, {"train.batch_size", "8"}})
    REQUIRE(dune_context_set(c.p, k, v) == DUNE_OK);
  REQUIRE(dune_train(c.p) == DUNE_OK);
  const auto tr = c.result();
  CHECK(tr["epochs"] == 2);
  const std::string ckpt = tr["checkpoint"];

  REQUIRE(dune_forecast(c.p, nullptr) == DUNE_OK);
  CHECK(c.result()["count"] == 60);
  REQUIRE(dune_model_summary(c.p) == DUNE_OK);
  CHECK(c.result()["parameters"] == tr["parameters"]);
  CHECK(dune_rollout(c.p, "2023-01", 0, 0) == DUNE_E_USAGE);

  dune_model* m = nullptr;
  REQUIRE(dune_model_open(ckpt.c_str(), &m) == DUNE_OK);
  CHECK(dune_model_parameter_count(m) == tr["parameters"].get<std::size_t>());
  CHECK(dune_model_in_channels(m) == 7);
  CHECK(dune_model_out_channels(m) == 1);
  const std::size_t plane = static_cast<std::size_t>(dune_model_n_lat(m)) * dune_model_n_lon(m);
  CHECK(plane == 16 * 32);
  std::vector<float> in(7 * plane, 0.5f), out(plane), heads(4 * plane);
  REQUIRE(dune_model_forward(m, in.data(), in.size(), out.data(), out.size(), heads.data()) == DUNE_OK);
  for (std::size_t k = 0; k < plane; k += 37) {
    const double mean = (double(heads[k]) + heads[plane + k] + heads[2 * plane + k] + heads[3 * plane + k]) / 4;
    CHECK(out[k] == doctest::Approx(mean).epsilon(1e-6));
  }
  CHECK(dune_model_forward(m, in.data(), in.size() - 1, out.data(), out.size(), nullptr) == DUNE_E_USAGE);
  CHECK(std::string(dune_model_last_error(m)).find("buffer") != std::string::npos);
  dune_model_close(m);

  dune_model* none = nullptr;
  CHECK(dune_model_open((dir / "absent.dck").string().c_str(), &none) == DUNE_E_DATA);
  CHECK(none == nullptr);
}

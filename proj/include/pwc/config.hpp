#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwc/ista.hpp"
#include "pwc/phantom.hpp"
#include "pwc/signal.hpp"

namespace pwc {

// Raised for keys outside the documented schema; the CLI maps it to exit 2.
struct ConfigKeyError : std::runtime_error {
  std::string key;
  explicit ConfigKeyError(const std::string& k)
      : std::runtime_error("unknown config key: " + k), key(k) {}
};

struct ConfigValueError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value run configuration with '#' comments and dotted keys. Every
// key has a documented default; unknown keys are rejected; parsing is
// order-independent. serialize() emits the canonical sorted form.
struct RunConfig {
  SimConfig sim;
  QConfig q;  // epsilon kept in sync with floor_db unless overridden

  // model
  int folds = 5;
  std::string model_kind = "unfolded";  // unfolded | unet_lite | cnn

  // training
  int epochs_per_stage = 60;
  int batch_size = 1;
  double lr = 1e-4;
  double beta1 = 0.5, beta2 = 0.999, adam_eps = 1e-8;
  double lambda1 = 1.0, lambda2 = 1.0, lambda3 = 0.001;
  uint64_t seed = 7;
  bool q_detach = false;
  bool saturating_adv = false;
  bool reinit_disc = false;
  bool fine_tune = false;
  int threads = 0;  // 0 = library default

  // classical solver
  IstaConfig ista;

  // evaluation
  int timing_repeats = 20;

  static RunConfig defaults() { return RunConfig{}; }
};

// Parse config text / file over the defaults. Unknown key -> ConfigKeyError.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Apply "key=value" overrides (CLI -s options) on top of an existing config.
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

// Canonical serialized form: all keys, sorted, one per line.
std::string serialize_config(const RunConfig& cfg);

// name -> documentation line, for `pwc config --help-keys`.
std::vector<std::pair<std::string, std::string>> config_key_docs();

}  // namespace pwc

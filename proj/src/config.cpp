#include "pwc/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "pwc/io.hpp"

namespace pwc {

namespace {

struct KeyDef {
  std::string doc;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (...) {
    throw ConfigValueError("config key " + key + ": expected a number, got '" + v + "'");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<int>(d);
  } catch (...) {
    throw ConfigValueError("config key " + key + ": expected an integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigValueError("config key " + key + ": expected true/false, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += fmt(v[i]);
  }
  return s;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigValueError("config key " + key + ": empty list");
  return out;
}

#define DBL_KEY(name, field, doc_)                                            \
  {name,                                                                      \
   {doc_, [](RunConfig& c, const std::string& v) { c.field = parse_double(name, v); }, \
    [](const RunConfig& c) { return fmt(c.field); }}}

#define INT_KEY(name, field, doc_)                                            \
  {name,                                                                      \
   {doc_, [](RunConfig& c, const std::string& v) { c.field = parse_int(name, v); }, \
    [](const RunConfig& c) { return std::to_string(c.field); }}}

#define BOOL_KEY(name, field, doc_)                                           \
  {name,                                                                      \
   {doc_, [](RunConfig& c, const std::string& v) { c.field = parse_bool(name, v); }, \
    [](const RunConfig& c) { return c.field ? std::string("true") : std::string("false"); }}}

const std::map<std::string, KeyDef>& schema() {
  static const std::map<std::string, KeyDef> s = {
      INT_KEY("sim.height", sim.height, "axial sample count of the grid"),
      INT_KEY("sim.width", sim.width, "lateral sample count of the grid"),
      INT_KEY("sim.n_points", sim.n_points, "point scatterers per phantom"),
      DBL_KEY("sim.amp_lo", sim.amp_lo, "min scatterer amplitude"),
      DBL_KEY("sim.amp_hi", sim.amp_hi, "max scatterer amplitude"),
      DBL_KEY("sim.speckle_fraction", sim.speckle_fraction,
              "fraction of samples that also carry speckle"),
      INT_KEY("sim.n_speckle", sim.n_speckle, "speckle scatterers per speckled sample"),
      DBL_KEY("sim.speckle_amp_hi", sim.speckle_amp_hi, "max speckle amplitude"),
      DBL_KEY("sim.motion_sigma", sim.motion_sigma,
              "per-scatterer inter-frame displacement sigma (samples)"),
      DBL_KEY("sim.noise_sigma", sim.noise_sigma, "additive Gaussian noise sigma per LR frame"),
      INT_KEY("sim.n_train", sim.n_train, "training pairs"),
      INT_KEY("sim.n_val", sim.n_val, "validation pairs"),
      INT_KEY("sim.n_test", sim.n_test, "test pairs"),
      BOOL_KEY("sim.frame_pairs", sim.frame_pairs,
               "emit previous-frame inputs for the frame-to-frame loss"),
      {"sim.angles",
       {"steering angles in degrees, comma separated",
        [](RunConfig& c, const std::string& v) { c.sim.angles_deg = parse_list("sim.angles", v); },
        [](const RunConfig& c) { return fmt_list(c.sim.angles_deg); }}},
      DBL_KEY("psf.sigma_axial", sim.psf_sigma_axial, "LR PSF axial sigma (samples)"),
      DBL_KEY("psf.sigma_lateral", sim.psf_sigma_lateral, "LR PSF lateral sigma (samples)"),
      DBL_KEY("psf.wavelength", sim.psf_wavelength, "LR PSF carrier wavelength (samples)"),
      INT_KEY("psf.size", sim.psf_size, "PSF tap grid size (odd)"),
      DBL_KEY("psf.hr_sigma_axial", sim.hr_sigma_axial, "HR PSF axial sigma (samples)"),
      DBL_KEY("psf.hr_sigma_lateral", sim.hr_sigma_lateral, "HR PSF lateral sigma (samples)"),
      DBL_KEY("psf.hr_wavelength_ratio", sim.hr_wavelength_ratio,
              "LR/HR carrier wavelength ratio"),
      DBL_KEY("q.floor_db", q.floor_db, "dB display floor"),
      DBL_KEY("q.ceil_db", q.ceil_db, "dB display ceiling"),
      {"q.epsilon",
       {"log-compression epsilon; 'auto' derives 10^(floor/20)",
        [](RunConfig& c, const std::string& v) {
          c.q.epsilon = (v == "auto") ? std::pow(10.0, c.q.floor_db / 20.0)
                                      : parse_double("q.epsilon", v);
        },
        [](const RunConfig& c) { return fmt(c.q.epsilon); }}},
      INT_KEY("model.folds", folds, "unfolded iterations K"),
      {"model.kind",
       {"unfolded | unet_lite | cnn",
        [](RunConfig& c, const std::string& v) {
          if (v != "unfolded" && v != "unet_lite" && v != "cnn")
            throw ConfigValueError("config key model.kind: got '" + v + "'");
          c.model_kind = v;
        },
        [](const RunConfig& c) { return c.model_kind; }}},
      INT_KEY("train.epochs_per_stage", epochs_per_stage, "epochs per greedy stage"),
      INT_KEY("train.batch_size", batch_size, "training batch size"),
      DBL_KEY("train.lr", lr, "Adam learning rate"),
      DBL_KEY("train.beta1", beta1, "Adam beta1"),
      DBL_KEY("train.beta2", beta2, "Adam beta2"),
      DBL_KEY("train.adam_eps", adam_eps, "Adam epsilon"),
      DBL_KEY("train.lambda1", lambda1, "adversarial loss weight"),
      DBL_KEY("train.lambda2", lambda2, "pixel l1 loss weight"),
      DBL_KEY("train.lambda3", lambda3, "frame-to-frame loss weight"),
      {"train.seed",
       {"top-level seed; all substreams derive from it",
        [](RunConfig& c, const std::string& v) {
          c.seed = static_cast<uint64_t>(std::stoull(v));
        },
        [](const RunConfig& c) { return std::to_string(c.seed); }}},
      BOOL_KEY("train.q_detach", q_detach, "treat the RF-to-image transform as constant in backprop"),
      BOOL_KEY("train.saturating_adv", saturating_adv,
               "use the literal min-max generator loss instead of -log D"),
      BOOL_KEY("train.reinit_disc", reinit_disc, "reinitialize the discriminator each stage"),
      BOOL_KEY("train.fine_tune", fine_tune, "joint fine-tune pass after greedy stages"),
      INT_KEY("train.threads", threads, "conv worker threads (0 = library default)"),
      {"ista.mu",
       {"step size; 0 picks 0.9 / lmax(A^T A)",
        [](RunConfig& c, const std::string& v) { c.ista.mu = parse_double("ista.mu", v); },
        [](const RunConfig& c) { return fmt(c.ista.mu); }}},
      DBL_KEY("ista.lambda", ista.lambda_l1, "l1 weight of the classical solver"),
      INT_KEY("ista.iterations", ista.iterations, "classical solver iterations"),
      {"ista.x0",
       {"zero | compound",
        [](RunConfig& c, const std::string& v) {
          if (v == "zero")
            c.ista.x0_mode = IstaConfig::Init::Zero;
          else if (v == "compound")
            c.ista.x0_mode = IstaConfig::Init::Compound;
          else
            throw ConfigValueError("config key ista.x0: got '" + v + "'");
        },
        [](const RunConfig& c) {
          return c.ista.x0_mode == IstaConfig::Init::Zero ? "zero" : "compound";
        }}},
      INT_KEY("eval.timing_repeats", timing_repeats, "inference timing repeats"),
  };
  return s;
}

#undef DBL_KEY
#undef INT_KEY
#undef BOOL_KEY

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto it = schema().find(key);
  if (it == schema().end()) throw ConfigKeyError(key);
  it->second.set(cfg, value);
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg = RunConfig::defaults();
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  // collect first so q.floor_db is applied before an 'auto' q.epsilon
  std::vector<std::pair<std::string, std::string>> entries;
  while (std::getline(ss, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigValueError("config line " + std::to_string(lineno) + ": expected key=value");
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  bool epsilon_explicit = false;
  for (const auto& [k, v] : entries) {
    if (k == "q.epsilon" && v != "auto") epsilon_explicit = true;
    apply_override(cfg, k, v);
  }
  if (!epsilon_explicit) cfg.q.epsilon = std::pow(10.0, cfg.q.floor_db / 20.0);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FileError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, def] : schema()) out += k + " = " + def.get(cfg) + "\n";
  return out;
}

std::vector<std::pair<std::string, std::string>> config_key_docs() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, def] : schema()) out.emplace_back(k, def.doc);
  return out;
}

}  // namespace pwc

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hawkes_mrs/core.hpp"
#include "hawkes_mrs/cumulants.hpp"
#include "hawkes_mrs/experiments.hpp"
#include "hawkes_mrs/gp_smooth.hpp"
#include "hawkes_mrs/kernel_recovery.hpp"
#include "hawkes_mrs/model_eval.hpp"

namespace hawkes_mrs {

/// One generator piece; its start is the previous piece's end (or the window
/// start).
struct PieceSpec {
  double end{0.0};
  double mu{1.0};
  double alpha{0.0};
  double beta{1.0};
};

/// Run configuration. Stored as a flat JSON object; see README for the keys.
struct RunConfig {
  std::optional<Interval> window;
  std::vector<PieceSpec> pieces;
  std::size_t series_count{40};
  std::optional<std::uint64_t> seed;

  std::size_t M{10};
  std::size_t K{8};
  double h{0.75};
  std::size_t R{2};
  std::string edge_correction{"interior"};

  GpConfig gp{};

  std::size_t nystrom_q{64};
  std::optional<double> nystrom_a;
  double fit_h{0.1};
  std::size_t fit_k{60};

  std::optional<double> split_fraction;
  std::optional<double> jitter;
  std::string time_unit;

  [[nodiscard]] GOptions g_options() const {
    GOptions o;
    o.edge = edge_correction == "none" ? EdgeCorrection::none : EdgeCorrection::interior;
    return o;
  }

  [[nodiscard]] MrsConfig mrs(bool use_gp) const {
    MrsConfig c;
    c.sectors = M;
    c.k_bins = K;
    c.h = h;
    if (use_gp) c.gp = gp;
    c.g_options = g_options();
    return c;
  }

  [[nodiscard]] FitConfig fit() const {
    FitConfig f;
    f.h = fit_h;
    f.k_bins = fit_k;
    f.nodes = nystrom_q;
    f.support = nystrom_a;
    f.g_options = g_options();
    return f;
  }

  [[nodiscard]] JitterPolicy jitter_policy() const {
    JitterPolicy j;
    if (jitter) j.epsilon = *jitter;
    return j;
  }

  /// Generator model; needs `window` and `pieces`.
  [[nodiscard]] PiecewiseHawkesModel model() const {
    if (!window) throw ValidationError("config: 'window' is required");
    if (pieces.empty()) throw ValidationError("config: 'pieces' is required");
    std::vector<double> breaks{window->start};
    std::vector<HawkesPiece> ps;
    for (const auto& p : pieces) {
      breaks.push_back(p.end);
      ps.push_back({p.mu, ExponentialKernel{p.alpha, p.beta}});
    }
    if (std::abs(breaks.back() - window->end) > 0.0) {
      throw ValidationError("config: last piece must end at the window end");
    }
    return PiecewiseHawkesModel(std::move(breaks), std::move(ps));
  }

  void validate() const {
    if (window) require_valid_window(*window);
    if (series_count < 1) throw ValidationError("config: series_count must be >= 1");
    if (M < 2) throw ValidationError("config: M must be >= 2");
    if (K < 1) throw ValidationError("config: K must be >= 1");
    if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("config: h must be positive");
    if (R < 1 || R > M) throw ValidationError("config: R must lie in [1, M]");
    if (edge_correction != "interior" && edge_correction != "none") {
      throw ValidationError("config: edge_correction must be 'interior' or 'none'");
    }
    gp.validate();
    if (nystrom_q < 2) throw ValidationError("config: nystrom.Q must be >= 2");
    if (nystrom_a && !(*nystrom_a > 0.0)) throw ValidationError("config: nystrom.A must be positive");
    if (!(fit_h > 0.0) || fit_k < 1) throw ValidationError("config: fit.h and fit.K must be positive");
    if (split_fraction && !(*split_fraction > 0.0 && *split_fraction < 1.0)) {
      throw ValidationError("config: split_fraction must lie in (0, 1)");
    }
    if (jitter && !(*jitter > 0.0)) throw ValidationError("config: jitter must be positive");
    if (!pieces.empty()) (void)model();
  }
};

namespace detail {

inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys{
      "window",     "pieces",      "series_count", "seed",         "M",
      "K",          "h",           "R",            "edge_correction", "gp.theta0",
      "gp.theta1",  "gp.noise_var", "nystrom.Q",   "nystrom.A",    "fit.h",
      "fit.K",      "split_fraction", "jitter",    "time_unit"};
  return keys;
}

template <class T>
T get_number(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number()) throw ValidationError("config: '" + key + "' must be a number");
  if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<long long>() < 0)) {
      throw ValidationError("config: '" + key + "' must be a non-negative integer");
    }
  }
  return j.get<T>();
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!detail::known_config_keys().count(key)) throw ValidationError("config: unknown key '" + key + "'");
  }
  using detail::get_number;
  RunConfig c;
  if (j.contains("window")) {
    const auto& w = j["window"];
    if (!w.is_array() || w.size() != 2) throw ValidationError("config: 'window' must be [start, end]");
    c.window = Interval{get_number<double>(w[0], "window"), get_number<double>(w[1], "window")};
  }
  if (j.contains("pieces")) {
    const auto& ps = j["pieces"];
    if (!ps.is_array()) throw ValidationError("config: 'pieces' must be an array");
    for (const auto& p : ps) {
      if (!p.is_object()) throw ValidationError("config: each piece must be an object");
      for (const auto& [k, _] : p.items()) {
        if (k != "end" && k != "mu" && k != "alpha" && k != "beta") {
          throw ValidationError("config: unknown piece key '" + k + "'");
        }
      }
      if (!p.contains("end") || !p.contains("mu")) throw ValidationError("config: piece needs 'end' and 'mu'");
      PieceSpec s;
      s.end = get_number<double>(p["end"], "pieces.end");
      s.mu = get_number<double>(p["mu"], "pieces.mu");
      if (p.contains("alpha")) s.alpha = get_number<double>(p["alpha"], "pieces.alpha");
      if (p.contains("beta")) s.beta = get_number<double>(p["beta"], "pieces.beta");
      c.pieces.push_back(s);
    }
  }
  if (j.contains("series_count")) c.series_count = get_number<std::size_t>(j["series_count"], "series_count");
  if (j.contains("seed")) c.seed = get_number<std::uint64_t>(j["seed"], "seed");
  if (j.contains("M")) c.M = get_number<std::size_t>(j["M"], "M");
  if (j.contains("K")) c.K = get_number<std::size_t>(j["K"], "K");
  if (j.contains("h")) c.h = get_number<double>(j["h"], "h");
  if (j.contains("R")) c.R = get_number<std::size_t>(j["R"], "R");
  if (j.contains("edge_correction")) {
    if (!j["edge_correction"].is_string()) throw ValidationError("config: 'edge_correction' must be a string");
    c.edge_correction = j["edge_correction"].get<std::string>();
  }
  if (j.contains("gp.theta0")) c.gp.theta0 = get_number<double>(j["gp.theta0"], "gp.theta0");
  if (j.contains("gp.theta1")) c.gp.theta1 = get_number<double>(j["gp.theta1"], "gp.theta1");
  if (j.contains("gp.noise_var")) c.gp.noise_var = get_number<double>(j["gp.noise_var"], "gp.noise_var");
  if (j.contains("nystrom.Q")) c.nystrom_q = get_number<std::size_t>(j["nystrom.Q"], "nystrom.Q");
  if (j.contains("nystrom.A")) c.nystrom_a = get_number<double>(j["nystrom.A"], "nystrom.A");
  if (j.contains("fit.h")) c.fit_h = get_number<double>(j["fit.h"], "fit.h");
  if (j.contains("fit.K")) c.fit_k = get_number<std::size_t>(j["fit.K"], "fit.K");
  if (j.contains("split_fraction")) c.split_fraction = get_number<double>(j["split_fraction"], "split_fraction");
  if (j.contains("jitter")) c.jitter = get_number<double>(j["jitter"], "jitter");
  if (j.contains("time_unit")) {
    if (!j["time_unit"].is_string()) throw ValidationError("config: 'time_unit' must be a string");
    c.time_unit = j["time_unit"].get<std::string>();
  }
  c.validate();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config '" + path + "': " + e.what());
  }
  return parse_config(j);
}

/// Every key with its resolved value (defaults filled in).
inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  if (c.window) j["window"] = {c.window->start, c.window->end};
  if (!c.pieces.empty()) {
    j["pieces"] = nlohmann::json::array();
    for (const auto& p : c.pieces) {
      j["pieces"].push_back({{"end", p.end}, {"mu", p.mu}, {"alpha", p.alpha}, {"beta", p.beta}});
    }
  }
  j["series_count"] = c.series_count;
  if (c.seed) j["seed"] = *c.seed;
  j["M"] = c.M;
  j["K"] = c.K;
  j["h"] = c.h;
  j["R"] = c.R;
  j["edge_correction"] = c.edge_correction;
  j["gp.theta0"] = c.gp.theta0;
  j["gp.theta1"] = c.gp.theta1;
  j["gp.noise_var"] = c.gp.noise_var;
  j["nystrom.Q"] = c.nystrom_q;
  if (c.nystrom_a) j["nystrom.A"] = *c.nystrom_a;
  j["fit.h"] = c.fit_h;
  j["fit.K"] = c.fit_k;
  if (c.split_fraction) j["split_fraction"] = *c.split_fraction;
  if (c.jitter) j["jitter"] = *c.jitter;
  if (!c.time_unit.empty()) j["time_unit"] = c.time_unit;
  return j;
}

}  // namespace hawkes_mrs

// hawkes-mrs: simulate, segment, compare and reproduce from the command line.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hawkes_mrs/config.hpp"
#include "hawkes_mrs/experiments.hpp"
#include "hawkes_mrs/io.hpp"
#include "hawkes_mrs/kernel_recovery.hpp"
#include "hawkes_mrs/model_eval.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace hawkes_mrs;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

class UsageError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  body(out);
  out.flush();
  if (!out) throw ValidationError("write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) {
  write_file(path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string cuts_label(const std::vector<double>& cuts) {
  std::string s;
  for (double c : cuts) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", c);
    if (!s.empty()) s += ';';
    s += buf;
  }
  return s.empty() ? "-" : s;
}

struct LoadedEvents {
  ObservationSet set;
  Interval window;
  bool window_inferred{false};
};

LoadedEvents load_events(const std::string& path, const RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open events file '" + path + "'");
  auto table = read_event_table(in);
  bool inferred = !cfg.window.has_value();
  Interval w = inferred ? infer_window(table) : *cfg.window;
  if (inferred) {
    std::cerr << "warning: no 'window' in config; using [" << format_double(w.start) << ", "
              << format_double(w.end) << ") inferred from the data\n";
  }
  return {to_observation_set(table, w, cfg.jitter_policy()), w, inferred};
}

json hierarchy_json(const SegmentationHierarchy& h) {
  json j;
  j["boundaries"] = json::array();
  for (std::size_t i = 0; i < h.scores.size(); ++i) {
    j["boundaries"].push_back({{"time", h.scores[i].boundary_time},
                               {"nmse", h.scores[i].nmse},
                               {"rank", h.rank_of(i)},
                               {"low_signal", h.scores[i].low_signal}});
  }
  json positions = json::array();
  for (std::size_t r = 2; r <= h.sector_count(); ++r) positions.push_back(h.new_position(r));
  j["new_positions"] = positions;
  j["threshold_ratios"] = h.threshold_ratios;
  return j;
}

json fits_json(const std::vector<SegmentFit>& fits) {
  json a = json::array();
  for (const auto& f : fits) {
    a.push_back({{"segment", {f.segment.start, f.segment.end}},
                 {"lambda_hat", f.lambda_hat},
                 {"mu_hat", f.stable ? json(f.mu_hat) : json(nullptr)},
                 {"branching_ratio", f.branching_ratio},
                 {"stable", f.stable},
                 {"residual_inf", f.residual_inf},
                 {"event_count", f.event_count}});
  }
  return a;
}

void warn_sanity(const RunConfig& cfg, const Interval& window) {
  const double width = window.length() / static_cast<double>(cfg.M);
  const double support = cfg.h * static_cast<double>(cfg.K);
  if (!(support < width)) {
    std::cerr << "warning: K*h = " << format_double(support) << " is not smaller than the sector width "
              << format_double(width) << "\n";
  } else if (support > 0.25 * width) {
    std::cerr << "warning: K*h = " << format_double(support) << " is large next to the sector width "
              << format_double(width) << "; histograms will be noisy\n";
  }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int cmd_simulate(const std::string& config_path, const std::string& out_path, std::optional<std::uint64_t> seed_flag) {
  RunConfig cfg = load_config(config_path);
  const auto model = cfg.model();
  const std::uint64_t seed = seed_flag ? *seed_flag : cfg.seed ? *cfg.seed : fresh_seed();
  cfg.seed = seed;
  const auto set = simulate_set(model, *cfg.window, cfg.series_count, seed);
  write_file(out_path, [&](std::ostream& o) { write_events_csv(o, set); });

  json manifest;
  manifest["seed"] = seed;
  manifest["window"] = {cfg.window->start, cfg.window->end};
  manifest["series_count"] = set.series_count();
  manifest["total_events"] = set.total_count();
  manifest["model"] = json::array();
  for (std::size_t p = 0; p < model.piece_count(); ++p) {
    const auto iv = model.piece_interval(p);
    const auto* k = model.pieces()[p].kernel.exponential();
    manifest["model"].push_back({{"start", iv.start},
                                 {"end", iv.end},
                                 {"mu", model.pieces()[p].mu},
                                 {"alpha", k->alpha},
                                 {"beta", k->beta},
                                 {"stationary_rate", model.stationary_rate(p)}});
  }
  manifest["config"] = to_json(cfg);
  write_json(out_path + ".manifest.json", manifest);
  std::cout << "wrote " << set.total_count() << " events in " << set.series_count() << " series to " << out_path
            << " (seed " << seed << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// segment
// ---------------------------------------------------------------------------

struct SegmentFlags {
  bool gp{false};
  bool fit{false};
  bool suggest_m{false};
};

int cmd_segment(const std::string& config_path, const std::string& events_path, const fs::path& out_dir,
                const SegmentFlags& flags) {
  RunConfig cfg = load_config(config_path);
  auto ev = load_events(events_path, cfg);
  cfg.window = ev.window;
  json report;
  if (flags.suggest_m) {
    const std::size_t m = suggest_m(ev.set.total_count(), ev.set.series_count());
    report["suggested_M"] = m;
    cfg.M = m;
    if (cfg.R > cfg.M) throw ValidationError("R = " + std::to_string(cfg.R) + " exceeds the suggested M = " + std::to_string(m));
  }
  warn_sanity(cfg, ev.window);

  const MrsRun run = run_mrs(ev.set, cfg.mrs(flags.gp));
  const auto cuts = segment(run.hierarchy, cfg.R);

  report["config"] = to_json(cfg);
  report["gp"] = flags.gp;
  report["series_count"] = ev.set.series_count();
  report["total_events"] = ev.set.total_count();
  report["hierarchy"] = hierarchy_json(run.hierarchy);
  report["cuts"] = cuts;

  fs::create_directories(out_dir);
  write_file(out_dir / "hierarchy.csv", [&](std::ostream& o) { write_hierarchy_csv(o, run.hierarchy); });
  write_file(out_dir / "g_raw.csv", [&](std::ostream& o) { write_histograms_csv(o, run.raw); });
  if (flags.gp) {
    write_file(out_dir / "g_curves.csv", [&](std::ostream& o) { write_g_curves_csv(o, run.raw, run.scored); });
  }

  std::vector<SegmentFit> fits;
  if (flags.fit) {
    FitConfig fc = cfg.fit();
    if (flags.gp) fc.gp = cfg.gp;
    fits = fit_segments(ev.set, cuts, fc);
    report["fits"] = fits_json(fits);
    write_file(out_dir / "segments.csv", [&](std::ostream& o) { write_segments_csv(o, fits); });
    write_file(out_dir / "kernels.csv", [&](std::ostream& o) { write_kernel_curves_csv(o, fits); });
  }
  write_json(out_dir / "report.json", report);

  std::cout << "events: " << ev.set.total_count() << " in " << ev.set.series_count() << " series, M = " << cfg.M
            << (flags.suggest_m ? " (suggested)" : "") << ", K = " << cfg.K << ", h = " << format_double(cfg.h)
            << (flags.gp ? ", GP smoothing" : "") << "\n";
  std::cout << "R  new_position  ratio\n";
  for (std::size_t r = 1; r <= run.hierarchy.sector_count(); ++r) {
    char buf[96];
    if (r == 1) {
      std::snprintf(buf, sizeof buf, "%-2zu %-13s %6.2f%%\n", r, "-", 100.0 * run.hierarchy.ratio(r));
    } else {
      std::snprintf(buf, sizeof buf, "%-2zu %-13.6g %6.2f%%\n", r, run.hierarchy.new_position(r),
                    100.0 * run.hierarchy.ratio(r));
    }
    std::cout << buf;
  }
  std::cout << "cuts at R = " << cfg.R << ": " << cuts_label(cuts) << "\n";
  for (const auto& f : fits) {
    char buf[160];
    if (f.stable) {
      std::snprintf(buf, sizeof buf, "segment [%g, %g): mu_hat = %.4g, branching ratio = %.3f\n", f.segment.start,
                    f.segment.end, f.mu_hat, f.branching_ratio);
    } else {
      std::snprintf(buf, sizeof buf, "segment [%g, %g): unstable fit, branching ratio = %.3f\n", f.segment.start,
                    f.segment.end, f.branching_ratio);
    }
    std::cout << buf;
  }
  std::cout << "report written to " << (out_dir / "report.json").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct CompareFlags {
  std::string test_path;
  std::optional<double> split;
  std::optional<std::vector<double>> cuts;
  bool gp{false};
};

int cmd_compare(const std::string& config_path, const std::string& train_path, const fs::path& out_dir,
                const CompareFlags& flags) {
  RunConfig cfg = load_config(config_path);
  std::optional<double> split = flags.split ? flags.split : cfg.split_fraction;
  if (flags.test_path.empty() && !split) {
    throw UsageError("compare needs --test or a split fraction (--split or 'split_fraction' in the config)");
  }
  if (split && !(*split > 0.0 && *split < 1.0)) throw ValidationError("split fraction must lie in (0, 1)");

  auto train_ev = load_events(train_path, cfg);
  cfg.window = train_ev.window;
  ObservationSet train = train_ev.set;
  std::optional<ObservationSet> test;
  if (!flags.test_path.empty()) {
    test = load_events(flags.test_path, cfg).set;
  } else {
    const std::size_t l = train.series_count();
    const auto n_test = static_cast<std::size_t>(std::llround(*split * static_cast<double>(l)));
    if (n_test < 1 || n_test >= l) {
      throw ValidationError("split fraction leaves an empty train or test part for " + std::to_string(l) + " series");
    }
    std::vector<EventSeries> a(train.series().begin(), train.series().end() - static_cast<std::ptrdiff_t>(n_test));
    std::vector<EventSeries> b(train.series().end() - static_cast<std::ptrdiff_t>(n_test), train.series().end());
    train = ObservationSet(std::move(a));
    test = ObservationSet(std::move(b));
  }

  std::vector<double> cuts;
  json report;
  if (flags.cuts) {
    cuts = *flags.cuts;
  } else {
    warn_sanity(cfg, train.window());
    const MrsRun run = run_mrs(train, cfg.mrs(flags.gp));
    cuts = segment(run.hierarchy, cfg.R);
    report["hierarchy"] = hierarchy_json(run.hierarchy);
  }

  CompareConfig cc;
  cc.fit = cfg.fit();
  if (flags.gp) cc.fit.gp = cfg.gp;
  if (cfg.seed) cc.mle.seed = *cfg.seed;
  const auto rep = compare_models(train, *test, cuts, cc);

  report["config"] = to_json(cfg);
  report["train_series"] = train.series_count();
  report["test_series"] = test->series_count();
  report["test_events"] = rep.test_event_count;
  report["cuts"] = cuts;
  const ModelScore* rows[] = {&rep.stationary_parametric, &rep.stationary_nonparametric,
                              &rep.nonstationary_nonparametric};
  report["neg_log_likelihood"] = json::object();
  for (const auto* r : rows) report["neg_log_likelihood"][r->name] = r->neg_log_likelihood;
  report["mle"] = {{"mu", rep.mle.params.mu},
                   {"alpha", rep.mle.params.alpha},
                   {"beta", rep.mle.params.beta},
                   {"log_likelihood", rep.mle.log_likelihood},
                   {"gradient_norm", rep.mle.gradient_norm},
                   {"converged_starts", rep.mle.converged_starts}};
  report["stationary_fit"] = fits_json({rep.stationary_fit});
  report["piecewise_fits"] = fits_json(rep.piecewise_fits);

  fs::create_directories(out_dir);
  write_file(out_dir / "comparison.csv", [&](std::ostream& o) {
    o << "model,neg_log_likelihood\n";
    for (const auto* r : rows) o << r->name << ',' << format_double(r->neg_log_likelihood) << '\n';
  });
  write_file(out_dir / "segments.csv", [&](std::ostream& o) { write_segments_csv(o, rep.piecewise_fits); });
  write_file(out_dir / "kernels.csv", [&](std::ostream& o) { write_kernel_curves_csv(o, rep.piecewise_fits); });
  write_json(out_dir / "report.json", report);

  std::cout << "train: " << train.series_count() << " series, test: " << test->series_count() << " series ("
            << rep.test_event_count << " events), cuts: " << cuts_label(cuts) << "\n";
  for (const auto* r : rows) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-30s %.3f\n", r->name.c_str(), r->neg_log_likelihood);
    std::cout << buf;
  }
  std::cout << "MLE: mu = " << format_double(rep.mle.params.mu) << ", alpha = " << format_double(rep.mle.params.alpha)
            << ", beta = " << format_double(rep.mle.params.beta) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// reproduce
// ---------------------------------------------------------------------------

struct ReproduceOptions {
  std::string name;
  fs::path out_dir;
  std::optional<std::uint64_t> seed;
  std::size_t reps{10};
};

// Most frequent cut set over replications and how often it occurred.
struct CutTally {
  std::map<std::string, std::size_t> counts;
  std::size_t truth{0};

  void add(const std::vector<double>& cuts, const std::vector<double>& expected) {
    ++counts[cuts_label(cuts)];
    if (same_cuts(cuts, expected)) ++truth;
  }
  [[nodiscard]] std::pair<std::string, std::size_t> mode() const {
    std::pair<std::string, std::size_t> best{"-", 0};
    for (const auto& [k, v] : counts) {
      if (v > best.second) best = {k, v};
    }
    return best;
  }
};

json reproduce_table2(const ReproduceOptions& o, std::uint64_t seed) {
  const char* published_pos[] = {"-", "600", "200", "500", "900", "400", "300", "700", "800", "100"};
  const double published_ratio[] = {100.0, 88.45, 11.41, 8.05, 7.15, 6.88, 5.17, 2.24, 1.25, 0.0};
  std::vector<std::map<std::string, std::size_t>> pos(10);
  std::vector<double> ratio_sum(10, 0.0);
  write_file(o.out_dir / "table2_replications.csv", [&](std::ostream& out) {
    out << "replication,R,new_position,ratio\n";
    for (std::size_t rep = 0; rep < o.reps; ++rep) {
      const auto run = run_mrs(benchmark_replication(seed, rep), MrsConfig{});
      for (std::size_t r = 1; r <= 10; ++r) {
        const std::string p = r == 1 ? "-" : cuts_label({run.hierarchy.new_position(r)});
        ++pos[r - 1][p];
        ratio_sum[r - 1] += run.hierarchy.ratio(r);
        out << rep << ',' << r << ',' << p << ',' << format_double(run.hierarchy.ratio(r)) << '\n';
      }
    }
  });
  json rows = json::array();
  write_file(o.out_dir / "table2.csv", [&](std::ostream& out) {
    out << "R,new_position,share,mean_ratio_percent,published_new_position,published_ratio_percent\n";
    for (std::size_t r = 1; r <= 10; ++r) {
      std::pair<std::string, std::size_t> best{"-", 0};
      for (const auto& [k, v] : pos[r - 1]) {
        if (v > best.second) best = {k, v};
      }
      const double share = static_cast<double>(best.second) / static_cast<double>(o.reps);
      const double mean_ratio = 100.0 * ratio_sum[r - 1] / static_cast<double>(o.reps);
      out << r << ',' << best.first << ',' << format_double(share) << ',' << format_double(mean_ratio) << ','
          << published_pos[r - 1] << ',' << format_double(published_ratio[r - 1]) << '\n';
      rows.push_back({{"R", r}, {"new_position", best.first}, {"share", share}, {"mean_ratio_percent", mean_ratio},
                      {"published_new_position", published_pos[r - 1]}, {"published_ratio_percent", published_ratio[r - 1]}});
      char buf[128];
      std::snprintf(buf, sizeof buf, "R=%-2zu new %-6s (%3.0f%%)  ratio %6.2f%%   published: %-4s %6.2f%%\n", r,
                    best.first.c_str(), 100.0 * share, mean_ratio, published_pos[r - 1], published_ratio[r - 1]);
      std::cout << buf;
    }
  });
  return rows;
}

// Cuts at R = 3 for a family of configurations.
json reproduce_cut_table(const ReproduceOptions& o, std::uint64_t seed, const std::string& column,
                         const std::vector<std::size_t>& values, const std::vector<std::string>& published,
                         const std::function<MrsConfig(std::size_t)>& make) {
  json rows = json::array();
  write_file(o.out_dir / (o.name + ".csv"), [&](std::ostream& out) {
    out << column << ",cuts,share,share_200_600,published_cuts\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
      CutTally tally;
      for (std::size_t rep = 0; rep < o.reps; ++rep) {
        const auto run = run_mrs(benchmark_replication(seed, rep), make(values[i]));
        tally.add(segment(run.hierarchy, 3), {200.0, 600.0});
      }
      const auto [cuts, n] = tally.mode();
      const double share = static_cast<double>(n) / static_cast<double>(o.reps);
      const double truth = static_cast<double>(tally.truth) / static_cast<double>(o.reps);
      out << values[i] << ',' << cuts << ',' << format_double(share) << ',' << format_double(truth) << ','
          << published[i] << '\n';
      rows.push_back({{column, values[i]}, {"cuts", cuts}, {"share", share}, {"share_200_600", truth},
                      {"published_cuts", published[i]}});
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s=%-4zu cuts %-18s (%3.0f%%)  [200,600] in %3.0f%%   published: %s\n",
                    column.c_str(), values[i], cuts.c_str(), 100.0 * share, 100.0 * truth, published[i].c_str());
      std::cout << buf;
    }
  });
  return rows;
}

json reproduce_scaling(const ReproduceOptions& o, std::uint64_t seed) {
  json out;
  const auto nk = scaling_vs_nk(seed, {5, 10, 20, 30, 40});
  const auto m = scaling_vs_m(seed, {1000, 2000, 3000, 4000, 5000});
  std::vector<double> x, y;
  write_file(o.out_dir / "scaling_nk.csv", [&](std::ostream& s) {
    s << "total_events,nk,seconds\n";
    for (const auto& p : nk) {
      s << p.events << ',' << format_double(p.x) << ',' << format_double(p.seconds) << '\n';
      x.push_back(p.x);
      y.push_back(p.seconds);
    }
  });
  const auto fit_nk = fit_line(x, y);
  x.clear();
  y.clear();
  write_file(o.out_dir / "scaling_m.csv", [&](std::ostream& s) {
    s << "M,total_events,seconds\n";
    for (const auto& p : m) {
      s << format_double(p.x) << ',' << p.events << ',' << format_double(p.seconds) << '\n';
      x.push_back(p.x);
      y.push_back(p.seconds);
    }
  });
  const auto fit_m = fit_line(x, y);

  // g path vs a per-sector Wiener-Hopf fit on one benchmark replication
  const auto one = benchmark_replication(seed, 0);
  const SectorGrid grid(one.window(), 10);
  const double t_g = time_g_path(one, 10, 8, 0.75, 9);
  const double t_phi = best_time([&] { (void)fit_segments(one, grid.boundaries(), FitConfig{}); }, 9);
  write_file(o.out_dir / "g_vs_phi.csv", [&](std::ostream& s) {
    s << "events,g_seconds,phi_seconds,ratio,published_g_seconds,published_phi_seconds\n";
    s << one.total_count() << ',' << format_double(t_g) << ',' << format_double(t_phi) << ','
      << format_double(t_phi / t_g) << ",0.5,38.4\n";
  });
  out["r_squared_nk"] = fit_nk.r_squared;
  out["r_squared_m"] = fit_m.r_squared;
  out["g_seconds"] = t_g;
  out["phi_seconds"] = t_phi;
  std::printf("time vs N*K: R^2 = %.4f over %zu sizes\n", fit_nk.r_squared, nk.size());
  std::printf("time vs M:   R^2 = %.4f over %zu sizes\n", fit_m.r_squared, m.size());
  std::printf("g path %.4g s vs phi fit %.4g s on %zu events (x%.1f; published: 0.5 s vs 38.4 s)\n", t_g, t_phi,
              one.total_count(), t_phi / t_g);
  return out;
}

int cmd_reproduce(const ReproduceOptions& o) {
  const std::uint64_t seed = o.seed ? *o.seed : fresh_seed();
  if (o.reps < 1) throw ValidationError("--reps must be >= 1");
  fs::create_directories(o.out_dir);
  json report;
  report["experiment"] = o.name;
  report["seed"] = seed;
  report["replications"] = o.reps;
  std::cout << o.name << " (seed " << seed << ", " << o.reps << " replications)\n";
  if (o.name == "table2") {
    report["rows"] = reproduce_table2(o, seed);
  } else if (o.name == "table3-m") {
    report["rows"] = reproduce_cut_table(o, seed, "M", {3, 10, 16, 20},
                                         {"333.3;666.6", "200;600", "187.5;687.5", "150;350"}, [](std::size_t m) {
                                           MrsConfig c;
                                           c.sectors = m;
                                           return c;
                                         });
  } else if (o.name == "table3-k") {
    report["bin_width_rule"] = "h = 6 / K";
    report["rows"] = reproduce_cut_table(o, seed, "K", {10, 20, 30, 40},
                                         {"200;600", "200;600", "100;200", "100;200"}, [](std::size_t k) {
                                           MrsConfig c;
                                           c.k_bins = k;
                                           c.h = MrsConfig::width_for(6.0, k);
                                           return c;
                                         });
  } else if (o.name == "table5") {
    report["bin_width_rule"] = "h = 6 / K";
    report["rows"] = reproduce_cut_table(o, seed, "K", {20, 30, 40, 200},
                                         {"200;600", "200;600", "200;600", "200;600"}, [](std::size_t k) {
                                           MrsConfig c;
                                           c.k_bins = k;
                                           c.h = MrsConfig::width_for(6.0, k);
                                           c.gp = GpConfig{};
                                           return c;
                                         });
  } else if (o.name == "scaling") {
    report["timing"] = reproduce_scaling(o, seed);
  } else {
    throw UsageError("unknown experiment '" + o.name + "' (expected table2, table3-m, table3-k, table5, scaling)");
  }
  write_json(o.out_dir / "report.json", report);
  std::cout << "results written to " << o.out_dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-resolution segmentation of nonstationary Hawkes processes"};
  app.require_subcommand(1);

  std::string config_path, out_path, events_path, out_dir = "out", train_path;
  std::optional<std::uint64_t> seed;

  auto* sim = app.add_subcommand("simulate", "simulate event series from a piecewise model");
  sim->add_option("-c,--config", config_path, "config file (JSON)")->required();
  sim->add_option("-o,--out", out_path, "event CSV to write")->required();
  sim->add_option("--seed", seed, "master seed (overrides the config)");

  SegmentFlags seg_flags;
  auto* seg = app.add_subcommand("segment", "multi-resolution segmentation of an event CSV");
  seg->add_option("-c,--config", config_path, "config file (JSON)")->required();
  seg->add_option("-e,--events", events_path, "event CSV")->required();
  seg->add_option("-o,--out-dir", out_dir, "output directory");
  seg->add_flag("--gp", seg_flags.gp, "smooth histograms with the GP posterior mean");
  seg->add_flag("--fit", seg_flags.fit, "recover mu and the kernel on each segment");
  seg->add_flag("--suggest-m", seg_flags.suggest_m, "set M from the event counts");

  CompareFlags cmp_flags;
  std::vector<double> cut_list;
  double split_value = 0.2;
  auto* cmp = app.add_subcommand("compare", "held-out -logL of the three model classes");
  cmp->add_option("-c,--config", config_path, "config file (JSON)")->required();
  cmp->add_option("--train", train_path, "training event CSV")->required();
  cmp->add_option("--test", cmp_flags.test_path, "test event CSV");
  auto* split_opt = cmp->add_option("--split", split_value, "hold out this fraction of series (default 0.2)")
                        ->expected(0, 1)
                        ->default_str("0.2");
  auto* cuts_opt = cmp->add_option("--cuts", cut_list, "cut times; segmentation of the train set otherwise")
                       ->delimiter(',');
  cmp->add_flag("--gp", cmp_flags.gp, "GP-smoothed estimation");
  cmp->add_option("-o,--out-dir", out_dir, "output directory");

  ReproduceOptions rep_opts;
  auto* rep = app.add_subcommand("reproduce", "rerun a synthetic experiment");
  rep->add_option("experiment", rep_opts.name, "table2, table3-m, table3-k, table5 or scaling")->required();
  rep->add_option("-o,--out-dir", out_dir, "output directory");
  rep->add_option("--seed", seed, "master seed (fresh if omitted)");
  rep->add_option("--reps", rep_opts.reps, "replications");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (sim->parsed()) return cmd_simulate(config_path, out_path, seed);
    if (seg->parsed()) return cmd_segment(config_path, events_path, out_dir, seg_flags);
    if (cmp->parsed()) {
      if (split_opt->count() > 0) cmp_flags.split = split_value;
      if (cuts_opt->count() > 0) {
        std::sort(cut_list.begin(), cut_list.end());
        cmp_flags.cuts = cut_list;
      }
      if (!cmp_flags.test_path.empty() && cmp_flags.split) {
        throw UsageError("give either --test or --split, not both");
      }
      return cmd_compare(config_path, train_path, out_dir, cmp_flags);
    }
    if (rep->parsed()) {
      rep_opts.out_dir = out_dir;
      rep_opts.seed = seed;
      return cmd_reproduce(rep_opts);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "artifacts.hpp"
#include "tailchain/assess.hpp"
#include "tailchain/data.hpp"
#include "tailchain/engine.hpp"
#include "tailchain/error.hpp"
#include "tailchain/hm.hpp"
#include "tailchain/serialize.hpp"

using namespace tailchain;
using namespace tailchain::cli;

namespace {

struct RunConfig {
  std::string command;
  std::string input;
  std::string model;
  std::string ensemble;
  std::string output;
  std::uint64_t seed = 1;
  double threshold = 0.95;
  std::string family = "evar";
  int k = 1;
  int max_order = 6;
  int p1 = 1;
  int p2 = 1;
  std::size_t n = 20000;
  std::size_t synth_n = SyntheticSpec{}.n;
  unsigned threads = 1;
  int partitions = 50;
  double train_frac = 0.25;
  std::vector<std::string> families{"evar", "mmem", "evar0", "hm"};
  int max_lag = 12;
  int max_rejects = 1000;
  std::vector<ResponseConfig> responses = default_response_configs();
};

#define TAILCHAIN_RUN_FIELDS(X)                                                                              \
  X(command) X(input) X(model) X(ensemble) X(output) X(seed) X(threshold) X(family) X(k) X(max_order) X(p1) X(p2) \
  X(n) X(synth_n) X(threads) X(partitions) X(train_frac) X(families) X(max_lag) X(max_rejects) X(responses)

void to_json(json& j, const RunConfig& c) {
#define X(f) j[#f] = c.f;
  TAILCHAIN_RUN_FIELDS(X)
#undef X
}

void from_json(const json& j, RunConfig& c) {
  const RunConfig d;
#define X(f) c.f = j.value(#f, d.f);
  TAILCHAIN_RUN_FIELDS(X)
#undef X
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::config: return 2;
    case ErrorKind::data: return 3;
    case ErrorKind::fit: return 4;
    case ErrorKind::simulation: return 5;
  }
  return 1;
}

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::config: return "config";
    case ErrorKind::data: return "data";
    case ErrorKind::fit: return "fit";
    case ErrorKind::simulation: return "simulation";
  }
  return "unknown";
}

int report_error(ErrorKind kind, const std::string& message) {
  const json j = {{"error", kind_name(kind)}, {"message", message}, {"exit_code", exit_code(kind)}};
  std::cerr << j.dump() << '\n';
  return exit_code(kind);
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string("missing required option ") + flag);
}

void validate(const RunConfig& c) {
  if (c.max_order < 1) throw ConfigError("max_order must be at least 1");
  if (c.k < 1 || c.k > c.max_order)
    throw ConfigError("order k must lie in 1.." + std::to_string(c.max_order) + ", got " + std::to_string(c.k));
  if (!(c.threshold > 0.5 && c.threshold < 1.0)) throw ConfigError("threshold must lie in (0.5, 1)");
  if (c.threads < 1) throw ConfigError("threads must be at least 1");
  for (const auto& r : c.responses) r.validate();
  std::set<std::string> paths;
  for (const auto* p : {&c.input, &c.model, &c.ensemble, &c.output}) {
    if (p->empty()) continue;
    if (!paths.insert(fs::weakly_canonical(*p).string()).second) throw ConfigError("input and output paths must be distinct");
  }
}

std::string config_key(std::string flag, const std::string& command) {
  flag.erase(0, flag.find_first_not_of('-'));
  std::replace(flag.begin(), flag.end(), '-', '_');
  if (flag == "in") return "input";
  if (flag == "out") return "output";
  if (flag == "n" && command == "synth") return "synth_n";
  return flag;
}

PrepareOptions prepare_options(const RunConfig& c) {
  PrepareOptions o;
  o.threshold_prob = c.threshold;
  return o;
}

ModelOptions model_options(const RunConfig& c, Family f, int k) {
  ModelOptions o;
  o.family = f;
  o.k = k;
  o.p1 = c.p1;
  o.p2 = c.p2;
  o.max_rejects = c.max_rejects;
  o.threads = c.threads;
  o.fit.seed = c.seed;
  return o;
}

PreparedData load_data(const RunConfig& c) {
  require(c.input, "--in");
  return prepare_data(read_csv(c.input), prepare_options(c));
}

json run_synth(const RunConfig& c) {
  require(c.output, "--out");
  SyntheticSpec spec;
  spec.n = c.synth_n;
  spec.seed = c.seed;
  write_csv(generate_synthetic(spec), fs::path(c.output));
  return {{"spec", spec}};
}

json run_fit(const RunConfig& c) {
  require(c.output, "--out");
  const auto d = load_data(c);
  json j;
  if (c.family == "hm") {
    j = {{"kind", "hm"},
         {"model", fit_hm(d.excursions, d.hs_margin)},
         {"hs_margin", d.hs_margin},
         {"ws_margin", d.ws_margin},
         {"u", d.u}};
  } else {
    const auto m = fit_excursion_model(d.excursions, d.hs_margin, d.ws_margin, d.u,
                                       model_options(c, family_from_string(c.family), c.k));
    j = {{"kind", "chain"}, {"model", m}};
  }
  write_json(j, c.output);
  return {{"excursions", d.excursions.size()}, {"u", d.u}};
}

json run_simulate(const RunConfig& c) {
  require(c.model, "--model");
  require(c.output, "--out");
  const json j = read_json(c.model);
  const auto kind = j.at("kind").get<std::string>();
  std::vector<Excursion> out;
  json summary;
  if (kind == "hm") {
    const auto m = j.at("model").get<HMModel>();
    const auto hs = j.at("hs_margin").get<SemiParametricMarginal>();
    const auto ws = j.at("ws_margin").get<SemiParametricMarginal>();
    out.resize(c.n);
    parallel_for(c.n, c.threads, [&](std::size_t i) {
      Rng rng = make_stream(c.seed, i);
      out[i] = hm_simulate(m, rng, &hs, &ws).excursion;
    });
    summary["rejection_rate"] = 0.0;
  } else if (kind == "chain") {
    const auto m = j.at("model").get<ExcursionModel>();
    auto ens = simulate_ensemble(m, c.n, c.seed, c.threads);
    summary["rejection_rate"] = ens.rejection_rate();
    summary["rejections"] = ens.total_rejections();
    summary["kde_fallbacks"] = ens.fallbacks;
    if (ens.rejection_rate() > 0.5)
      std::cerr << "warning: rejection rate " << ens.rejection_rate() << " exceeds 50%\n";
    out = std::move(ens.excursions);
  } else {
    throw ConfigError("unknown model kind '" + kind + "'");
  }
  write_ensemble_csv(out, c.output);
  std::vector<double> lengths, maxima;
  for (const auto& e : out) {
    lengths.push_back(static_cast<double>(e.length()));
    if (e.has_physical()) maxima.push_back(e.hs[e.row(e.i_star)]);
  }
  summary["count"] = out.size();
  if (!out.empty()) {
    summary["mean_length"] = mean(lengths);
    summary["max_length"] = *std::max_element(lengths.begin(), lengths.end());
    if (!maxima.empty()) {
      summary["mean_hs_max"] = mean(maxima);
      summary["hs_max_q99"] = quantile(maxima, 0.99);
    }
  }
  write_json(summary, c.output + ".summary.json");
  return summary;
}

json run_diagnose(const RunConfig& c) {
  require(c.output, "--out");
  const auto d = load_data(c);
  std::optional<std::vector<Excursion>> sim;
  if (!c.ensemble.empty()) sim = read_ensemble_csv(c.ensemble);
  const double inf = std::numeric_limits<double>::infinity();

  const fs::path chi_path = c.output + "_chi.csv", surv_path = c.output + "_survival.csv";
  std::ofstream chi(chi_path), surv(surv_path);
  if (!chi || !surv) throw DataError("cannot write diagnostics under " + c.output);
  chi << "source,pair,lag,value,lo,hi\n";
  surv << "source,lag,prob,lo,hi\n";
  BootstrapOptions bo;
  bo.seed = c.seed;
  for (auto pair : {ChiPair::HH, ChiPair::HW, ChiPair::WW}) {
    for (int lag = 1; lag <= c.max_lag; ++lag) {
      const auto e = chi_estimate(d.laplace.y, d.u, lag, pair, bo);
      chi << "data," << to_string(pair) << ',' << lag << ',' << e.value << ',' << e.band.lo << ',' << e.band.hi << '\n';
      if (sim && pair != ChiPair::WW) {
        const auto s = chi_from_excursions(*sim, d.u, lag, pair, bo);
        chi << "simulated," << to_string(pair) << ',' << lag << ',' << s.value << ',' << s.band.lo << ','
            << s.band.hi << '\n';
      }
    }
  }
  auto write_curve = [&](const char* source, std::span<const Excursion> ex) {
    const auto curve = survival_curve(ex, 0.0, inf, c.max_lag, bo);
    for (std::size_t i = 0; i < curve.lags.size(); ++i)
      surv << source << ',' << curve.lags[i] << ',' << curve.prob[i] << ',' << curve.band[i].lo << ','
           << curve.band[i].hi << '\n';
  };
  write_curve("data", d.excursions);
  if (sim) write_curve("simulated", *sim);
  return {{"chi", chi_path.string()}, {"survival", surv_path.string()}};
}

json run_respond(const RunConfig& c) {
  require(c.output, "--out");
  std::vector<Excursion> ex;
  if (!c.ensemble.empty())
    ex = read_ensemble_csv(c.ensemble);
  else
    ex = load_data(c).excursions;
  std::ofstream out(c.output);
  if (!out) throw DataError("cannot write " + c.output);
  out << "excursion,config,c,h,rmax,rsum,empty\n";
  out.precision(17);
  std::size_t empty = 0;
  for (std::size_t i = 0; i < ex.size(); ++i) {
    if (!ex[i].has_physical()) throw DataError("excursion " + std::to_string(i) + " has no physical columns");
    for (std::size_t r = 0; r < c.responses.size(); ++r) {
      const auto mx = rmax(ex[i], c.responses[r]), sm = rsum(ex[i], c.responses[r]);
      empty += mx.empty;
      out << i << ',' << r << ',' << c.responses[r].c << ',' << c.responses[r].h << ',' << mx.value << ',' << sm.value
          << ',' << (mx.empty ? 1 : 0) << '\n';
    }
  }
  return {{"excursions", ex.size()}, {"empty", empty}};
}

json run_crossval(const RunConfig& c) {
  require(c.output, "--out");
  const auto d = load_data(c);
  std::vector<ModelSpec> specs;
  for (const auto& f : c.families) {
    if (f == "hm") {
      specs.push_back(hm_model_spec(d.hs_margin, d.ws_margin));
      continue;
    }
    const Family fam = family_from_string(f);
    for (int k = 1; k <= c.max_order; ++k)
      specs.push_back(chain_model_spec(fam, k, d.hs_margin, d.ws_margin, d.u, model_options(c, fam, k)));
  }
  CVOptions o;
  o.n_partitions = c.partitions;
  o.train_frac = c.train_frac;
  o.ensemble_size = c.n;
  o.responses = c.responses;
  o.seed = c.seed;
  o.threads = c.threads;
  const auto report = cross_validate(d.excursions, specs, o);
  write_json(json(report), c.output);
  std::ofstream flat(c.output + ".csv");
  flat << "model,family,order,response,statistic,mean_D,lo,hi,partitions,failed\n";
  for (const auto& r : report.rows)
    flat << r.model << ',' << r.family << ',' << r.order << ',' << r.response << ',' << to_string(r.statistic) << ','
         << r.mean_D << ',' << r.interval.lo << ',' << r.interval.hi << ',' << r.values.size() << ','
         << r.failed.size() << '\n';
  return {{"models", specs.size()}, {"rows", report.rows.size()}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tailchain: extreme excursion modelling for met-ocean series"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  RunConfig cfg;
  std::string config_file;
  app.add_option("--config", config_file, "JSON run config or a manifest to rerun");
  app.add_option("--threads", cfg.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "random seed");

  auto* synth = app.add_subcommand("synth", "write a synthetic met-ocean series");
  synth->add_option("--out", cfg.output, "output CSV");
  synth->add_option("--n", cfg.synth_n, "series length");

  auto* fit = app.add_subcommand("fit", "fit an excursion model");
  fit->add_option("--in", cfg.input, "input series CSV");
  fit->add_option("--out", cfg.output, "output model JSON");
  fit->add_option("--family", cfg.family, "mmem | evar | evar0 | hm");
  fit->add_option("--k", cfg.k, "model order");
  fit->add_option("--max-order", cfg.max_order, "upper bound on k");
  fit->add_option("--threshold", cfg.threshold, "dependence threshold probability");
  fit->add_option("--p1", cfg.p1, "wave direction AR order");
  fit->add_option("--p2", cfg.p2, "wind offset AR order");
  fit->add_option("--max-rejects", cfg.max_rejects, "rejection cap per excursion");

  auto* simulate = app.add_subcommand("simulate", "simulate an ensemble of excursions");
  simulate->add_option("--model", cfg.model, "fitted model JSON");
  simulate->add_option("--out", cfg.output, "output ensemble CSV");
  simulate->add_option("--n", cfg.n, "number of excursions");

  auto* diagnose = app.add_subcommand("diagnose", "chi and survival curves");
  diagnose->add_option("--in", cfg.input, "input series CSV");
  diagnose->add_option("--ensemble", cfg.ensemble, "simulated ensemble CSV");
  diagnose->add_option("--out", cfg.output, "output prefix");
  diagnose->add_option("--max-lag", cfg.max_lag, "largest lag");
  diagnose->add_option("--threshold", cfg.threshold, "dependence threshold probability");

  auto* respond = app.add_subcommand("respond", "structure response maxima and sums per excursion");
  respond->add_option("--ensemble", cfg.ensemble, "ensemble CSV");
  respond->add_option("--in", cfg.input, "observed series CSV, used when no ensemble is given");
  respond->add_option("--out", cfg.output, "output CSV");
  respond->add_option("--threshold", cfg.threshold, "dependence threshold probability");

  auto* crossval = app.add_subcommand("crossval", "cross-validated model comparison");
  crossval->add_option("--in", cfg.input, "input series CSV");
  crossval->add_option("--out", cfg.output, "output report JSON");
  crossval->add_option("--families", cfg.families, "families to compare")->delimiter(',');
  crossval->add_option("--max-order", cfg.max_order, "orders 1..max");
  crossval->add_option("--partitions", cfg.partitions, "number of random partitions");
  crossval->add_option("--train-frac", cfg.train_frac, "training fraction");
  crossval->add_option("--n", cfg.n, "ensemble size per model and partition");
  crossval->add_option("--threshold", cfg.threshold, "dependence threshold probability");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error(ErrorKind::config, e.what());
  }

  try {
    const std::string command = app.get_subcommands().front()->get_name();
    if (!config_file.empty()) {
      json j = read_json(config_file);
      if (j.contains("tool") && j.contains("config")) j = j.at("config");
      // Explicit flags win over the file.
      const json flags = cfg;
      json merged = j.get<RunConfig>();
      auto overlay = [&](const CLI::App* a) {
        for (const auto* opt : a->get_options()) {
          if (opt->count() == 0 || opt->get_name() == "--config") continue;
          const std::string key = config_key(opt->get_name(), command);
          if (flags.contains(key)) merged[key] = flags[key];
        }
      };
      overlay(&app);
      for (const auto* sub : app.get_subcommands()) overlay(sub);
      cfg = merged.get<RunConfig>();
    }
    cfg.command = command;
    validate(cfg);

    Manifest m;
    m.command = command;
    json summary;
    if (command == "synth") {
      summary = run_synth(cfg);
      m.outputs = {cfg.output};
    } else if (command == "fit") {
      summary = run_fit(cfg);
      m.inputs = {cfg.input};
      m.outputs = {cfg.output};
    } else if (command == "simulate") {
      summary = run_simulate(cfg);
      m.inputs = {cfg.model};
      m.outputs = {cfg.output, cfg.output + ".summary.json"};
    } else if (command == "diagnose") {
      summary = run_diagnose(cfg);
      m.inputs = {cfg.input};
      if (!cfg.ensemble.empty()) m.inputs.push_back(cfg.ensemble);
      m.outputs = {cfg.output + "_chi.csv", cfg.output + "_survival.csv"};
    } else if (command == "respond") {
      summary = run_respond(cfg);
      m.inputs = {cfg.ensemble.empty() ? cfg.input : cfg.ensemble};
      m.outputs = {cfg.output};
    } else if (command == "crossval") {
      summary = run_crossval(cfg);
      m.inputs = {cfg.input};
      m.outputs = {cfg.output, cfg.output + ".csv"};
    }
    m.config = cfg;
    m.extra = summary;
    write_manifest(m);
    return 0;
  } catch (const Error& e) {
    return report_error(e.kind(), e.what());
  } catch (const json::exception& e) {
    return report_error(ErrorKind::config, e.what());
  } catch (const fs::filesystem_error& e) {
    return report_error(ErrorKind::data, e.what());
  }
}

#include "tailchain/serialize.hpp"

#include "tailchain/error.hpp"

namespace tailchain {
namespace {

const char* dir_name(Direction d) { return to_string(d); }

Direction dir_from(const json& j) {
  const auto s = j.get<std::string>();
  if (s == "forward") return Direction::forward;
  if (s == "backward") return Direction::backward;
  throw ConfigError("unknown direction '" + s + "'");
}

}  // namespace

void to_json(json& j, const GPDParams& p) {
  j = {{"sigma", p.sigma}, {"xi", p.xi}, {"u_x", p.u_x}, {"zeta_u", p.zeta_u}};
}

void from_json(const json& j, GPDParams& p) {
  p.sigma = j.at("sigma").get<double>();
  p.xi = j.at("xi").get<double>();
  p.u_x = j.at("u_x").get<double>();
  p.zeta_u = j.at("zeta_u").get<double>();
}

void to_json(json& j, const SemiParametricMarginal& m) {
  j = {{"variable", to_string(m.variable())}, {"bins", json::array()}};
  for (const auto& b : m.bins()) j["bins"].push_back({{"lo", b.lo}, {"hi", b.hi}, {"tail", b.tail}, {"body", b.body}});
}

void from_json(const json& j, SemiParametricMarginal& m) {
  std::vector<MarginalBin> bins;
  for (const auto& jb : j.at("bins")) {
    MarginalBin b;
    b.lo = jb.at("lo").get<double>();
    b.hi = jb.at("hi").get<double>();
    b.tail = jb.at("tail").get<GPDParams>();
    b.body = jb.at("body").get<std::vector<double>>();
    bins.push_back(std::move(b));
  }
  m = SemiParametricMarginal(variable_from_string(j.at("variable").get<std::string>()), std::move(bins));
}

void to_json(json& j, const IrregularMatrix& m) {
  j = {{"row_lo", m.row_lo()}, {"row_hi", m.row_hi()}, {"cols", m.cols()}, {"values", m.values()}};
}

void from_json(const json& j, IrregularMatrix& m) {
  m = IrregularMatrix(j.at("row_lo").get<int>(), j.at("row_hi").get<int>(), j.at("cols").get<int>());
  const auto v = j.at("values").get<std::vector<double>>();
  if (v.size() != m.size()) throw ConfigError("irregular matrix value count mismatch");
  m.values() = v;
}

void to_json(json& j, const ResidualSample& r) {
  j = {{"rows", r.rows()}, {"dim", r.dim()}, {"bandwidth", r.bandwidth()}, {"data", r.data()}};
}

void from_json(const json& j, ResidualSample& r) {
  r = ResidualSample(j.at("rows").get<std::size_t>(), j.at("dim").get<std::size_t>(),
                     j.at("data").get<std::vector<double>>(), j.at("bandwidth").get<std::vector<double>>());
}

void to_json(json& j, const PeakModel& p) {
  j = {{"k", p.k},         {"d", p.d},           {"u", p.u},           {"alpha", p.params.alpha},
       {"beta", p.params.beta}, {"mu", p.mu},    {"sigma2", p.sigma2}, {"residuals", p.residuals},
       {"at_bound", p.at_bound}};
}

void from_json(const json& j, PeakModel& p) {
  p.k = j.at("k").get<int>();
  p.d = j.at("d").get<int>();
  p.u = j.at("u").get<double>();
  p.params.alpha = j.at("alpha").get<IrregularMatrix>();
  p.params.beta = j.at("beta").get<IrregularMatrix>();
  p.mu = j.at("mu").get<std::vector<double>>();
  p.sigma2 = j.at("sigma2").get<std::vector<double>>();
  p.residuals = j.at("residuals").get<ResidualSample>();
  p.at_bound = j.value("at_bound", std::vector<std::size_t>{});
}

void to_json(json& j, const MMEMParams& p) {
  j = {{"type", "mmem"},     {"k", p.k},         {"u", p.u},           {"direction", dir_name(p.direction)},
       {"alpha0", p.alpha0}, {"beta0", p.beta0}, {"mu", p.mu},         {"sigma2", p.sigma2},
       {"residuals", p.residuals}, {"at_bound", p.at_bound}};
}

void from_json(const json& j, MMEMParams& p) {
  p.k = j.at("k").get<int>();
  p.u = j.at("u").get<double>();
  p.direction = dir_from(j.at("direction"));
  p.alpha0 = j.at("alpha0").get<IrregularMatrix>();
  p.beta0 = j.at("beta0").get<IrregularMatrix>();
  p.mu = j.at("mu").get<std::vector<double>>();
  p.sigma2 = j.at("sigma2").get<std::vector<double>>();
  p.residuals = j.at("residuals").get<ResidualSample>();
  p.at_bound = j.value("at_bound", std::vector<std::size_t>{});
}

void to_json(json& j, const ReparamMap& m) { j = {{"k", m.k}, {"d", m.d}, {"alpha_hat", m.alpha_hat}}; }

void from_json(const json& j, ReparamMap& m) {
  m.k = j.at("k").get<int>();
  m.d = j.at("d").get<int>();
  m.alpha_hat = j.at("alpha_hat").get<std::vector<double>>();
}

void to_json(json& j, const EVARParams& p) {
  json phi = json::array();
  for (const auto& P : p.phi) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < P.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(P.cols()));
      for (Eigen::Index c = 0; c < P.cols(); ++c) row[static_cast<std::size_t>(c)] = P(r, c);
      rows.push_back(row);
    }
    phi.push_back(rows);
  }
  j = {{"type", "evar"},       {"k", p.k},
       {"d", p.d},             {"u", p.u},
       {"direction", dir_name(p.direction)},
       {"phi", phi},           {"B", p.B},
       {"mu", p.mu},           {"sigma2", p.sigma2},
       {"residuals", p.residuals},
       {"raw_coordinates", p.raw_coordinates},
       {"reparam_fallback", p.reparam_fallback},
       {"nll", p.nll}};
  if (p.reparam) j["reparam"] = *p.reparam;
}

void from_json(const json& j, EVARParams& p) {
  p.k = j.at("k").get<int>();
  p.d = j.at("d").get<int>();
  p.u = j.at("u").get<double>();
  p.direction = dir_from(j.at("direction"));
  p.phi.clear();
  for (const auto& jp : j.at("phi")) {
    Eigen::MatrixXd P(p.d, p.d);
    for (int r = 0; r < p.d; ++r)
      for (int c = 0; c < p.d; ++c) P(r, c) = jp.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
    p.phi.push_back(P);
  }
  if (static_cast<int>(p.phi.size()) != p.k) throw ConfigError("EVAR: number of Phi matrices differs from k");
  p.B = j.at("B").get<std::vector<double>>();
  p.mu = j.at("mu").get<std::vector<double>>();
  p.sigma2 = j.at("sigma2").get<std::vector<double>>();
  p.residuals = j.at("residuals").get<ResidualSample>();
  p.raw_coordinates = j.value("raw_coordinates", false);
  p.reparam_fallback = j.value("reparam_fallback", false);
  p.nll = j.value("nll", 0.0);
  if (j.contains("reparam")) p.reparam = j.at("reparam").get<ReparamMap>();
}

void to_json(json& j, const ChainModel& c) {
  std::visit([&j](const auto& p) { j = p; }, c);
}

void from_json(const json& j, ChainModel& c) {
  const auto type = j.at("type").get<std::string>();
  if (type == "mmem")
    c = j.get<MMEMParams>();
  else if (type == "evar")
    c = j.get<EVARParams>();
  else
    throw ConfigError("unknown chain model type '" + type + "'");
}

void to_json(json& j, const WaveDirModel& m) {
  j = {{"p1", m.p1}, {"phi", m.phi}, {"lambda", m.lambda}, {"changes", m.changes}};
}

void from_json(const json& j, WaveDirModel& m) {
  m.p1 = j.at("p1").get<int>();
  m.phi = j.at("phi").get<std::vector<double>>();
  m.lambda = j.at("lambda").get<Lambda>();
  m.changes = j.at("changes").get<std::vector<double>>();
}

void to_json(json& j, const WindOffsetModel& m) { j = {{"p2", m.p2}, {"phi", m.phi}, {"residuals", m.residuals}}; }

void from_json(const json& j, WindOffsetModel& m) {
  m.p2 = j.at("p2").get<int>();
  m.phi = j.at("phi").get<std::vector<double>>();
  m.residuals = j.at("residuals").get<ResidualSample>();
}

void to_json(json& j, const DirectionModels& m) { j = {{"wave", m.wave}, {"wind", m.wind}}; }

void from_json(const json& j, DirectionModels& m) {
  m.wave = j.at("wave").get<WaveDirModel>();
  m.wind = j.at("wind").get<WindOffsetModel>();
}

void to_json(json& j, const ExcursionModel& m) {
  json anchors = json::array();
  for (const auto& a : m.anchors) anchors.push_back({a[0], a[1]});
  j = {{"k", m.k},
       {"u", m.u},
       {"peak", m.peak},
       {"forward", m.forward},
       {"backward", m.backward},
       {"storm_max", m.storm_max},
       {"pre", m.pre},
       {"post", m.post},
       {"anchors", anchors},
       {"hs_margin", m.hs_margin},
       {"ws_margin", m.ws_margin},
       {"max_rejects", m.max_rejects},
       {"max_steps", m.max_steps}};
}

void from_json(const json& j, ExcursionModel& m) {
  m.k = j.at("k").get<int>();
  m.u = j.at("u").get<double>();
  m.peak = j.at("peak").get<PeakModel>();
  from_json(j.at("forward"), m.forward);
  from_json(j.at("backward"), m.backward);
  m.storm_max = j.at("storm_max").get<GPDParams>();
  m.pre = j.at("pre").get<DirectionModels>();
  m.post = j.at("post").get<DirectionModels>();
  m.anchors.clear();
  for (const auto& a : j.at("anchors")) m.anchors.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
  m.hs_margin = j.at("hs_margin").get<SemiParametricMarginal>();
  m.ws_margin = j.at("ws_margin").get<SemiParametricMarginal>();
  m.max_rejects = j.value("max_rejects", 1000);
  m.max_steps = j.value("max_steps", 2000);
  m.validate();
}

void to_json(json& j, const StormEntry& s) {
  j = {{"hs_max", s.hs_max}, {"theta_h", s.theta_h}, {"ws", s.ws},       {"peak", s.peak},
       {"hs", s.hs},         {"ws_path", s.ws_path}, {"theta_h_path", s.theta_h_path},
       {"theta_w_path", s.theta_w_path}};
}

void from_json(const json& j, StormEntry& s) {
  s.hs_max = j.at("hs_max").get<double>();
  s.theta_h = j.at("theta_h").get<double>();
  s.ws = j.at("ws").get<double>();
  s.peak = j.at("peak").get<std::size_t>();
  s.hs = j.at("hs").get<std::vector<double>>();
  s.ws_path = j.at("ws_path").get<std::vector<double>>();
  s.theta_h_path = j.at("theta_h_path").get<std::vector<double>>();
  s.theta_w_path = j.at("theta_w_path").get<std::vector<double>>();
}

void to_json(json& j, const WindSpeedRegression& r) {
  j = {{"beta0", r.beta0}, {"beta1", r.beta1}, {"sigma", r.sigma}, {"degenerate", r.degenerate}};
}

void from_json(const json& j, WindSpeedRegression& r) {
  r.beta0 = j.at("beta0").get<double>();
  r.beta1 = j.at("beta1").get<double>();
  r.sigma = j.at("sigma").get<double>();
  r.degenerate = j.value("degenerate", false);
}

void to_json(json& j, const StormMaxModel& m) {
  j = {{"edges", m.edges}, {"tails", m.tails}, {"pooled", m.pooled}};
}

void from_json(const json& j, StormMaxModel& m) {
  m.edges = j.at("edges").get<std::vector<double>>();
  m.tails = j.at("tails").get<std::vector<GPDParams>>();
  m.pooled = j.at("pooled").get<std::vector<bool>>();
}

void to_json(json& j, const HMModel& m) {
  j = {{"catalog", m.catalog}, {"storm_max", m.storm_max}, {"regression", m.regression}, {"n_nearest", m.n_nearest}};
}

void from_json(const json& j, HMModel& m) {
  m.catalog = j.at("catalog").get<StormCatalog>();
  m.storm_max = j.at("storm_max").get<StormMaxModel>();
  m.regression = j.at("regression").get<WindSpeedRegression>();
  m.n_nearest = j.value("n_nearest", 20);
}

void to_json(json& j, const Excursion& e) {
  json y = json::array();
  for (const auto& v : e.y) y.push_back({v[0], v[1]});
  j = {{"a", e.a},   {"b", e.b},   {"i_star", e.i_star}, {"lo", e.lo},       {"hi", e.hi},
       {"y", y},     {"hs", e.hs}, {"ws", e.ws},         {"theta_h", e.theta_h}, {"theta_w", e.theta_w},
       {"censored", e.censored}};
}

void from_json(const json& j, Excursion& e) {
  e.a = j.at("a").get<std::int64_t>();
  e.b = j.at("b").get<std::int64_t>();
  e.i_star = j.at("i_star").get<std::int64_t>();
  e.lo = j.at("lo").get<std::int64_t>();
  e.hi = j.at("hi").get<std::int64_t>();
  e.y.clear();
  for (const auto& v : j.at("y")) e.y.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
  e.hs = j.at("hs").get<std::vector<double>>();
  e.ws = j.at("ws").get<std::vector<double>>();
  e.theta_h = j.at("theta_h").get<std::vector<double>>();
  e.theta_w = j.at("theta_w").get<std::vector<double>>();
  e.censored = j.value("censored", false);
}

void to_json(json& j, const SyntheticSpec& s) {
  j = {{"n", s.n},
       {"lag1_rho", s.lag1_rho},
       {"cross_rho", s.cross_rho},
       {"gpd_tail", {{{"sigma", s.gpd_tail[0].sigma}, {"xi", s.gpd_tail[0].xi}},
                     {{"sigma", s.gpd_tail[1].sigma}, {"xi", s.gpd_tail[1].xi}}}},
       {"dir_drift_sd", s.dir_drift_sd},
       {"seed", s.seed}};
}

void from_json(const json& j, SyntheticSpec& s) {
  s.n = j.value("n", s.n);
  s.lag1_rho = j.value("lag1_rho", s.lag1_rho);
  s.cross_rho = j.value("cross_rho", s.cross_rho);
  if (j.contains("gpd_tail")) {
    for (std::size_t v = 0; v < 2; ++v) {
      s.gpd_tail[v].sigma = j["gpd_tail"].at(v).at("sigma").get<double>();
      s.gpd_tail[v].xi = j["gpd_tail"].at(v).at("xi").get<double>();
    }
  }
  s.dir_drift_sd = j.value("dir_drift_sd", s.dir_drift_sd);
  s.seed = j.value("seed", s.seed);
}

void to_json(json& j, const ResponseConfig& c) { j = {{"c", c.c}, {"h", c.h}}; }

void from_json(const json& j, ResponseConfig& c) {
  c.c = j.at("c").get<double>();
  c.h = j.at("h").get<double>();
}

void to_json(json& j, const CVReport& r) {
  j = {{"n_partitions", r.n_partitions}, {"train_frac", r.train_frac}, {"train_size", r.train_size},
       {"seed", r.seed}, {"rows", json::array()}};
  for (const auto& row : r.rows) {
    j["rows"].push_back({{"model", row.model},
                         {"family", row.family},
                         {"order", row.order},
                         {"response", row.response},
                         {"statistic", to_string(row.statistic)},
                         {"mean_D", row.values.empty() ? json(nullptr) : json(row.mean_D)},
                         {"lo", row.interval.lo},
                         {"hi", row.interval.hi},
                         {"partitions", row.values.size()},
                         {"values", row.values},
                         {"failed", row.failed},
                         {"errors", row.errors}});
  }
}

}  // namespace tailchain

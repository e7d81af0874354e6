#include "tailchain/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "tailchain/directional.hpp"
#include "tailchain/error.hpp"
#include "tailchain/random.hpp"
#include "tailchain/stats.hpp"

namespace tailchain {
namespace {

constexpr std::array<std::string_view, 5> kColumns{"t", "hs", "ws", "theta_h", "theta_w"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view cell, std::size_t row, std::string_view column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty() || !std::isfinite(v))
    throw ParseError(row, std::string(column), "non-numeric cell '" + std::string(cell) + "'");
  return v;
}

std::int64_t parse_int(std::string_view cell, std::size_t row) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty())
    throw ParseError(row, "t", "non-integer time index '" + std::string(cell) + "'");
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void check_value(double v, std::size_t row, std::string_view column) {
  const bool direction = column == "theta_h" || column == "theta_w";
  if (direction && !(v >= 0.0 && v < 360.0))
    throw ParseError(row, std::string(column), "direction out of range [0,360): " + format_double(v));
  if (!direction && v < 0.0) throw ParseError(row, std::string(column), "negative value " + format_double(v));
}

}  // namespace

void MetOceanSeries::validate() const {
  const std::size_t n = t.size();
  if (hs.size() != n || ws.size() != n || theta_h.size() != n || theta_w.size() != n)
    throw DataError("series columns have different lengths");
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && t[i] != t[i - 1] + 1) throw DataError("non-contiguous time index at row " + std::to_string(i + 1));
    if (!std::isfinite(hs[i]) || !std::isfinite(ws[i]) || hs[i] < 0.0 || ws[i] < 0.0)
      throw DataError("invalid hs/ws at row " + std::to_string(i + 1));
    if (!(theta_h[i] >= 0.0 && theta_h[i] < 360.0) || !(theta_w[i] >= 0.0 && theta_w[i] < 360.0))
      throw DataError("direction out of range at row " + std::to_string(i + 1));
  }
}

MetOceanSeries parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(0, "t", "empty file, header expected");
  const auto header = split(line);
  std::array<std::size_t, 5> position{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    std::size_t found = header.size();
    for (std::size_t h = 0; h < header.size(); ++h)
      if (header[h] == kColumns[c]) found = h;
    if (found == header.size()) throw ParseError(0, std::string(kColumns[c]), "missing column");
    position[c] = found;
  }

  MetOceanSeries s;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw ParseError(row, "t", "expected " + std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
    const std::int64_t t = parse_int(cells[position[0]], row);
    if (!s.t.empty() && t != s.t.back() + 1) throw ParseError(row, "t", "non-contiguous time index");
    std::array<double, 4> v{};
    for (std::size_t c = 1; c < kColumns.size(); ++c) {
      v[c - 1] = parse_double(cells[position[c]], row, kColumns[c]);
      check_value(v[c - 1], row, kColumns[c]);
    }
    s.t.push_back(t);
    s.hs.push_back(v[0]);
    s.ws.push_back(v[1]);
    s.theta_h.push_back(v[2]);
    s.theta_w.push_back(v[3]);
  }
  return s;
}

MetOceanSeries read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_csv(in);
}

void write_csv(const MetOceanSeries& series, std::ostream& out) {
  out << "t,hs,ws,theta_h,theta_w\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << series.t[i] << ',' << format_double(series.hs[i]) << ',' << format_double(series.ws[i]) << ','
        << format_double(series.theta_h[i]) << ',' << format_double(series.theta_w[i]) << '\n';
  }
}

void write_csv(const MetOceanSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_csv(series, out);
}

void SyntheticSpec::validate() const {
  if (n < 100) throw ConfigError("synthetic series needs n >= 100");
  for (double r : lag1_rho)
    if (!(r > -1.0 && r < 1.0)) throw ConfigError("lag1_rho must lie in (-1,1)");
  if (!(cross_rho > -1.0 && cross_rho < 1.0)) throw ConfigError("cross_rho must lie in (-1,1)");
  for (const auto& g : gpd_tail)
    if (!(g.sigma > 0.0) || !std::isfinite(g.xi)) throw ConfigError("GPD scale must be positive");
  if (!(dir_drift_sd >= 0.0)) throw ConfigError("dir_drift_sd must be non-negative");
  const double c = innovation_correlation();
  if (!(std::abs(c) < 1.0)) throw ConfigError("cross_rho is not attainable with the given lag-1 correlations");
}

double SyntheticSpec::innovation_correlation() const {
  const double a = lag1_rho[0], b = lag1_rho[1];
  return cross_rho * (1.0 - a * b) / std::sqrt((1.0 - a * a) * (1.0 - b * b));
}

double SyntheticSpec::marginal_quantile(int variable, double p) const {
  return marginal_quantile_upper(variable, 1.0 - p);
}

double SyntheticSpec::marginal_quantile_upper(int variable, double survival) const {
  const auto& g = gpd_tail.at(static_cast<std::size_t>(variable));
  if (std::abs(g.xi) < 1e-12) return -g.sigma * std::log(survival);
  return g.sigma / g.xi * (std::pow(survival, -g.xi) - 1.0);
}

SyntheticDraw generate_synthetic_with_latent(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const double c = spec.innovation_correlation();
  const std::array<double, 2> rho = spec.lag1_rho;
  const std::array<double, 2> scale{std::sqrt(1.0 - rho[0] * rho[0]), std::sqrt(1.0 - rho[1] * rho[1])};

  SyntheticDraw draw;
  auto& s = draw.series;
  s.t.resize(spec.n);
  s.hs.resize(spec.n);
  s.ws.resize(spec.n);
  s.theta_h.resize(spec.n);
  s.theta_w.resize(spec.n);
  draw.latent.resize(spec.n);

  // Stationary start: correlated standard normals.
  const double e0 = standard_normal(rng), e1 = standard_normal(rng);
  Vec2 z{e0, spec.cross_rho * e0 + std::sqrt(1.0 - spec.cross_rho * spec.cross_rho) * e1};

  double theta = 360.0 * uniform01(rng);
  double increment = 0.0;
  double offset = 0.0;
  for (std::size_t i = 0; i < spec.n; ++i) {
    if (i > 0) {
      const double a = standard_normal(rng), b = standard_normal(rng);
      const double eta0 = a, eta1 = c * a + std::sqrt(1.0 - c * c) * b;
      z = {rho[0] * z[0] + scale[0] * eta0, rho[1] * z[1] + scale[1] * eta1};
    }
    draw.latent[i] = z;
    s.t[i] = static_cast<std::int64_t>(i);
    s.hs[i] = spec.marginal_quantile_upper(0, normal_cdf(-z[0]));
    s.ws[i] = spec.marginal_quantile_upper(1, normal_cdf(-z[1]));

    // Direction changes are persistent and shrink as the sea state grows.
    if (i > 0) {
      const double sd = spec.dir_drift_sd * std::sqrt(0.15 + 0.85 * std::exp(-0.4 * s.hs[i - 1]));
      increment = 0.4 * increment + sd * standard_normal(rng);
      theta = wrap_degrees(theta + increment);
    }
    offset = 0.6 * offset + 8.0 * standard_normal(rng);
    s.theta_h[i] = theta;
    s.theta_w[i] = wrap_degrees(theta + offset);
  }
  return draw;
}

MetOceanSeries generate_synthetic(const SyntheticSpec& spec) { return generate_synthetic_with_latent(spec).series; }

}  // namespace tailchain

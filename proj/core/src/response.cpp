#include "tailchain/response.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tailchain/error.hpp"

namespace tailchain {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

template <class Reduce>
ResponseValue reduce_response(const Excursion& e, const ResponseConfig& cfg, Reduce reduce) {
  if (!e.has_physical()) throw DataError("response needs excursions with physical data");
  ResponseValue out;
  out.empty = true;
  for (std::int64_t t = e.a; t <= e.b; ++t) {
    if (std::abs(t - e.i_star) <= 2) continue;
    const std::size_t r = e.row(t);
    const double v = instantaneous_response(e.hs[r], e.ws[r], e.theta_h[r], e.theta_w[r], cfg);
    out.value = out.empty ? v : reduce(out.value, v);
    out.empty = false;
  }
  return out;
}

}  // namespace

void ResponseConfig::validate() const {
  if (!(c > 0.0) || !(h > 0.0)) throw ConfigError("response coefficients c and h must be positive");
}

std::vector<ResponseConfig> default_response_configs() { return {{0.5, 6.0}, {0.6, 4.0}}; }

double exposed_area(double theta_h) {
  double r = std::fmod(theta_h + 45.0, 90.0);
  if (r < 0.0) r += 90.0;
  return 1.0 / std::cos((r - 45.0) * kDeg);
}

double inline_wind(double ws, double theta_h, double theta_w) { return ws * std::cos((theta_h - theta_w) * kDeg); }

double instantaneous_response(double hs, double ws, double theta_h, double theta_w, const ResponseConfig& cfg) {
  const double iw = inline_wind(ws, theta_h, theta_w);
  double r = cfg.c * iw * iw;
  if (hs >= cfg.h) r += exposed_area(theta_h) * (hs - cfg.h) * hs * hs;
  return r;
}

ResponseValue rmax(const Excursion& e, const ResponseConfig& cfg) {
  return reduce_response(e, cfg, [](double a, double b) { return std::max(a, b); });
}

ResponseValue rsum(const Excursion& e, const ResponseConfig& cfg) {
  return reduce_response(e, cfg, [](double a, double b) { return a + b; });
}

}  // namespace tailchain

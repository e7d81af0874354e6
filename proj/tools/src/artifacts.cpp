#include "artifacts.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "tailchain/error.hpp"

#ifndef TAILCHAIN_VERSION
#define TAILCHAIN_VERSION "0.0.0"
#endif

namespace tailchain::cli {

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

fs::path manifest_path(const fs::path& artifact) { return fs::path(artifact.string() + ".manifest.json"); }

void write_manifest(const Manifest& m) {
  if (m.outputs.empty()) return;
  json j;
  j["tool"] = "tailchain";
  j["version"] = TAILCHAIN_VERSION;
  j["command"] = m.command;
  j["config"] = m.config;
  j["inputs"] = json::array();
  for (const auto& p : m.inputs) {
    json in = {{"path", p.string()}, {"sha256", sha256_file(p)}};
    const auto mp = manifest_path(p);
    if (fs::exists(mp)) in["manifest_sha256"] = sha256_file(mp);
    j["inputs"].push_back(in);
  }
  j["outputs"] = json::array();
  for (const auto& p : m.outputs) j["outputs"].push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
  if (!m.extra.empty()) j["summary"] = m.extra;
  write_json(j, manifest_path(m.outputs.front()));
}

void write_ensemble_csv(const std::vector<Excursion>& excursions, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "excursion,t,a,b,i_star,y_hs,y_ws,hs,ws,theta_h,theta_w\n";
  out << std::setprecision(17);
  for (std::size_t id = 0; id < excursions.size(); ++id) {
    const auto& e = excursions[id];
    for (std::size_t r = 0; r < e.y.size(); ++r) {
      out << id << ',' << e.lo + static_cast<std::int64_t>(r) << ',' << e.a << ',' << e.b << ',' << e.i_star << ','
          << e.y[r][0] << ',' << e.y[r][1];
      if (e.has_physical())
        out << ',' << e.hs[r] << ',' << e.ws[r] << ',' << e.theta_h[r] << ',' << e.theta_w[r];
      else
        out << ",,,,";
      out << '\n';
    }
  }
}

std::vector<Excursion> read_ensemble_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("excursion,t,a,b,i_star", 0) != 0)
    throw ParseError(0, "excursion", path.string() + ": not an ensemble file");
  std::vector<Excursion> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    while (f.size() < 11) f.emplace_back();
    try {
      const auto id = std::stoull(f[0]);
      if (id == out.size()) {
        Excursion e;
        e.lo = std::stoll(f[1]);
        e.a = std::stoll(f[2]);
        e.b = std::stoll(f[3]);
        e.i_star = std::stoll(f[4]);
        out.push_back(std::move(e));
      } else if (id + 1 != out.size()) {
        throw ParseError(row - 1, "excursion", path.string() + ": excursion ids must be consecutive");
      }
      Excursion& e = out.back();
      e.hi = std::stoll(f[1]);
      e.y.push_back({std::stod(f[5]), std::stod(f[6])});
      if (!f[7].empty()) {
        e.hs.push_back(std::stod(f[7]));
        e.ws.push_back(std::stod(f[8]));
        e.theta_h.push_back(std::stod(f[9]));
        e.theta_w.push_back(std::stod(f[10]));
      }
    } catch (const std::logic_error&) {
      throw ParseError(row - 1, "", path.string() + ": malformed number");
    }
  }
  return out;
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace tailchain::cli

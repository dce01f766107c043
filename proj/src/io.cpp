#include "epiland/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace epiland {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return {buf.data(), end};
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_landscape_csv(const std::filesystem::path& path, const MollifiedLandscape& land) {
  auto out = open_out(path);
  out << "u,v,F,dFdu,dFdv\n";
  const std::size_t m = land.resolution();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const Point p = land.node(i, j);
      out << format_double(p.u) << ',' << format_double(p.v) << ',' << format_double(land.value(i, j))
          << ',' << format_double(land.grad_u(i, j)) << ',' << format_double(land.grad_v(i, j))
          << '\n';
    }
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const Discretization& disc) {
  auto out = open_out(path);
  out << "t,node,x,u,v\n";
  const auto x = disc.node_positions();
  for (const auto& s : traj.states) {
    const std::string t = format_double(s.t);
    for (std::size_t j = 0; j < s.u.size(); ++j) {
      out << t << ',' << j << ',' << format_double(x[j]) << ',' << format_double(s.u[j]) << ','
          << format_double(s.v[j]) << '\n';
    }
  }
}

void write_diagnostics_csv(const std::filesystem::path& path, const Trajectory& traj) {
  auto out = open_out(path);
  out << "t,avg_u,avg_v,basin\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << format_double(traj.times[i]) << ',' << format_double(traj.avg_series[i].u) << ','
        << format_double(traj.avg_series[i].v) << ',' << traj.basin_series[i] << '\n';
  }
}

void write_histogram_csv(const std::filesystem::path& path, const HistogramReport& hist) {
  auto out = open_out(path);
  out << "channel,bin_lo,bin_hi,count\n";
  for (auto [name, st] : {std::pair{"avg_u", &hist.u}, std::pair{"avg_v", &hist.v}}) {
    for (std::size_t b = 0; b < st->counts.size(); ++b) {
      out << name << ',' << format_double(st->bin_edges[b]) << ','
          << format_double(st->bin_edges[b + 1]) << ',' << st->counts[b] << '\n';
    }
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_file(const std::filesystem::path& path) {
  const std::string data = read_text(path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
    throw std::runtime_error("SHA-256 failed for " + path.string());
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

}  // namespace epiland

#include "visco/trajectory_io.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace visco {

namespace {

std::string matrix_name(char sym, int i, int a) {
  return std::string(1, sym) + std::to_string(i + 1) + std::to_string(a + 1);
}

template <typename Bundle>
void append_samples(TrajectoryDump& dump, const std::vector<double>& times, const std::vector<Bundle>& states) {
  dump.times = times;
  for (const auto& s : states) {
    std::vector<std::vector<double>> fields;
    for (const auto& c : s.components()) fields.emplace_back(c.values().begin(), c.values().end());
    dump.samples.push_back(std::move(fields));
  }
}

// Component names in storage order (matrix_index: direction outer).
std::vector<std::string> names(int d, bool with_S) {
  std::vector<std::string> out;
  for (int a = 0; a < d; ++a)
    for (int i = 0; i < d; ++i) out.push_back(matrix_name('F', i, a));
  for (int i = 0; i < d; ++i) out.push_back("v" + std::to_string(i + 1));
  if (with_S) {
    for (int a = 0; a < d; ++a)
      for (int i = 0; i < d; ++i) out.push_back(matrix_name('S', i, a));
  }
  return out;
}

void write_u32(std::ostream& os, std::uint32_t x) {
  if constexpr (std::endian::native == std::endian::big) x = __builtin_bswap32(x);
  os.write(reinterpret_cast<const char*>(&x), sizeof x);
}

void write_f64(std::ostream& os, double v) {
  std::uint64_t x;
  std::memcpy(&x, &v, sizeof x);
  if constexpr (std::endian::native == std::endian::big) x = __builtin_bswap64(x);
  os.write(reinterpret_cast<const char*>(&x), sizeof x);
}

std::uint32_t read_u32(std::istream& is) {
  std::uint32_t x = 0;
  if (!is.read(reinterpret_cast<char*>(&x), sizeof x)) throw std::runtime_error("truncated trajectory header");
  if constexpr (std::endian::native == std::endian::big) x = __builtin_bswap32(x);
  return x;
}

bool read_f64(std::istream& is, double& v) {
  std::uint64_t x = 0;
  if (!is.read(reinterpret_cast<char*>(&x), sizeof x)) return false;
  if constexpr (std::endian::native == std::endian::big) x = __builtin_bswap64(x);
  std::memcpy(&v, &x, sizeof v);
  return true;
}

}  // namespace

TrajectoryDump to_dump(const RelaxTrajectory& traj) {
  TrajectoryDump dump;
  dump.dim = traj.config.grid.dim;
  dump.n_points = traj.config.grid.n_points;
  dump.field_names = names(dump.dim, true);
  append_samples(dump, traj.times, traj.states);
  return dump;
}

TrajectoryDump to_dump(const EquilTrajectory& traj) {
  TrajectoryDump dump;
  dump.dim = traj.config.grid.dim;
  dump.n_points = traj.config.grid.n_points;
  dump.field_names = names(dump.dim, false);
  append_samples(dump, traj.times, traj.states);
  return dump;
}

void write_trajectory_csv(const TrajectoryDump& dump, std::ostream& os) {
  os << "t";
  for (const auto& name : dump.field_names) {
    const std::size_t points = dump.samples.empty() ? 0 : dump.samples.front().front().size();
    for (std::size_t p = 0; p < points; ++p) os << ',' << name << '_' << p;
  }
  os << '\n';
  const auto old_precision = os.precision(17);
  for (std::size_t k = 0; k < dump.times.size(); ++k) {
    os << dump.times[k];
    for (const auto& field : dump.samples[k])
      for (double x : field) os << ',' << x;
    os << '\n';
  }
  os.precision(old_precision);
}

void write_trajectory_binary(const TrajectoryDump& dump, std::ostream& os) {
  os.write(kTrajectoryMagic, 4);
  write_u32(os, kTrajectoryVersion);
  write_u32(os, static_cast<std::uint32_t>(dump.dim));
  write_u32(os, static_cast<std::uint32_t>(dump.n_points));
  const std::size_t fields = dump.samples.empty() ? dump.field_names.size() : dump.samples.front().size();
  write_u32(os, static_cast<std::uint32_t>(fields));
  for (std::size_t k = 0; k < dump.times.size(); ++k) {
    write_f64(os, dump.times[k]);
    for (const auto& field : dump.samples[k])
      for (double x : field) write_f64(os, x);
  }
  if (!os) throw std::runtime_error("failed writing trajectory dump");
}

TrajectoryDump read_trajectory_binary(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kTrajectoryMagic, 4) != 0) {
    throw std::runtime_error("not a VRLX trajectory dump");
  }
  const std::uint32_t version = read_u32(is);
  if (version != kTrajectoryVersion) throw std::runtime_error("unsupported trajectory version " + std::to_string(version));
  TrajectoryDump dump;
  dump.dim = static_cast<int>(read_u32(is));
  dump.n_points = static_cast<int>(read_u32(is));
  const std::uint32_t fields = read_u32(is);
  std::size_t points = 1;
  for (int a = 0; a < dump.dim; ++a) points *= static_cast<std::size_t>(dump.n_points);
  double t;
  while (read_f64(is, t)) {
    std::vector<std::vector<double>> sample(fields, std::vector<double>(points));
    for (auto& field : sample)
      for (double& x : field)
        if (!read_f64(is, x)) throw std::runtime_error("truncated trajectory record");
    dump.times.push_back(t);
    dump.samples.push_back(std::move(sample));
  }
  return dump;
}

}  // namespace visco

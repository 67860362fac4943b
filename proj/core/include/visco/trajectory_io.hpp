#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "visco/equilibrium_solver.hpp"
#include "visco/relax_solver.hpp"

namespace visco {

/// Binary snapshot layout (little-endian):
///   char[4] "VRLX", u32 version, u32 d, u32 N, u32 field_count,
///   then per sample: f64 t followed by field_count * N^d f64 values,
///   each field in grid (row-major) order.
inline constexpr char kTrajectoryMagic[4] = {'V', 'R', 'L', 'X'};
inline constexpr std::uint32_t kTrajectoryVersion = 1;

struct TrajectoryDump {
  int dim = 0;
  int n_points = 0;
  std::vector<std::string> field_names;
  std::vector<double> times;
  /// samples[k][c] holds field c at time k.
  std::vector<std::vector<std::vector<double>>> samples;
};

TrajectoryDump to_dump(const RelaxTrajectory& traj);
TrajectoryDump to_dump(const EquilTrajectory& traj);

/// CSV: header "t,<field>_<point>,...", one row per sample time.
void write_trajectory_csv(const TrajectoryDump& dump, std::ostream& os);
void write_trajectory_binary(const TrajectoryDump& dump, std::ostream& os);
/// Field names are not stored in the binary format and come back empty.
TrajectoryDump read_trajectory_binary(std::istream& is);

}  // namespace visco

#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mvlab/cloud.hpp"
#include "mvlab/lp_besov.hpp"
#include "mvlab/meanfield.hpp"
#include "mvlab/particle.hpp"
#include "mvlab/rate_table.hpp"
#include "mvlab/spectral.hpp"

namespace mvlab {

/// Binary snapshot, little-endian:
///   "MVLSNAP1" | u32 version=1 | u32 d | u64 N | u64 checkpoints | N x u32 ids
///   then per checkpoint: f64 time | N*d f64 positions (row-major)
void write_snapshot(const std::filesystem::path& file, const std::vector<Cloud>& clouds);
std::vector<Cloud> read_snapshot(const std::filesystem::path& file);

/// Columns: time,path,x1..xd.
void write_trajectory_csv(const std::filesystem::path& file, const Trajectory& traj);

/// <stem>.bin snapshot plus <stem>.json manifest {times, M, steps, horizon, provenance}.
void write_flow(const std::filesystem::path& stem, const MeasureFlow& flow);
MeasureFlow read_flow(const std::filesystem::path& stem);

/// <stem>.bin flat little-endian f64 values plus <stem>.json {L, n, d}.
void write_grid_field(const std::filesystem::path& stem, const GridField& field);
GridField read_grid_field(const std::filesystem::path& stem);

/// Columns: j,norm.
void write_besov_profile_csv(const std::filesystem::path& file, const BesovProfile& profile);

/// Columns: parameter,error,stderr.
void write_rate_table_csv(const std::filesystem::path& file, const RateTable& table);
nlohmann::json rate_table_json(const RateTable& table, std::uint64_t config_hash);

std::uint64_t fnv1a(std::string_view bytes) noexcept;

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace mvlab

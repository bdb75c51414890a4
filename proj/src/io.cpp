#include "mvlab/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mvlab {

namespace {

constexpr char kMagic[8] = {'M', 'V', 'L', 'S', 'N', 'A', 'P', '1'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  std::array<char, sizeof(T)> b;
  std::memcpy(b.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  os.write(b.data(), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  std::array<char, sizeof(T)> b;
  if (!is.read(b.data(), sizeof(T))) throw std::runtime_error("snapshot: truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  T v;
  std::memcpy(&v, b.data(), sizeof(T));
  return v;
}

std::ofstream open_out(const std::filesystem::path& file, bool binary) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream os(file, binary ? std::ios::binary : std::ios::out);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& file, bool binary) {
  std::ifstream is(file, binary ? std::ios::binary : std::ios::in);
  if (!is) throw std::runtime_error("cannot read " + file.string());
  return is;
}

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
  auto p = stem;
  p += ext;
  return p;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::uint64_t fnv1a(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void write_snapshot(const std::filesystem::path& file, const std::vector<Cloud>& clouds) {
  if (clouds.empty()) throw std::invalid_argument("snapshot: no clouds");
  const auto& first = clouds.front();
  for (const auto& c : clouds) {
    if (c.dim != first.dim || c.size() != first.size()) {
      throw std::invalid_argument("snapshot: clouds differ in shape");
    }
  }
  auto os = open_out(file, true);
  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(first.dim));
  put<std::uint64_t>(os, first.size());
  put<std::uint64_t>(os, clouds.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    put<std::uint32_t>(os, i < first.ids.size() ? first.ids[i] : static_cast<std::uint32_t>(i));
  }
  for (const auto& c : clouds) {
    put<double>(os, c.time);
    for (double v : c.positions) put<double>(os, v);
  }
}

std::vector<Cloud> read_snapshot(const std::filesystem::path& file) {
  auto is = open_in(file, true);
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("snapshot: bad magic");
  }
  if (get<std::uint32_t>(is) != kVersion) throw std::runtime_error("snapshot: unknown version");
  const auto d = get<std::uint32_t>(is);
  const auto n = get<std::uint64_t>(is);
  const auto count = get<std::uint64_t>(is);
  std::vector<std::uint32_t> ids(n);
  for (auto& id : ids) id = get<std::uint32_t>(is);
  std::vector<Cloud> clouds;
  for (std::uint64_t c = 0; c < count; ++c) {
    const double t = get<double>(is);
    std::vector<double> pos(n * d);
    for (auto& v : pos) v = get<double>(is);
    Cloud cl(t, static_cast<int>(d), std::move(pos));
    cl.ids = ids;
    clouds.push_back(std::move(cl));
  }
  return clouds;
}

void write_trajectory_csv(const std::filesystem::path& file, const Trajectory& traj) {
  auto os = open_out(file, false);
  const int d = traj.clouds.empty() ? 1 : traj.clouds.front().dim;
  os << "time,path";
  for (int i = 1; i <= d; ++i) os << ",x" << i;
  os << '\n';
  for (const auto& c : traj.clouds) {
    for (std::size_t j = 0; j < c.size(); ++j) {
      os << format_double(c.time) << ',' << (j < c.ids.size() ? c.ids[j] : j);
      for (double v : c.point(j)) os << ',' << format_double(v);
      os << '\n';
    }
  }
}

void write_flow(const std::filesystem::path& stem, const MeasureFlow& flow) {
  write_snapshot(with_ext(stem, ".bin"), flow.clouds);
  nlohmann::json j;
  j["M"] = flow.points();
  j["steps"] = flow.steps;
  j["horizon"] = flow.horizon;
  j["provenance"] = flow.provenance;
  std::vector<double> times;
  for (const auto& c : flow.clouds) times.push_back(c.time);
  j["times"] = times;
  open_out(with_ext(stem, ".json"), false) << j.dump(2) << '\n';
}

MeasureFlow read_flow(const std::filesystem::path& stem) {
  auto is = open_in(with_ext(stem, ".json"), false);
  const auto j = nlohmann::json::parse(is);
  MeasureFlow flow;
  flow.steps = j.at("steps").get<std::size_t>();
  flow.horizon = j.at("horizon").get<double>();
  flow.provenance = j.at("provenance").get<std::string>();
  flow.clouds = read_snapshot(with_ext(stem, ".bin"));
  if (flow.clouds.size() != flow.steps + 1 || flow.points() != j.at("M").get<std::size_t>()) {
    throw std::runtime_error("flow manifest does not match its snapshot");
  }
  return flow;
}

void write_grid_field(const std::filesystem::path& stem, const GridField& field) {
  auto os = open_out(with_ext(stem, ".bin"), true);
  for (double v : field.values) put<double>(os, v);
  nlohmann::json j;
  j["L"] = field.half_length;
  j["n"] = field.n;
  j["d"] = field.dim;
  open_out(with_ext(stem, ".json"), false) << j.dump(2) << '\n';
}

GridField read_grid_field(const std::filesystem::path& stem) {
  auto js = open_in(with_ext(stem, ".json"), false);
  const auto j = nlohmann::json::parse(js);
  GridField g(j.at("L").get<double>(), j.at("n").get<std::size_t>(), j.at("d").get<int>());
  auto is = open_in(with_ext(stem, ".bin"), true);
  for (auto& v : g.values) v = get<double>(is);
  return g;
}

void write_besov_profile_csv(const std::filesystem::path& file, const BesovProfile& profile) {
  auto os = open_out(file, false);
  os << "j,norm\n";
  for (std::size_t i = 0; i < profile.j.size(); ++i) {
    os << profile.j[i] << ',' << format_double(profile.norms[i]) << '\n';
  }
}

void write_rate_table_csv(const std::filesystem::path& file, const RateTable& table) {
  auto os = open_out(file, false);
  os << "parameter,error,stderr\n";
  for (const auto& r : table.records) {
    os << format_double(r.parameter) << ',' << format_double(r.error) << ','
       << format_double(r.std_error) << '\n';
  }
}

nlohmann::json rate_table_json(const RateTable& table, std::uint64_t config_hash) {
  nlohmann::json j;
  j["name"] = table.name;
  j["parameter"] = table.parameter_name;
  if (table.fit) {
    j["slope"] = table.fit->slope;
    j["intercept"] = table.fit->intercept;
    j["r2"] = table.fit->r2;
  } else {
    j["slope"] = nullptr;
    j["r2"] = nullptr;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(config_hash));
  j["config_hash"] = hex;
  return j;
}

}  // namespace mvlab

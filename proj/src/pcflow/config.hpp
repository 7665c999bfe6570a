#pragma once

#include "pcflow/acquisition.hpp"
#include "pcflow/phantom.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace pcflow {

struct SweepSettings
{
  double min_px = 0.8;  // mm
  double max_px = 4.4;  // mm
  double step = 0.4;    // mm
  int repeats_per_size = 4;

  std::vector<double> sizes() const;
  bool operator==(SweepSettings const &) const = default;
};

struct ExperimentConfig
{
  PhantomScene scene = default_scene();
  AcquisitionParams cine = AcquisitionParams::cine_defaults();
  AcquisitionParams epi = AcquisitionParams::epi_defaults();
  int supersampling = kDefaultSupersampling;
  std::size_t vessel_tube = 0; // index into scene.tubes(); seed at its center
  int n_repeats = 10;
  SweepSettings sweep{};
  std::uint64_t base_seed = 1;
  std::filesystem::path output_dir = "pcflow-out";
  bool noiseless = false;
  int threads = 0; // 0 = hardware concurrency

  void validate() const;
  bool operator==(ExperimentConfig const &) const = default;
};

/// Parses the sectioned `key = value` format (see README). Unknown sections or
/// keys are rejected with ErrorKind::Config.
ExperimentConfig parse_config(std::istream &in, std::string const &origin = "<config>");
ExperimentConfig load_config(std::filesystem::path const &path);

/// Writes every key, defaults included; parse_config() reads it back.
void write_config(std::ostream &out, ExperimentConfig const &config);

} // namespace pcflow

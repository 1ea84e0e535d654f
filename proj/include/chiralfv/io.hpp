#pragma once

// Run configuration, binary checkpoints and CSV output.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chiralfv/core.hpp"
#include "chiralfv/experiments.hpp"
#include "chiralfv/time_integration.hpp"

namespace chiralfv {

enum class Mode { one_d, three_d };
const char* to_string(Mode m);

enum class IcKind { quasirandom, checkpoint, named };

struct RunConfig {
  Mode mode = Mode::one_d;
  ModelParams params;
  int n = 1;
  int m = 1;
  int l = 0;
  StepperConfig stepper;
  IcKind ic_kind = IcKind::quasirandom;
  QuasirandomICSpec ic;
  std::string ic_checkpoint;
  std::string ic_named;  // uniform | von_mises | traveling_wave
  double observe_every = 0.1;
  double checkpoint_every = 0.0;
  std::string output_dir = ".";
  std::string run_name = "run";
  int workers = 0;  // 0 keeps the library default
};

/// INI text. Top level: mode. Sections [params], [grid], [stepper], [ic],
/// [output], [parallel]. Unknown keys, missing required keys and bad values
/// throw std::invalid_argument naming the key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// --- checkpoints -----------------------------------------------------------

inline constexpr char kCheckpointMagic[8] = {'C', 'H', 'I', 'R', 'A', 'L', 'F', 'V'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Mode mode = Mode::one_d;
  int n = 1;
  int m = 1;
  int l = 0;
  ModelParams params;
  double time = 0.0;
  std::vector<double> values;
};

/// Layout: magic[8], u32 version, u32 mode (1 or 3), i32 n, m, l,
/// f64 v0, sigma, alpha, d_phi, rho, f64 time, u64 count, count x f64.
/// All little-endian.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& cp);
Checkpoint read_checkpoint(const std::filesystem::path& path);

void write_field(const std::filesystem::path& path, const Field1D& f, const ModelParams& params, double time);
void write_field(const std::filesystem::path& path, const Field3D& f, const ModelParams& params, double time);

/// Reads a checkpoint that must hold the requested mode (and grid, when given).
Field1D read_field_1d(const std::filesystem::path& path, std::optional<Grid1D> expect = std::nullopt,
                      double* time = nullptr, ModelParams* params = nullptr);
Field3D read_field_3d(const std::filesystem::path& path, std::optional<Grid3D> expect = std::nullopt,
                      double* time = nullptr, ModelParams* params = nullptr);

// --- CSV -------------------------------------------------------------------

using Metadata = std::vector<std::pair<std::string, std::string>>;

struct ObservableRecord {
  double time = 0.0;
  double r = 0.0;
  double theta = 0.0;
  double p = 0.0;
  double psi = 0.0;
  double delta_r = 0.0;
  double mass = 0.0;
  double dt = 0.0;
};

ObservableRecord sample_observables(const Field1D& f, double t, double dt);
ObservableRecord sample_observables(const Field3D& f, double t, double dt);

/// 17 significant digits, round-trips a double.
std::string format_double(double v);

Metadata describe(const ModelParams& p);
Metadata describe(const RunConfig& c);

/// "# key=value" lines followed by the header row.
void write_csv_preamble(std::ostream& os, const Metadata& meta, const std::vector<std::string>& columns);

const std::vector<std::string>& observable_columns();
const std::vector<std::string>& sweep_columns();

void write_observable_row(std::ostream& os, const ObservableRecord& r);
void write_observables(std::ostream& os, const std::vector<ObservableRecord>& records, const Metadata& meta = {});
void write_observables(const std::filesystem::path& path, const std::vector<ObservableRecord>& records,
                       const Metadata& meta = {});

void write_sweep_row(std::ostream& os, const SweepRecord& r);
void write_sweep(std::ostream& os, const std::vector<SweepRecord>& records, const Metadata& meta = {});
void write_sweep(const std::filesystem::path& path, const std::vector<SweepRecord>& records, const Metadata& meta = {});

/// Parsed CSV: metadata, header and numeric-or-text cells.
struct CsvTable {
  Metadata meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name) const;
};
CsvTable read_csv(std::istream& is);

}  // namespace chiralfv

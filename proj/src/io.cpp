#include "chiralfv/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "chiralfv/observables.hpp"

namespace chiralfv {

const char* to_string(Mode m) { return m == Mode::one_d ? "1d" : "3d"; }

// --- config ----------------------------------------------------------------

namespace {

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
  throw std::invalid_argument("config: " + key + ": " + what);
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) config_error(key, "expected a finite number, got '" + text + "'");
  return v;
}

long long to_integer(const std::string& key, const std::string& text) {
  long long v = 0;
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end) config_error(key, "expected an integer, got '" + text + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  config_error(key, "expected true or false, got '" + text + "'");
}

// Flattened "section.key" -> value with duplicate and unknown-key checks.
class Entries {
 public:
  explicit Entries(const boost::property_tree::ptree& tree) {
    for (const auto& [name, node] : tree) {
      if (node.empty()) {
        add(name, node.data());
        continue;
      }
      for (const auto& [key, leaf] : node) {
        if (!leaf.empty()) config_error(name + "." + key, "nested sections are not supported");
        add(name + "." + key, leaf.data());
      }
    }
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::optional<std::string> text(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    used_.insert(key);
    return it->second;
  }
  std::string required(const std::string& key) {
    auto v = text(key);
    if (!v) config_error(key, "missing required key");
    return *v;
  }
  void number(const std::string& key, double& out) {
    if (auto v = text(key)) out = to_double(key, *v);
  }
  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (auto v = text(key)) out = static_cast<Int>(to_integer(key, *v));
  }

  void reject_unused() const {
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) config_error(k, "unknown key");
  }

 private:
  void add(const std::string& key, const std::string& value) {
    if (!values_.emplace(key, value).second) config_error(key, "duplicate key");
  }
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

}  // namespace

RunConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream is(text);
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: parse error: ") + e.message() + " at line " +
                                std::to_string(e.line()));
  }
  Entries e(tree);
  RunConfig c;

  const std::string mode = e.required("mode");
  if (mode == "1d") c.mode = Mode::one_d;
  else if (mode == "3d") c.mode = Mode::three_d;
  else config_error("mode", "expected 1d or 3d, got '" + mode + "'");

  e.number("params.v0", c.params.v0);
  e.number("params.sigma", c.params.sigma);
  e.number("params.alpha", c.params.alpha);
  c.params.d_phi = to_double("params.d_phi", e.required("params.d_phi"));
  e.number("params.rho", c.params.rho);
  try {
    c.params.validate();
  } catch (const std::invalid_argument& ex) {
    throw std::invalid_argument(std::string("config: params: ") + ex.what());
  }

  c.l = static_cast<int>(to_integer("grid.l", e.required("grid.l")));
  if (c.l < 3) config_error("grid.l", "must be >= 3");
  if (c.mode == Mode::three_d) {
    c.n = static_cast<int>(to_integer("grid.n", e.required("grid.n")));
    c.m = static_cast<int>(to_integer("grid.m", e.required("grid.m")));
    if (c.n < 3) config_error("grid.n", "must be >= 3");
    if (c.m < 3) config_error("grid.m", "must be >= 3");
  } else {
    for (const char* k : {"grid.n", "grid.m"})
      if (e.has(k)) config_error(k, "only valid with mode = 3d");
  }

  e.number("stepper.dt", c.stepper.dt);
  e.number("stepper.cfl_safety", c.stepper.cfl_safety);
  c.stepper.t_end = to_double("stepper.t_end", e.required("stepper.t_end"));
  if (auto v = e.text("stepper.splitting")) c.stepper.use_splitting = to_bool("stepper.splitting", *v);
  e.number("stepper.theta", c.stepper.theta);
  e.number("stepper.min_dt", c.stepper.min_dt);
  if (!(c.stepper.t_end > 0.0)) config_error("stepper.t_end", "must be positive");
  try {
    c.stepper.validate();
  } catch (const std::invalid_argument& ex) {
    throw std::invalid_argument(std::string("config: stepper: ") + ex.what());
  }

  const bool qr_keys = e.has("ic.k_modes") || e.has("ic.epsilon") || e.has("ic.seed") || e.has("ic.max_redraws");
  const int sources = int(qr_keys) + int(e.has("ic.checkpoint")) + int(e.has("ic.state"));
  if (sources > 1) config_error("ic", "both ic sources given; choose one of quasirandom keys, checkpoint, state");
  e.integer("ic.k_modes", c.ic.k_modes);
  if (auto v = e.text("ic.epsilon")) c.ic.epsilon = to_double("ic.epsilon", *v);
  if (auto v = e.text("ic.seed")) {
    const long long s = to_integer("ic.seed", *v);
    if (s < 0) config_error("ic.seed", "must be >= 0");
    c.ic.seed = static_cast<std::uint64_t>(s);
  }
  e.integer("ic.max_redraws", c.ic.max_redraws);
  if (c.ic.k_modes < 1) config_error("ic.k_modes", "must be >= 1");
  if (c.ic.epsilon && *c.ic.epsilon < 0.0) config_error("ic.epsilon", "must be >= 0");
  if (c.ic.max_redraws < 0) config_error("ic.max_redraws", "must be >= 0");
  if (auto v = e.text("ic.checkpoint")) {
    c.ic_kind = IcKind::checkpoint;
    c.ic_checkpoint = *v;
    if (v->empty()) config_error("ic.checkpoint", "empty path");
  }
  if (auto v = e.text("ic.state")) {
    c.ic_kind = IcKind::named;
    c.ic_named = *v;
    if (*v != "uniform" && *v != "von_mises" && *v != "traveling_wave")
      config_error("ic.state", "expected uniform, von_mises or traveling_wave, got '" + *v + "'");
  }

  if (auto v = e.text("output.dir")) c.output_dir = *v;
  if (auto v = e.text("output.name")) c.run_name = *v;
  e.number("output.observe_every", c.observe_every);
  e.number("output.checkpoint_every", c.checkpoint_every);
  if (c.observe_every < 0.0) config_error("output.observe_every", "must be >= 0");
  if (c.checkpoint_every < 0.0) config_error("output.checkpoint_every", "must be >= 0");
  if (c.run_name.empty()) config_error("output.name", "must not be empty");

  e.integer("parallel.workers", c.workers);
  if (c.workers < 0) config_error("parallel.workers", "must be >= 0");

  e.reject_unused();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// --- checkpoints -----------------------------------------------------------

namespace {

template <class T>
void put_le(std::string& buf, T v) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U u = std::bit_cast<U>(v);
  for (std::size_t b = 0; b < sizeof(U); ++b) buf.push_back(static_cast<char>((u >> (8 * b)) & 0xff));
}

class Reader {
 public:
  Reader(const std::string& data, std::string path) : data_(data), path_(std::move(path)) {}
  template <class T>
  T get(const char* what) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    need(sizeof(U), what);
    U u = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b)
      u |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + b])) << (8 * b);
    pos_ += sizeof(U);
    return std::bit_cast<T>(u);
  }
  void need(std::size_t bytes, const char* what) const {
    if (data_.size() - pos_ < bytes) throw std::runtime_error("checkpoint " + path_ + ": truncated while reading " + what);
  }
  std::size_t pos() const { return pos_; }
  void skip(std::size_t n) { pos_ += n; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  const std::string& data_;
  std::string path_;
  std::size_t pos_ = 0;
};

Checkpoint make_checkpoint(Mode mode, int n, int m, int l, const ModelParams& params, double time,
                           const std::vector<double>& values) {
  Checkpoint cp;
  cp.mode = mode;
  cp.n = n;
  cp.m = m;
  cp.l = l;
  cp.params = params;
  cp.time = time;
  cp.values = values;
  return cp;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
  const std::size_t expected = static_cast<std::size_t>(cp.n) * static_cast<std::size_t>(cp.m) * static_cast<std::size_t>(cp.l);
  if (cp.values.size() != expected) throw std::invalid_argument("write_checkpoint: payload does not match the grid");
  std::string buf(kCheckpointMagic, sizeof kCheckpointMagic);
  put_le(buf, kCheckpointVersion);
  put_le(buf, static_cast<std::uint32_t>(cp.mode == Mode::one_d ? 1 : 3));
  put_le(buf, static_cast<std::int32_t>(cp.n));
  put_le(buf, static_cast<std::int32_t>(cp.m));
  put_le(buf, static_cast<std::int32_t>(cp.l));
  for (double v : {cp.params.v0, cp.params.sigma, cp.params.alpha, cp.params.d_phi, cp.params.rho}) put_le(buf, v);
  put_le(buf, cp.time);
  put_le(buf, static_cast<std::uint64_t>(cp.values.size()));
  for (double v : cp.values) put_le(buf, v);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();
  const std::string where = path.string();
  Reader r(data, where);
  r.need(sizeof kCheckpointMagic, "magic");
  if (std::memcmp(data.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0)
    throw std::runtime_error("checkpoint " + where + ": bad magic tag");
  r.skip(sizeof kCheckpointMagic);
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint " + where + ": unsupported version " + std::to_string(version));
  const auto mode = r.get<std::uint32_t>("mode");
  if (mode != 1 && mode != 3) throw std::runtime_error("checkpoint " + where + ": bad mode " + std::to_string(mode));
  Checkpoint cp;
  cp.mode = mode == 1 ? Mode::one_d : Mode::three_d;
  cp.n = r.get<std::int32_t>("n");
  cp.m = r.get<std::int32_t>("m");
  cp.l = r.get<std::int32_t>("l");
  if (cp.n <= 0 || cp.m <= 0 || cp.l <= 0 || (mode == 1 && (cp.n != 1 || cp.m != 1)))
    throw std::runtime_error("checkpoint " + where + ": bad grid sizes");
  cp.params.v0 = r.get<double>("v0");
  cp.params.sigma = r.get<double>("sigma");
  cp.params.alpha = r.get<double>("alpha");
  cp.params.d_phi = r.get<double>("d_phi");
  cp.params.rho = r.get<double>("rho");
  cp.time = r.get<double>("time");
  const auto count = r.get<std::uint64_t>("count");
  const std::uint64_t expected = static_cast<std::uint64_t>(cp.n) * static_cast<std::uint64_t>(cp.m) * static_cast<std::uint64_t>(cp.l);
  if (count != expected) throw std::runtime_error("checkpoint " + where + ": value count does not match grid sizes");
  if (r.remaining() < count * 8) throw std::runtime_error("checkpoint " + where + ": truncated payload");
  if (r.remaining() > count * 8) throw std::runtime_error("checkpoint " + where + ": trailing bytes after payload");
  cp.values.resize(count);
  for (auto& v : cp.values) v = r.get<double>("payload");
  return cp;
}

void write_field(const std::filesystem::path& path, const Field1D& f, const ModelParams& params, double time) {
  write_checkpoint(path, make_checkpoint(Mode::one_d, 1, 1, f.grid.l(), params, time, f.values));
}

void write_field(const std::filesystem::path& path, const Field3D& f, const ModelParams& params, double time) {
  write_checkpoint(path, make_checkpoint(Mode::three_d, f.grid.n(), f.grid.m(), f.grid.l(), params, time, f.values));
}

Field1D read_field_1d(const std::filesystem::path& path, std::optional<Grid1D> expect, double* time,
                      ModelParams* params) {
  Checkpoint cp = read_checkpoint(path);
  if (cp.mode != Mode::one_d)
    throw std::runtime_error("checkpoint " + path.string() + ": shape mismatch, file holds a 3d field, expected 1d");
  if (expect && expect->l() != cp.l)
    throw std::runtime_error("checkpoint " + path.string() + ": shape mismatch, l = " + std::to_string(cp.l) +
                             ", expected " + std::to_string(expect->l()));
  if (time) *time = cp.time;
  if (params) *params = cp.params;
  return Field1D(Grid1D(cp.l), std::move(cp.values));
}

Field3D read_field_3d(const std::filesystem::path& path, std::optional<Grid3D> expect, double* time,
                      ModelParams* params) {
  Checkpoint cp = read_checkpoint(path);
  if (cp.mode != Mode::three_d)
    throw std::runtime_error("checkpoint " + path.string() + ": shape mismatch, file holds a 1d field, expected 3d");
  if (expect && (expect->n() != cp.n || expect->m() != cp.m || expect->l() != cp.l))
    throw std::runtime_error("checkpoint " + path.string() + ": shape mismatch, grid " + std::to_string(cp.n) + "x" +
                             std::to_string(cp.m) + "x" + std::to_string(cp.l) + " differs from the run grid");
  if (time) *time = cp.time;
  if (params) *params = cp.params;
  return Field3D(Grid3D(cp.n, cp.m, cp.l), std::move(cp.values));
}

// --- CSV -------------------------------------------------------------------

ObservableRecord sample_observables(const Field1D& f, double t, double dt) {
  const OrderParameter r = polar_order(f);
  ObservableRecord rec;
  rec.time = t;
  rec.r = r.magnitude;
  rec.theta = r.phase;
  rec.mass = total_mass(f);
  rec.dt = dt;
  return rec;
}

ObservableRecord sample_observables(const Field3D& f, double t, double dt) {
  const OrderParameter r = polar_order(f);
  const OrderParameter p = localization_order(f);
  ObservableRecord rec;
  rec.time = t;
  rec.r = r.magnitude;
  rec.theta = r.phase;
  rec.p = p.magnitude;
  rec.psi = p.phase;
  rec.delta_r = max_spatial_deviation(f);
  rec.mass = total_mass(f);
  rec.dt = dt;
  return rec;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

Metadata describe(const ModelParams& p) {
  return {{"v0", format_double(p.v0)},
          {"sigma", format_double(p.sigma)},
          {"alpha", format_double(p.alpha)},
          {"d_phi", format_double(p.d_phi)},
          {"rho", format_double(p.rho)}};
}

Metadata describe(const RunConfig& c) {
  Metadata m{{"mode", to_string(c.mode)}};
  for (auto& kv : describe(c.params)) m.push_back(kv);
  m.emplace_back("n", std::to_string(c.n));
  m.emplace_back("m", std::to_string(c.m));
  m.emplace_back("l", std::to_string(c.l));
  m.emplace_back("dt", format_double(c.stepper.dt));
  m.emplace_back("cfl_safety", format_double(c.stepper.cfl_safety));
  m.emplace_back("t_end", format_double(c.stepper.t_end));
  m.emplace_back("splitting", c.stepper.use_splitting ? "true" : "false");
  m.emplace_back("theta", format_double(c.stepper.theta));
  return m;
}

void write_csv_preamble(std::ostream& os, const Metadata& meta, const std::vector<std::string>& columns) {
  for (const auto& [k, v] : meta) os << "# " << k << '=' << v << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
}

const std::vector<std::string>& observable_columns() {
  static const std::vector<std::string> c{"time", "R", "Theta", "P", "Psi", "delta_r", "mass", "dt"};
  return c;
}

const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> c{"time",  "R",     "Theta",     "P",     "Psi",   "delta_r", "mass",
                                          "dt",    "alpha", "d_phi",     "direction", "v_est", "converged"};
  return c;
}

void write_observable_row(std::ostream& os, const ObservableRecord& r) {
  os << format_double(r.time) << ',' << format_double(r.r) << ',' << format_double(r.theta) << ','
     << format_double(r.p) << ',' << format_double(r.psi) << ',' << format_double(r.delta_r) << ','
     << format_double(r.mass) << ',' << format_double(r.dt) << '\n';
}

void write_observables(std::ostream& os, const std::vector<ObservableRecord>& records, const Metadata& meta) {
  write_csv_preamble(os, meta, observable_columns());
  for (const auto& r : records) write_observable_row(os, r);
}

namespace {

template <class Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  fn(out);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void write_observables(const std::filesystem::path& path, const std::vector<ObservableRecord>& records,
                       const Metadata& meta) {
  write_file(path, [&](std::ostream& os) { write_observables(os, records, meta); });
}

void write_sweep_row(std::ostream& os, const SweepRecord& r) {
  os << format_double(r.time) << ',' << format_double(r.r_final) << ',' << format_double(r.theta_final) << ','
     << format_double(r.p_final) << ',' << format_double(r.psi_final) << ',' << format_double(r.monitor_final) << ','
     << format_double(r.mass_final) << ',' << format_double(r.last_dt) << ',' << format_double(r.params.alpha) << ','
     << format_double(r.params.d_phi) << ',' << to_string(r.direction) << ',' << format_double(r.v_est) << ','
     << (r.converged ? 1 : 0) << '\n';
}

void write_sweep(std::ostream& os, const std::vector<SweepRecord>& records, const Metadata& meta) {
  write_csv_preamble(os, meta, sweep_columns());
  for (const auto& r : records) write_sweep_row(os, r);
}

void write_sweep(const std::filesystem::path& path, const std::vector<SweepRecord>& records, const Metadata& meta) {
  write_file(path, [&](std::ostream& os) { write_sweep(os, records, meta); });
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw std::out_of_range("csv: no column " + name);
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw std::runtime_error("csv: malformed metadata line '" + line + "'");
      t.meta.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    if (t.columns.empty()) {
      t.columns = split(line);
      continue;
    }
    auto row = split(line);
    if (row.size() != t.columns.size()) throw std::runtime_error("csv: row width differs from header");
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace chiralfv

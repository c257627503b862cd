#pragma once

// Experiment configuration: flat `key = value` text (INI dialect without
// sections), one key per line, `#` or `;` comments.

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "kicksim/propagate.hpp"
#include "kicksim/qstate.hpp"
#include "kicksim/ubasis.hpp"

namespace kicksim {

enum class ExperimentKind { two_slit, three_slit, n_slit, momentum_space };
enum class BasisKind { which_way, fourier, general_two_slit, custom };

/// Thrown for malformed or inconsistent configuration; names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::two_slit;
  std::size_t n = 2;
  double d = 1.0;
  double sigma = 0.05;
  SlitProfile profile = SlitProfile::gaussian;
  SlitOrigin origin = SlitOrigin::at_zero;
  BasisKind basis = BasisKind::fourier;
  double theta1 = 0.0, theta2 = 0.0, theta3 = 0.0;
  Eigen::MatrixXcd matrix;  // basis = custom
  PropagationMode mode = PropagationMode::fraunhofer;
  double t = default_flight_time(1.0);
  std::size_t grid_points = 4096;
  std::size_t screen_points = 4096;
  // momentum_space only
  double p1 = 0.0, p2 = 1.0, width = 0.05;
  // Monte Carlo is enabled when samples > 0.
  std::size_t samples = 0;
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  SlitArray slits() const { return SlitArray{n, d, sigma, profile, origin}; }
};

struct ConfigKey {
  const char* name;
  const char* default_value;
  const char* help;
};

inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys{
      {"experiment", "two_slit", "two_slit | three_slit | n_slit | momentum_space"},
      {"n", "2", "slit count (n_slit only; fixed to 2 or 3 by the other experiments)"},
      {"d", "1", "slit spacing (length unit)"},
      {"sigma", "d/20", "slit width parameter, 0 < sigma <= d/4"},
      {"profile", "gaussian", "gaussian | tophat"},
      {"origin", "at_zero", "at_zero (slits at 0, d, 2d, ...) | centered (symmetric about 0)"},
      {"basis", "fourier", "which_way | fourier | general_two_slit | custom"},
      {"theta1", "0", "general_two_slit phase (radians)"},
      {"theta2", "0", "general_two_slit phase (radians)"},
      {"theta3", "0", "general_two_slit phase (radians); theta4 follows from orthogonality"},
      {"matrix", "", "custom basis, real parts: rows separated by ';', entries by spaces"},
      {"matrix_imag", "", "custom basis, imaginary parts (same layout as matrix, optional)"},
      {"mode", "fraunhofer", "fraunhofer | fresnel_exact"},
      {"t", "40*d^2/(2*pi)", "flight time to the screen (hbar = m = 1)"},
      {"grid_points", "4096", "minimum slit-plane grid points (power of two; raised to resolve sigma)"},
      {"screen_points", "4096", "screen grid points (power of two)"},
      {"p1", "0", "momentum_space: first peak momentum"},
      {"p2", "1", "momentum_space: second peak momentum"},
      {"width", "(p2-p1)/20", "momentum_space: peak width"},
      {"samples", "0", "Monte Carlo particles (0 disables sampling)"},
      {"seed", "1", "Monte Carlo seed"},
      {"output_dir", "out", "directory for patterns.csv, report.json, samples.csv"},
  };
  return keys;
}

inline std::string defaults_text() {
  std::ostringstream os;
  os << "# kicksim experiment configuration defaults\n";
  for (const auto& k : config_keys()) {
    os << "# " << k.help << "\n";
    const std::string v = k.default_value;
    const bool derived = v.empty() || v.find_first_of("/*") != std::string::npos;
    os << (derived ? "# " : "") << k.name << " = " << k.default_value << "\n";
  }
  return os.str();
}

namespace detail {

inline double parse_double(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + s + "'");
  }
}

inline std::size_t parse_count(const std::string& key, const std::string& s) {
  const double v = parse_double(key, s);
  if (v < 0 || v != std::floor(v) || v > 1e12) throw ConfigError(key, "expected a nonnegative integer, got '" + s + "'");
  return static_cast<std::size_t>(v);
}

inline Eigen::MatrixXd parse_rows(const std::string& key, const std::string& s) {
  std::vector<std::vector<double>> rows;
  std::stringstream all(s);
  std::string row;
  while (std::getline(all, row, ';')) {
    std::stringstream rs(row);
    std::string tok;
    std::vector<double> r;
    while (rs >> tok) r.push_back(parse_double(key, tok));
    if (!r.empty()) rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ConfigError(key, "empty matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw ConfigError(key, "rows differ in length");
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

template <class Enum>
Enum parse_enum(const std::string& key, const std::string& s, std::initializer_list<std::pair<const char*, Enum>> opts) {
  for (const auto& [name, value] : opts)
    if (s == name) return value;
  std::string allowed;
  for (const auto& [name, value] : opts) allowed += std::string(allowed.empty() ? "" : ", ") + name;
  throw ConfigError(key, "unknown value '" + s + "' (expected one of " + allowed + ")");
}

}  // namespace detail

/// Parses and validates a configuration. Every module precondition that can
/// be checked before running is checked here.
inline ExperimentConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("<syntax>", e.message() + " at line " + std::to_string(e.line()));
  }

  std::map<std::string, std::string> kv;
  std::set<std::string> known;
  for (const auto& k : config_keys()) known.insert(k.name);
  for (const auto& [key, node] : tree) {
    if (!node.empty()) throw ConfigError(key, "sections are not supported");
    if (!known.contains(key)) throw ConfigError(key, "unknown key");
    kv[key] = node.data();
  }
  auto get = [&](const std::string& k) -> std::optional<std::string> {
    auto it = kv.find(k);
    return it == kv.end() ? std::nullopt : std::optional<std::string>(it->second);
  };

  ExperimentConfig c;
  if (auto v = get("experiment"))
    c.experiment = detail::parse_enum<ExperimentKind>("experiment", *v,
                                                      {{"two_slit", ExperimentKind::two_slit},
                                                       {"three_slit", ExperimentKind::three_slit},
                                                       {"n_slit", ExperimentKind::n_slit},
                                                       {"momentum_space", ExperimentKind::momentum_space}});
  switch (c.experiment) {
    case ExperimentKind::two_slit:
    case ExperimentKind::momentum_space: c.n = 2; break;
    case ExperimentKind::three_slit: c.n = 3; break;
    case ExperimentKind::n_slit: c.n = 2; break;
  }
  if (auto v = get("n")) {
    const std::size_t n = detail::parse_count("n", *v);
    if (c.experiment != ExperimentKind::n_slit && n != c.n)
      throw ConfigError("n", "conflicts with experiment (expected " + std::to_string(c.n) + ")");
    if (n < 2) throw ConfigError("n", "slit count must be >= 2");
    c.n = n;
  }
  if (auto v = get("d")) c.d = detail::parse_double("d", *v);
  if (!(c.d > 0.0)) throw ConfigError("d", "must be > 0");
  c.sigma = c.d / 20.0;
  if (auto v = get("sigma")) c.sigma = detail::parse_double("sigma", *v);
  if (!(c.sigma > 0.0) || c.sigma > c.d / 4.0 * (1.0 + 1e-12)) throw ConfigError("sigma", "must satisfy 0 < sigma <= d/4");
  if (auto v = get("profile"))
    c.profile = detail::parse_enum<SlitProfile>("profile", *v,
                                                {{"gaussian", SlitProfile::gaussian}, {"tophat", SlitProfile::tophat}});
  if (auto v = get("origin"))
    c.origin = detail::parse_enum<SlitOrigin>("origin", *v,
                                              {{"at_zero", SlitOrigin::at_zero}, {"centered", SlitOrigin::centered}});
  if (auto v = get("basis"))
    c.basis = detail::parse_enum<BasisKind>("basis", *v,
                                            {{"which_way", BasisKind::which_way},
                                             {"fourier", BasisKind::fourier},
                                             {"general_two_slit", BasisKind::general_two_slit},
                                             {"custom", BasisKind::custom}});
  if (auto v = get("theta1")) c.theta1 = detail::parse_double("theta1", *v);
  if (auto v = get("theta2")) c.theta2 = detail::parse_double("theta2", *v);
  if (auto v = get("theta3")) c.theta3 = detail::parse_double("theta3", *v);
  if (c.basis == BasisKind::general_two_slit && c.n != 2)
    throw ConfigError("basis", "general_two_slit needs a two-slit experiment");
  if (c.basis == BasisKind::custom) {
    auto re = get("matrix");
    if (!re) throw ConfigError("matrix", "required when basis = custom");
    const Eigen::MatrixXd real = detail::parse_rows("matrix", *re);
    Eigen::MatrixXd imag = Eigen::MatrixXd::Zero(real.rows(), real.cols());
    if (auto im = get("matrix_imag")) imag = detail::parse_rows("matrix_imag", *im);
    if (imag.rows() != real.rows() || imag.cols() != real.cols())
      throw ConfigError("matrix_imag", "shape differs from matrix");
    if (real.rows() != static_cast<Eigen::Index>(c.n) || real.cols() != static_cast<Eigen::Index>(c.n))
      throw ConfigError("matrix", "must be n x n");
    c.matrix = real.cast<cplx>() + kI * imag.cast<cplx>();
    if (unitarity_defect(c.matrix) > 1e-10) throw ConfigError("matrix", "not unitary within 1e-10");
  } else if (get("matrix") || get("matrix_imag")) {
    throw ConfigError("matrix", "only valid with basis = custom");
  }
  if (auto v = get("mode"))
    c.mode = detail::parse_enum<PropagationMode>("mode", *v,
                                                 {{"fraunhofer", PropagationMode::fraunhofer},
                                                  {"fresnel_exact", PropagationMode::fresnel_exact}});
  c.t = default_flight_time(c.d);
  if (auto v = get("t")) c.t = detail::parse_double("t", *v);
  if (!(c.t >= 0.0)) throw ConfigError("t", "must be >= 0");
  if (auto v = get("grid_points")) c.grid_points = detail::parse_count("grid_points", *v);
  if (!is_power_of_two(c.grid_points)) throw ConfigError("grid_points", "must be a power of two");
  if (auto v = get("screen_points")) c.screen_points = detail::parse_count("screen_points", *v);
  if (!is_power_of_two(c.screen_points)) throw ConfigError("screen_points", "must be a power of two");

  if (auto v = get("p1")) c.p1 = detail::parse_double("p1", *v);
  if (auto v = get("p2")) c.p2 = detail::parse_double("p2", *v);
  c.width = (c.p2 - c.p1) / 20.0;
  if (auto v = get("width")) c.width = detail::parse_double("width", *v);
  if (c.experiment == ExperimentKind::momentum_space) {
    if (!(c.p2 > c.p1)) throw ConfigError("p2", "must exceed p1");
    if (!(c.width > 0.0) || c.width > (c.p2 - c.p1) / 8.0 * (1.0 + 1e-12))
      throw ConfigError("width", "must satisfy 0 < width <= (p2 - p1)/8");
    if (c.basis == BasisKind::general_two_slit || c.basis == BasisKind::custom)
      throw ConfigError("basis", "momentum_space supports which_way or fourier");
  }

  if (auto v = get("samples")) c.samples = detail::parse_count("samples", *v);
  if (auto v = get("seed")) {
    const double s = detail::parse_double("seed", *v);
    if (s < 0 || s != std::floor(s) || s > 9.007199254740992e15) throw ConfigError("seed", "expected a nonnegative integer");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (auto v = get("output_dir")) c.output_dir = *v;
  if (c.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read '" + path + "'");
  return parse_config(in);
}

}  // namespace kicksim

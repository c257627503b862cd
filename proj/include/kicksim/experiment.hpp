#pragma once

// End-to-end experiment: slit plane -> detector basis -> screen -> patterns,
// fringe analysis, kick form and optional Monte Carlo. Every output is built
// in memory so a failed run writes nothing.

#include <cstdio>

#include <nlohmann/json.hpp>

#include "kicksim/config.hpp"
#include "kicksim/kicks.hpp"
#include "kicksim/montecarlo.hpp"
#include "kicksim/patterns.hpp"
#include "kicksim/propagate.hpp"
#include "kicksim/pspace.hpp"

namespace kicksim {

inline constexpr int kReportSchemaVersion = 1;

/// Value rounded to 12 significant digits, the precision of every output file.
inline double round12(double v) {
  if (!std::isfinite(v)) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

inline std::string fmt12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(round12(v)) : nlohmann::json(nullptr); }
inline nlohmann::json num(const std::optional<double>& v) { return v ? num(*v) : nlohmann::json(nullptr); }

struct ExperimentResult {
  std::string patterns_csv;
  nlohmann::json report;
  std::optional<std::string> samples_csv;
  std::optional<nlohmann::json> histogram;
};

inline const char* experiment_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::two_slit: return "two_slit";
    case ExperimentKind::three_slit: return "three_slit";
    case ExperimentKind::n_slit: return "n_slit";
    case ExperimentKind::momentum_space: return "momentum_space";
  }
  return "?";
}

inline DetectorBasis basis_for(const ExperimentConfig& c) {
  switch (c.basis) {
    case BasisKind::which_way: return which_way_basis(c.n);
    case BasisKind::fourier:
      if (c.n == 3 && c.origin == SlitOrigin::centered && c.experiment != ExperimentKind::momentum_space)
        return three_slit_centered_basis();
      return fourier_basis(c.n);
    case BasisKind::general_two_slit: return general_two_slit_basis(c.theta1, c.theta2, c.theta3);
    case BasisKind::custom: return make_basis(c.matrix, "custom");
  }
  throw Error(Errc::InvalidArgument, "unknown basis");
}

namespace detail {

inline nlohmann::json fringe_json(const FringeReport& r) {
  return {{"fringes_detected", r.fringes_detected},
          {"visibility", num(r.visibility)},
          {"period", num(r.period)},
          {"shift", num(r.shift)}};
}

inline std::string patterns_csv(const std::vector<double>& x, const Pattern& total, const std::vector<Pattern>& cond) {
  std::string out = "x,unconditioned";
  for (std::size_t j = 0; j < cond.size(); ++j) out += ",conditioned_" + std::to_string(j);
  out += "\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    out += fmt12(x[i]) + "," + fmt12(total.intensity[i]);
    for (const auto& p : cond) out += "," + fmt12(p.intensity[i]);
    out += "\n";
  }
  return out;
}

}  // namespace detail

/// Runs the configured experiment. Throws kicksim::Error on numerical guards.
inline ExperimentResult run_experiment(const ExperimentConfig& c) {
  using nlohmann::json;
  const DetectorBasis basis = basis_for(c);
  const UnbiasedCheck unbiased = is_unbiased(basis);

  EntangledState screen_state;
  Pattern no_detector;
  std::vector<double> screen_x;
  json kick_form;
  json setup;

  if (c.experiment == ExperimentKind::momentum_space) {
    const MomentumPeaks peaks{c.p1, c.p2, c.width, default_momentum_grid(c.p1, c.p2, c.width, c.grid_points)};
    const auto states = make_momentum_peaks(peaks);
    const EntangledState in_basis = change_basis(entangle(states), basis);
    const Grid screen = default_position_screen(c.width, c.screen_points);
    screen_state = EntangledState{{}, in_basis.basis_tag};
    for (const auto& comp : in_basis.components) screen_state.components.push_back(to_position(comp, screen));
    no_detector = pattern_of(to_position(uniform_superposition(states), screen));
    for (std::size_t i = 0; i < screen.n_points; ++i) screen_x.push_back(screen.x(i));
    setup = {{"p1", num(c.p1)}, {"p2", num(c.p2)}, {"width", num(c.width)},
             {"momentum_points", peaks.grid.n_points}, {"screen_points", screen.n_points}};
    if (c.basis == BasisKind::fourier) {
      const PositionKickResult pk = position_kick_representation(in_basis, peaks);
      kick_form = {{"kind", "position_kick"},
                   {"x0", num(pk.x0)},
                   {"fidelity", num(pk.fidelity.global)},
                   {"closed_form_fidelity", num(gaussian_position_kick_fidelity(c.p1, c.p2, c.width))}};
    }
  } else {
    const SlitArray slits = c.slits();
    slits.validate();
    const Grid grid = default_grid(slits, c.grid_points);
    validate_grid_for(grid, slits);
    const auto states = make_slit_states(slits, grid);
    const EntangledState which_way = entangle(states);
    const EntangledState in_basis = change_basis(which_way, basis);

    PropagationSpec spec{c.mode, c.t, default_screen_grid(c.sigma, c.screen_points), c.d};
    screen_state = evolve_entangled(in_basis, spec);
    no_detector = pattern_of(propagate(uniform_superposition(states), spec));
    const Grid& sg = screen_state.grid();
    for (std::size_t i = 0; i < sg.n_points; ++i)
      screen_x.push_back(c.mode == PropagationMode::fraunhofer ? sg.x(i) * c.t : sg.x(i));
    setup = {{"slit_points", grid.n_points}, {"slit_spacing_dx", num(grid.spacing())},
             {"screen_points", sg.n_points}, {"flight_time", num(c.t)}};

    const KickSpectrum folded = kick_spectrum(c.n, c.d, true);
    if (c.basis == BasisKind::general_two_slit) {
      const auto r = general_basis_kick_form(in_basis, basis, slits);
      kick_form = {{"kind", "general_two_slit"},
                   {"extracted_kick", num(r.extracted_kick)},
                   {"expected_kick", num(r.expected_kick)},
                   {"kick_relative_error", num(r.kick_relative_error)},
                   {"extracted_phase", num(r.extracted_phase)},
                   {"expected_phase", num(r.expected_phase)},
                   {"fidelity", num(r.fidelity)},
                   {"holds", r.holds}};
    } else if (const auto phases = lattice_phases(basis, folded, slits);
               unbiased.unbiased && lattice_identity_defect(basis, folded, slits, phases) < 1e-9) {
      const EntangledState kicked = kick_representation(uniform_superposition(states), folded, phases, basis.tag);
      const FidelityRecord f = representation_fidelity(in_basis, kicked);
      json per = json::array();
      for (double v : f.per_component) per.push_back(num(v));
      kick_form = {{"kind", "lattice_kicks"},
                   {"fidelity", num(f.global)},
                   {"per_component", per},
                   {"closed_form_fidelity", num(gaussian_kick_fidelity(folded, c.sigma))}};
    } else if (c.n == 2 && !unbiased.unbiased) {
      const auto r = biased_basis_counterexample(which_way, basis, slits);
      kick_form = {{"kind", "biased_counterexample"},
                   {"best_fit_kick", num(r.best_fit_kick)},
                   {"infidelity", num(r.infidelity)},
                   {"norm_difference", num(r.norm_difference)},
                   {"kick_form_holds", r.kick_form_holds}};
    }
  }

  const std::size_t n = screen_state.dim();
  std::vector<Pattern> cond;
  for (std::size_t j = 0; j < n; ++j) cond.push_back(conditioned_pattern(screen_state, j));
  const Pattern total = intensity(screen_state);

  FringeOptions opts;
  const FringeReport ref = fringe_report(no_detector);
  opts.expected_period = ref.period;
  json vis_cond = json::array(), shifts = json::array(), periods = json::array(), probs = json::array();
  for (std::size_t j = 0; j < n; ++j) {
    const FringeReport r = j == 0 ? fringe_report(cond[0], no_detector, opts) : fringe_report(cond[j], cond[0], opts);
    vis_cond.push_back(num(r.visibility));
    periods.push_back(num(r.period));
    shifts.push_back(j == 0 ? num(0.0) : num(r.shift));
    probs.push_back(num(screen_state.components[j].norm2() / screen_state.total_norm2()));
  }
  const FringeReport tot = fringe_report(total, no_detector, opts);

  json spectrum = json::array();
  for (const auto& k : kick_spectrum(n, c.d, true).kicks)
    spectrum.push_back({{"outcome", k.outcome},
                        {"h_over_d", std::to_string(k.in_h_over_d.num) + "/" + std::to_string(k.in_h_over_d.den)},
                        {"momentum", num(k.momentum)},
                        {"probability", num(k.probability)}});

  ExperimentResult out;
  out.patterns_csv = detail::patterns_csv(screen_x, total, cond);
  out.report = {
      {"schema_version", kReportSchemaVersion},
      {"experiment", experiment_name(c.experiment)},
      {"n", n},
      {"d", num(c.d)},
      {"sigma", num(c.sigma)},
      {"basis", {{"tag", basis.tag}, {"unbiased", unbiased.unbiased}, {"max_deviation", num(unbiased.max_deviation)}}},
      {"mode", c.mode == PropagationMode::fraunhofer ? "fraunhofer" : "fresnel_exact"},
      {"setup", setup},
      {"probabilities", probs},
      {"no_detector", detail::fringe_json(ref)},
      {"unconditioned", detail::fringe_json(tot)},
      {"conditioned", {{"visibility", vis_cond}, {"period", periods}, {"shift_vs_outcome_0", shifts}}},
      {"kick_spectrum", spectrum},
      {"kick_form", kick_form.is_null() ? json(nullptr) : kick_form},
  };

  if (c.samples > 0) {
    const SampleRun run = sample(screen_state, c.samples, c.seed);
    const bool far = c.experiment != ExperimentKind::momentum_space && c.mode == PropagationMode::fraunhofer;
    const double scale = far ? c.t : 1.0;
    std::string csv = "index,outcome,x\n";
    for (std::size_t i = 0; i < run.records.size(); ++i)
      csv += std::to_string(i) + "," + std::to_string(run.records[i].outcome) + "," + fmt12(run.records[i].x * scale) + "\n";
    out.samples_csv = std::move(csv);
    json counts = json::array(), freq = json::array();
    for (auto cnt : run.outcome_counts(n)) {
      counts.push_back(cnt);
      freq.push_back(num(static_cast<double>(cnt) / static_cast<double>(c.samples)));
    }
    out.histogram = json{{"schema_version", kReportSchemaVersion},
                         {"x_min", num(run.grid.x_min * scale)},
                         {"x_max", num(run.grid.x_max * scale)},
                         {"bins", run.histogram.size()},
                         {"counts", run.histogram}};
    out.report["montecarlo"] = {{"samples", c.samples}, {"seed", c.seed}, {"outcome_counts", counts},
                                {"outcome_frequencies", freq}};
  }
  return out;
}

}  // namespace kicksim

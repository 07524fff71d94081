#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "app/config.hpp"
#include "geosched/cost_estimator.hpp"
#include "geosched/samplers.hpp"
#include "geosched/schedule_optimizer.hpp"
#include "geosched/target_oracle.hpp"

namespace geosched::app {

std::string version();
const std::vector<std::string>& command_names();

/// Runs one subcommand, writing its outputs and a resolved `config.ini` into
/// `out`. Throws ConfigError for bad configuration and NumericalError when a
/// run diverges.
void run_command(const std::string& command, const Config& cfg, const std::filesystem::path& out, std::ostream& log);

NoiseSchedule make_noise_schedule(const Config& cfg);
GmmTarget make_target(const Config& cfg, const NoiseSchedule& sched);
DiscretisationSchedule make_schedule(const Config& cfg, const NoiseSchedule& sched);
SamplerKind make_sampler(const Config& cfg);
CostOptions make_cost_options(const Config& cfg);
OptimizeOptions make_optimize_options(const Config& cfg);
ScoreSource make_score_source(const Config& cfg, const DiffusedGmm& path);

/// Corrector geodesic for a one-dimensional Gaussian target by quadrature of
/// sqrt(delta_c) over [t_min, 1] (reference output of the gaussian-geodesic preset).
DiscretisationSchedule gaussian_geodesic(const NoiseSchedule& sched, double variance, int steps,
                                         int quadrature_intervals = 20000);

}  // namespace geosched::app

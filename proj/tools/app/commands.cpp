#include "app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>

#include <fmt/format.h>

#include "app/svg.hpp"
#include "geosched/csv.hpp"
#include "geosched/eval_metrics.hpp"
#include "geosched/rng.hpp"
#include "geosched/trainer.hpp"

namespace geosched::app {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kOptimizeStream = 1;
constexpr std::uint64_t kSampleStream = 2;
constexpr std::uint64_t kDataStream = 3;
constexpr std::uint64_t kSweepStream = 4;
constexpr int kDataPoints = 100000;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string kv(const std::string& key, double value) { return fmt::format("{} = {}\n", key, csv::format_number(value)); }

std::vector<double> index_axis(std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(i);
  return out;
}

Series schedule_series(const std::string& label, const DiscretisationSchedule& d) {
  return {label, index_axis(d.size()), d.values()};
}

Series sqrt_cost_series(const std::string& label, const CostProfile& p) {
  std::vector<double> y;
  for (double c : p.costs) y.push_back(std::sqrt(c));
  return {label, index_axis(y.size()), y};
}

std::uint64_t seed_of(const Config& cfg) {
  const long s = cfg.integer("run.seed");
  if (s < 0) throw ConfigError("run.seed must be nonnegative");
  return static_cast<std::uint64_t>(s);
}

int positive_int(const Config& cfg, const std::string& key) {
  const long v = cfg.integer(key);
  if (v < 1 || v > 100000000) throw ConfigError(fmt::format("{} must be a positive integer", key));
  return static_cast<int>(v);
}

PointSampler make_point_sampler(const ScoreSource& src, const DiffusedGmm& path, std::uint64_t seed) {
  if (src.is_oracle()) return oracle_sampler(path);
  return data_sampler(sample(path.base(), kDataPoints, derive_seed(seed, kDataStream)), path.noise_schedule());
}

Points read_samples(const fs::path& path) {
  csv::Table t;
  try {
    t = csv::read(path);
  } catch (const std::exception& e) {
    throw ConfigError(fmt::format("cannot read samples: {}", e.what()));
  }
  if (t.rows.empty()) throw ConfigError(fmt::format("{} holds no samples", path.string()));
  const auto d = static_cast<Eigen::Index>(t.rows.front().size());
  Points out(d, static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (Eigen::Index j = 0; j < d; ++j) out(j, static_cast<Eigen::Index>(i)) = t.rows[i][static_cast<std::size_t>(j)];
  return out;
}

void write_samples(const fs::path& path, const Points& xs) {
  csv::Table t;
  if (xs.rows() == 1) {
    t.header = {"x"};
  } else {
    for (Eigen::Index j = 0; j < xs.rows(); ++j) t.header.push_back(fmt::format("x{}", j));
  }
  t.rows.reserve(static_cast<std::size_t>(xs.cols()));
  for (Eigen::Index i = 0; i < xs.cols(); ++i) t.rows.emplace_back(xs.col(i).data(), xs.col(i).data() + xs.rows());
  csv::write(path, t);
}

void write_density_outputs(const fs::path& out, const Points& xs, const DiffusedGmm& path) {
  if (xs.rows() != 1) return;
  const ModeGrid g = mode_grid(path);
  const std::vector<double> v(xs.data(), xs.data() + xs.size());
  const ModeOptions opts;
  const DensityCurve curve = histogram_density(v, g.lo, g.hi, g.bin_width, opts.smoothing_bins);
  write_density_csv(out / "density.csv", curve);
  const double t0 = path.noise_schedule().t_min();
  std::vector<double> truth(curve.x.size());
  for (std::size_t i = 0; i < truth.size(); ++i)
    truth[i] = std::exp(log_density(path, Eigen::VectorXd(Eigen::VectorXd::Constant(1, curve.x[i])), t0));
  write_line_plot(out / "density.svg", {"Sample density", "x", "density"},
                  {{"samples", curve.x, curve.density}, {"target", curve.x, truth}});
}

ProbeGrid make_probe_grid(const Config& cfg, std::uint64_t seed) {
  const double lo = cfg.real("eval.probe_lo");
  if (!(lo > 0.0 && lo < 1.0)) throw ConfigError("eval.probe_lo must lie in (0, 1)");
  return ProbeGrid::geometric(lo, positive_int(cfg, "eval.probe_count"), positive_int(cfg, "eval.probe_points"), seed);
}

void run_optimize(const Config& cfg, const fs::path& out, std::ostream& log) {
  const NoiseSchedule ns = make_noise_schedule(cfg);
  const DiffusedGmm path(make_target(cfg, ns), ns);
  const ScoreSource src = make_score_source(cfg, path);
  const DiscretisationSchedule initial = make_schedule(cfg, ns);
  const OptimizeOptions opts = make_optimize_options(cfg);
  const std::uint64_t seed = derive_seed(seed_of(cfg), kOptimizeStream);
  const PointSampler sampler = make_point_sampler(src, path, seed);

  const CostProfile before = profile(src, initial, opts.kind, sampler, opts.n_samples, seed, opts.cost_options);
  write_profile_csv(out / "initial_profile.csv", before);
  const OptimizeResult res = optimize_schedule(src, initial, sampler, opts, seed);
  write_schedule_csv(out / "schedule.csv", res.schedule);
  write_profile_csv(out / "profile.csv", res.last_profile);
  write_history_csv(out / "history.csv", res.history);

  std::string summary;
  summary += kv("converged", res.converged ? 1.0 : 0.0);
  summary += kv("flat_path", res.flat_path ? 1.0 : 0.0);
  summary += kv("iterations", static_cast<double>(res.history.size()));
  const double length = res.last_profile.length();
  const double energy = res.last_profile.energy();
  summary += kv("length", length);
  summary += kv("energy", energy);
  if (length > 0.0) summary += kv("energy_over_length_squared", energy / (length * length));

  std::vector<Series> schedules{schedule_series("initial", initial), schedule_series("optimised", res.schedule)};
  if (cfg.str("target.kind") == "gaussian" && opts.kind == CostKind::Corrector && src.is_oracle()) {
    const DiscretisationSchedule ref = gaussian_geodesic(ns, cfg.real("target.variance"), initial.steps());
    write_schedule_csv(out / "reference_schedule.csv", ref);
    double err = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) err = std::max(err, std::abs(ref[i] - res.schedule[i]));
    summary += kv("max_reference_error", err);
    schedules.push_back(schedule_series("quadrature geodesic", ref));
  }
  write_text(out / "summary.txt", summary);
  write_line_plot(out / "schedule.svg", {"Discretisation schedule", "index i", "t_i"}, schedules);
  write_line_plot(out / "profile.svg", {"Incremental cost profile", "interval i", "sqrt L_i"},
                  {sqrt_cost_series("initial", before), sqrt_cost_series("optimised", res.last_profile)});
  write_line_plot(out / "history.svg", {"Optimisation history", "iteration", "value", false, true},
                  {{"length^2", index_axis(res.history.size()), [&] {
                      std::vector<double> y;
                      for (const auto& h : res.history) y.push_back(h.length * h.length);
                      return y;
                    }()},
                   {"energy", index_axis(res.history.size()), [&] {
                      std::vector<double> y;
                      for (const auto& h : res.history) y.push_back(h.energy);
                      return y;
                    }()}});

  if (res.flat_path) {
    log << "flat path: every incremental cost is zero, schedule left unchanged\n";
  } else {
    log << fmt::format("{} after {} iterations, length {:.6g}, energy / length^2 {:.6g}\n",
                       res.converged ? "converged" : "not converged", res.history.size(), length,
                       energy / (length * length));
  }
}

void run_sample(const Config& cfg, const fs::path& out, std::ostream& log) {
  const NoiseSchedule ns = make_noise_schedule(cfg);
  const DiffusedGmm path(make_target(cfg, ns), ns);
  const ScoreSource src = make_score_source(cfg, path);
  const DiscretisationSchedule disc = make_schedule(cfg, ns);
  const SamplerConfig sc{make_sampler(cfg), disc, derive_seed(seed_of(cfg), kSampleStream)};
  const Points xs = sample(sc, src, positive_int(cfg, "sample.n"));
  if (!xs.allFinite()) throw NumericalError("sampler produced non-finite values");
  write_samples(out / "samples.csv", xs);
  write_schedule_csv(out / "schedule.csv", disc);
  write_density_outputs(out, xs, path);
  log << fmt::format("{} samples with {} over {} steps\n", xs.cols(), sampler_name(sc.kind), disc.steps());
}

void run_eval(const Config& cfg, const fs::path& out, std::ostream& log) {
  const std::string file = cfg.str("eval.samples_file");
  if (file.empty()) throw ConfigError("eval.samples_file must name a samples CSV");
  const NoiseSchedule ns = make_noise_schedule(cfg);
  const DiffusedGmm path(make_target(cfg, ns), ns);
  const ScoreSource src = make_score_source(cfg, path);
  const Points xs = read_samples(file);
  if (xs.rows() != path.dim()) throw ConfigError("samples do not match the target dimension");
  const EvalReport rep = evaluate(xs, path, src, make_probe_grid(cfg, seed_of(cfg)));
  write_report_text(out / "report.txt", rep);
  write_density_outputs(out, xs, path);
  log << fmt::format("mean log-likelihood {:.6g}, {} modes, w1 {:.6g}\n", rep.log_likelihood.mean, rep.modes.size(),
                     rep.w1);
}

void run_train(const Config& cfg, const fs::path& out, std::ostream& log) {
  const NoiseSchedule ns = make_noise_schedule(cfg);
  const DiffusedGmm path(make_target(cfg, ns), ns);
  TrainConfig tc;
  tc.network.dim = path.dim();
  tc.network.width = positive_int(cfg, "train.width");
  tc.network.depth = positive_int(cfg, "train.depth");
  tc.network.embed = positive_int(cfg, "train.embed");
  if (tc.network.embed % 2 != 0) throw ConfigError("train.embed must be even");
  tc.network.fourier_scale = cfg.real("train.fourier_scale");
  tc.network.log_time = cfg.boolean("train.log_time");
  tc.seed = seed_of(cfg);
  tc.batch = positive_int(cfg, "train.batch");
  tc.learning_rate = cfg.real("train.learning_rate");
  tc.grad_steps = positive_int(cfg, "train.grad_steps");
  tc.gamma = cfg.real("train.gamma");
  tc.cost = make_optimize_options(cfg).kind;
  tc.interpolation = make_optimize_options(cfg).interpolation;
  tc.cost_options = make_cost_options(cfg);
  tc.checkpoint_every = positive_int(cfg, "train.checkpoint_every");
  tc.diagnostic_samples = positive_int(cfg, "train.diagnostic_samples");
  tc.eval_samples = static_cast<int>(cfg.integer("train.eval_samples"));
  if (tc.eval_samples < 0) throw ConfigError("train.eval_samples must be >= 0");
  tc.eval_sampler = make_sampler(cfg);
  tc.probe = make_probe_grid(cfg, seed_of(cfg));
  const long iterations = cfg.integer("train.iterations");
  if (iterations < 0) throw ConfigError("train.iterations must be >= 0");

  const DiscretisationSchedule initial = make_schedule(cfg, ns);
  const std::string resume = cfg.str("train.resume");
  Trainer tr = resume.empty() ? Trainer(tc, target_data(path.base()), ns, initial)
                              : Trainer(tc, target_data(path.base()), ns, load_checkpoint(resume));
  tr.set_eval_target(path);

  csv::Table snapshots;
  snapshots.header.push_back("iteration");
  for (int i = 0; i <= tr.schedule().steps(); ++i) snapshots.header.push_back(fmt::format("t_{}", i));
  auto add_snapshot = [&](long it, const DiscretisationSchedule& d) {
    std::vector<double> row{static_cast<double>(it)};
    row.insert(row.end(), d.values().begin(), d.values().end());
    snapshots.rows.push_back(std::move(row));
  };
  const DiscretisationSchedule start = tr.schedule();
  add_snapshot(tr.iteration(), start);

  try {
    tr.run(iterations, [&](const Trainer& t, const HistoryRecord& rec) {
      add_snapshot(rec.iteration, t.schedule());
      log << fmt::format("iteration {} loss {:.5g} length {:.5g} energy {:.5g}", rec.iteration, rec.loss, rec.length,
                         rec.energy);
      if (rec.mean_log_likelihood)
        log << fmt::format(" loglik {:.5g} score_mse {:.5g}", *rec.mean_log_likelihood, *rec.score_mse);
      log << '\n';
    });
  } catch (const NumericalError&) {
    save_checkpoint(out / "diagnostic_checkpoint.bin", tr.checkpoint());
    throw;
  }

  save_checkpoint(out / "checkpoint.bin", tr.checkpoint());
  write_train_history_csv(out / "history.csv", tr.history());
  csv::write(out / "schedules.csv", snapshots);
  write_schedule_csv(out / "schedule.csv", tr.schedule());
  const CostProfile final_profile = tr.diagnostic_profile(tc.diagnostic_samples, derive_seed(tc.seed, 0xf1a1));
  write_profile_csv(out / "profile.csv", final_profile);

  write_line_plot(out / "schedule.svg", {"Discretisation schedule", "index i", "t_i"},
                  {schedule_series("initial", start), schedule_series("trained", tr.schedule())});
  write_line_plot(out / "profile.svg", {"Incremental cost profile", "interval i", "sqrt L_i"},
                  {sqrt_cost_series("final", final_profile)});
  Series len{"length^2", {}, {}};
  Series en{"energy", {}, {}};
  Series ll{"mean log-likelihood", {}, {}};
  Series mse{"score MSE", {}, {}};
  for (const auto& r : tr.history()) {
    const auto it = static_cast<double>(r.iteration);
    len.x.push_back(it);
    len.y.push_back(r.length * r.length);
    en.x.push_back(it);
    en.y.push_back(r.energy);
    if (r.mean_log_likelihood) {
      ll.x.push_back(it);
      ll.y.push_back(*r.mean_log_likelihood);
      mse.x.push_back(it);
      mse.y.push_back(*r.score_mse);
    }
  }
  write_line_plot(out / "history.svg", {"Length and energy over training", "iteration", "value", false, true},
                  {len, en});
  if (!ll.x.empty()) {
    write_line_plot(out / "loglik.svg", {"Generated-sample log-likelihood", "iteration", "nats"}, {ll});
    write_line_plot(out / "score_mse.svg", {"Score error against the oracle", "iteration", "MSE", false, true},
                    {mse});
  }
}

void run_sweep(const Config& cfg, const fs::path& out, std::ostream& log) {
  const NoiseSchedule ns = make_noise_schedule(cfg);
  const DiffusedGmm path(make_target(cfg, ns), ns);
  if (path.dim() != 1) throw ConfigError("sweep reports w1 and needs a one-dimensional target");
  const ScoreSource src = make_score_source(cfg, path);
  const OptimizeOptions opts = make_optimize_options(cfg);
  const SamplerKind kind = make_sampler(cfg);
  const int n = positive_int(cfg, "sample.n");
  const std::uint64_t seed = seed_of(cfg);
  const std::string base_name = cfg.str("sweep.baseline");
  BaselineKind baseline;
  if (base_name == "uniform") baseline = UniformT{};
  else if (base_name == "cosine") baseline = CosineSpaced{};
  else if (base_name == "log_linear_sigma") baseline = LogLinearSigma{};
  else if (base_name == "karras") baseline = KarrasRho{cfg.real("schedule.rho")};
  else throw ConfigError(fmt::format("sweep.baseline '{}' is not one of uniform, cosine, log_linear_sigma, karras", base_name));

  csv::Table table{{"T", "w1_optimised", "w1_baseline", "converged"}, {}};
  Series s_opt{"optimised", {}, {}};
  Series s_base{base_name, {}, {}};
  for (long steps : cfg.integer_list("sweep.steps")) {
    if (steps < 1 || steps > 100000) throw ConfigError("sweep.steps entries must be positive");
    const int T = static_cast<int>(steps);
    const std::uint64_t s = derive_seed(seed, kSweepStream, static_cast<std::uint64_t>(T));
    const DiscretisationSchedule base = baseline_schedule(baseline, T, ns);
    const OptimizeResult res = optimize_schedule(src, base, make_point_sampler(src, path, s), opts, s);
    write_schedule_csv(out / fmt::format("schedule_T{}.csv", T), res.schedule);
    auto w1_of = [&](const DiscretisationSchedule& d) {
      const Points xs = sample(SamplerConfig{kind, d, s}, src, n);
      if (!xs.allFinite()) throw NumericalError(fmt::format("sampler diverged at T = {}", T));
      return wasserstein1_to_target(std::vector<double>(xs.data(), xs.data() + xs.size()), path);
    };
    const double w_opt = w1_of(res.schedule);
    const double w_base = w1_of(base);
    table.rows.push_back({static_cast<double>(T), w_opt, w_base, res.converged ? 1.0 : 0.0});
    s_opt.x.push_back(T);
    s_opt.y.push_back(w_opt);
    s_base.x.push_back(T);
    s_base.y.push_back(w_base);
    log << fmt::format("T = {}: w1 optimised {:.5g}, {} {:.5g}\n", T, w_opt, base_name, w_base);
  }
  csv::write(out / "sweep.csv", table);
  write_line_plot(out / "sweep.svg", {"Wasserstein-1 against the number of steps", "T", "w1", true, true},
                  {s_opt, s_base});
}

}  // namespace

std::string version() { return GEOSCHED_VERSION; }

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"optimize", "train", "sample", "eval", "sweep"};
  return names;
}

NoiseSchedule make_noise_schedule(const Config& cfg) {
  const std::string& family = cfg.str("noise.family");
  const double t_min = cfg.real("noise.t_min");
  try {
    if (family == "vp_linear") return NoiseSchedule(VPLinear{cfg.real("noise.beta_min"), cfg.real("noise.beta_max")}, t_min);
    if (family == "vp_cosine") return NoiseSchedule(VPCosine{cfg.real("noise.epsilon")}, t_min);
    if (family == "ve") return NoiseSchedule(VESigma{cfg.real("noise.sigma_min"), cfg.real("noise.sigma_max")}, t_min);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError(fmt::format("noise.family '{}' is not one of vp_linear, vp_cosine, ve", family));
}

GmmTarget make_target(const Config& cfg, const NoiseSchedule& sched) {
  const std::string& kind = cfg.str("target.kind");
  try {
    if (kind == "bimodal") return bimodal_target(cfg.real("target.separation"), cfg.real("target.std"));
    if (kind == "cantor")
      return cantor_target(static_cast<int>(cfg.integer("target.level")), cfg.real("target.mollify_t"), sched);
    if (kind == "gaussian") return gaussian_target(cfg.real("target.mean"), cfg.real("target.variance"));
    if (kind == "standard_normal") return standard_normal_target(positive_int(cfg, "target.dim"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError(fmt::format("target.kind '{}' is not one of bimodal, cantor, gaussian, standard_normal", kind));
}

DiscretisationSchedule make_schedule(const Config& cfg, const NoiseSchedule& sched) {
  const std::string& kind = cfg.str("schedule.kind");
  if (kind == "file") {
    const std::string& file = cfg.str("schedule.file");
    if (file.empty()) throw ConfigError("schedule.kind = file needs schedule.file");
    try {
      return read_schedule_csv(file);
    } catch (const std::exception& e) {
      throw ConfigError(fmt::format("cannot read schedule: {}", e.what()));
    }
  }
  const int steps = positive_int(cfg, "schedule.steps");
  try {
    if (kind == "uniform") return baseline_schedule(UniformT{}, steps, sched);
    if (kind == "cosine") return baseline_schedule(CosineSpaced{}, steps, sched);
    if (kind == "log_linear_sigma") return baseline_schedule(LogLinearSigma{}, steps, sched);
    if (kind == "karras") return baseline_schedule(KarrasRho{cfg.real("schedule.rho")}, steps, sched);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError(
      fmt::format("schedule.kind '{}' is not one of uniform, cosine, log_linear_sigma, karras, file", kind));
}

SamplerKind make_sampler(const Config& cfg) {
  const std::string& name = cfg.str("sample.sampler");
  const int n_inner = static_cast<int>(cfg.integer("sample.n_inner"));
  const double step_scale = cfg.real("sample.step_scale");
  if (n_inner < 0) throw ConfigError("sample.n_inner must be >= 0");
  if (!(step_scale > 0.0)) throw ConfigError("sample.step_scale must be positive");
  if (name == "reverse_sde") return ReverseSde{};
  if (name == "ode_euler") return OdeEuler{};
  if (name == "ode_heun") return OdeHeun{};
  if (name == "langevin") return AnnealedLangevin{n_inner, step_scale};
  if (name == "predictor_corrector") return PredictorCorrector{n_inner, step_scale};
  throw ConfigError(fmt::format(
      "sample.sampler '{}' is not one of reverse_sde, ode_euler, ode_heun, langevin, predictor_corrector", name));
}

CostOptions make_cost_options(const Config& cfg) {
  CostOptions o;
  const std::string& at = cfg.str("cost.velocity_at");
  if (at == "source") o.velocity_at = VelocityAt::Source;
  else if (at == "destination") o.velocity_at = VelocityAt::Destination;
  else throw ConfigError(fmt::format("cost.velocity_at '{}' is not one of source, destination", at));
  o.hutchinson.probes = positive_int(cfg, "cost.probes");
  return o;
}

OptimizeOptions make_optimize_options(const Config& cfg) {
  OptimizeOptions o;
  const std::string& est = cfg.str("cost.estimator");
  if (est == "corrector") o.kind = CostKind::Corrector;
  else if (est == "predictor") o.kind = CostKind::Predictor;
  else throw ConfigError(fmt::format("cost.estimator '{}' is not one of corrector, predictor", est));
  const std::string& interp = cfg.str("cost.interpolation");
  if (interp == "cubic") o.interpolation = Interpolation::MonotoneCubic;
  else if (interp == "linear") o.interpolation = Interpolation::Linear;
  else throw ConfigError(fmt::format("cost.interpolation '{}' is not one of cubic, linear", interp));
  o.n_samples = positive_int(cfg, "cost.samples");
  o.max_iters = positive_int(cfg, "optimize.max_iters");
  o.tolerance = cfg.real("optimize.tolerance");
  o.gamma = cfg.real("optimize.gamma");
  if (!(o.gamma > 0.0 && o.gamma <= 1.0)) throw ConfigError("optimize.gamma must lie in (0, 1]");
  if (!(o.tolerance > 0.0)) throw ConfigError("optimize.tolerance must be positive");
  o.cost_options = make_cost_options(cfg);
  return o;
}

ScoreSource make_score_source(const Config& cfg, const DiffusedGmm& path) {
  const std::string& kind = cfg.str("score.source");
  if (kind == "oracle") return ScoreSource::oracle(path);
  if (kind != "checkpoint") throw ConfigError(fmt::format("score.source '{}' is not one of oracle, checkpoint", kind));
  const std::string& file = cfg.str("score.checkpoint");
  if (file.empty()) throw ConfigError("score.source = checkpoint needs score.checkpoint");
  Checkpoint ck = [&] {
    try {
      return load_checkpoint(file);
    } catch (const std::exception& e) {
      throw ConfigError(fmt::format("cannot load checkpoint: {}", e.what()));
    }
  }();
  if (ck.schedule_fingerprint != path.noise_schedule().fingerprint())
    throw ConfigError("checkpoint was trained under a different noise schedule");
  if (ck.network.config().dim != path.dim()) throw ConfigError("checkpoint dimension does not match the target");
  return ScoreSource::learned(std::make_shared<ScoreNetwork>(std::move(ck.network)), path.noise_schedule());
}

DiscretisationSchedule gaussian_geodesic(const NoiseSchedule& sched, double variance, int steps,
                                         int quadrature_intervals) {
  // V(t) = s^2 tau^2 + sigma^2 and dV/dt = 2 f V + g^2.
  auto sqrt_delta = [&](double t) {
    const auto k = kernel_params(sched, t);
    const auto c = sde_coeffs(sched, t);
    const double V = k.s * k.s * variance + k.sigma * k.sigma;
    const double dV = 2.0 * c.f * V + c.g * c.g;
    return k.sigma * std::abs(dV) / std::pow(V, 1.5);
  };
  const int m = quadrature_intervals;
  const double lo = sched.t_min();
  std::vector<double> t(m + 1);
  std::vector<double> cum(m + 1, 0.0);
  for (int k = 0; k <= m; ++k) t[k] = lo + (1.0 - lo) * k / m;
  for (int k = 0; k < m; ++k) {
    const double a = t[k];
    const double b = t[k + 1];
    cum[k + 1] = cum[k] + (b - a) / 6.0 * (sqrt_delta(a) + 4.0 * sqrt_delta(0.5 * (a + b)) + sqrt_delta(b));
  }
  std::vector<double> out(steps + 1);
  out[0] = 0.0;
  out[steps] = 1.0;
  for (int i = 1; i < steps; ++i) {
    const double target = cum[m] * i / steps;
    const auto k = static_cast<std::size_t>(std::lower_bound(cum.begin(), cum.end(), target) - cum.begin());
    const double frac = (target - cum[k - 1]) / (cum[k] - cum[k - 1]);
    out[i] = t[k - 1] + frac * (t[k] - t[k - 1]);
  }
  return DiscretisationSchedule(std::move(out));
}

void run_command(const std::string& command, const Config& cfg, const fs::path& out, std::ostream& log) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end())
    throw ConfigError(fmt::format("unknown command '{}'", command));
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ConfigError(fmt::format("cannot create output directory {}: {}", out.string(), ec.message()));
  write_text(out / "config.ini", fmt::format("; geosched {} {}\n", version(), command) + cfg.to_ini());
  if (command == "optimize") run_optimize(cfg, out, log);
  else if (command == "train") run_train(cfg, out, log);
  else if (command == "sample") run_sample(cfg, out, log);
  else if (command == "eval") run_eval(cfg, out, log);
  else run_sweep(cfg, out, log);
}

}  // namespace geosched::app

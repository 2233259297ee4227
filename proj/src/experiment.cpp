#include "ppr/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ppr/admm.hpp"
#include "ppr/io.hpp"
#include "ppr/log.hpp"
#include "ppr/mm.hpp"
#include "ppr/numerics.hpp"
#include "ppr/wf.hpp"

namespace ppr {

namespace fs = std::filesystem;

Json default_config() {
  return Json{
      {"seed", 0},
      {"n_iters", 100},
      {"mean_count", 0.25},
      {"background", 0.1},
      {"noiseless", false},
      {"psnr_peak", nullptr},
      {"signal",
       {{"type", "blocks"}, {"n", 64}, {"height", 16}, {"width", 16}, {"path", ""}, {"field", ""}}},
      {"model",
       {{"type", "gaussian"},
        {"rows", 0},
        {"num_masks", 21},
        {"mask_sampling", "bernoulli"},
        {"pad_width", -1},
        {"fft_oversample", 2},
        {"reference", "disk"},
        {"path", ""}}},
      {"algorithm",
       {{"name", "wf"},
        {"step", "fisher"},
        {"noise", ""},
        {"curvature", "improved"},
        {"rho0", 8.0},
        {"adapt_rho", true},
        {"lbfgs_memory", 10},
        {"truncation", {{"enabled", false}, {"a_h", 5.0}}},
        {"backtracking", {{"shrink", 0.5}, {"sigma", 0.01}, {"mu0", 1.0}, {"max_trials", 30}}},
        {"inner", {{"cg_iters", 30}, {"inner_iters", 50}, {"ncg_iters", 30}}}}},
      {"regularizer", {{"type", "none"}, {"beta", 32.0}, {"alpha", 0.1}, {"transform", "identity"}}},
      {"init", {{"power_iters", 300}}},
      {"output", {{"prefix", ""}}},
  };
}

namespace {

std::string join_key(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void merge_checked(Json& base, const Json& user, const std::string& prefix) {
  if (!user.is_object()) throw ConfigError("config section '" + prefix + "' must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = join_key(prefix, it.key());
    if (!base.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    Json& slot = base[it.key()];
    const Json& val = it.value();
    if (slot.is_object()) {
      merge_checked(slot, val, key);
    } else if (slot.is_null()) {
      if (!val.is_null() && !val.is_number()) throw ConfigError("config key '" + key + "' must be a number or null");
      slot = val;
    } else if (slot.is_boolean()) {
      if (!val.is_boolean()) throw ConfigError("config key '" + key + "' must be true or false");
      slot = val;
    } else if (slot.is_string()) {
      if (!val.is_string()) throw ConfigError("config key '" + key + "' must be a string");
      slot = val;
    } else if (slot.is_number_integer()) {
      if (val.is_number_integer()) {
        slot = val;
      } else if (val.is_number_float() && std::floor(val.get<double>()) == val.get<double>()) {
        slot = static_cast<std::int64_t>(val.get<double>());
      } else {
        throw ConfigError("config key '" + key + "' must be an integer");
      }
    } else if (slot.is_number()) {
      if (!val.is_number()) throw ConfigError("config key '" + key + "' must be a number");
      slot = val.get<double>();
    }
  }
}

Field field_from_config(const std::string& s, const std::string& pattern) {
  if (s.empty()) return pattern == "random_complex" ? Field::Complex : Field::RealNonnegative;
  try {
    return field_from_string(s);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("signal.field: ") + e.what());
  }
}

Index positive_index(const Json& cfg, const char* section, const char* key) {
  const auto v = cfg.at(section).at(key).get<std::int64_t>();
  if (v < 1) throw ConfigError(std::string(section) + "." + key + " must be >= 1");
  return static_cast<Index>(v);
}

RMat load_image(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string(what) + " needs a path");
  if (!fs::exists(path)) throw ConfigError(std::string(what) + " file not found: " + path);
  return io::read_pgm(fs::path(path));
}

CVec flatten_rowmajor(const RMat& img) {
  CVec x(img.size());
  for (Index r = 0; r < img.rows(); ++r)
    for (Index c = 0; c < img.cols(); ++c) x[r * img.cols() + c] = img(r, c);
  return x;
}

constexpr std::uint64_t kModelSalt = 0x6d6f64656cULL;
constexpr std::uint64_t kNoiseSalt = 0x6e6f697365ULL;
constexpr std::uint64_t kInitSalt = 0x696e6974ULL;
constexpr std::uint64_t kSignalSalt = 0x7369676eULL;

SignalVector make_signal(const Json& cfg, std::uint64_t seed) {
  const Json& s = cfg.at("signal");
  const std::string type = s.at("type");
  SignalVector sig;
  sig.field = field_from_config(s.at("field"), type);
  if (type == "blocks") {
    sig.values = blocks_signal(positive_index(cfg, "signal", "n")).cast<Complex>();
  } else if (type == "disk") {
    const Index h = positive_index(cfg, "signal", "height");
    const Index w = positive_index(cfg, "signal", "width");
    sig.values = flatten_rowmajor(disk_image(h, w));
    sig.dims = std::make_pair(h, w);
  } else if (type == "random_complex") {
    const Index n = positive_index(cfg, "signal", "n");
    Rng rng(seed ^ kSignalSalt);
    sig.values.resize(n);
    for (Index i = 0; i < n; ++i) {
      const double re = standard_normal(rng);
      const double im = standard_normal(rng);
      sig.values[i] = Complex(re, im) * std::sqrt(0.5);
    }
  } else if (type == "pgm") {
    const RMat img = load_image(s.at("path"), "signal.path");
    sig.values = flatten_rowmajor(img);
    sig.dims = std::make_pair(img.rows(), img.cols());
  } else {
    throw ConfigError("signal.type must be blocks, disk, random_complex or pgm (got '" + type + "')");
  }
  project_to_field(sig.values, sig.field);
  return sig;
}

ForwardModel make_model(const Json& cfg, const SignalVector& sig, std::uint64_t seed) {
  const Json& m = cfg.at("model");
  const std::string type = m.at("type");
  const double b = cfg.at("background");
  if (!(b >= 0.0)) throw ConfigError("background must be >= 0");
  const Index n = sig.size();
  if (type == "gaussian") {
    auto rows = m.at("rows").get<std::int64_t>();
    if (rows < 0) throw ConfigError("model.rows must be >= 0");
    if (rows == 0) rows = 8 * n;
    return make_gaussian_model(rows, n, seed ^ kModelSalt, b);
  }
  if (type == "masked_dft") {
    const Index l = positive_index(cfg, "model", "num_masks");
    const std::string samp = m.at("mask_sampling");
    MaskSampling ms;
    if (samp == "bernoulli") {
      ms = MaskSampling::Bernoulli;
    } else if (samp == "exact_half") {
      ms = MaskSampling::ExactHalf;
    } else {
      throw ConfigError("model.mask_sampling must be bernoulli or exact_half");
    }
    return make_masked_dft_model(make_masks(n, l, seed ^ kModelSalt, ms), b);
  }
  if (type == "canonical_dft") {
    if (!sig.dims) throw ConfigError("canonical_dft needs an image signal (disk or pgm)");
    const auto [h, w] = *sig.dims;
    CanonicalDftSpec spec;
    spec.height = h;
    spec.width = w;
    const std::string ref = m.at("reference");
    spec.reference = ref == "disk" ? disk_image(h, w) : load_image(ref, "model.reference");
    if (spec.reference.rows() != h) throw ConfigError("model.reference height must match the signal height");
    const auto pad = m.at("pad_width").get<std::int64_t>();
    spec.pad_width = pad < 0 ? w : static_cast<Index>(pad);
    const Index k = positive_index(cfg, "model", "fft_oversample");
    spec.fft_height = k * h;
    spec.fft_width = k * (w + spec.pad_width + spec.reference.cols());
    return make_canonical_dft_model(std::move(spec), b);
  }
  if (type == "file") {
    const std::string path = m.at("path");
    if (path.empty()) throw ConfigError("model.path is required for file models");
    if (!fs::exists(path)) throw ConfigError("model file not found: " + path);
    ForwardModel fm = io::load_file_model(fs::path(path), b);
    if (fm.cols() != n) {
      throw ConfigError("file model has " + std::to_string(fm.cols()) + " columns but the signal has " +
                        std::to_string(n) + " entries");
    }
    return fm;
  }
  throw ConfigError("model.type must be gaussian, masked_dft, canonical_dft or file (got '" + type + "')");
}

NoiseModel noise_from_config(const Json& alg) {
  const std::string noise = alg.at("noise");
  const std::string step = alg.at("step");
  if (noise.empty()) {
    return (step == "fisher_gaussian" || step == "exact_gaussian") ? NoiseModel::Gaussian : NoiseModel::Poisson;
  }
  if (noise == "poisson") return NoiseModel::Poisson;
  if (noise == "gaussian") return NoiseModel::Gaussian;
  throw ConfigError("algorithm.noise must be poisson or gaussian");
}

StepKind step_from_string(const std::string& s) {
  if (s == "fisher") return StepKind::FisherPoisson;
  if (s == "fisher_gaussian") return StepKind::FisherGaussian;
  if (s == "backtracking") return StepKind::Backtracking;
  if (s == "exact_gaussian") return StepKind::ExactGaussianLineSearch;
  throw ConfigError("algorithm.step must be fisher, fisher_gaussian, backtracking or exact_gaussian");
}

CurvatureKind curvature_from_string(const std::string& s) {
  if (s == "max") return CurvatureKind::Max;
  if (s == "improved") return CurvatureKind::Improved;
  if (s == "optimal") return CurvatureKind::OptimalNumeric;
  throw ConfigError("algorithm.curvature must be max, improved or optimal");
}

std::optional<ProxL1> make_prox(const Json& cfg, Index n) {
  const Json& r = cfg.at("regularizer");
  if (r.at("type") != "l1") return std::nullopt;
  ProxL1 p;
  p.beta = r.at("beta");
  const std::string t = r.at("transform");
  if (t == "identity") {
    p.transform = std::make_shared<IdentityTransform>(n);
  } else if (t == "haar") {
    if ((n & (n - 1)) != 0) throw ConfigError("haar transform needs a power-of-two signal length");
    p.transform = std::make_shared<HaarTransform>(n);
  } else {
    throw ConfigError("regularizer.transform must be identity or haar");
  }
  return p;
}

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return std::nan("");
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return s;
}

}  // namespace

Json resolve_config(const Json& user) {
  Json cfg = default_config();
  if (user.is_null()) return cfg;
  merge_checked(cfg, user, "");
  if (!(cfg.at("mean_count").get<double>() > 0.0)) throw ConfigError("mean_count must be > 0");
  if (cfg.at("n_iters").get<std::int64_t>() < 0) throw ConfigError("n_iters must be >= 0");
  if (cfg.at("seed").get<std::int64_t>() < 0) throw ConfigError("seed must be >= 0");
  const std::string alg = cfg.at("algorithm").at("name");
  if (alg != "wf" && alg != "mm" && alg != "admm" && alg != "lbfgs") {
    throw ConfigError("algorithm.name must be wf, mm, admm or lbfgs (got '" + alg + "')");
  }
  const std::string reg = cfg.at("regularizer").at("type");
  if (reg != "none" && reg != "huber_tv" && reg != "l1") {
    throw ConfigError("regularizer.type must be none, huber_tv or l1");
  }
  if (reg == "l1" && alg != "mm" && alg != "admm") throw ConfigError("l1 regularizer needs algorithm mm or admm");
  step_from_string(cfg.at("algorithm").at("step"));
  curvature_from_string(cfg.at("algorithm").at("curvature"));
  const NoiseModel noise = noise_from_config(cfg.at("algorithm"));
  if ((alg == "mm" || alg == "admm") && noise != NoiseModel::Poisson) {
    throw ConfigError(alg + " is defined for the Poisson cost only");
  }
  return cfg;
}

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value = Json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  Json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("malformed override key '" + key + "'");
    if (!node->is_object()) *node = Json::object();
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

RVec blocks_signal(Index n) {
  static const double levels[] = {0.0, 1.0, 0.4, 0.0, 0.8, 0.2, 0.6, 0.0};
  constexpr int kLevels = sizeof levels / sizeof levels[0];
  RVec x(n);
  for (Index i = 0; i < n; ++i) x[i] = levels[(i * kLevels) / n];
  return x;
}

RMat disk_image(Index height, Index width) {
  RMat img = RMat::Zero(height, width);
  const double cy = 0.5 * (height - 1);
  const double cx = 0.5 * (width - 1);
  const double r_outer = 0.38 * std::min(height, width);
  const double r_inner = 0.16 * std::min(height, width);
  for (Index r = 0; r < height; ++r) {
    for (Index c = 0; c < width; ++c) {
      const double d_outer = std::hypot(r - cy, c - cx);
      const double d_inner = std::hypot(r - cy + 0.1 * height, c - cx - 0.1 * width);
      if (d_inner <= r_inner) {
        img(r, c) = 0.5;
      } else if (d_outer <= r_outer) {
        img(r, c) = 1.0;
      }
    }
  }
  return img;
}

Instance build_instance(const Json& cfg) {
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  Instance inst;
  inst.x_true = make_signal(cfg, seed);
  ForwardModel model = make_model(cfg, inst.x_true, seed);
  try {
    inst.scale = calibrate_scale(model, inst.x_true.values, cfg.at("mean_count"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("mean_count cannot be reached: ") + e.what());
  }
  if (cfg.at("noiseless")) {
    inst.measurements.y = mean_intensity(model, inst.x_true.values);
    inst.measurements.seed = seed;
    inst.measurements.mean_count = inst.measurements.y.mean();
  } else {
    inst.measurements = simulate_poisson(model, inst.x_true.values, seed ^ kNoiseSalt);
  }
  const NoiseModel noise = noise_from_config(cfg.at("algorithm"));
  inst.data = make_objective(noise, std::move(model), inst.measurements.y);
  inst.problem.data = inst.data;
  inst.problem.field = inst.x_true.field;
  const Json& r = cfg.at("regularizer");
  if (r.at("type") == "huber_tv") {
    const Index n = inst.x_true.size();
    FiniteDifference diff = inst.x_true.dims ? FiniteDifference::image(inst.x_true.dims->first, inst.x_true.dims->second)
                                             : FiniteDifference::chain(n);
    inst.problem.reg = HuberTV(r.at("beta"), r.at("alpha"), std::move(diff));
  }
  return inst;
}

ExperimentResult execute(const Json& cfg) {
  ExperimentResult res;
  res.config = cfg;
  const Instance inst = build_instance(cfg);
  res.x_true = inst.x_true;
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  const Problem& problem = inst.problem;
  const ForwardModel& model = problem.model();
  const Json& alg = cfg.at("algorithm");
  const std::string name = alg.at("name");
  const int n_iters = static_cast<int>(cfg.at("n_iters").get<std::int64_t>());

  const auto power_iters = cfg.at("init").at("power_iters").get<int>();
  const SpectralInit si = spectral_init(model, inst.measurements.y, power_iters, seed ^ kInitSalt, problem.field);
  double alpha = 0.0;
  try {
    alpha = scale_fit(model, inst.measurements.y, si.x);
  } catch (const DegenerateError& e) {
    log::warn(std::string("scale fit skipped: ") + e.what());
  }
  res.x0 = finalize_init(si.x, alpha, problem.field);

  TraceOptions topts;
  topts.x_true = inst.x_true.values;
  if (!cfg.at("psnr_peak").is_null()) topts.psnr_peak = cfg.at("psnr_peak").get<double>();

  const std::optional<ProxL1> prox = make_prox(cfg, inst.x_true.size());
  auto initial_cost = [&](const CVec& x) {
    double c = problem.cost(x);
    if (prox) c += prox->cost(x) - (problem.reg ? problem.reg->cost(x) : 0.0);
    return c;
  };
  TraceRecord init_row;
  init_row.k = 0;
  init_row.cost = initial_cost(res.x0);
  init_row.nrmse = nrmse(res.x0, inst.x_true.values);
  init_row.psnr = psnr(res.x0, inst.x_true.values, topts.psnr_peak);

  const Json& inner = alg.at("inner");
  if (name == "wf") {
    WfOptions o;
    o.rule.kind = step_from_string(alg.at("step"));
    const Json& bt = alg.at("backtracking");
    o.rule.backtracking.shrink = bt.at("shrink");
    o.rule.backtracking.sigma = bt.at("sigma");
    o.rule.backtracking.mu0 = bt.at("mu0");
    o.rule.backtracking.max_trials = bt.at("max_trials");
    o.truncation.enabled = alg.at("truncation").at("enabled");
    o.truncation.a_h = alg.at("truncation").at("a_h");
    o.n_iters = n_iters;
    o.trace = topts;
    try {
      o.rule.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("algorithm.backtracking: ") + e.what());
    }
    res.run = run_wf(problem, res.x0, o);
  } else if (name == "mm") {
    MmOptions o;
    o.curvature = curvature_from_string(alg.at("curvature"));
    o.n_outer = n_iters;
    o.inner.cg_iters = inner.at("cg_iters");
    o.inner.prox_iters = inner.at("inner_iters");
    o.inner.ncg_iters = inner.at("ncg_iters");
    o.prox = prox;
    o.trace = topts;
    res.run = run_mm(problem, res.x0, o);
  } else if (name == "admm") {
    AdmmOptions o;
    o.rho0 = alg.at("rho0");
    if (!(o.rho0 > 0.0)) throw ConfigError("algorithm.rho0 must be > 0");
    o.adapt_rho = alg.at("adapt_rho");
    o.n_iters = n_iters;
    o.inner.reg_iters = inner.at("inner_iters");
    o.prox = prox;
    o.trace = topts;
    res.run = run_admm(problem, res.x0, o).state;
  } else {
    LbfgsOptions o;
    o.memory = alg.at("lbfgs_memory");
    if (o.memory < 1) throw ConfigError("algorithm.lbfgs_memory must be >= 1");
    o.max_iters = n_iters;
    TraceRecorder rec(topts);
    RunState& st = res.run;
    st.x = res.x0;
    project_to_field(st.x, is_real_field(problem.field) ? Field::Real : Field::Complex);
    if (n_iters > 0) {
      CostGradFn fn = [&](const CVec& x, CVec& g) {
        g = problem.gradient(x);
        return problem.cost(x);
      };
      rec.start_update();
      LbfgsResult lr = lbfgs_minimize(fn, st.x, o, [&](int k, const CVec& x, double cost) {
        rec.stop_update();
        rec.record(st.trace, k, x, cost);
        rec.start_update();
      });
      rec.stop_update();
      st.x = std::move(lr.x);
      if (lr.line_search_failed) {
        st.trace.status = RunStatus::StepFailure;
        st.trace.message = "line search failed after " + std::to_string(lr.iterations) + " iterations";
      }
    }
  }

  res.trace.status = res.run.trace.status;
  res.trace.message = res.run.trace.message;
  res.trace.records.push_back(init_row);
  for (const auto& r : res.run.trace.records) res.trace.records.push_back(r);
  res.wall_seconds = res.trace.records.back().elapsed_seconds;
  return res;
}

void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
  out << "iter,time_s,cost,nrmse,psnr\n";
  for (const auto& r : trace.records) {
    out << r.k << ',' << fmt_double(r.elapsed_seconds) << ',' << fmt_double(r.cost) << ','
        << fmt_double(r.nrmse) << ',' << fmt_double(r.psnr) << '\n';
  }
}

Json summary_json(const ExperimentResult& res) {
  const TraceRecord& last = res.trace.records.back();
  auto num = [](double v) -> Json { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  Json s;
  s["version"] = kVersion;
  s["status"] = to_string(res.trace.status);
  s["message"] = res.trace.message;
  s["iterations"] = last.k;
  s["final_cost"] = num(last.cost);
  s["final_nrmse"] = num(last.nrmse);
  s["final_psnr"] = num(last.psnr);
  s["wall_seconds"] = res.wall_seconds;
  s["psnr_convention"] = kPsnrConvention;
  s["safeguard_halvings"] = res.run.safeguard_halvings;
  s["backtracking_exhausted"] = res.run.backtracking_exhausted;
  s["inner_nonconverged"] = res.run.inner_nonconverged;
  s["config"] = res.config;
  return s;
}

void write_artifacts(const ExperimentResult& res, const fs::path& out_dir, const std::string& prefix) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + out_dir.string() + ": " + ec.message());
  auto open = [&](const std::string& name) {
    std::ofstream f(out_dir / (prefix + name));
    if (!f) throw ConfigError("cannot write " + (out_dir / (prefix + name)).string());
    return f;
  };
  {
    auto f = open("trace.csv");
    write_trace_csv(f, res.trace);
  }
  {
    auto f = open("summary.json");
    f << summary_json(res).dump(2) << '\n';
  }
  const CVec& x = res.run.x;
  {
    auto f = open("reconstruction.csv");
    f << "index,re,im\n";
    for (Index i = 0; i < x.size(); ++i) f << i << ',' << fmt_double(x[i].real()) << ',' << fmt_double(x[i].imag()) << '\n';
  }
  if (res.x_true && res.x_true->dims && is_real_field(res.x_true->field)) {
    const auto [h, w] = *res.x_true->dims;
    const CVec xc = phase_correct(x, res.x_true->values);
    RMat img(h, w);
    const double peak = std::max(res.x_true->values.cwiseAbs().maxCoeff(), 1e-300);
    for (Index r = 0; r < h; ++r)
      for (Index c = 0; c < w; ++c) img(r, c) = xc[r * w + c].real() / peak;
    io::write_pgm(out_dir / (prefix + "reconstruction.pgm"), img);
  }
}

ExperimentResult run_experiment(const Json& user_config, const fs::path& out_dir) {
  const Json cfg = resolve_config(user_config);
  ExperimentResult res = execute(cfg);
  write_artifacts(res, out_dir, cfg.at("output").at("prefix").get<std::string>());
  return res;
}

IterationTrace median_trace(const std::vector<IterationTrace>& traces) {
  IterationTrace out;
  if (traces.empty()) return out;
  std::size_t n = traces.front().records.size();
  for (const auto& t : traces) {
    n = std::min(n, t.records.size());
    if (t.status != RunStatus::Completed && out.status == RunStatus::Completed) {
      out.status = t.status;
      out.message = t.message;
    }
  }
  std::vector<double> time(traces.size()), cost(traces.size()), err(traces.size()), db(traces.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < traces.size(); ++j) {
      const auto& r = traces[j].records[i];
      time[j] = r.elapsed_seconds;
      cost[j] = r.cost;
      err[j] = r.nrmse;
      db[j] = r.psnr;
    }
    TraceRecord m;
    m.k = traces.front().records[i].k;
    m.elapsed_seconds = median_of(time);
    m.cost = median_of(cost);
    m.nrmse = median_of(err);
    m.psnr = median_of(db);
    out.records.push_back(m);
  }
  return out;
}

std::vector<std::string> suite_presets() { return {"fig5", "fig6", "fig8", "twf"}; }

std::pair<Json, std::vector<SuiteEntry>> suite_preset(const std::string& name) {
  auto wf = [](const std::string& step) { return Json{{"algorithm", {{"name", "wf"}, {"step", step}}}}; };
  if (name == "fig5") {
    Json base = {{"signal", {{"type", "blocks"}, {"n", 64}}}, {"model", {{"type", "gaussian"}}}, {"n_iters", 100}};
    return {base,
            {{"gaussian", "wf_fisher", wf("fisher")},
             {"gaussian", "wf_backtracking", wf("backtracking")},
             {"gaussian", "wf_exact_gaussian", wf("exact_gaussian")},
             {"gaussian", "lbfgs", Json{{"algorithm", {{"name", "lbfgs"}}}}}}};
  }
  if (name == "fig6") {
    Json base = {{"signal", {{"type", "blocks"}, {"n", 64}}}, {"n_iters", 100}};
    std::vector<SuiteEntry> entries;
    for (const std::string model : {"gaussian", "masked_dft"}) {
      const Json m = {{"model", {{"type", model}}}};
      Json a = wf("fisher");
      a.merge_patch(m);
      Json g = wf("exact_gaussian");
      g.merge_patch(m);
      Json h = wf("fisher");
      h.merge_patch(m);
      h["regularizer"] = {{"type", "huber_tv"}};
      entries.push_back({model, "poisson_wf_fisher", a});
      entries.push_back({model, "gaussian_wf_exact", g});
      entries.push_back({model, "poisson_wf_fisher_huber", h});
    }
    return {base, entries};
  }
  if (name == "fig8") {
    Json base = {{"signal", {{"type", "blocks"}, {"n", 64}}},
                 {"model", {{"type", "gaussian"}}},
                 {"regularizer", {{"type", "huber_tv"}}},
                 {"n_iters", 100}};
    return {base,
            {{"gaussian", "wf_fisher", wf("fisher")},
             {"gaussian", "wf_backtracking", wf("backtracking")},
             {"gaussian", "mm_improved", Json{{"algorithm", {{"name", "mm"}, {"curvature", "improved"}}}}},
             {"gaussian", "mm_max", Json{{"algorithm", {{"name", "mm"}, {"curvature", "max"}}}}},
             {"gaussian", "admm", Json{{"algorithm", {{"name", "admm"}}}}},
             {"gaussian", "lbfgs", Json{{"algorithm", {{"name", "lbfgs"}}}}}}};
  }
  if (name == "twf") {
    Json base = {{"signal", {{"type", "blocks"}, {"n", 64}}}, {"model", {{"type", "gaussian"}}}, {"n_iters", 100}};
    std::vector<SuiteEntry> entries{{"gaussian", "wf_untruncated", wf("fisher")}};
    for (double a : {1.0, 5.0, 10.0, 50.0, 100.0}) {
      Json p = wf("fisher");
      p["algorithm"]["truncation"] = {{"enabled", true}, {"a_h", a}};
      char label[32];
      std::snprintf(label, sizeof label, "wf_trunc_%g", a);
      entries.push_back({"gaussian", label, p});
    }
    return {base, entries};
  }
  throw ConfigError("unknown suite preset '" + name + "' (fig5, fig6, fig8, twf)");
}

SuiteResult run_suite(const std::string& preset, const std::vector<std::uint64_t>& seeds,
                      const Json& user_overrides, const fs::path& out_dir) {
  if (seeds.empty()) throw ConfigError("suite needs at least one seed");
  auto [base, entries] = suite_preset(preset);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  SuiteResult out;
  out.entries = entries;
  std::ofstream combined(out_dir / "combined.csv");
  if (!combined) throw ConfigError("cannot write " + (out_dir / "combined.csv").string());
  combined << "model,algorithm,iter,time_s,cost,nrmse,psnr\n";
  for (const auto& e : entries) {
    Json cfg = base;
    if (!user_overrides.is_null()) cfg.merge_patch(user_overrides);
    cfg.merge_patch(e.patch);
    std::vector<IterationTrace> traces;
    for (std::uint64_t s : seeds) {
      cfg["seed"] = s;
      const ExperimentResult r = execute(resolve_config(cfg));
      if (r.trace.status != RunStatus::Completed) {
        ++out.failed_runs;
        log::warn(e.model + "/" + e.label + " seed " + std::to_string(s) + ": " + r.trace.message);
      }
      traces.push_back(r.trace);
    }
    IterationTrace med = median_trace(traces);
    const std::string file = sanitize(e.model) + "_" + sanitize(e.label) + ".csv";
    std::ofstream f(out_dir / file);
    if (!f) throw ConfigError("cannot write " + (out_dir / file).string());
    write_trace_csv(f, med);
    for (const auto& r : med.records) {
      combined << e.model << ',' << e.label << ',' << r.k << ',' << fmt_double(r.elapsed_seconds) << ','
               << fmt_double(r.cost) << ',' << fmt_double(r.nrmse) << ',' << fmt_double(r.psnr) << '\n';
    }
    out.medians.push_back(std::move(med));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

CVec random_cvec(Index n, Rng& rng) {
  CVec v(n);
  for (Index i = 0; i < n; ++i) v[i] = Complex(standard_normal(rng), standard_normal(rng));
  return v;
}

double adjoint_gap(const ForwardModel& m, Rng& rng) {
  const CVec x = random_cvec(m.cols(), rng);
  const CVec z = random_cvec(m.rows(), rng);
  const Complex lhs = m.apply_linear(x).dot(z);
  const Complex rhs = x.dot(m.adjoint(z));
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

}  // namespace

std::vector<CheckResult> self_check() {
  std::vector<CheckResult> out;
  Rng rng(12345);
  auto add = [&](std::string name, bool ok, std::string detail) { out.push_back({std::move(name), ok, std::move(detail)}); };

  {
    double worst = 0.0;
    worst = std::max(worst, adjoint_gap(make_gaussian_model(12, 5, 1, 0.1), rng));
    worst = std::max(worst, adjoint_gap(make_masked_dft_model(make_masks(6, 3, 2, MaskSampling::Bernoulli), 0.1), rng));
    CanonicalDftSpec spec;
    spec.height = 3;
    spec.width = 3;
    spec.reference = disk_image(3, 2);
    spec.pad_width = 3;
    spec.fft_height = 4;
    spec.fft_width = 9;
    worst = std::max(worst, adjoint_gap(make_canonical_dft_model(spec, 0.1), rng));
    std::stringstream ss;
    io::write_matrix_csv(ss, densify(make_gaussian_model(7, 4, 3, 0.0)));
    worst = std::max(worst, adjoint_gap(make_dense_model(io::read_matrix_csv(ss), RVec::Zero(7), ModelKind::FileMatrix), rng));
    add("adjoint", worst < 1e-10, "max relative gap " + fmt_double(worst));
  }
  {
    bool ok = true;
    double worst_dom = 0.0;
    for (int t = 0; t < 500 && ok; ++t) {
      const double y = 20.0 * (1.0 - uniform01(rng));
      const double b = 0.05 + 4.95 * uniform01(rng);
      const double s = -10.0 + 20.0 * uniform01(rng);
      const double c = curvature_improved(s, y, b);
      ok = c >= 2.0 - 1e-12 && c <= curvature_max(y, b) + 1e-12;
      const double phi_s = psi(s, y, b);
      const double dphi = psi_dot(s, y, b).real();
      for (int j = 0; j <= 100; ++j) {
        const double r = -20.0 + 0.4 * j;
        const double gap = phi_s + dphi * (r - s) + 0.5 * c * (r - s) * (r - s) - psi(r, y, b);
        worst_dom = std::min(worst_dom, gap);
      }
    }
    add("curvature_order", ok, "2 <= c_imp <= c_max on 500 draws");
    add("majorizer_domination", worst_dom >= -1e-9, "min gap " + fmt_double(worst_dom));
  }
  {
    ForwardModel m = make_gaussian_model(24, 4, 4, 0.1);
    CVec xt(4);
    xt << 1.0, 0.5, 0.0, 0.25;
    calibrate_scale(m, xt, 2.0);
    const MeasurementSet ms = simulate_poisson(m, xt, 5);
    Problem p;
    p.data = make_objective(NoiseModel::Poisson, m, ms.y);
    p.reg = HuberTV(2.0, 0.1, FiniteDifference::chain(4));
    p.field = Field::Real;
    CVec x(4);
    x << 0.7, -0.3, 0.4, 0.9;
    const CVec g = p.gradient(x);
    const CVec fd = finite_diff_grad([&](const CVec& u) { return p.cost(u); }, x, 1e-6, false);
    const double rel = (g - fd).norm() / std::max(1e-12, fd.norm());
    add("gradient", rel < 1e-4, "relative error " + fmt_double(rel));
  }
  {
    double worst = 0.0;
    for (int t = 0; t < 2000; ++t) {
      const double tt = 5.0 * uniform01(rng);
      const double y = std::floor(6.0 * uniform01(rng));
      const double b = 0.01 + 2.0 * uniform01(rng);
      const double rho = 0.5 + 16.0 * uniform01(rng);
      const double m = update_v_magnitude_bpos(tt, y, b, rho);
      const double res = (2.0 + rho) * m * m * m - rho * tt * m * m + (2.0 * b - 2.0 * y + rho * b) * m - rho * b * tt;
      worst = std::max(worst, std::abs(res) / (2.0 + rho));
    }
    add("admm_cubic", worst < 1e-9, "max scaled residual " + fmt_double(worst));
  }
  {
    CVec x = random_cvec(8, rng);
    double worst = 0.0;
    for (int j = 0; j < 8; ++j) {
      const Complex ph = std::polar(1.0, 2.0 * std::numbers::pi * j / 8.0 + 0.1);
      worst = std::max(worst, nrmse(ph * x, x));
    }
    add("phase_invariance", worst < 1e-12, "max nrmse " + fmt_double(worst));
  }
  return out;
}

}  // namespace ppr

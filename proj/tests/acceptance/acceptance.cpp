// Acceptance run: one PASS/FAIL line per criterion. Exit code is nonzero when
// any hard criterion fails; soft and report-only criteria never fail the run.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ppr/admm.hpp"
#include "ppr/experiment.hpp"
#include "ppr/io.hpp"
#include "ppr/mm.hpp"
#include "ppr/numerics.hpp"
#include "ppr/wf.hpp"

using namespace ppr;

namespace {

// Pinned tolerances.
constexpr double kDominationTol = 1e-9;
constexpr double kCurvatureTol = 1e-12;
constexpr double kOptTol = 1e-6;
constexpr double kFisherSigmas = 4.0;
constexpr double kGradRelTol = 1e-4;
constexpr double kFdEps = 1e-6;
constexpr double kMonotoneRelTol = 1e-10;
constexpr double kWfGapTol = 1e-4;
constexpr double kCubicResidualTol = 1e-9;
constexpr double kContinuityTol = 1e-4;
constexpr double kAdjointTol = 1e-10;
constexpr double kEntryTol = 1e-12;
constexpr double kPhaseTol = 1e-14;

enum class Kind { Hard, Soft, Report };

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double median(std::vector<double> v) { return oracle::median(std::move(v)); }

// 1 ------------------------------------------------------------------------
Outcome majorizer_domination() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < 10000; ++t) {
    const double y = oracle::uniform(rng, 1e-12, 20.0);
    const double b = oracle::uniform(rng, 0.05 + 1e-12, 5.0);
    const double s = oracle::uniform(rng, -10.0, 10.0);
    const double c = curvature_improved(s, y, b);
    const double ps = oracle::phi(s, y, b);
    const double ds = oracle::phi_dot(s, y, b);
    for (int j = 0; j < 401; ++j) {
      const double r = -20.0 + 0.1 * j;
      const double gap = oracle::phi(r, y, b) - (ps + ds * (r - s) + 0.5 * c * (r - s) * (r - s));
      worst = std::max(worst, gap);
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= kDominationTol && secs < 30.0,
          fmt("max(phi - Phi) = %.3g over 1e4 x 401 points, %.2f s", worst, secs)};
}

// 2 ------------------------------------------------------------------------
Outcome curvature_ordering() {
  Rng rng(102);
  double lo_viol = 0.0, hi_viol = 0.0, opt_viol = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < 10000; ++t) {
    const double y = oracle::uniform(rng, 1e-12, 20.0);
    const double b = oracle::uniform(rng, 0.05 + 1e-12, 5.0);
    const double s = oracle::uniform(rng, -10.0, 10.0);
    const double c = curvature_improved(s, y, b);
    lo_viol = std::max(lo_viol, 2.0 - c);
    hi_viol = std::max(hi_viol, c - curvature_max(y, b));
    if (t % 50 == 0) opt_viol = std::max(opt_viol, curvature_optimal_numeric(s, y, b) - c);
  }
  double s3b = 0.0;
  for (double b : {0.05, 0.2, 1.0, 5.0})
    for (double y : {0.5, 4.0, 20.0})
      s3b = std::max(s3b, std::abs(curvature_improved(std::sqrt(3.0 * b), y, b) - curvature_max(y, b)));
  const bool ok = lo_viol <= kCurvatureTol && hi_viol <= kCurvatureTol && s3b <= kCurvatureTol && opt_viol <= kOptTol;
  std::string d = fmt("2 - c_imp <= %.3g, c_imp - c_max <= %.3g", lo_viol, hi_viol);
  d += fmt(", |c_imp(sqrt(3b)) - c_max| = %.3g, c_opt - c_imp <= %.3g", s3b, opt_viol);
  return {ok, d};
}

// 3 ------------------------------------------------------------------------
Outcome fisher_consistency() {
  Rng rng(103);
  int ok = 0;
  double worst_z = 0.0;
  for (int p = 0; p < 20; ++p) {
    const Complex v = std::polar(oracle::uniform(rng, 0.05, 2.0), oracle::uniform(rng, 0.0, 6.28));
    const double b = oracle::uniform(rng, 0.05, 2.0);
    const double lam = std::norm(v) + b;
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double y = sample_poisson(lam, rng);
      const double q = std::norm(psi_dot(v, y, b));
      sum += q;
      sum2 += q * q;
    }
    const double mean = sum / n;
    const double se = std::sqrt(std::max(sum2 / n - mean * mean, 0.0) / n);
    const double expected = 4.0 * std::norm(v) / lam;
    const double z = std::abs(mean - expected) / se;
    worst_z = std::max(worst_z, z);
    if (z <= kFisherSigmas) ++ok;
  }
  return {ok == 20, fmt("%.0f/20 pairs within 4 SE, worst z = %.2f", ok, worst_z)};
}

// 4 ------------------------------------------------------------------------
Outcome gradient_correctness() {
  Rng rng(104);
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const Index n = 2 + inst % 7;
    const Index m = 6 * n;
    ForwardModel model = make_gaussian_model(m, n, 400 + inst, 0.1);
    CVec xt = oracle::random_real(n, rng);
    calibrate_scale(model, xt, 1.0);
    const RVec y = simulate_poisson(model, xt, 500 + inst).y;
    const CVec x = oracle::random_real(n, rng);
    for (NoiseModel noise : {NoiseModel::Poisson, NoiseModel::Gaussian}) {
      for (bool reg : {false, true}) {
        Problem p;
        p.data = make_objective(noise, model, y);
        p.field = Field::Real;
        if (reg) p.reg = HuberTV(2.0, 0.1, FiniteDifference::chain(n));
        const CVec g = p.gradient(x);
        const CVec fd = finite_diff_grad([&](const CVec& u) { return p.cost(u); }, x, kFdEps, false);
        worst = std::max(worst, (g - fd).norm() / std::max(fd.norm(), 1e-12));
      }
    }
  }
  return {worst < kGradRelTol, fmt("worst relative error %.3g over 20 instances x 4 costs", worst)};
}

// 5 ------------------------------------------------------------------------
Outcome mm_monotonicity() {
  ForwardModel model = make_gaussian_model(256, 32, 105, 0.1);
  Rng rng(105);
  const CVec xt = oracle::random_cvec(32, rng);
  calibrate_scale(model, xt, 0.25);
  Problem p;
  p.data = make_objective(NoiseModel::Poisson, model, simulate_poisson(model, xt, 106).y);
  const SpectralInit si = spectral_init(model, p.data->y(), 300, 107, Field::Complex);
  const CVec x0 = finalize_init(si.x, scale_fit(model, p.data->y(), si.x), Field::Complex);

  std::vector<std::vector<double>> costs;
  int increases = 0;
  for (CurvatureKind kind : {CurvatureKind::Max, CurvatureKind::Improved}) {
    MmOptions o;
    o.curvature = kind;
    o.n_outer = 100;
    const RunState s = run_mm(p, x0, o);
    std::vector<double> c{p.cost(x0)};
    for (const auto& r : s.trace.records) c.push_back(r.cost);
    if (s.trace.status != RunStatus::Completed || c.size() != 101) return {false, "MM stopped: " + s.trace.message};
    for (std::size_t k = 1; k < c.size(); ++k)
      if (c[k] > c[k - 1] + kMonotoneRelTol * std::abs(c[k - 1])) ++increases;
    costs.push_back(std::move(c));
  }
  int slower = 0;
  for (std::size_t k = 0; k < costs[0].size(); ++k)
    if (costs[1][k] > costs[0][k] + kMonotoneRelTol * std::abs(costs[0][k])) ++slower;
  std::string d = fmt("%.0f increases; improved above max at %.0f iterations", increases, slower);
  d += fmt("; final cost max %.6f, improved %.6f", costs[0].back(), costs[1].back());
  return {increases == 0 && slower == 0, d};
}

// 6 ------------------------------------------------------------------------
Outcome wf_fisher_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  ForwardModel model = make_gaussian_model(128, 16, 106, 0.1);
  Rng rng(106);
  const CVec xt = oracle::random_cvec(16, rng);
  calibrate_scale(model, xt, 1.0);
  Problem p;
  p.data = make_objective(NoiseModel::Poisson, model, mean_intensity(model, xt));
  const double f_true = p.cost(xt);
  const SpectralInit si = spectral_init(model, p.data->y(), 300, 108, Field::Complex);
  const CVec x0 = finalize_init(si.x, scale_fit(model, p.data->y(), si.x), Field::Complex);
  WfOptions o;
  o.n_iters = 500;
  const RunState s = run_wf(p, x0, o);
  const double secs = seconds_since(t0);
  double best_gap = std::numeric_limits<double>::infinity();
  int first = -1;
  for (const auto& r : s.trace.records) {
    const double gap = (r.cost - f_true) / std::abs(f_true);
    best_gap = std::min(best_gap, gap);
    if (first < 0 && gap < kWfGapTol) first = r.k;
  }
  std::string d = fmt("relative gap %.3g after 500 iterations, first below 1e-4 at k=%.0f, %.2f s",
                      best_gap, first, secs);
  return {first > 0 && secs < 10.0, d};
}

// 7 ------------------------------------------------------------------------
Outcome poisson_vs_gaussian() {
  Json base = {{"signal", {{"type", "blocks"}, {"n", 64}}},
               {"model", {{"type", "gaussian"}, {"rows", 4096}}},
               {"mean_count", 0.25},
               {"background", 0.1},
               {"n_iters", 100}};
  std::vector<double> pois, gaus, huber;
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Json c = base;
    c["seed"] = seed;
    c["algorithm"] = {{"name", "wf"}, {"step", "fisher"}};
    const double np = execute(resolve_config(c)).trace.records.back().nrmse;
    c["algorithm"] = {{"name", "wf"}, {"step", "exact_gaussian"}};
    const double ng = execute(resolve_config(c)).trace.records.back().nrmse;
    c["algorithm"] = {{"name", "wf"}, {"step", "fisher"}};
    c["regularizer"] = {{"type", "huber_tv"}, {"beta", 32.0}, {"alpha", 0.1}};
    const double nh = execute(resolve_config(c)).trace.records.back().nrmse;
    pois.push_back(np);
    gaus.push_back(ng);
    huber.push_back(nh);
    if (np <= ng) ++wins;
  }
  const double mp = median(pois), mh = median(huber);
  std::string d = fmt("Poisson <= Gaussian on %.0f/10 seeds; median NRMSE Poisson %.4f, Gaussian %.4f", wins, mp,
                      median(gaus));
  d += fmt(", Poisson+Huber-TV %.4f", mh);
  return {wins >= 8 && mh < mp, d};
}

// 8 ------------------------------------------------------------------------
int iterations_to(const IterationTrace& t, double threshold) {
  for (const auto& r : t.records)
    if (r.cost <= threshold) return r.k;
  return std::numeric_limits<int>::max();
}

Outcome speed_ordering(const std::filesystem::path& out_dir) {
  std::string d;
  bool ok = true;
  for (bool reg : {false, true}) {
    std::vector<double> fisher_its, bt_its, fisher_t, bt_t;
    std::vector<IterationTrace> tf, tb;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Json c = {{"signal", {{"type", "blocks"}, {"n", 64}}}, {"model", {{"type", "gaussian"}}}, {"n_iters", 100},
                {"seed", seed}};
      if (reg) c["regularizer"] = {{"type", "huber_tv"}};
      c["algorithm"] = {{"name", "wf"}, {"step", "fisher"}};
      const ExperimentResult f = execute(resolve_config(c));
      c["algorithm"] = {{"name", "wf"}, {"step", "backtracking"}};
      const ExperimentResult b = execute(resolve_config(c));
      // Threshold: 99% of the way from the shared start to the better final cost.
      const double f0 = f.trace.records.front().cost;
      const double fmin = std::min(f.trace.records.back().cost, b.trace.records.back().cost);
      const double thr = fmin + 0.01 * (f0 - fmin);
      fisher_its.push_back(iterations_to(f.trace, thr));
      bt_its.push_back(iterations_to(b.trace, thr));
      fisher_t.push_back(f.trace.records.back().elapsed_seconds);
      bt_t.push_back(b.trace.records.back().elapsed_seconds);
      tf.push_back(f.trace);
      tb.push_back(b.trace);
    }
    const double mf = median(fisher_its), mb = median(bt_its);
    ok = ok && mf <= mb;
    d += fmt(reg ? "reg: median iters Fisher %.0f, backtracking %.0f" : "unreg: median iters Fisher %.0f, backtracking %.0f",
             mf, mb);
    d += fmt(" (wall %.3f s vs %.3f s); ", median(fisher_t), median(bt_t));
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    const std::string tag = reg ? "reg" : "unreg";
    std::ofstream ff(out_dir / ("speed_" + tag + "_fisher.csv"));
    write_trace_csv(ff, median_trace(tf));
    std::ofstream fb(out_dir / ("speed_" + tag + "_backtracking.csv"));
    write_trace_csv(fb, median_trace(tb));
  }
  d += "traces in " + out_dir.string();
  return {ok, d};
}

// 9 ------------------------------------------------------------------------
Outcome admm_exactness() {
  Rng rng(109);
  double worst_res = 0.0, worst_sel = 0.0, worst_cont = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double t = oracle::uniform(rng, 0.0, 6.0);
    const double y = std::floor(oracle::uniform(rng, 0.0, 15.0));
    const double b = oracle::uniform(rng, 0.005, 2.0);
    const double rho = oracle::uniform(rng, 0.05, 20.0);
    const double m0 = update_v_magnitude_b0(t, y, rho);
    worst_res = std::max(worst_res, std::abs((2.0 + rho) * m0 * m0 - rho * t * m0 - 2.0 * y) / (2.0 + rho));
    const double m = update_v_magnitude_bpos(t, y, b, rho);
    const double cubic = (2.0 + rho) * m * m * m - rho * t * m * m + (2.0 * b - 2.0 * y + rho * b) * m - rho * b * t;
    worst_res = std::max(worst_res, std::abs(cubic) / ((2.0 + rho) * std::max(1.0, m * m * m)));
    // Brute force over a fine grid plus golden refinement.
    auto f = [&](double u) { return magnitude_lagrangian(u, t, y, b, rho); };
    const double hi = 1.1 * (rho * t + y / std::sqrt(b)) / (2.0 + rho) + 1.0;
    const double bf = oracle::grid_argmin(f, 0.0, hi, 10000);
    worst_sel = std::max(worst_sel, f(m) - f(bf));
    if (y > 0.0) {
      const double mb = update_v_magnitude_bpos(t, y, 1e-12, rho);
      worst_cont = std::max(worst_cont, std::abs(mb - m0));
    }
  }
  std::string d = fmt("worst scaled residual %.3g, selection excess %.3g, b->0 gap %.3g", worst_res, worst_sel,
                      worst_cont);
  return {worst_res < kCubicResidualTol && worst_sel <= 1e-9 && worst_cont < kContinuityTol, d};
}

// 10 -----------------------------------------------------------------------
double adjoint_gap(const ForwardModel& m, Rng& rng) {
  const CVec x = oracle::random_cvec(m.cols(), rng);
  const CVec y = oracle::random_cvec(m.rows(), rng);
  const Complex lhs = m.apply_linear(x).dot(y);
  const Complex rhs = x.dot(m.adjoint(y));
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

Outcome operator_fidelity() {
  Rng rng(110);
  double adj = 0.0, ent = 0.0;

  const CMat da = oracle::random_cvec(120, rng).reshaped(20, 6);
  ForwardModel dense = make_dense_model(da, RVec::Constant(20, 0.1));
  adj = std::max(adj, adjoint_gap(dense, rng));
  ent = std::max(ent, (densify(dense) - da).cwiseAbs().maxCoeff());

  const auto masks = make_masks(7, 3, 112, MaskSampling::Bernoulli);
  ForwardModel masked = make_masked_dft_model(masks, 0.1);
  adj = std::max(adj, adjoint_gap(masked, rng));
  ent = std::max(ent, (densify(masked) - oracle::masked_dft_matrix(masks)).cwiseAbs().maxCoeff());

  CanonicalDftSpec s;
  s.height = 2;
  s.width = 3;
  s.reference = RMat::Random(2, 3).cwiseAbs();
  s.pad_width = 3;
  s.fft_height = 4;
  s.fft_width = 18;
  ForwardModel canon = make_canonical_dft_model(s, 0.1);
  adj = std::max(adj, adjoint_gap(canon, rng));
  const auto [ca, off] = oracle::canonical_dft_matrix(s);
  ent = std::max(ent, (densify(canon) - ca).cwiseAbs().maxCoeff());
  ent = std::max(ent, (canon.offset() - off).cwiseAbs().maxCoeff());

  const std::filesystem::path f = std::filesystem::temp_directory_path() / "ppr_acceptance_matrix.csv";
  const CMat fa = oracle::random_cvec(40, rng).reshaped(8, 5);
  {
    std::ofstream out(f);
    io::write_matrix_csv(out, fa);
  }
  ForwardModel file = io::load_file_model(f, 0.1);
  adj = std::max(adj, adjoint_gap(file, rng));
  ent = std::max(ent, (densify(file) - fa).cwiseAbs().maxCoeff());

  return {adj < kAdjointTol && ent < kEntryTol,
          fmt("worst adjoint gap %.3g, worst entry mismatch %.3g (dense, masked, canonical, file)", adj, ent)};
}

// 11 -----------------------------------------------------------------------
Outcome initialization() {
  bool ok = true;
  std::string d;
  ForwardModel id = make_dense_model(CMat::Identity(4, 4), RVec::Constant(4, 0.5));
  RVec y(4);
  y << 1.0, 0.0, 6.0, 2.0;
  const SpectralInit si = spectral_init(id, y, 300, 1, Field::Complex);
  CVec e = CVec::Zero(4);
  e[2] = std::abs(si.x[2]) > 0.0 ? si.x[2] / std::abs(si.x[2]) : Complex(1.0);
  ok = ok && (si.x - e).norm() < 1e-12;
  d += fmt("spectral |x - e_argmax| = %.3g", (si.x - e).norm());

  RVec y2(4);
  y2 << 4.5, 0.5, 0.5, 0.5;
  CVec e1 = CVec::Zero(4);
  e1[0] = 1.0;
  const double a = scale_fit(id, y2, e1);
  ok = ok && a == 2.0 && scale_fit(id, RVec::Constant(4, 0.5), e1) == 0.0;
  d += fmt(", scale fit %.17g (expect 2)", a);

  CVec x0(3);
  x0 << -1.0, 0.5, -2.0;
  const CVec fin = finalize_init(x0, 2.0, Field::RealNonnegative);
  ok = ok && fin[0] == Complex(2.0) && fin[1] == Complex(1.0) && fin[2] == Complex(4.0);
  ok = ok && finalize_init(x0, 2.0, Field::Complex) == CVec(2.0 * x0);
  ok = ok && finalize_init(x0, 0.0, Field::Complex).norm() == 0.0;

  Rng rng(111);
  const CVec x = oracle::random_cvec(12, rng);
  double worst = 0.0;
  for (int j = 0; j < 8; ++j) {
    const Complex ph = std::polar(1.0, -3.0 + 0.8 * j);
    worst = std::max(worst, (phase_correct(ph * x, x) - x).norm() / x.norm());
  }
  ok = ok && worst < kPhaseTol;
  d += fmt(", phase residual %.3g over 8 angles", worst);
  return {ok, d};
}

// 12 -----------------------------------------------------------------------
Outcome truncation_study(bool& exact_limit) {
  Json c = {{"signal", {{"type", "blocks"}, {"n", 64}}}, {"model", {{"type", "gaussian"}}}, {"n_iters", 100},
            {"seed", 12}, {"algorithm", {{"name", "wf"}, {"step", "fisher"}}}};
  const ExperimentResult plain = execute(resolve_config(c));
  std::vector<double> finals;
  std::string d = "final cost by a_h:";
  for (double a : {1.0, 5.0, 10.0, 50.0, 100.0}) {
    c["algorithm"]["truncation"] = {{"enabled", true}, {"a_h", a}};
    const ExperimentResult r = execute(resolve_config(c));
    finals.push_back(r.trace.records.back().cost);
    d += fmt(" %g->%.4f", a, finals.back());
  }
  bool monotone = true;
  for (std::size_t i = 1; i < finals.size(); ++i) monotone = monotone && finals[i] <= finals[i - 1];

  // All-kept limit.
  Instance inst = build_instance(resolve_config(c));
  const CVec x0 = execute(resolve_config(c)).x0;
  WfOptions o;
  o.n_iters = 100;
  const RunState u = run_wf(inst.problem, x0, o);
  o.truncation.enabled = true;
  o.truncation.a_h = std::numeric_limits<double>::infinity();
  const RunState t = run_wf(inst.problem, x0, o);
  exact_limit = u.x == t.x && plain.run.x == u.x;
  d += exact_limit ? "; all-kept limit identical to untruncated" : "; all-kept limit DIFFERS from untruncated";
  d += monotone ? "; non-increasing in a_h" : "; not monotone in a_h";
  return {monotone && exact_limit, d};
}

}  // namespace

int main(int argc, char** argv) {
  std::filesystem::path out_dir = std::filesystem::temp_directory_path() / "ppr_acceptance";
  if (argc > 1) out_dir = argv[1];

  int hard_failures = 0;
  auto report = [&](int id, const char* name, Kind kind, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const char* tag = o.pass ? "PASS" : (kind == Kind::Hard ? "FAIL" : (kind == Kind::Soft ? "SOFT-FAIL" : "REPORT"));
    const char* suffix = kind == Kind::Soft ? " [soft]" : (kind == Kind::Report ? " [report]" : "");
    std::printf("[%s] %2d %s%s (%.1f s): %s\n", tag, id, name, suffix, seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass && kind == Kind::Hard) ++hard_failures;
  };

  report(1, "majorizer domination", Kind::Hard, majorizer_domination);
  report(2, "curvature ordering", Kind::Hard, curvature_ordering);
  report(3, "Fisher consistency", Kind::Hard, fisher_consistency);
  report(4, "gradient correctness", Kind::Hard, gradient_correctness);
  report(5, "MM monotonicity", Kind::Hard, mm_monotonicity);
  report(6, "WF-Fisher convergence", Kind::Hard, wf_fisher_convergence);
  report(7, "Poisson vs Gaussian quality", Kind::Hard, poisson_vs_gaussian);
  report(8, "convergence-speed ordering", Kind::Soft, [&] { return speed_ordering(out_dir); });
  report(9, "ADMM subproblem exactness", Kind::Hard, admm_exactness);
  report(10, "adjoint and operator fidelity", Kind::Hard, operator_fidelity);
  report(11, "initialization", Kind::Hard, initialization);
  // The a_h trend is report-only; the all-kept limit is a hard requirement.
  bool exact_limit = false;
  report(12, "truncation study", Kind::Report, [&] { return truncation_study(exact_limit); });
  if (!exact_limit) {
    std::printf("[FAIL] 12 truncation all-kept limit does not match untruncated WF\n");
    ++hard_failures;
  }

  std::printf("%d hard criteria failed\n", hard_failures);
  return hard_failures == 0 ? 0 : 1;
}

#include <doctest.h>

#include "oracles.hpp"
#include "ppr/mm.hpp"
#include "ppr/numerics.hpp"

using namespace ppr;

namespace {

Problem poisson_problem(Index n, Index m, std::uint64_t seed, double mean_count, Field field) {
  ForwardModel model = make_gaussian_model(m, n, seed, 0.1);
  Rng rng(seed + 1);
  CVec xt = oracle::random_cvec(n, rng);
  project_to_field(xt, field);
  calibrate_scale(model, xt, mean_count);
  Problem p;
  p.data = make_objective(NoiseModel::Poisson, model, simulate_poisson(model, xt, seed + 2).y);
  p.field = field;
  return p;
}

}  // namespace

TEST_CASE("maximum curvature") {
  CHECK(curvature_max(6.0, 2.0) == doctest::Approx(2.75));
  CHECK(curvature_max(0.0, 1.0) == 2.0);
  CHECK_THROWS_AS(curvature_max(1.0, 0.0), DomainError);
}

TEST_CASE("improved curvature special values") {
  CHECK(curvature_improved(0.0, 4.0, 0.5) == 2.0);
  CHECK(curvature_improved(3.0, 0.0, 0.5) == 2.0);
  for (double b : {0.05, 0.3, 1.0, 4.0}) {
    for (double y : {0.5, 3.0, 17.0}) {
      CHECK(std::abs(curvature_improved(std::sqrt(3.0 * b), y, b) - curvature_max(y, b)) < 1e-12);
    }
  }
  const double c = curvature_improved(10.0, 6.0, 2.0);
  CHECK(c > 2.0);
  CHECK(c <= 2.75);
  CHECK(std::abs(c - oracle::c_imp_closed_form(10.0, 6.0, 2.0)) < 1e-12);
  CHECK_THROWS_AS(curvature_improved(1.0, 1.0, 0.0), DomainError);
}

TEST_CASE("improved curvature matches the closed form and depends on |s| only") {
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    const double y = oracle::uniform(rng, 0.0, 20.0);
    const double b = oracle::uniform(rng, 0.05, 5.0);
    const double s = oracle::uniform(rng, -10.0, 10.0);
    const double c = curvature_improved(s, y, b);
    CHECK(std::abs(c - oracle::c_imp_closed_form(s, y, b)) < 1e-12 * std::max(1.0, c));
    CHECK(curvature_improved(std::polar(std::abs(s), 1.3), y, b) == doctest::Approx(c).epsilon(1e-14));
  }
  // Tiny |s| does not overflow.
  CHECK(curvature_improved(1e-200, 5.0, 0.1) == doctest::Approx(2.0));
  CHECK(std::isfinite(curvature_improved(1e150, 5.0, 0.1)));
}

TEST_CASE("improved-curvature parabola dominates phi (real and complex)") {
  Rng rng(2);
  for (int t = 0; t < 2000; ++t) {
    const double y = oracle::uniform(rng, 1e-6, 20.0);
    const double b = oracle::uniform(rng, 0.05, 5.0);
    const double s = oracle::uniform(rng, -10.0, 10.0);
    const double c = curvature_improved(s, y, b);
    const double ps = oracle::phi(s, y, b);
    const double ds = oracle::phi_dot(s, y, b);
    for (int j = 0; j <= 200; ++j) {
      const double r = -20.0 + 0.2 * j;
      CHECK(ps + ds * (r - s) + 0.5 * c * (r - s) * (r - s) >= oracle::phi(r, y, b) - 1e-9);
    }
    // Complex argument: Phi(v) = psi(s) + Re{conj(psi_dot(s)) (v - s)} + c/2 |v - s|^2.
    const Complex sc = std::polar(std::abs(s), oracle::uniform(rng, 0.0, 6.28));
    const Complex gs = psi_dot(sc, y, b);
    for (int j = 0; j < 20; ++j) {
      const Complex v(oracle::uniform(rng, -8.0, 8.0), oracle::uniform(rng, -8.0, 8.0));
      const double q = psi(sc, y, b) + (std::conj(gs) * (v - sc)).real() + 0.5 * c * std::norm(v - sc);
      CHECK(q >= psi(v, y, b) - 1e-9);
    }
  }
}

TEST_CASE("numerically optimal curvature") {
  CHECK(curvature_optimal_numeric(2.0, 0.0, 1.0) == 2.0);
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const double y = oracle::uniform(rng, 0.01, 20.0);
    const double b = oracle::uniform(rng, 0.05, 5.0);
    const double s = oracle::uniform(rng, -10.0, 10.0);
    const double opt = curvature_optimal_numeric(s, y, b);
    CHECK(opt <= curvature_improved(s, y, b) + 1e-6);
    const double fine = curvature_optimal_numeric(s, y, b, 2 * kOptimalCurvaturePoints - 1);
    INFO("s=" << s << " y=" << y << " b=" << b << " opt=" << opt << " fine=" << fine);
    CHECK(std::abs(fine - opt) < 1e-4);
  }
}

TEST_CASE("numerically optimal curvature is at least 2 and dominates on a wide grid") {
  Rng rng(31);
  for (int t = 0; t < 200; ++t) {
    const double y = oracle::uniform(rng, 0.01, 20.0);
    const double b = oracle::uniform(rng, 0.02, 5.0);
    const double s = oracle::uniform(rng, -10.0, 10.0);
    const double c = curvature_optimal_numeric(s, y, b);
    CHECK(c >= 2.0);
    INFO("s=" << s << " y=" << y << " b=" << b << " c=" << c << " c_imp=" << curvature_improved(s, y, b));
    const double ps = oracle::phi(s, y, b);
    const double ds = oracle::phi_dot(s, y, b);
    for (int j = 0; j <= 2000; ++j) {
      const double r = -100.0 + 0.1 * j;
      CHECK(ps + ds * (r - s) + 0.5 * c * (r - s) * (r - s) >= oracle::phi(r, y, b) - 1e-8);
    }
  }
}

TEST_CASE("curvature weights follow the requested kind") {
  CVec s(2);
  s << 0.0, 2.0;
  RVec y(2);
  y << 1.0, 3.0;
  const RVec b = RVec::Constant(2, 0.5);
  const RVec wm = curvature_weights(CurvatureKind::Max, s, y, b);
  const RVec wi = curvature_weights(CurvatureKind::Improved, s, y, b);
  CHECK(wm[1] == doctest::Approx(2.0 + 3.0 / 2.0));
  CHECK(wi[0] == 2.0);
  CHECK(wi[1] <= wm[1]);
}

TEST_CASE("majorizer touches at the anchor, is tangent and dominates") {
  const Problem p = poisson_problem(6, 40, 5, 0.5, Field::Complex);
  Rng rng(4);
  const CVec xk = oracle::random_cvec(6, rng) * 0.5;
  for (CurvatureKind kind : {CurvatureKind::Max, CurvatureKind::Improved}) {
    const MajorizerContext ctx = build_majorizer(*p.data, xk, kind, Field::Complex);
    CHECK(majorizer_value(ctx, xk) == doctest::Approx(p.data->cost(xk)).epsilon(1e-14));
    CHECK((ctx.weights.array() > 0.0).all());
    const CVec fd = finite_diff_grad([&](const CVec& u) { return majorizer_value(ctx, u); }, xk, 1e-6, true);
    CHECK((fd - p.data->gradient(xk, Field::Complex)).norm() < 1e-6 * fd.norm());
    for (int t = 0; t < 200; ++t) {
      const CVec x = xk + oracle::random_cvec(6, rng) * oracle::uniform(rng, 0.01, 2.0);
      CHECK(majorizer_value(ctx, x) >= p.data->cost(x) - 1e-9);
    }
  }
}

TEST_CASE("unregularized MM update on the identity model is elementwise") {
  ForwardModel m = make_dense_model(CMat::Identity(3, 3), RVec::Constant(3, 0.2));
  RVec y(3);
  y << 0.0, 1.0, 4.0;
  PoissonObjective obj(m, y);
  CVec xk(3);
  xk << 0.5, Complex(0.3, -0.4), 1.1;
  const MajorizerContext ctx = build_majorizer(obj, xk, CurvatureKind::Improved, Field::Complex);
  const InnerResult r = mm_update_unregularized(ctx, InnerConfig{});
  for (Index i = 0; i < 3; ++i) {
    const Complex expected = xk[i] - psi_dot(xk[i], y[i], 0.2) / curvature_improved(xk[i], y[i], 0.2);
    CHECK(std::abs(r.x[i] - expected) < 1e-12);
  }
}

TEST_CASE("direct and CG majorizer solves agree") {
  const Problem p = poisson_problem(16, 128, 9, 0.25, Field::Complex);
  Rng rng(6);
  const CVec xk = oracle::random_cvec(16, rng) * 0.3;
  const MajorizerContext ctx = build_majorizer(*p.data, xk, CurvatureKind::Improved, Field::Complex);
  InnerConfig direct;
  InnerConfig cg;
  cg.direct_threshold = 0;
  const CVec a = mm_update_unregularized(ctx, direct).x;
  const CVec b = mm_update_unregularized(ctx, cg).x;
  CHECK((a - b).norm() < 1e-8 * std::max(1.0, a.norm()));
  CHECK(p.data->cost(a) <= p.data->cost(xk) + 1e-10);
}

TEST_CASE("rank-deficient model makes the direct solve fail") {
  CMat a = CMat::Zero(4, 3);
  a(0, 0) = 1.0;
  a(1, 1) = 1.0;
  a(2, 0) = 1.0;
  ForwardModel m = make_dense_model(a, RVec::Constant(4, 0.1));
  PoissonObjective obj(m, RVec::Ones(4));
  const MajorizerContext ctx = build_majorizer(obj, CVec::Ones(3), CurvatureKind::Max, Field::Complex);
  CHECK_THROWS_AS(mm_update_unregularized(ctx, InnerConfig{}), DegenerateError);
}

TEST_CASE("Haar transform is orthonormal") {
  CHECK_THROWS(HaarTransform(6));
  HaarTransform h(8);
  Rng rng(7);
  const CVec x = oracle::random_cvec(8, rng);
  CHECK(std::abs(h.apply(x).norm() - x.norm()) < 1e-12);
  CHECK((h.adjoint(h.apply(x)) - x).norm() < 1e-12);
  // Constant signal concentrates on the coarsest coefficient.
  const CVec c = h.apply(CVec::Ones(8));
  CHECK(std::abs(c[0] - std::sqrt(8.0)) < 1e-12);
  CHECK(c.tail(7).norm() < 1e-12);
}

TEST_CASE("prox-l1 inner solve on a separable quadratic is a soft threshold") {
  Rng rng(8);
  QuadraticModel q;
  q.center = oracle::random_cvec(5, rng);
  q.grad = oracle::random_cvec(5, rng);
  q.value = 1.0;
  q.hessian = PsdOperator{5, [](const CVec& u) -> CVec { return 2.0 * u; }};
  ProxL1 reg;
  reg.beta = 0.7;
  reg.transform = std::make_shared<IdentityTransform>(5);
  InnerConfig cfg;
  cfg.prox_iters = 200;
  cfg.prox_tol = 1e-14;
  const InnerResult r = minimize_quadratic_l1(q, reg, q.center, cfg);
  for (Index i = 0; i < 5; ++i) {
    const Complex expected = soft_threshold(q.center[i] - q.grad[i] / 2.0, 0.7 / 2.0);
    CHECK(std::abs(r.x[i] - expected) < 1e-10);
  }
}

TEST_CASE("prox-l1 MM: beta = 0 matches the exact solve, inner objective monotone") {
  const Problem p = poisson_problem(8, 64, 11, 0.5, Field::Complex);
  Rng rng(9);
  const CVec xk = oracle::random_cvec(8, rng) * 0.3;
  const MajorizerContext ctx = build_majorizer(*p.data, xk, CurvatureKind::Improved, Field::Complex);
  ProxL1 reg;
  reg.beta = 0.0;
  reg.transform = std::make_shared<HaarTransform>(8);
  InnerConfig cfg;
  cfg.prox_iters = 2000;
  cfg.prox_tol = 1e-13;
  const CVec exact = mm_update_unregularized(ctx, cfg).x;
  const InnerResult r = mm_update_prox_l1(ctx, reg, cfg);
  CHECK((r.x - exact).norm() < 1e-6 * std::max(1.0, exact.norm()));

  reg.beta = 0.3;
  cfg.prox_iters = 100;
  const InnerResult rr = mm_update_prox_l1(ctx, reg, cfg);
  for (std::size_t k = 1; k < rr.objective.size(); ++k) CHECK(rr.objective[k] <= rr.objective[k - 1] + 1e-12);
}

TEST_CASE("Huber MM inner solve: beta = 0 is linear CG and matches a descent oracle") {
  Problem p = poisson_problem(8, 64, 13, 0.5, Field::Real);
  Rng rng(10);
  CVec xk = oracle::random_real(8, rng) * 0.3;
  const MajorizerContext ctx = build_majorizer(*p.data, xk, CurvatureKind::Improved, Field::Real);
  InnerConfig cfg;
  cfg.ncg_iters = 200;
  cfg.ncg_tol = 1e-12;
  const HuberTV zero(0.0, 0.1, FiniteDifference::chain(8));
  const CVec exact = mm_update_unregularized(ctx, cfg).x;
  CHECK((mm_update_huber(ctx, zero, cfg).x - exact).norm() < 1e-8 * std::max(1.0, exact.norm()));

  const HuberTV reg(0.5, 0.1, FiniteDifference::chain(8));
  const CVec x = mm_update_huber(ctx, reg, cfg).x;
  // Oracle: plain gradient descent with a safe fixed step for many iterations.
  const CMat h = densify(ctx.quad.hessian);
  const double lip = h.real().eigenvalues().real().maxCoeff() + 0.5 * 4.0;
  CVec z = xk;
  for (int it = 0; it < 200000; ++it) {
    CVec g = ctx.quad.gradient(z) + reg.gradient(z);
    restrict_gradient(g, Field::Real);
    z -= g / lip;
  }
  CHECK((x - z).norm() < 1e-5);
}

TEST_CASE("run_mm: n = 0, monotone cost, improved at least as fast as max") {
  const Problem p = poisson_problem(16, 128, 21, 0.25, Field::Complex);
  Rng rng(11);
  const CVec x0 = oracle::random_cvec(16, rng) * 0.2;
  MmOptions o;
  o.n_outer = 0;
  CHECK(run_mm(p, x0, o).x == x0);

  o.n_outer = 40;
  o.curvature = CurvatureKind::Max;
  const RunState smax = run_mm(p, x0, o);
  o.curvature = CurvatureKind::Improved;
  const RunState simp = run_mm(p, x0, o);
  REQUIRE(smax.trace.records.size() == 40);
  REQUIRE(simp.trace.records.size() == 40);
  double prev = p.cost(x0);
  for (int k = 0; k < 40; ++k) {
    CHECK(simp.trace.records[k].cost <= prev + 1e-10 * std::abs(prev));
    prev = simp.trace.records[k].cost;
    CHECK(simp.trace.records[k].cost <= smax.trace.records[k].cost + 1e-10 * std::abs(prev));
  }
}

TEST_CASE("run_mm with Huber-TV never increases the regularized cost") {
  Problem p = poisson_problem(16, 128, 23, 0.5, Field::RealNonnegative);
  p.reg = HuberTV(4.0, 0.1, FiniteDifference::chain(16));
  Rng rng(12);
  CVec x0 = oracle::random_real(16, rng).cwiseAbs() * 0.3;
  MmOptions o;
  o.n_outer = 30;
  const RunState s = run_mm(p, x0, o);
  double prev = p.cost(x0);
  for (const auto& r : s.trace.records) {
    CHECK(r.cost <= prev + 1e-10 * std::abs(prev));
    prev = r.cost;
  }
  for (Index i = 0; i < 16; ++i) CHECK(s.x[i].real() >= 0.0);
}

TEST_CASE("MM rejects the Gaussian objective") {
  ForwardModel m = make_gaussian_model(8, 2, 1, 0.1);
  GaussianObjective obj(m, RVec::Ones(8));
  CHECK_THROWS(build_majorizer(obj, CVec::Ones(2), CurvatureKind::Max, Field::Complex));
}

#include "vhjb/hjb/builtin.hpp"
#include "vhjb/oracle/analytic.hpp"
#include "vhjb/oracle/residual_check.hpp"
#include "vhjb/oracle/viscosity_fd.hpp"
#include "vhjb/util/rng.hpp"

#include "../support/test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace vhjb;

namespace {

double ex4_exact(double t, double x) { return 2 * x * x / (1 + std::exp(2 * t - 20)); }

// max |grid - V*| over interior columns, relative to max |V*| on the grid.
double fd_rel_error(const GridSolution& g) {
  double err = 0.0, scale = 0.0;
  for (Eigen::Index k = 0; k < g.t.size(); ++k) {
    for (Eigen::Index i = 0; i < g.x.size(); ++i) {
      const double v = ex4_exact(g.t(k), g.x(i));
      scale = std::max(scale, std::abs(v));
      if (i > 0 && i + 1 < g.x.size()) err = std::max(err, std::abs(g.values(k, i) - v));
    }
  }
  return err / scale;
}

}  // namespace

TEST(Analytic, Values) {
  EXPECT_DOUBLE_EQ(analytic("ex1").value(Eigen::Vector2d(1, 1)), 1.5);
  EXPECT_DOUBLE_EQ(analytic("ex4").value(Eigen::Vector2d(10, 3)), 9.0);
  EXPECT_DOUBLE_EQ(analytic("ex3").value(Eigen::Vector2d(0, 1)), 1.0);
  EXPECT_DOUBLE_EQ(analytic("ex2").value(Eigen::Vector2d(0, 0)), 0.0);
  EXPECT_NEAR(analytic("ex3").value(Eigen::Vector2d(1, 0)), std::numbers::pi / 2 + std::atan(5.0), 1e-15);
  EXPECT_THROW(analytic("ex9"), std::invalid_argument);
}

TEST(Analytic, ClosedFormDerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(31);
  for (const auto& id : builtin_problem_ids()) {
    const AnalyticSolution s = analytic(id);
    for (int k = 0; k < 10; ++k) {
      Eigen::VectorXd x = tu::random_point(rng, s.input_dim);
      if (id == "ex4") x(0) = uniform(rng, 0, 10);
      const auto jet = s.jet(x);
      const Eigen::VectorXd fd = tu::fd_gradient([&](const Eigen::VectorXd& y) { return s.value(y); }, x, 1e-6);
      EXPECT_LT(tu::rel_err(jet.grad, fd), 1e-7) << id;
      for (int i = 0; i < s.input_dim; ++i) {
        const Eigen::VectorXd hfd = tu::fd_gradient(
            [&](const Eigen::VectorXd& y) { return s.gradient(y)(i); }, x, 1e-6);
        EXPECT_LT(tu::rel_err(jet.hess.row(i).transpose(), hfd), 1e-6) << id;
      }
    }
  }
}

TEST(Riccati, Examples) {
  EXPECT_DOUBLE_EQ(riccati_convex(0, 1), 1.0);
  EXPECT_NEAR(riccati_convex(1, 1), 1 + std::sqrt(2.0), 1e-15);
  EXPECT_THROW(riccati_convex(1, 0), std::invalid_argument);
}

TEST(Riccati, RandomRootsSatisfyTheScalarEquation) {
  std::mt19937_64 rng(32);
  for (int k = 0; k < 100; ++k) {
    const double a = uniform(rng, -3, 3);
    double b = uniform(rng, -3, 3);
    if (std::abs(b) < 0.1) b += 0.5;
    const double kc = riccati_convex(a, b);
    const double kr = riccati_concave(a, b);
    EXPECT_GT(kc, 0.0);
    EXPECT_LT(kr, 0.0);
    EXPECT_LT(std::abs(b * b * kc * kc - 2 * a * kc - 1), 1e-12);
    EXPECT_LT(std::abs(b * b * kr * kr - 2 * a * kr - 1), 1e-12);
  }
}

TEST(Riccati, SmallInputMapKeepsFullPrecision) {
  // a + hypot(a, b) cancels for a < 0 and a - hypot(a, b) for a > 0.
  for (const double b : {1e-2, -1e-3, 1e-5}) {
    const double kc = riccati_convex(-3.5, b);
    const double kr = riccati_concave(3.5, b);
    EXPECT_LT(std::abs(b * b * kc * kc + 7.0 * kc - 1), 1e-12) << b;
    EXPECT_LT(std::abs(b * b * kr * kr - 7.0 * kr - 1), 1e-12) << b;
    EXPECT_GT(kc, 0.0);
    EXPECT_LT(kr, 0.0);
  }
}

TEST(ResidualCheck, AnalyticSolutionsVanish) {
  const auto ex1 = builtin_problem("ex1");
  EXPECT_LT(residual_check(ex1, jet_source(analytic("ex1")), probe_grid(ex1, {101, 101})).max_abs, 1e-10);
  const auto ex4 = builtin_problem("ex4");
  EXPECT_LT(residual_check(ex4, jet_source(analytic("ex4")), probe_grid(ex4, {21, 101})).max_abs, 1e-10);
  for (const char* id : {"motivation", "ex2", "ex3"}) {
    const auto p = builtin_problem(id);
    const std::vector<int> counts(p.input_dim(), p.input_dim() == 1 ? 10000 : 100);
    EXPECT_LT(residual_check(p, jet_source(analytic(id)), probe_grid(p, counts)).max_abs, 1e-10) << id;
  }
}

TEST(ResidualCheck, MotivationWithOtherCoefficients) {
  const BuiltinOptions opt{2.0, -0.5};
  const auto p = builtin_problem("motivation", opt);
  EXPECT_LT(residual_check(p, jet_source(analytic("motivation", opt)), probe_grid(p, {1001})).max_abs, 1e-10);
}

TEST(ResidualCheck, ZeroFunctionPeaksAtCorners) {
  const auto ex1 = builtin_problem("ex1");
  const JetSource zero = [](const Eigen::MatrixXd& inputs, int order) {
    return JetBatch<double>(1, inputs.cols(), static_cast<int>(inputs.rows()), order);
  };
  const ResidualReport r = residual_check(ex1, zero, probe_grid(ex1, {101, 101}));
  EXPECT_DOUBLE_EQ(r.max_abs, 2.0);
  EXPECT_DOUBLE_EQ(std::abs(r.argmax(0)), 1.0);
  EXPECT_DOUBLE_EQ(std::abs(r.argmax(1)), 1.0);
}

TEST(ProbeGrid, LayoutAndEndpoints) {
  const auto ex4 = builtin_problem("ex4");
  const Eigen::MatrixXd g = probe_grid(ex4, {3, 5});
  ASSERT_EQ(g.rows(), 2);
  ASSERT_EQ(g.cols(), 15);
  EXPECT_EQ(g(0, 0), 0.0);
  EXPECT_EQ(g(1, 0), -1.0);
  EXPECT_EQ(g(1, 1), -0.5);
  EXPECT_EQ(g(0, 14), 10.0);
  EXPECT_EQ(g(1, 14), 1.0);
}

TEST(ViscosityFd, TerminalSliceIsPsi) {
  ViscosityFdOptions opt;
  opt.eps = 1e-2;
  opt.t_start = 9.0;
  const GridSolution g = vanishing_viscosity_fd(builtin_problem("ex4"), opt);
  ASSERT_EQ(g.x.size(), 201);
  EXPECT_EQ(g.t(g.t.size() - 1), 10.0);
  for (Eigen::Index i = 0; i < g.x.size(); ++i) EXPECT_EQ(g.values(g.t.size() - 1, i), g.x(i) * g.x(i));
  EXPECT_TRUE(g.values.allFinite());
}

TEST(ViscosityFd, ErrorShrinksWithViscosity) {
  const auto ex4 = builtin_problem("ex4");
  double prev = 1e300;
  for (double eps : {1e-2, 1e-3}) {
    ViscosityFdOptions opt;
    opt.eps = eps;
    opt.t_start = 8.0;
    opt.boundary = [](double t, double x) { return ex4_exact(t, x); };
    const double err = fd_rel_error(vanishing_viscosity_fd(ex4, opt));
    EXPECT_LT(err, prev) << eps;
    prev = err;
  }
  EXPECT_LE(prev, 0.02);
}

TEST(ViscosityFd, StabilityViolationReportsRequiredSteps) {
  ViscosityFdOptions opt;
  opt.eps = 1e-3;
  opt.t_start = 8.0;
  opt.nt = 10;
  try {
    vanishing_viscosity_fd(builtin_problem("ex4"), opt);
    FAIL() << "expected StabilityViolation";
  } catch (const StabilityViolation& e) {
    EXPECT_GT(e.required_steps(), 10);
    opt.nt = e.required_steps();
    EXPECT_NO_THROW(vanishing_viscosity_fd(builtin_problem("ex4"), opt));
  }
}

TEST(ViscosityFd, RejectsUnsupportedProblems) {
  ViscosityFdOptions opt;
  EXPECT_THROW(vanishing_viscosity_fd(builtin_problem("ex1"), opt), std::invalid_argument);
  opt.eps = 0.0;
  EXPECT_THROW(vanishing_viscosity_fd(builtin_problem("ex4"), opt), std::invalid_argument);
}

TEST(ViscosityFd, CsvExport) {
  ViscosityFdOptions opt;
  opt.eps = 1e-2;
  opt.nx = 5;
  opt.t_start = 9.9;
  const GridSolution g = vanishing_viscosity_fd(builtin_problem("ex4"), opt);
  std::ostringstream out;
  write_grid_csv(out, g);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,x,V_eps");
  long rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, g.t.size() * 5);
}

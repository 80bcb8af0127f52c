#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "counterpoint/error.hpp"
#include "counterpoint/stats.hpp"

using namespace counterpoint;

namespace {

const CounterNamespace kNs({"a", "b"});

ErrorKind load_error(const std::string& csv, const CounterNamespace& ns = kNs) {
  std::istringstream in(csv);
  try {
    (void)load_observations(in, ns, "r");
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

ObservationSet from_rows(const Matrix& rows, const CounterNamespace& ns) {
  ObservationSet o;
  o.run_id = "r";
  o.ns = ns;
  o.samples = rows;
  return o;
}

double max_abs(const Matrix& a, const Matrix& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

}  // namespace

TEST_SUITE("stats") {
  TEST_CASE("csv loading") {
    std::istringstream in("t,b,a,extra\n0,1,2,9\n1,3,4,9\n");
    auto o = load_observations(in, kNs, "run");
    CHECK(o.run_id == "run");
    CHECK(o.sample_count() == 2);
    CHECK(o.samples[0] == std::vector<double>{2, 1});
    CHECK(o.samples[1] == std::vector<double>{4, 3});
    CHECK(o.warnings.size() == 1);
  }

  TEST_CASE("csv errors") {
    CHECK(load_error("a\n1\n2\n") == ErrorKind::MissingCounter);
    CHECK(load_error("a,b\n1,x\n2,3\n") == ErrorKind::NonNumericCell);
    CHECK(load_error("a,b\n1,-1\n2,3\n") == ErrorKind::NonNumericCell);
    CHECK(load_error("a,b\n1\n2,3\n") == ErrorKind::NonNumericCell);
    CHECK(load_error("a,b\n1,2\n") == ErrorKind::TooFewSamples);
    CHECK(load_error("a,b\n") == ErrorKind::TooFewSamples);
  }

  TEST_CASE("projection onto the present counters") {
    std::istringstream in("b\n1\n2\n");
    auto o = load_observations(in, kNs, "r", LoadOptions{true});
    CHECK(o.ns.names() == std::vector<std::string>{"b"});
    CHECK(o.projected_out == std::vector<std::string>{"a"});
  }

  TEST_CASE("mean and covariance") {
    auto m = mean_and_covariance(Matrix{{0, 0}, {2, 2}});
    CHECK(m.mean == std::vector<double>{1, 1});
    CHECK(m.covariance == Matrix{{2, 2}, {2, 2}});
    CHECK(m.mean_covariance == Matrix{{1, 1}, {1, 1}});
    auto n = mean_and_covariance(Matrix{{0, 2}, {2, 0}});
    CHECK(n.covariance == Matrix{{2, -2}, {-2, 2}});
    auto c = mean_and_covariance(Matrix{{0.1, 3}, {0.1, 3}, {0.1, 3}});
    CHECK(c.mean == std::vector<double>{0.1, 3});
    CHECK(c.covariance == Matrix{{0, 0}, {0, 0}});
  }

  TEST_CASE("chi-square quantiles") {
    // dof 2 is exponential: q = -2 ln(1 - p)
    for (double p : {0.5, 0.9, 0.95, 0.99, 0.999}) CHECK(chi_square_quantile(2, p) == doctest::Approx(-2 * std::log(1 - p)).epsilon(1e-9));
    CHECK(chi_square_quantile(2, 0.99) == doctest::Approx(9.21034).epsilon(1e-5));
    // dof 1: P(X <= q) = erf(sqrt(q/2))
    for (double p : {0.5, 0.95, 0.99}) {
      double q = chi_square_quantile(1, p);
      CHECK(std::erf(std::sqrt(q / 2)) == doctest::Approx(p).epsilon(1e-9));
    }
    double prev = 0;
    for (unsigned k = 1; k <= 30; ++k) {
      double q = chi_square_quantile(k, 0.99);
      CHECK(q > prev);
      prev = q;
    }
    CHECK_THROWS(chi_square_quantile(0, 0.5));
    CHECK_THROWS(chi_square_quantile(2, 1.0));
  }

  TEST_CASE("eigendecomposition") {
    auto e = eigendecompose(Matrix{{2, 1}, {1, 2}});
    CHECK(e.values[0] == doctest::Approx(3));
    CHECK(e.values[1] == doctest::Approx(1));
    CHECK(std::abs(e.vectors[0][0]) == doctest::Approx(std::sqrt(0.5)));
    auto d = eigendecompose(Matrix{{1, 0}, {0, 4}});
    CHECK(d.values == std::vector<double>{4, 1});
    CHECK_THROWS(eigendecompose(Matrix{{1, 2}, {0, 1}}));

    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    for (int t = 0; t < 50; ++t) {
      const std::size_t n = 1 + rng() % 6;
      Matrix b(n, std::vector<double>(n));
      for (auto& r : b)
        for (auto& x : r) x = g(rng);
      Matrix s(n, std::vector<double>(n, 0.0));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t k = 0; k < n; ++k) s[i][j] += b[i][k] * b[j][k];
      auto es = eigendecompose(s);
      Matrix rebuilt(n, std::vector<double>(n, 0.0));
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) rebuilt[i][j] += es.values[k] * es.vectors[k][i] * es.vectors[k][j];
      CHECK(max_abs(rebuilt, s) < 1e-9 * (1 + es.values[0]));
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t c = 0; c < n; ++c) {
          double dotp = 0;
          for (std::size_t i = 0; i < n; ++i) dotp += es.vectors[a][i] * es.vectors[c][i];
          CHECK(dotp == doctest::Approx(a == c ? 1.0 : 0.0).epsilon(1e-9).scale(1));
        }
      for (std::size_t k = 1; k < n; ++k) CHECK(es.values[k - 1] >= es.values[k]);
    }
  }

  TEST_CASE("region half-lengths") {
    // Σ_Ȳ = I for this sample: samples ±sqrt(M) around the mean on each axis.
    Matrix rows{{2, 0}, {0, 0}, {1, 1}, {1, -1}};
    for (auto& r : rows) r[1] += 5;
    auto obs = from_rows(rows, kNs);
    auto m = mean_and_covariance(obs);
    auto region = build_confidence_region(obs);
    CHECK(region.dof == 2);
    CHECK(region.chi_square == doctest::Approx(9.21034).epsilon(1e-5));
    for (std::size_t i = 0; i < 2; ++i)
      CHECK(region.half_lengths[i] == doctest::Approx(std::sqrt(9.21034 * region.eigenvalues[i])).epsilon(1e-5));
    CHECK(m.mean_covariance[0][1] == doctest::Approx(0));
    CHECK(region.contains(region.center));
  }

  TEST_CASE("correlated box is smaller than the independent box") {
    Matrix rows;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    for (int i = 0; i < 200; ++i) {
      double z = g(rng), w = 0.1 * g(rng);
      rows.push_back({100 + z, 100 + z + w});
    }
    auto obs = from_rows(rows, kNs);
    auto full = build_confidence_region(obs);
    auto indep = build_confidence_region(obs, RegionOptions{0.01, CovarianceMode::Independent});
    CHECK(full.volume() < indep.volume());
    CHECK(indep.axes == Matrix{{1, 0}, {0, 1}});
  }

  TEST_CASE("variance floor and effective rank") {
    auto obs = from_rows(Matrix{{1, 2}, {1, 2}, {1, 2}}, kNs);
    auto r = build_confidence_region(obs, RegionOptions{0.01, CovarianceMode::Full, 0.25});
    for (double h : r.half_lengths) CHECK(h == doctest::Approx(std::sqrt(r.chi_square * 0.25)));
    auto line = from_rows(Matrix{{0, 0}, {1, 1}, {2, 2}}, kNs);
    auto e = build_confidence_region(line, RegionOptions{0.01, CovarianceMode::Full, 0.0, true});
    CHECK(e.dof == 1);
  }

  TEST_CASE("shrinkage with more samples") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g;
    double prev = INFINITY;
    for (std::size_t m : {10u, 100u, 1000u, 10000u}) {
      Matrix rows;
      for (std::size_t i = 0; i < m; ++i) rows.push_back({50 + g(rng), 50 + g(rng)});
      double v = build_confidence_region(from_rows(rows, kNs)).volume();
      CHECK(v < prev);
      prev = v;
    }
  }

  TEST_CASE("rotation equivariance of the full-covariance box") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    Matrix rows, rotated;
    const double c = std::cos(0.7), s = std::sin(0.7);
    for (int i = 0; i < 100; ++i) {
      double x = 3 * g(rng), y = g(rng);
      rows.push_back({x, y});
      rotated.push_back({c * x - s * y, s * x + c * y});
    }
    auto a = build_confidence_region(from_rows(rows, kNs));
    auto b = build_confidence_region(from_rows(rotated, kNs));
    for (std::size_t i = 0; i < 2; ++i) CHECK(a.half_lengths[i] == doctest::Approx(b.half_lengths[i]).epsilon(1e-9));
    CHECK(a.volume() == doctest::Approx(b.volume()).epsilon(1e-9));
  }

  TEST_CASE("coverage of the 99% box") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> g;
    const std::vector<double> truth{10, 20, 30};
    const CounterNamespace ns({"x", "y", "z"});
    int covered = 0;
    const int trials = 500;
    for (int t = 0; t < trials; ++t) {
      Matrix rows;
      for (int i = 0; i < 100; ++i) {
        double z0 = g(rng), z1 = g(rng), z2 = g(rng);
        rows.push_back({truth[0] + z0, truth[1] + 0.5 * z0 + z1, truth[2] + 2 * z2});
      }
      covered += build_confidence_region(from_rows(rows, ns)).contains(truth);
    }
    CHECK(covered >= trials * 0.97);
  }
}

#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "vcm/dictionary.hpp"
#include "vcm/errors.hpp"

using namespace vcm;

namespace {
const double kSqrt2 = std::sqrt(2.0);

DensityMeasure sine_weighted() {
  // g(t) = 1 + 0.5 sin(2 pi t) integrates to 1 and stays in [0.5, 1.5].
  return DensityMeasure::weighted(
      [](double t) { return 1.0 + 0.5 * std::sin(2.0 * M_PI * t); }, 0.5, 1.5);
}
}  // namespace

TEST_CASE("quadrature: gauss-legendre is exact on polynomials") {
  const auto quad = Quadrature::gauss_legendre(8);
  // degree 15 is the exactness limit of an 8-point rule
  const double val = quad.integrate([](double t) { return std::pow(t, 15.0); });
  CHECK(val == doctest::Approx(1.0 / 16.0).epsilon(1e-13));
  CHECK(quad.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(quad.weights.minCoeff() > 0.0);
}

TEST_CASE("quadrature: composite rule integrates oscillatory functions") {
  const auto quad = Quadrature::composite(1024);
  const double val = quad.integrate([](double t) { return std::cos(2.0 * M_PI * 17.0 * t); });
  CHECK(std::abs(val) < 1e-13);
  CHECK(quad.weights.sum() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("eval_basis: fourier at t=0 is (1, sqrt2, 0, ...)") {
  const auto dict = Dictionary::fourier(3);
  const Eigen::VectorXd v = dict.eval(0.0);
  CHECK(v[0] == doctest::Approx(1.0));
  CHECK(v[1] == doctest::Approx(kSqrt2));
  CHECK(v[2] == doctest::Approx(0.0));
}

TEST_CASE("eval_basis: first element is the constant function") {
  for (auto dict : {Dictionary::fourier(1), Dictionary::haar_wavelet(1), Dictionary::polynomial(1)})
    CHECK(dict.eval(0.5)[0] == doctest::Approx(1.0));
}

TEST_CASE("eval_basis: haar values match a direct step-function table") {
  const auto dict = Dictionary::haar_wavelet(4);
  // Independent piecewise-constant evaluation at t = 0.1:
  // level -1: 1; level 0: psi(0.1)=1; level 1: sqrt2*psi(0.2)=sqrt2 and
  // sqrt2*psi(-0.8)=0.
  const Eigen::VectorXd v = dict.eval(0.1);
  CHECK(v[0] == doctest::Approx(1.0));
  CHECK(v[1] == doctest::Approx(1.0));
  CHECK(v[2] == doctest::Approx(kSqrt2));
  CHECK(v[3] == doctest::Approx(0.0));

  const Eigen::VectorXd w = dict.eval(0.8);
  CHECK(w[1] == doctest::Approx(-1.0));
  CHECK(w[2] == doctest::Approx(0.0));
  CHECK(w[3] == doctest::Approx(-kSqrt2));  // psi(2*0.8-1)=psi(0.6)=-1
}

TEST_CASE("eval_basis: domain and measure errors") {
  const auto dict = Dictionary::fourier(3);
  CHECK_THROWS_AS(dict.eval(-0.1), DomainError);
  CHECK_THROWS_AS(dict.eval(1.5), DomainError);
}

TEST_CASE("gram_matrix: identity for the shipped kinds") {
  for (int l : {1, 2, 3, 5, 8, 16, 33, 64}) {
    CAPTURE(l);
    CHECK(Dictionary::fourier(l).gram_defect() < 1e-10);
    CHECK(Dictionary::haar_wavelet(l).gram_defect() < 1e-10);
    CHECK(Dictionary::polynomial(l).gram_defect() < 1e-10);
  }
}

TEST_CASE("gram_matrix: weighted fourier stays orthonormal") {
  const auto dict = Dictionary::fourier(7, sine_weighted());
  CHECK(dict.gram_defect() < 1e-10);
}

TEST_CASE("gram_matrix: requires enough quadrature nodes") {
  const auto coarse = DensityMeasure::lebesgue(64);
  CHECK_THROWS_AS(Dictionary::fourier(40, coarse).gram(), ValidationError);
}

TEST_CASE("sup_norm_constant: fourier bounded by sqrt2, polynomial attains sqrt(l)") {
  for (int l : {1, 2, 3, 8, 17}) {
    const double v = Dictionary::fourier(l).sup_norm_constant();
    CHECK(v <= kSqrt2 + 1e-12);
  }
  CHECK(Dictionary::polynomial(1).sup_norm_constant() == doctest::Approx(1.0));
  // Legendre values peak at the endpoints; the grid includes t=0 and t=1.
  const auto poly = Dictionary::polynomial(5);
  CHECK(poly.sup_norm_constant() == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("sup_norm_constant: weighted fourier bounded by sqrt2/sqrt(g1)") {
  const auto m = DensityMeasure::weighted(
      [](double t) { return 1.0 + 0.5 * std::cos(2.0 * M_PI * t); }, 0.5, 1.5);
  const auto dict = Dictionary::fourier(6, m);
  CHECK(dict.c_phi() == doctest::Approx(kSqrt2 / std::sqrt(0.5)));
  CHECK(dict.sup_norm_constant() <= 2.0 + 1e-12);
}

TEST_CASE("sup_norm_constant: grid precondition") {
  CHECK_THROWS_AS(Dictionary::fourier(3).sup_norm_constant(8), DomainError);
}

TEST_CASE("expand_function: constants land on the first coefficient") {
  for (auto dict : {Dictionary::fourier(6), Dictionary::haar_wavelet(8), Dictionary::polynomial(5)}) {
    const auto e = dict.expand([](double) { return 2.5; });
    CHECK(e.coeffs[0] == doctest::Approx(2.5).epsilon(1e-12));
    for (int j = 1; j < dict.l(); ++j) CHECK(std::abs(e.coeffs[j]) < 1e-12);
    CHECK(e.residual_sup < 1e-10);
    CHECK(e.residual_l2 < 1e-10);
  }
}

TEST_CASE("expand_function: a basis element expands to a unit coefficient") {
  const auto dict = Dictionary::fourier(4);
  const auto e = dict.expand([](double t) { return std::sqrt(2.0) * std::cos(2.0 * M_PI * t); });
  CHECK(e.coeffs[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(e.coeffs[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(e.coeffs[2]) < 1e-12);
  CHECK(e.residual_sup < 1e-10);
}

TEST_CASE("expand_function: residuals of f(t)=t shrink as l grows") {
  // Reference: high-resolution quadrature of the truncation error.
  auto f = [](double t) { return t; };
  double prev = 1e300;
  for (int l : {5, 9, 17}) {
    const auto dict = Dictionary::fourier(l);
    const auto e = dict.expand(f);

    Eigen::VectorXd coeffs = e.coeffs;
    const double ref = std::sqrt(oracles::integrate_4096([&](double t) {
      Eigen::VectorXd phi = dict.eval(t);
      const double r = f(t) - coeffs.dot(phi);
      return r * r;
    }));
    CHECK(e.residual_l2 == doctest::Approx(ref).epsilon(1e-6));
    CHECK(e.residual_l2 < prev);
    prev = e.residual_l2;
  }
}

TEST_CASE("parseval: in-span functions satisfy ||f||^2 = sum coeffs^2") {
  const auto dict = Dictionary::fourier(5);
  auto f = [](double t) {
    return 1.0 + 0.7 * std::sqrt(2.0) * std::cos(2.0 * M_PI * t) -
           0.2 * std::sqrt(2.0) * std::sin(4.0 * M_PI * t);
  };
  const auto e = dict.expand(f);
  const double norm2 = oracles::integrate_4096([&](double t) { return f(t) * f(t); });
  CHECK(e.coeffs.squaredNorm() == doctest::Approx(norm2).epsilon(1e-10));
}

TEST_CASE("residual monotonicity: doubling l never hurts smooth targets") {
  auto f = [](double t) { return std::exp(std::sin(2.0 * M_PI * t)) + t * t; };
  for (int l : {4, 8, 16, 32}) {
    const double r1 = Dictionary::fourier(l).expand(f).residual_l2;
    const double r2 = Dictionary::fourier(2 * l).expand(f).residual_l2;
    CHECK(r2 <= r1 + 1e-12);
  }
}

TEST_CASE("custom dictionaries: orthonormal accepted, skewed rejected") {
  // A 2-element orthonormal system.
  auto ok = Dictionary::custom(
      [](double t, double* out) {
        out[0] = 1.0;
        out[1] = std::sqrt(3.0) * (2.0 * t - 1.0);
      },
      2, 2.0);
  CHECK(ok.gram_defect() < 1e-10);

  CHECK_THROWS_AS(Dictionary::custom(
                      [](double t, double* out) {
                        out[0] = 1.0;
                        out[1] = t;  // not orthogonal to the constant
                      },
                      2, 2.0),
                  InvariantViolation);
}

TEST_CASE("weighted measures: bad densities are rejected") {
  CHECK_THROWS_AS(DensityMeasure::weighted([](double) { return 2.0; }, 1.0, 3.0),
                  MeasureError);  // integrates to 2
  CHECK_THROWS_AS(DensityMeasure::weighted([](double) { return 1.0; }, -1.0, 2.0), MeasureError);
}

TEST_CASE("dictionary json round trip") {
  const auto dict = Dictionary::fourier(9, sine_weighted());
  const auto j = dict.to_json();
  const auto back = Dictionary::from_json(j);
  CHECK(back.l() == 9);
  CHECK(back.kind() == DictionaryKind::Fourier);
  CHECK(back.c_phi() == doctest::Approx(dict.c_phi()));
  // A callable density serializes as a sampled table, so evaluations agree
  // only to the table resolution.
  for (double t : {0.0, 0.31, 0.77, 1.0})
    CHECK((back.eval(t) - dict.eval(t)).cwiseAbs().maxCoeff() < 1e-4);

  // Table-backed measures round-trip exactly.
  std::vector<std::array<double, 2>> table;
  for (int k = 0; k <= 16; ++k) {
    const double t = k / 16.0;
    table.push_back({t, 1.0 + 0.25 * (t - 0.5)});
  }
  const auto tab_dict = Dictionary::fourier(5, DensityMeasure::from_table(table));
  const auto tab_back = Dictionary::from_json(tab_dict.to_json());
  for (double t : {0.0, 0.31, 0.77, 1.0})
    CHECK((tab_back.eval(t) - tab_dict.eval(t)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(tab_back.to_json() == tab_dict.to_json());
}

TEST_CASE("approx spec fit recovers a known decay exponent") {
  // f(t) = |t-1/2| has Fourier coefficients ~ k^-2: gamma ~ 1 in sup norm.
  std::vector<std::function<double(double)>> fns = {
      [](double t) { return std::abs(t - 0.5); }};
  const auto spec = fit_approx_spec(fns, DictionaryKind::Fourier, DensityMeasure::lebesgue(),
                                    {5, 9, 17, 33, 65});
  CHECK(spec.empirical);
  CHECK(spec.gamma > 0.5);
  CHECK(spec.gamma < 2.0);
  CHECK(spec.b > 0.0);
  CHECK(spec.b1 > 0.0);
}

#include <doctest.h>

#include <cmath>
#include <string>

#include "gnb/dual.hpp"
#include "gnb/expr.hpp"

using namespace gnb;

TEST_CASE("dual numbers propagate first and second derivatives") {
  // f(x) = sin(x)·exp(x²): f′ = (cos x + 2x sin x) e^{x²}
  auto f = [](auto x) {
    using std::exp, std::sin;
    return sin(x) * exp(x * x);
  };
  const double x = 0.7;
  const D1 d = f(D1(x, 1.0));
  CHECK(d.val == doctest::Approx(std::sin(x) * std::exp(x * x)));
  CHECK(d.eps == doctest::Approx((std::cos(x) + 2 * x * std::sin(x)) * std::exp(x * x)));

  const D2 dd = f(D2(D1(x, 1.0), D1(1.0, 0.0)));
  const double h = 1e-4;
  const double fd2 = (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
  CHECK(dd.eps.eps == doctest::Approx(fd2).epsilon(1e-6));
  CHECK(value_of(dd) == doctest::Approx(f(x)));
}

TEST_CASE("expressions parse and evaluate") {
  const std::vector<std::string> v{"t"};
  CHECK(Expr::parse("1 + 2*3", v).eval(0.0) == 7.0);
  CHECK(Expr::parse("-2^2", v).eval(0.0) == -4.0);
  CHECK(Expr::parse("2^3^2", v).eval(0.0) == 512.0);
  CHECK(Expr::parse("1/(1+t)", v).eval(3.0) == 0.25);
  CHECK(Expr::parse("pow(t, 2) + sqrt(t)", v).eval(4.0) == 18.0);
  CHECK(Expr::parse("exp(log(t))", v).eval(2.5) == doctest::Approx(2.5));
  CHECK(Expr::parse("sin(pi/2) + cos(0) + tan(0)", v).eval(0.0) == doctest::Approx(2.0));
  CHECK(Expr::parse("e", v).eval(0.0) == doctest::Approx(std::exp(1.0)));
  CHECK(Expr::parse("1.5e-1 * t", v).eval(2.0) == doctest::Approx(0.3));
  CHECK(Expr::parse(" 3 ", v).is_constant());
  CHECK(Expr::parse("2*0*t + 1", v).is_constant());

  const std::vector<std::string> xy{"x1", "x2"};
  const auto e = Expr::parse("x1*x2 + x2", xy);
  const double at[2] = {2.0, 3.0};
  CHECK(e.eval<double>(at) == 9.0);
}

TEST_CASE("symbolic derivatives match central differences") {
  const std::vector<std::string> v{"t"};
  for (const char* text : {"1/(1+t)", "t^3 - 2*t", "exp(-t)*sin(t)", "sqrt(1+t^2)", "log(2+t)/t", "t^t",
                           "tan(t/4)", "pow(1+t, 0.5)"}) {
    const auto e = Expr::parse(text, v);
    const auto d = e.derivative(0);
    for (double t : {0.3, 1.1, 2.7}) {
      const double h = 1e-6;
      const double fd = (e.eval(t + h) - e.eval(t - h)) / (2 * h);
      CHECK(d.eval(t) == doctest::Approx(fd).epsilon(1e-6));
      const D1 arg[1] = {D1(t, 1.0)};
      const D1 ad = e.eval<D1>(arg);
      CHECK(ad.eps == doctest::Approx(d.eval(t)).epsilon(1e-12));
    }
  }
  CHECK(Expr::parse("3", v).derivative(0).is_constant());
  CHECK(Expr::parse("2*t", v).derivative(0).eval(5.0) == 2.0);
}

TEST_CASE("parse errors report a column") {
  const std::vector<std::string> v{"t"};
  auto column_of = [&](const std::string& text) -> std::string {
    try {
      Expr::parse(text, v);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
      return e.what();
    }
    return "";
  };
  CHECK(column_of("1 + * t").find("column 5") != std::string::npos);
  CHECK(column_of("(1 + t").find("column 7") != std::string::npos);
  CHECK(column_of("1 + s").find("column 5") != std::string::npos);
  CHECK(column_of("foo(t)").find("column 1") != std::string::npos);
  CHECK(column_of("pow(t)").find("column 1") != std::string::npos);
  CHECK(column_of("t t").find("column 3") != std::string::npos);
  CHECK(column_of("").find("column 1") != std::string::npos);
}

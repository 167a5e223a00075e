#include <random>
#include <sstream>

#include "doctest.h"

#include "chaos/error.hpp"
#include "chaos/panel.hpp"
#include "fixtures.hpp"

using namespace chaos;
using namespace chaos::panel;

namespace {

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("dates parse and print as ISO-8601") {
  CHECK(Date::parse("2020-02-29").to_string() == "2020-02-29");
  CHECK(Date(1999, 12, 31).plus_days(1) == Date::parse("2000-01-01"));
  CHECK_THROWS_AS(Date::parse("2021-02-29"), ValidationError);
  CHECK_THROWS_AS(Date::parse("2021-1-05"), ValidationError);
  CHECK_THROWS_AS(Date::parse("20210105"), ValidationError);
}

TEST_CASE("price CSV: comments, BOM, CRLF and unsorted rows") {
  std::istringstream in(
      "\xEF\xBB\xBF# exported\r\n"
      "date,A,B\r\n"
      "2020-01-03,12,+21.5\r\n"
      "2020-01-02,10,20\r\n"
      "\r\n");
  const PricePanel p = read_price_panel(in, "prices.csv");
  REQUIRE(p.assets() == 2);
  REQUIRE(p.dates() == 2);
  CHECK(p.timestamps()[0] == Date(2020, 1, 2));
  CHECK(p.prices()(0, 0) == 10.0);
  CHECK(p.prices()(1, 1) == 21.5);
}

TEST_CASE("non-positive price is rejected with file, line, asset and date") {
  std::istringstream in("date,A,B\n2020-01-02,10,20\n2020-01-03,0,21\n");
  const std::string msg = error_of([&] { read_price_panel(in, "p.csv"); });
  CHECK(msg.find("p.csv:3") != std::string::npos);
  CHECK(msg.find("'A'") != std::string::npos);
  CHECK(msg.find("2020-01-03") != std::string::npos);
  CHECK(msg.find("not strictly positive") != std::string::npos);
}

TEST_CASE("malformed price files") {
  auto load = [](const std::string& text) {
    std::istringstream in(text);
    return read_price_panel(in, "x.csv");
  };
  CHECK_THROWS_AS(load("date,A,B\n2020-01-02,10,20\n2020-01-02,11,21\n"), ValidationError);
  CHECK(error_of([&] { load("date,A,B\n2020-01-02,10,20\n2020-01-02,11,21\n"); }).find("duplicate date") !=
        std::string::npos);
  CHECK_THROWS_AS(load("date,A,B\n2020-01-02,10\n"), ValidationError);
  CHECK_THROWS_AS(load("date,A,B\n2020-01-02,10,nan\n2020-01-03,1,1\n"), ValidationError);
  CHECK_THROWS_AS(load("date,A,B\n2020-01-02,10,\n2020-01-03,1,1\n"), ValidationError);
  CHECK_THROWS_AS(load("date,A,A\n2020-01-02,1,2\n2020-01-03,1,1\n"), ValidationError);
  CHECK_THROWS_AS(load("date,A,B\n2020-01-02,1,2\n"), ValidationError);  // one date only
  CHECK_THROWS_AS(load("date,A\n2020-01-02,1\n2020-01-03,1\n"), ValidationError);  // one asset only
  CHECK_THROWS_AS(load("# nothing\n"), ValidationError);
}

TEST_CASE("missing file names the path") {
  const std::string msg = error_of([] { load_price_panel("/nonexistent/prices.csv"); });
  CHECK(msg.find("/nonexistent/prices.csv") != std::string::npos);
}

TEST_CASE("series table requires at least two series") {
  std::istringstream in("date,A\n2020-01-02,1\n");
  CHECK_THROWS_AS(read_series_table(in), ValidationError);
}

TEST_CASE("gross returns divide consecutive prices") {
  Eigen::MatrixXd prices(2, 3);
  prices << 1, 2, 3, 4, 2, 1;
  const PricePanel p({"a", "b"}, fixture::daily(3), prices);
  const ReturnPanel r = gross_returns(p);
  REQUIRE(r.periods() == 2);
  CHECK(r.timestamps().front() == p.timestamps()[1]);
  CHECK(r.returns()(0, 0) == 2.0);
  CHECK(r.returns()(0, 1) == 1.5);
  CHECK(r.returns()(1, 1) == 0.5);
}

TEST_CASE("write then read reproduces values bit for bit") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1e3);
  Eigen::MatrixXd v(3, 50);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = g(rng) * std::pow(10.0, static_cast<int>(i % 13) - 6);
  v(0, 0) = 5e-324;  // denormal
  v(1, 0) = -0.0;
  const SeriesTable t({"a", "b", "c"}, fixture::daily(50), v);
  std::stringstream s;
  write_series_table(s, t, {"note one", "note two"});
  const SeriesTable back = read_series_table(s);
  CHECK(back.names() == t.names());
  CHECK(back.timestamps() == t.timestamps());
  CHECK(back.values() == t.values());
}

TEST_CASE("price panel round trip") {
  std::mt19937_64 rng(11);
  const PricePanel p = fixture::random_prices(rng, 4, 30);
  std::stringstream s;
  write_price_panel(s, p);
  const PricePanel back = read_price_panel(s);
  CHECK(back.prices() == p.prices());
  CHECK(back.asset_ids() == p.asset_ids());
}

TEST_CASE("align_and_join keeps common dates and input column order") {
  Eigen::MatrixXd a(2, 3), b(2, 3);
  a << 1, 2, 3, 4, 5, 6;
  b << 7, 8, 9, 10, 11, 12;
  const SeriesTable ta({"a1", "a2"}, fixture::daily(3, Date(2020, 1, 1)), a);
  const SeriesTable tb({"b1", "b2"}, fixture::daily(3, Date(2020, 1, 2)), b);
  const SeriesTable j = align_and_join({ta, tb});
  REQUIRE(j.length() == 2);
  CHECK(j.names() == std::vector<std::string>{"a1", "a2", "b1", "b2"});
  CHECK(j.timestamps().front() == Date(2020, 1, 2));
  CHECK(j.values()(0, 0) == 2.0);
  CHECK(j.values()(2, 0) == 7.0);
  CHECK(j.values()(3, 1) == 11.0);

  const SeriesTable tc({"c1", "c2"}, fixture::daily(2, Date(2021, 1, 1)), Eigen::MatrixXd::Ones(2, 2));
  CHECK_THROWS_AS(align_and_join({ta, tc}), AlignmentError);
  CHECK_THROWS_AS(align_and_join({ta, ta}), ValidationError);  // duplicate names
}

TEST_CASE("log and difference transforms") {
  Eigen::MatrixXd v(2, 3);
  v << 1, std::exp(1.0), std::exp(3.0), 2, 4, 8;
  const SeriesTable t({"a", "b"}, fixture::daily(3), v);
  const SeriesTable d = difference(log_transform(t));
  REQUIRE(d.length() == 2);
  CHECK(d.values()(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d.values()(0, 1) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(d.values()(1, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(d.timestamps().front() == t.timestamps()[1]);

  Eigen::MatrixXd neg = v;
  neg(1, 2) = -1.0;
  CHECK_THROWS_AS(log_transform(SeriesTable({"a", "b"}, fixture::daily(3), neg)), ValidationError);
}

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.1, 1.0 / 3.0, 1e300, -2.5e-300, 123456789.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

#include "doctest.h"
#include "helpers.hpp"
#include "rhg/cutlocus.hpp"
#include "rhg/io.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

using namespace rhg;
using io::Json;
using testutil::point_gap;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run_shell(const std::string& cmd) {
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string text;
  char buf[4096];
  size_t got = 0;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) text.append(buf, got);
  const int status = pclose(pipe);
  CliRun r;
  r.out = std::move(text);
  r.code = WEXITSTATUS(status);
  return r;
}

CliRun run_cli(const std::string& args) {
  return run_shell(std::string(RHGEO_CLI_PATH) + " " + args + " 2>/dev/null");
}

std::vector<double> split_csv(const std::string& line) {
  std::vector<double> vals;
  std::istringstream is(line);
  std::string cell;
  while (std::getline(is, cell, ',')) vals.push_back(std::stod(cell));
  return vals;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("JSON round trips are exact and validated") {
  std::mt19937_64 rng(601);
  for (const GroupShape& sh : {GroupShape{1, 1}, GroupShape{2, 3}, GroupShape{4, 2}}) {
    const GroupPoint g = testutil::random_point(rng, sh);
    const GroupPoint back = io::point_from_json(io::point_to_json(g));
    CHECK(point_gap(back, g) == 0.0);
    const Covector c = testutil::random_covector(rng, sh);
    const Covector cb = io::covector_from_json(io::covector_to_json(c));
    CHECK((cb.xi - c.xi).norm() == 0.0);
    CHECK((cb.eta - c.eta).norm() == 0.0);
    CHECK((cb.tau - c.tau).norm() == 0.0);
  }

  CHECK_THROWS_AS((void)io::point_from_json(Json::parse(R"({"x":[[1.0]],"y":[0.0]})")),
                  InputError);  // missing t
  CHECK_THROWS_AS(
      (void)io::point_from_json(Json::parse(R"({"x":[[1.0]],"y":[0.0,0.0],"t":[0.0]})")),
      InputError);  // y length != p
  CHECK_THROWS_AS(
      (void)io::point_from_json(
          Json::parse(R"({"q":2,"x":[[1.0]],"y":[0.0],"t":[0.0]})")),
      InputError);  // declared q disagrees
  CHECK_THROWS_AS(
      (void)io::point_from_json(Json::parse(R"({"x":[[1.0],[1.0,2.0]],"y":[],"t":[]})")),
      InputError);  // ragged columns
  CHECK_THROWS_AS((void)io::covector_from_json(Json::parse(R"({"xi":[["a"]],"eta":[0.0],
                   "tau":[0.0]})")),
                  InputError);  // non-numeric
}

TEST_CASE("CSV layer: pinned header, exact round trip, malformed rows rejected") {
  CHECK(io::csv_header({2, 2}) == "x_11,x_21,x_12,x_22,y_1,y_2,t_1,t_2");
  CHECK(io::csv_header({1, 1}) == "x_11,y_1,t_1");

  std::mt19937_64 rng(602);
  for (int rep = 0; rep < 10; ++rep) {
    const GroupShape sh{2 + rep % 2, 1 + rep % 3};
    const GroupPoint g = testutil::random_point(rng, sh);
    const GroupPoint back = io::point_from_csv_row(io::csv_row(g), sh);
    CHECK(point_gap(back, g) == 0.0);  // 17 digits round-trip doubles exactly
  }

  CHECK_THROWS_AS((void)io::point_from_csv_row("1.0,2.0", GroupShape{2, 1}), InputError);
  CHECK_THROWS_AS((void)io::point_from_csv_row("1.0,zzz,0.0,0.0,0.0", GroupShape{2, 1}),
                  InputError);

  for (double v : {M_PI, 0.1, -1.0 / 3.0, 1e-300, 6.02e23}) {
    CHECK(std::stod(io::format_double(v)) == v);
  }
}

TEST_CASE("classification report embeds the recovered covector on cut points") {
  GroupPoint vert = zero_point({2, 1});
  vert.t << 0.0, 2.0;
  const Json j = io::classification_to_json(vert, cutlocus::classify(vert));
  CHECK(j.at("verdict") == "cut");
  CHECK(j.at("multiplicity") == "multiple");
  CHECK(j.at("conjugate") == "yes");
  CHECK(j.at("distance").get<double>() ==
        doctest::Approx(std::sqrt(8.0 * M_PI)).epsilon(1e-14));
  CHECK(j.contains("covector"));
  CHECK(j.at("kernel_dim") == 1);

  GroupPoint off = zero_point({2, 1});
  off.x(0, 0) = 1.0;
  const Json jn = io::classification_to_json(off, cutlocus::classify(off));
  CHECK(jn.at("verdict") == "not_cut");
  CHECK(!jn.contains("distance"));
}

TEST_CASE("cli: geodesic evaluation with cross-check") {
  const std::string cov = R"('{"xi":[[1.0,1.0]],"eta":[0.0],"tau":[0.0,1.0]}')";
  const auto r = run_cli("geodesic --cov " + cov + " --s 6.283185307179586 --check");
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  const Json& row = j.at("rows").at(0);
  const double two_pi = 2.0 * M_PI;
  CHECK(row.at("x").at(0).at(0).get<double>() == doctest::Approx(two_pi).epsilon(1e-12));
  CHECK(std::abs(row.at("x").at(0).at(1).get<double>()) < 1e-12);
  CHECK(std::abs(row.at("y").at(0).get<double>()) < 1e-12);
  CHECK(row.at("t").at(0).get<double>() == doctest::Approx(-two_pi).epsilon(1e-12));
  CHECK(row.at("t").at(1).get<double>() == doctest::Approx(M_PI).epsilon(1e-12));

  // csv format carries the same values
  const auto rc = run_cli("geodesic --cov " + cov + " --s 1.0,2.0 --format csv");
  REQUIRE(rc.code == 0);
  const auto lines = lines_of(rc.out);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "s,x_11,x_21,y_1,t_1,t_2");
  CHECK(split_csv(lines[1]).size() == 6);
  CHECK(split_csv(lines[1])[0] == 1.0);

  // declared shape is validated
  CHECK(run_cli("geodesic --cov " + cov + " --s 1.0 --shape 2,1").code == 0);
  CHECK(run_cli("geodesic --cov " + cov + " --s 1.0 --shape 3,1").code == 2);
}

TEST_CASE("cli: classify pinned point and error paths") {
  const std::string vert = R"('{"q":1,"p":1,"x":[[0.0]],"y":[0.0],"t":[1.0]}')";
  const auto r = run_cli("classify --point " + vert);
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j.at("verdict") == "cut");
  CHECK(j.at("multiplicity") == "multiple");
  CHECK(j.at("conjugate") == "yes");
  CHECK(j.at("distance").get<double>() ==
        doctest::Approx(std::sqrt(4.0 * M_PI)).epsilon(1e-12));

  // the origin is outside the domain
  const std::string origin = R"('{"x":[[0.0]],"y":[0.0],"t":[0.0]}')";
  CHECK(run_cli("classify --point " + origin).code == 4);
  // malformed JSON
  CHECK(run_cli("classify --point '{\"x\":[[oops'").code == 2);
  // unknown subcommand / missing required option
  CHECK(run_cli("classify").code == 2);

  // reading the point from stdin behaves like inline JSON
  const auto rs = run_shell("echo " + vert + " | " + RHGEO_CLI_PATH +
                            " classify --point - 2>/dev/null");
  CHECK(rs.code == 0);
  CHECK(Json::parse(rs.out).at("verdict") == "cut");
}

TEST_CASE("cli: oracle determinism, comparison, and failure modes") {
  const std::string vert = R"('{"x":[[0.0,0.0]],"y":[0.0],"t":[0.0,1.0]}')";
  const std::string base = "oracle --point " + vert + " --seed 42 --starts 6 ";
  const auto a = run_cli(base + "--method shoot");
  const auto b = run_cli(base + "--method shoot");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);  // byte-identical for a fixed seed

  const auto cmp = run_cli(base + "--method shoot --compare");
  REQUIRE(cmp.code == 0);
  const Json j = Json::parse(cmp.out);
  CHECK(j.at("compare").at("verdict") == "cut");
  const double closed = j.at("compare").at("closed_form").get<double>();
  CHECK(closed == doctest::Approx(std::sqrt(4.0 * M_PI)).epsilon(1e-12));
  CHECK(std::abs(j.at("compare").at("delta").get<double>()) < 1e-3 * closed);

  // unattainable endpoint tolerance surfaces as non-convergence
  CHECK(run_cli(base + "--method shoot --tol 1e-18").code == 5);
}

TEST_CASE("cli: sample modes emit parseable CSV with the promised invariants") {
  const auto sph = run_cli("sample --shape 2,1 --mode sphere --count 5 --seed 9");
  REQUIRE(sph.code == 0);
  auto lines = lines_of(sph.out);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == "x_11,x_21,y_1,t_1,t_2");
  for (size_t i = 1; i < lines.size(); ++i) CHECK(split_csv(lines[i]).size() == 5);

  const auto cut = run_cli("sample --shape 2,1 --mode cutlocus --count 5 --seed 9");
  REQUIRE(cut.code == 0);
  lines = lines_of(cut.out);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == "x_11,x_21,y_1,t_1,t_2,distance,verdict,multiplicity,conjugate");
  for (size_t i = 1; i < lines.size(); ++i) {
    std::istringstream is(lines[i]);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(is, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 9);
    CHECK(std::stod(cells[2]) == 0.0);  // y vanishes on every cut endpoint
    CHECK(cells[6] == "cut");
    CHECK(std::stod(cells[5]) > 0.0);
  }

  const auto sig = run_cli("sample --shape 3,1 --mode sigma --count 5 --seed 11");
  REQUIRE(sig.code == 0);
  lines = lines_of(sig.out);
  REQUIRE(lines.size() == 6);
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto v = split_csv(lines[i]);
    REQUIRE(v.size() == 9);  // x (3), y (1), t (3), psi, discriminant
    Vec x(3), t(3);
    x << v[0], v[1], v[2];
    t << v[4], v[5], v[6];
    const double psi = v[7];
    CHECK(std::abs(psi) < 1e-10 * (1.0 + t.squaredNorm()));
    CHECK(cutlocus::sigma_psi(x, t) == psi);  // 17-digit round trip is exact
    CHECK(v[8] < 0.0);  // strictly negative discriminant off the axis
  }

  // sigma sampling is only defined for p = 1, q >= 2
  CHECK(run_cli("sample --shape 2,2 --mode sigma --count 1").code == 2);
}

TEST_CASE("cli: --out writes the same bytes as stdout") {
  const std::string tmp = "/tmp/rhgeo_out_test.json";
  const std::string vert = R"('{"x":[[0.0]],"y":[0.0],"t":[1.0]}')";
  const auto direct_run = run_cli("classify --point " + vert);
  REQUIRE(direct_run.code == 0);
  const auto filed = run_cli("classify --point " + vert + " --out " + tmp);
  REQUIRE(filed.code == 0);
  CHECK(filed.out.empty());
  std::ifstream in(tmp, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == direct_run.out);
  std::remove(tmp.c_str());
}

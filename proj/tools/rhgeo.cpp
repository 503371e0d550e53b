// rhgeo: batch CLI for geodesics, cut-locus classification, distances and
// oracle cross-checks on the groups G_{qp}.
//
// Exit codes: 0 success, 2 input error, 3 internal cross-check failure,
// 4 domain error, 5 oracle non-convergence.

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rhg/conjugate.hpp"
#include "rhg/cutlocus.hpp"
#include "rhg/extremal.hpp"
#include "rhg/group.hpp"
#include "rhg/io.hpp"
#include "rhg/oracle.hpp"

using namespace rhg;
using io::Json;

namespace {

struct CrossCheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Json load_json_arg(const std::string& arg) {
  std::string text;
  if (arg.find('{') != std::string::npos) {
    text = arg;
  } else if (arg == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    text = ss.str();
  } else {
    std::ifstream in(arg);
    if (!in) throw InputError("cannot open input file: " + arg);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  try {
    return Json::parse(text);
  } catch (const std::exception& e) {
    throw InputError(std::string("invalid JSON: ") + e.what());
  }
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw InputError("cannot open output file: " + out_path);
  out << text;
}

GroupShape parse_shape(const std::string& s) {
  int q = 0, p = 0;
  char comma = 0;
  std::istringstream is(s);
  if (!(is >> q >> comma >> p) || comma != ',' || q < 1 || p < 1)
    throw InputError("--shape expects q,p with positive integers");
  return {q, p};
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream is(s);
  std::string cell;
  while (std::getline(is, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw InputError("invalid number in list: '" + cell + "'");
    }
  }
  if (out.empty()) throw InputError("empty time list");
  return out;
}

void check_declared_shape(const GroupShape& actual, const std::string& declared) {
  if (declared.empty()) return;
  if (!(parse_shape(declared) == actual))
    throw InputError("--shape disagrees with the shape of the JSON input");
}

int flow_steps_for(double s, const Covector& cov) {
  const double cycles = 1.0 + cov.tau.norm() * std::abs(s);
  return std::max(4000, int(std::ceil(1500.0 * cycles)));
}

// ---------------------------------------------------------------------------

int cmd_geodesic(const std::string& cov_arg, const std::string& s_arg,
                 const std::string& shape_arg, const std::string& format,
                 const std::string& out_path, bool check) {
  const Covector cov = io::covector_from_json(load_json_arg(cov_arg));
  check_declared_shape(cov.shape(), shape_arg);
  const std::vector<double> times = parse_double_list(s_arg);

  std::vector<GroupPoint> points;
  points.reserve(times.size());
  for (double s : times) points.push_back(extremal::geodesic(s, cov));

  if (check) {
    for (size_t i = 0; i < times.size(); ++i) {
      const double s = times[i];
      if (s == 0.0) continue;
      const auto flow = extremal::hamiltonian_flow(s, cov, flow_steps_for(s, cov));
      const GroupPoint& end = flow.back().point;
      const double err = (flatten(end) - flatten(points[i])).norm();
      if (err > 1e-8)
        throw CrossCheckFailure("flow/closed-form mismatch " + io::format_double(err) +
                                " at s = " + io::format_double(s));
    }
  }

  std::ostringstream os;
  if (format == "csv") {
    os << "s," << io::csv_header(cov.shape()) << "\n";
    for (size_t i = 0; i < times.size(); ++i)
      os << io::format_double(times[i]) << "," << io::csv_row(points[i]) << "\n";
  } else {
    Json j;
    j["covector"] = io::covector_to_json(cov);
    Json rows = Json::array();
    for (size_t i = 0; i < times.size(); ++i) {
      Json row = io::point_to_json(points[i]);
      row["s"] = times[i];
      rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    os << j.dump(2) << "\n";
  }
  write_output(os.str(), out_path);
  return 0;
}

int cmd_classify(const std::string& point_arg, const std::string& shape_arg,
                 double atol, const std::string& out_path) {
  const GroupPoint g = io::point_from_json(load_json_arg(point_arg));
  check_declared_shape(g.shape(), shape_arg);
  const cutlocus::CutClassification cls =
      cutlocus::classify(g, matlin::kDefaultSvTol, atol);
  Json j = io::classification_to_json(g, cls);
  j["point"] = io::point_to_json(g);
  write_output(j.dump(2) + "\n", out_path);
  return 0;
}

int cmd_oracle(const std::string& point_arg, const std::string& shape_arg,
               const std::string& method, const oracle::OracleConfig& cfg,
               bool compare, const std::string& out_path) {
  const GroupPoint g = io::point_from_json(load_json_arg(point_arg));
  check_declared_shape(g.shape(), shape_arg);

  Json j;
  j["target"] = io::point_to_json(g);
  Json results = Json::array();

  double best = std::numeric_limits<double>::infinity();
  if (method == "shoot" || method == "both") {
    const oracle::OracleResult r = oracle::shoot(g, cfg);
    Json e;
    e["method"] = "shoot";
    e["distance"] = r.distance;
    e["residual"] = r.residual;
    e["best_start"] = r.best_start;
    e["covector"] = io::covector_to_json(r.best_cov);
    results.push_back(std::move(e));
    best = std::min(best, r.distance);
  }
  if (method == "direct" || method == "both") {
    const oracle::OracleResult r = oracle::direct_minimize(g, cfg);
    Json e;
    e["method"] = "direct";
    e["distance"] = r.distance;
    e["residual"] = r.residual;
    e["best_start"] = r.best_start;
    e["segments"] = int(r.best_control.segments.size());
    results.push_back(std::move(e));
    best = std::min(best, r.distance);
  }
  j["results"] = std::move(results);

  if (compare) {
    const cutlocus::CutClassification cls = cutlocus::classify(g);
    Json c;
    c["verdict"] = io::verdict_string(cls.verdict);
    if (cls.is_cut()) {
      c["closed_form"] = cls.distance;
      c["oracle"] = best;
      c["delta"] = best - cls.distance;
    }
    j["compare"] = std::move(c);
  }
  write_output(j.dump(2) + "\n", out_path);
  return 0;
}

// ---------------------------------------------------------------------------
// Sampling helpers (deterministic in the seed).

Covector random_unit_speed(std::mt19937_64& rng, const GroupShape& sh, double tau_norm) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Covector c = zero_covector(sh);
  double hn = 0.0;
  do {
    for (int col = 0; col < sh.p; ++col)
      for (int r = 0; r < sh.q; ++r) c.xi(r, col) = gauss(rng);
    for (int k = 0; k < sh.p; ++k) c.eta(k) = gauss(rng);
    hn = c.horizontal_norm();
  } while (hn < 1e-8);
  c.xi /= hn;
  c.eta /= hn;
  double tn = 0.0;
  do {
    for (int a = 0; a < sh.q; ++a) c.tau(a) = gauss(rng);
    tn = c.tau.norm();
  } while (tn < 1e-8);
  c.tau *= tau_norm / tn;
  return c;
}

int cmd_sample(const GroupShape& sh, const std::string& mode, int count,
               std::uint64_t seed, const std::string& out_path) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::ostringstream os;

  if (mode == "sphere") {
    // Unit-speed covectors still minimizing at s = 1: cut_time = 2pi/|tau| >= 1.
    os << io::csv_header(sh) << "\n";
    for (int i = 0; i < count; ++i) {
      const Covector c = random_unit_speed(rng, sh, 2.0 * M_PI * unif(rng));
      os << io::csv_row(extremal::geodesic(1.0, c)) << "\n";
    }
  } else if (mode == "cutlocus") {
    os << io::csv_header(sh) << ",distance,verdict,multiplicity,conjugate\n";
    for (int i = 0; i < count; ++i) {
      const Covector c = random_unit_speed(rng, sh, 2.0 * M_PI * std::exp(0.5 * gauss(rng)));
      const GroupPoint g = extremal::endpoint_at_cut(c);
      const cutlocus::CutClassification cls = cutlocus::classify(g);
      os << io::csv_row(g) << ","
         << io::format_double(cls.is_cut() ? cls.distance : 0.0) << ","
         << io::verdict_string(cls.verdict) << ","
         << io::multiplicity_string(cls.multiplicity) << ","
         << io::conjugate_string(cls.conjugate) << "\n";
    }
  } else if (mode == "sigma") {
    if (sh.p != 1 || sh.q < 2)
      throw InputError("sigma mode requires shape q,1 with q >= 2");
    os << io::csv_header(sh) << ",psi,discriminant\n";
    for (int i = 0; i < count; ++i) {
      Vec x(sh.q), d(sh.q);
      double xdotd = 0.0;
      do {
        for (int a = 0; a < sh.q; ++a) x(a) = gauss(rng);
        for (int a = 0; a < sh.q; ++a) d(a) = gauss(rng);
        xdotd = x.dot(d);
      } while (x.norm() < 0.1 || d.norm() < 0.1 || std::abs(xdotd) < 1e-3 ||
               (d - (xdotd / x.squaredNorm()) * x).norm() < 1e-3);
      // psi(x, r d) changes sign exactly once on r > 0: bracket and bisect.
      double r = 1.0;
      while (cutlocus::sigma_psi(x, r * d) > 0.0 && r < 1e12) r *= 2.0;
      double lo = r / 2.0, hi = r;
      while (cutlocus::sigma_psi(x, lo * d) < 0.0 && lo > 1e-12) {
        hi = lo;
        lo /= 2.0;
      }
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (cutlocus::sigma_psi(x, mid * d) >= 0.0 ? lo : hi) = mid;
      }
      const Vec t = 0.5 * (lo + hi) * d;
      GroupPoint g{x, Vec::Zero(1), t};
      os << io::csv_row(g) << "," << io::format_double(cutlocus::sigma_psi(x, t)) << ","
         << io::format_double(cutlocus::sigma_gradients(x, t).discriminant) << "\n";
    }
  } else {
    throw InputError("unknown sample mode: " + mode);
  }
  write_output(os.str(), out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geodesics, cut locus and distance on the groups G_{qp}"};
  app.require_subcommand(1);

  std::string shape_arg, format = "json", out_path;
  std::uint64_t seed = 0;
  double tol = -1.0;

  // geodesic
  auto* geo = app.add_subcommand("geodesic", "evaluate the closed-form extremal");
  std::string cov_arg, s_arg;
  bool check = false;
  geo->add_option("--cov", cov_arg, "covector JSON (inline, file path, or - for stdin)")
      ->required();
  geo->add_option("--s", s_arg, "comma-separated evaluation times")->required();
  geo->add_option("--shape", shape_arg, "declared shape q,p (validated)");
  geo->add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
  geo->add_option("--out", out_path, "output path (default stdout)");
  geo->add_flag("--check", check, "cross-validate against the Hamiltonian flow");

  // classify
  auto* cls = app.add_subcommand("classify", "cut-locus membership and distance");
  std::string point_arg;
  cls->add_option("--point", point_arg, "point JSON (inline, file path, or - for stdin)")
      ->required();
  cls->add_option("--shape", shape_arg, "declared shape q,p (validated)");
  cls->add_option("--tol", tol, "classification tolerance (default 1e-9)");
  cls->add_option("--out", out_path, "output path (default stdout)");

  // oracle
  auto* ora = app.add_subcommand("oracle", "independent distance estimation");
  std::string method = "both";
  int starts = 16, segments = 16;
  bool compare = false;
  ora->add_option("--point", point_arg, "point JSON (inline, file path, or - for stdin)")
      ->required();
  ora->add_option("--seed", seed, "RNG seed")->required();
  ora->add_option("--shape", shape_arg, "declared shape q,p (validated)");
  ora->add_option("--method", method, "shoot|direct|both")
      ->check(CLI::IsMember({"shoot", "direct", "both"}));
  ora->add_option("--starts", starts, "multistart count");
  ora->add_option("--segments", segments, "direct-method segments");
  ora->add_option("--tol", tol, "endpoint tolerance (default 1e-9)");
  ora->add_flag("--compare", compare, "print closed-form vs oracle delta");
  ora->add_option("--out", out_path, "output path (default stdout)");

  // sample
  auto* smp = app.add_subcommand("sample", "CSV samples of spheres / cut locus / sigma");
  std::string mode = "sphere";
  int count = 100;
  smp->add_option("--shape", shape_arg, "shape q,p")->required();
  smp->add_option("--mode", mode, "sphere|cutlocus|sigma")
      ->check(CLI::IsMember({"sphere", "cutlocus", "sigma"}));
  smp->add_option("--count", count, "number of samples")->check(CLI::PositiveNumber);
  smp->add_option("--seed", seed, "RNG seed");
  smp->add_option("--out", out_path, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (geo->parsed()) return cmd_geodesic(cov_arg, s_arg, shape_arg, format, out_path, check);
    if (cls->parsed())
      return cmd_classify(point_arg, shape_arg, tol > 0 ? tol : cutlocus::kAtol, out_path);
    if (ora->parsed()) {
      oracle::OracleConfig cfg;
      cfg.seed = seed;
      cfg.starts = starts;
      cfg.segments = segments;
      if (tol > 0) cfg.endpoint_tol = tol;
      return cmd_oracle(point_arg, shape_arg, method, cfg, compare, out_path);
    }
    if (smp->parsed()) return cmd_sample(parse_shape(shape_arg), mode, count, seed, out_path);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const CrossCheckFailure& e) {
    std::cerr << "cross-check failure: " << e.what() << "\n";
    return 3;
  } catch (const NoConvergence& e) {
    std::cerr << "oracle did not converge: " << e.what() << "\n";
    return 5;
  } catch (const Error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

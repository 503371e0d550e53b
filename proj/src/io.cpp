#include "rhg/io.hpp"

#include <cstdio>
#include <sstream>

namespace rhg::io {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

Json matrix_to_json(const Mat& m) {
  Json cols = Json::array();
  for (int c = 0; c < m.cols(); ++c) {
    Json col = Json::array();
    for (int r = 0; r < m.rows(); ++r) col.push_back(m(r, c));
    cols.push_back(std::move(col));
  }
  return cols;
}

Json vector_to_json(const Vec& v) {
  Json out = Json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Mat matrix_from_json(const Json& j, const char* key) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw InputError(std::string(key) + ": expected a non-empty array of columns");
  const int p = int(j.size());
  const int q = int(j[0].size());
  if (q == 0) throw InputError(std::string(key) + ": empty column");
  Mat m(q, p);
  for (int c = 0; c < p; ++c) {
    if (!j[c].is_array() || int(j[c].size()) != q)
      throw InputError(std::string(key) + ": ragged columns");
    for (int r = 0; r < q; ++r) {
      if (!j[c][r].is_number()) throw InputError(std::string(key) + ": non-numeric entry");
      m(r, c) = j[c][r].get<double>();
    }
  }
  return m;
}

Vec vector_from_json(const Json& j, const char* key, int expected) {
  if (!j.is_array() || int(j.size()) != expected)
    throw InputError(std::string(key) + ": expected an array of length " +
                     std::to_string(expected));
  Vec v(expected);
  for (int i = 0; i < expected; ++i) {
    if (!j[i].is_number()) throw InputError(std::string(key) + ": non-numeric entry");
    v(i) = j[i].get<double>();
  }
  return v;
}

const Json& require(const Json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("missing field: ") + key);
  return j.at(key);
}

}  // namespace

Json point_to_json(const GroupPoint& g) {
  const GroupShape s = g.shape();
  Json j;
  j["q"] = s.q;
  j["p"] = s.p;
  j["x"] = matrix_to_json(g.x);
  j["y"] = vector_to_json(g.y);
  j["t"] = vector_to_json(g.t);
  return j;
}

Json covector_to_json(const Covector& c) {
  Json j;
  j["xi"] = matrix_to_json(c.xi);
  j["eta"] = vector_to_json(c.eta);
  j["tau"] = vector_to_json(c.tau);
  return j;
}

GroupPoint point_from_json(const Json& j) {
  GroupPoint g;
  g.x = matrix_from_json(require(j, "x"), "x");
  const GroupShape s = {int(g.x.rows()), int(g.x.cols())};
  if (j.contains("q") && j.at("q").get<int>() != s.q)
    throw InputError("q does not match the shape of x");
  if (j.contains("p") && j.at("p").get<int>() != s.p)
    throw InputError("p does not match the shape of x");
  g.y = vector_from_json(require(j, "y"), "y", s.p);
  g.t = vector_from_json(require(j, "t"), "t", s.q);
  return g;
}

Covector covector_from_json(const Json& j) {
  Covector c;
  c.xi = matrix_from_json(require(j, "xi"), "xi");
  const GroupShape s = {int(c.xi.rows()), int(c.xi.cols())};
  c.eta = vector_from_json(require(j, "eta"), "eta", s.p);
  c.tau = vector_from_json(require(j, "tau"), "tau", s.q);
  return c;
}

std::string verdict_string(cutlocus::Verdict v) {
  return v == cutlocus::Verdict::Cut ? "cut" : "not_cut";
}

std::string multiplicity_string(cutlocus::Multiplicity m) {
  return m == cutlocus::Multiplicity::Multiple ? "multiple" : "unique";
}

std::string conjugate_string(cutlocus::ConjugateFlag c) {
  switch (c) {
    case cutlocus::ConjugateFlag::Yes: return "yes";
    case cutlocus::ConjugateFlag::No: return "no";
    default: return "undecided";
  }
}

Json classification_to_json(const GroupPoint& g, const cutlocus::CutClassification& cls) {
  Json j;
  j["verdict"] = verdict_string(cls.verdict);
  if (cls.is_cut()) {
    j["multiplicity"] = multiplicity_string(cls.multiplicity);
    j["conjugate"] = conjugate_string(cls.conjugate);
    j["distance"] = cls.distance;
    const cutlocus::RecoveredFamily fam = cutlocus::recover_covectors(g.x, g.t);
    j["covector"] = covector_to_json(fam.canonical());
    j["family_radius"] = fam.rho;
    j["kernel_dim"] = fam.kernel_dim;
  }
  return j;
}

std::string csv_header(const GroupShape& shape) {
  std::ostringstream os;
  for (int c = 1; c <= shape.p; ++c)
    for (int r = 1; r <= shape.q; ++r) os << "x_" << r << c << ",";
  for (int j = 1; j <= shape.p; ++j) os << "y_" << j << ",";
  for (int a = 1; a <= shape.q; ++a) os << "t_" << a << (a == shape.q ? "" : ",");
  return os.str();
}

std::string csv_row(const GroupPoint& g) {
  const Vec v = flatten(g);
  std::ostringstream os;
  for (int i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << format_double(v(i));
  }
  return os.str();
}

GroupPoint point_from_csv_row(const std::string& line, const GroupShape& shape) {
  Vec v(shape.full_dim());
  std::istringstream is(line);
  std::string cell;
  int i = 0;
  while (std::getline(is, cell, ',')) {
    if (i >= v.size()) throw InputError("csv row: too many cells");
    try {
      v(i++) = std::stod(cell);
    } catch (const std::exception&) {
      throw InputError("csv row: non-numeric cell '" + cell + "'");
    }
  }
  if (i != v.size()) throw InputError("csv row: wrong cell count");
  return unflatten_point(v, shape);
}

}  // namespace rhg::io

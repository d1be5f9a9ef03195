#include "hkq/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "hkq/error.hpp"

namespace hkq {

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::malformed_input, what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) malformed(std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const Json& j) {
  if (!j.is_number()) malformed("expected a number");
  return j.get<double>();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    malformed("not a number: '" + text + "'");
  }
  if (used != text.size()) malformed("not a number: '" + text + "'");
  return v;
}

Complex parse_complex(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) return {parse_double(text), 0.0};
  return {parse_double(text.substr(0, comma)), parse_double(text.substr(comma + 1))};
}

Json to_json(Complex c) { return Json::array({c.real(), c.imag()}); }

Json to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

Json to_json(const CVector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
  return out;
}

Json to_json(const RMatrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Json to_json(const ADHMDatum& z) {
  return {{"n", z.n()}, {"t", z.t}, {"A", to_json(z.A)}, {"B", to_json(z.B)},
          {"x", to_json(CVector(z.x))}, {"y", to_json(CVector(z.y.transpose()))}};
}

Json to_json(const TangentVector& v) {
  return {{"A", to_json(v.A)}, {"B", to_json(v.B)}, {"x", to_json(CVector(v.x))},
          {"y", to_json(CVector(v.y.transpose()))}};
}

Json to_json(const Configuration& q) {
  Json pts = Json::array();
  for (const auto& p : q.points) pts.push_back(Json::array({to_json(p.lambda), to_json(p.mu)}));
  return {{"points", pts}};
}

Json to_json(const JointSpectrum& s) {
  Json j = to_json(Configuration{s.points});
  j["commutator_defect"] = s.commutator_defect;
  j["triangular_residual"] = s.triangular_residual;
  return j;
}

Json to_json(const MetricSample& s) {
  return {{"base_ref", s.base_ref}, {"probe_basis_id", s.probe_basis_id}, {"gram", to_json(s.gram)},
          {"rho", s.rho}, {"sigma", s.sigma}};
}

Json to_json(const NewtonReport& r) {
  return {{"iters", r.iterations}, {"final_residual", r.final_residual},
          {"dist_from_ansatz", r.dist_from_ansatz}, {"history", r.history}};
}

Json to_json(const FitResult& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"constant", f.constant()},
          {"stderr", f.stderr_slope}, {"n_points", f.n_points},
          {"range", Json::array({f.min_scale, f.max_scale})}};
}

Json to_json(const PotentialEstimate& e) {
  auto region = [](const RegionValue& r) {
    return Json{{"value", r.value}, {"ci_halfwidth", r.ci_halfwidth}};
  };
  return {{"x", to_json(e.x)}, {"value", e.value}, {"ci_halfwidth", e.ci_halfwidth},
          {"samples", e.samples}, {"d", e.d},
          {"split", {{"F1", region(e.f1)}, {"F2", region(e.f2)}, {"F3", region(e.f3)}}},
          {"non_converged", e.non_converged}};
}

Json to_json(const VolumeSample& v) {
  return {{"tau", v.tau}, {"V", v.V}, {"V1", v.V1}, {"V2", v.V2}, {"ci_halfwidth", v.ci_halfwidth}};
}

Complex complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) malformed("complex entries are [re, im] pairs");
  return {number(j[0]), number(j[1])};
}

CMatrix cmatrix_from_json(const Json& j) {
  if (!j.is_array()) malformed("matrix must be an array of rows");
  const Index rows = static_cast<Index>(j.size());
  CMatrix m(rows, rows);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != rows) malformed("matrix must be square");
    for (Index k = 0; k < rows; ++k) m(i, k) = complex_from_json(row[static_cast<size_t>(k)]);
  }
  return m;
}

CVector cvector_from_json(const Json& j) {
  if (!j.is_array()) malformed("vector must be an array");
  CVector v(static_cast<Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = complex_from_json(j[i]);
  return v;
}

ADHMDatum datum_from_json(const Json& j) {
  ADHMDatum z;
  z.A = cmatrix_from_json(field(j, "A"));
  z.B = cmatrix_from_json(field(j, "B"));
  z.x = cvector_from_json(field(j, "x"));
  z.y = cvector_from_json(field(j, "y")).transpose();
  z.t = number(field(j, "t"));
  if (j.contains("n") && j["n"].get<Index>() != z.A.rows()) malformed("n disagrees with the matrices");
  const Index n = z.A.rows();
  if (z.B.rows() != n || z.x.size() != n || z.y.size() != n) malformed("datum blocks differ in size");
  return z;
}

TangentVector tangent_from_json(const Json& j, Index n) {
  TangentVector v = TangentVector::zero(n);
  v.A = cmatrix_from_json(field(j, "A"));
  v.B = cmatrix_from_json(field(j, "B"));
  v.x = cvector_from_json(field(j, "x"));
  v.y = cvector_from_json(field(j, "y")).transpose();
  if (v.A.rows() != n || v.B.rows() != n || v.x.size() != n || v.y.size() != n) {
    malformed("tangent vector blocks must match the base point");
  }
  return v;
}

Configuration configuration_from_json(const Json& j) {
  const Json& pts = j.is_object() ? field(j, "points") : j;
  if (!pts.is_array()) malformed("configuration must list points");
  Configuration q;
  for (const auto& p : pts) {
    if (p.is_object()) {
      q.points.push_back({complex_from_json(field(p, "lambda")), complex_from_json(field(p, "mu"))});
    } else if (p.is_array() && p.size() == 2) {
      q.points.push_back({complex_from_json(p[0]), complex_from_json(p[1])});
    } else {
      malformed("each point is [lambda, mu]");
    }
  }
  return q;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    malformed("'" + path + "': " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::io_error, "write failed for '" + path + "'");
}

std::string decay_csv_header() { return "scale,rho,sigma,deviation,valid,reason\n"; }

std::string decay_csv_row(const DecayRecord& r) {
  return format_double(r.scale) + "," + format_double(r.rho) + "," + format_double(r.sigma) + "," +
         format_double(r.deviation) + "," + (r.valid ? "1" : "0") + "," + csv_escape(r.reason) + "\n";
}

std::vector<DecayRecord> parse_decay_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("scale,rho,sigma,deviation", 0) != 0) {
    malformed("decay CSV must start with the scale,rho,sigma,deviation,valid,reason header");
  }
  std::vector<DecayRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() < 5) break;
    DecayRecord r;
    try {
      r.scale = parse_double(cells[0]);
      r.rho = parse_double(cells[1]);
      r.sigma = parse_double(cells[2]);
      r.deviation = parse_double(cells[3]);
    } catch (const Error&) {
      break;
    }
    if (cells[4] != "0" && cells[4] != "1") break;
    r.valid = cells[4] == "1";
    if (cells.size() > 5) r.reason = cells[5];
    out.push_back(r);
  }
  return out;
}

std::string trajectory_csv(const std::vector<FlowSample>& samples) {
  std::string out = "s,real_residual,complex_residual,margin\n";
  for (const auto& s : samples) {
    out += format_double(s.s) + "," + format_double(s.real_residual) + "," +
           format_double(s.complex_residual) + "," + format_double(s.margin) + "\n";
  }
  return out;
}

}  // namespace hkq

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "hkq/adhm.hpp"
#include "hkq/asymptotics.hpp"
#include "hkq/configuration.hpp"
#include "hkq/donaldson_flow.hpp"
#include "hkq/potential.hpp"
#include "hkq/quotient_metric.hpp"
#include "hkq/separated_solver.hpp"
#include "hkq/spectrum.hpp"

namespace hkq {

using Json = nlohmann::json;

// %.17g
std::string format_double(double v);
double parse_double(const std::string& text);
// "re,im"
Complex parse_complex(const std::string& text);

Json to_json(Complex c);
Json to_json(const CMatrix& m);  // row-major nested arrays of [re, im]
Json to_json(const CVector& v);
Json to_json(const RMatrix& m);
Json to_json(const ADHMDatum& z);
Json to_json(const TangentVector& v);
Json to_json(const Configuration& q);
Json to_json(const JointSpectrum& s);
Json to_json(const MetricSample& s);
Json to_json(const NewtonReport& r);
Json to_json(const FitResult& f);
Json to_json(const PotentialEstimate& e);
Json to_json(const VolumeSample& v);

// All parsers throw malformed_input.
Complex complex_from_json(const Json& j);
CMatrix cmatrix_from_json(const Json& j);
CVector cvector_from_json(const Json& j);
ADHMDatum datum_from_json(const Json& j);
TangentVector tangent_from_json(const Json& j, Index n);
// Either {"points": [...]} or a bare list; each point is [lambda, mu] or {"lambda", "mu"}.
Configuration configuration_from_json(const Json& j);

// Throws io_error when the file cannot be read, malformed_input on bad JSON.
Json read_json_file(const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// scale,rho,sigma,deviation,valid,reason
std::string decay_csv_header();
std::string decay_csv_row(const DecayRecord& r);
// Parses rows of a decay CSV (header required); stops at the first incomplete row.
std::vector<DecayRecord> parse_decay_csv(const std::string& text);

std::string trajectory_csv(const std::vector<FlowSample>& samples);

}  // namespace hkq

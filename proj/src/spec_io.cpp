#include "wellposed/spec_io.hpp"

#include <fstream>
#include <sstream>

namespace wellposed {

using nlohmann::json;

Matrix matrix_from_json(const json& j, int rows, int cols, const std::string& name) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows * cols) {
    throw ParseError(name + " must be a row-major array of length " +
                     std::to_string(rows * cols));
  }
  Matrix m(rows, cols);
  int k = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!j[static_cast<size_t>(k)].is_number()) {
        throw ParseError(name + " contains a non-numeric entry");
      }
      m(r, c) = j[static_cast<size_t>(k)].get<double>();
      ++k;
    }
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

namespace {

Vector vector_from_json(const json& j, int len, const std::string& name) {
  const Matrix m = matrix_from_json(j, len, 1, name);
  return m.col(0);
}

int require_int(const json& doc, const std::string& key) {
  if (!doc.contains(key) || !doc[key].is_number_integer()) {
    throw ParseError("missing or non-integer key '" + key + "'");
  }
  return doc[key].get<int>();
}

}  // namespace

ProblemSpec parse_spec_json(const json& doc) {
  const int p = require_int(doc, "p");
  const int q = require_int(doc, "q");
  if (p <= 0 || q <= 0) throw ParseError("p and q must be positive");

  if (!doc.contains("mu")) throw ParseError("missing key 'mu'");
  Vector mu = vector_from_json(doc["mu"], p, "mu");

  if (!doc.contains("gamma")) throw ParseError("missing key 'gamma'");
  InputModel input;
  const json& jg = doc["gamma"];
  if (jg.contains("tau2")) {
    input = InputModel::isotropic(mu, jg["tau2"].get<double>());
  } else if (jg.contains("full")) {
    input = InputModel::full(mu, matrix_from_json(jg["full"], p, p, "gamma.full"));
  } else {
    throw ParseError("gamma must provide 'tau2' or 'full'");
  }

  if (!doc.contains("sigma")) throw ParseError("missing key 'sigma'");
  NoiseModel noise;
  const json& js = doc["sigma"];
  if (js.contains("sigma2")) {
    noise = NoiseModel::isotropic(q, js["sigma2"].get<double>());
  } else if (js.contains("full")) {
    noise = NoiseModel::full(matrix_from_json(js["full"], q, q, "sigma.full"));
  } else {
    throw ParseError("sigma must provide 'sigma2' or 'full'");
  }

  if (!doc.contains("forward")) throw ParseError("missing key 'forward'");
  const json& jf = doc["forward"];
  ForwardModel forward = ForwardModel::linear(Matrix::Identity(q, p));
  if (jf.contains("H")) {
    forward = ForwardModel::linear(matrix_from_json(jf["H"], q, p, "forward.H"));
  } else if (jf.contains("builtin")) {
    BuiltinParams params;
    if (jf.contains("params")) {
      const json& jp = jf["params"];
      if (jp.contains("H")) params.h = matrix_from_json(jp["H"], q, p, "forward.params.H");
      if (jp.contains("curvature")) {
        params.curvature = vector_from_json(jp["curvature"], p, "forward.params.curvature");
      }
    }
    forward = make_builtin_forward(jf["builtin"].get<std::string>(), params, p, q);
  } else if (jf.contains("command")) {
    std::vector<std::string> argv;
    for (const auto& part : jf["command"]) argv.push_back(part.get<std::string>());
    forward = SubprocessForward::make(std::move(argv), p, q);
  } else {
    throw ParseError("forward must provide 'H', 'builtin', or 'command'");
  }

  ProblemSpec spec{std::move(input), std::move(noise), std::move(forward)};
  spec.c = doc.value("c", 4.0);
  if (doc.contains("n_obs")) spec.n_obs = doc["n_obs"].get<int>();
  if (doc.contains("oracle")) {
    const json& jo = doc["oracle"];
    spec.oracle.seed = jo.value("seed", spec.oracle.seed);
    spec.oracle.n_samples = jo.value("n", spec.oracle.n_samples);
  }
  return spec;
}

ProblemSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open spec file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ParseError(std::string("spec file is not valid JSON: ") + e.what());
  }
  try {
    return parse_spec_json(doc);
  } catch (const json::exception& e) {
    throw ParseError(std::string("spec file schema error: ") + e.what());
  }
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file '" + path + "' for digest");
  std::uint64_t hash = 14695981039346656037ULL;
  char ch;
  while (in.get(ch)) {
    hash ^= static_cast<unsigned char>(ch);
    hash *= 1099511628211ULL;
  }
  std::ostringstream hex;
  hex << std::hex << hash;
  return hex.str();
}

json verdict_to_json(const ConditionVerdict& v) {
  json j;
  j["name"] = v.name;
  j["kind"] = to_string(v.kind);
  j["lhs"] = v.lhs;
  j["rhs"] = v.rhs;
  j["margin"] = v.margin;
  j["holds"] = v.holds;
  j["strict"] = v.strict;
  j["equation"] = v.equation;
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

ConditionVerdict verdict_from_json(const json& j) {
  ConditionVerdict v;
  v.name = j.at("name").get<std::string>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "exact") v.kind = VerdictKind::exact;
  else if (kind == "sufficient") v.kind = VerdictKind::sufficient;
  else if (kind == "necessary") v.kind = VerdictKind::necessary;
  else throw ParseError("unknown verdict kind '" + kind + "'");
  v.lhs = j.at("lhs").get<double>();
  v.rhs = j.at("rhs").get<double>();
  v.margin = j.at("margin").get<double>();
  v.holds = j.at("holds").get<bool>();
  v.strict = j.value("strict", true);
  v.equation = j.value("equation", std::string{});
  v.note = j.value("note", std::string{});
  return v;
}

json report_to_json(const WellPosednessReport& report, const std::string& input_digest) {
  json j;
  j["tool_version"] = kToolVersion;
  j["input_digest"] = input_digest;
  j["overall"] = to_string(report.overall);
  j["conditions"] = json::array();
  for (const auto& v : report.verdicts) j["conditions"].push_back(verdict_to_json(v));
  j["notes"] = report.notes;
  if (report.identifiability) {
    j["identifiability"] = {{"injective", report.identifiability->injective},
                            {"count_ok", report.identifiability->count_ok},
                            {"rank", report.identifiability->rank}};
  }
  if (report.cond_number) j["condition_number"] = *report.cond_number;
  if (report.sobol_x) j["sobol_x"] = *report.sobol_x;
  if (report.sobol_eps) j["sobol_eps"] = *report.sobol_eps;
  return j;
}

WellPosednessReport report_from_json(const json& j) {
  WellPosednessReport report;
  const std::string overall = j.at("overall").get<std::string>();
  if (overall == "well_posed") report.overall = Overall::well_posed;
  else if (overall == "ill_posed") report.overall = Overall::ill_posed;
  else report.overall = Overall::inconclusive;
  for (const auto& jv : j.at("conditions")) {
    report.verdicts.push_back(verdict_from_json(jv));
  }
  report.notes = j.value("notes", std::vector<std::string>{});
  if (j.contains("identifiability")) {
    IdentifiabilityVerdict id{};
    id.injective = j["identifiability"].at("injective").get<bool>();
    id.count_ok = j["identifiability"].at("count_ok").get<bool>();
    id.rank = j["identifiability"].at("rank").get<int>();
    report.identifiability = id;
  }
  if (j.contains("condition_number")) {
    report.cond_number = j["condition_number"].get<double>();
  }
  if (j.contains("sobol_x")) report.sobol_x = j["sobol_x"].get<double>();
  if (j.contains("sobol_eps")) report.sobol_eps = j["sobol_eps"].get<double>();
  return report;
}

}  // namespace wellposed

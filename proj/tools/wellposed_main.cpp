// Command-line front end: parse a problem spec, run the diagnostics, and emit
// human-readable tables on stdout (or JSON with --json). Diagnostics go to
// stderr. Exit codes: 0 well-posed, 1 ill-posed, 2 invalid input,
// 3 inconclusive/degenerate.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "wellposed/conditions.hpp"
#include "wellposed/linearize.hpp"
#include "wellposed/oracle.hpp"
#include "wellposed/spec_io.hpp"

namespace {

using namespace wellposed;
using nlohmann::json;

constexpr int kExitWellPosed = 0;
constexpr int kExitIllPosed = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitInconclusive = 3;

Vector parse_point(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    parts.push_back(std::stod(item));
  }
  Vector v(static_cast<Eigen::Index>(parts.size()));
  for (size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = parts[i];
  return v;
}

ReportOptions make_report_options(const std::string& linearize_arg, double fd_step,
                                  int opt_budget) {
  ReportOptions opts;
  opts.fd_step = fd_step;
  opts.opt_budget = opt_budget;
  if (linearize_arg.empty()) return opts;
  if (linearize_arg == "opt") {
    opts.linearize = ReportOptions::Linearize::optimize;
  } else if (linearize_arg == "mu") {
    opts.linearize = ReportOptions::Linearize::at_point;
  } else {
    opts.linearize = ReportOptions::Linearize::at_point;
    opts.x0 = parse_point(linearize_arg);
  }
  return opts;
}

void print_report_table(const WellPosednessReport& report, std::ostream& out) {
  out << "condition                          kind        lhs            rhs            margin         holds\n";
  for (const auto& v : report.verdicts) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-34s %-11s %-14.6g %-14.6g %-14.6g %s\n",
                  v.name.c_str(), to_string(v.kind), v.lhs, v.rhs, v.margin,
                  v.holds ? "yes" : "no");
    out << line;
  }
  if (report.identifiability) {
    out << "identifiability: injective=" << (report.identifiability->injective ? "yes" : "no")
        << " (rank " << report.identifiability->rank << ")"
        << ", count_ok=" << (report.identifiability->count_ok ? "yes" : "no") << "\n";
  }
  if (report.cond_number) out << "condition number: " << *report.cond_number << "\n";
  if (report.sobol_x) {
    out << "Sobol indices: S_X=" << *report.sobol_x << ", S_eps=" << *report.sobol_eps
        << "\n";
  }
  for (const auto& note : report.notes) out << "note: " << note << "\n";
  out << "overall: " << to_string(report.overall) << "\n";
}

int overall_exit_code(Overall overall) {
  switch (overall) {
    case Overall::well_posed: return kExitWellPosed;
    case Overall::ill_posed: return kExitIllPosed;
    case Overall::inconclusive: return kExitInconclusive;
  }
  return kExitInconclusive;
}

int cmd_check(const std::string& spec_path, double c_override,
              const std::string& json_out, const std::string& linearize_arg,
              double fd_step, int opt_budget) {
  ProblemSpec raw = load_spec_file(spec_path);
  if (c_override > 0.0) raw.c = c_override;
  const ValidatedSpec spec = validate_spec(std::move(raw));
  const ReportOptions opts = make_report_options(linearize_arg, fd_step, opt_budget);
  const WellPosednessReport report = full_report(spec, opts);

  if (!json_out.empty()) {
    const json j = report_to_json(report, file_digest(spec_path));
    if (json_out == "-") {
      std::cout << j.dump(2) << "\n";
    } else {
      std::ofstream f(json_out);
      f << j.dump(2) << "\n";
      print_report_table(report, std::cout);
    }
  } else {
    print_report_table(report, std::cout);
  }
  return overall_exit_code(report.overall);
}

struct LinearContext {
  ValidatedSpec spec;
  Matrix h;
  double tau2;
};

LinearContext linear_context(const std::string& spec_path,
                             const std::string& linearize_arg, double fd_step,
                             const char* cmd_name) {
  ValidatedSpec spec = validate_spec(load_spec_file(spec_path));
  if (!spec.spec.input.isotropic_tau2) {
    throw ParseError(std::string(cmd_name) +
                     " requires gamma = tau2 I (use \"gamma\": {\"tau2\": ...})");
  }
  Matrix h;
  if (spec.spec.forward.is_linear()) {
    h = spec.spec.forward.linear_matrix();
  } else if (!linearize_arg.empty()) {
    const ForwardModel& fwd = spec.spec.forward;
    const Evaluator g = [&fwd](const Vector& x) { return fwd(x); };
    Vector x0 = spec.spec.input.mu;
    if (linearize_arg == "opt") {
      x0 = optimize_linearization_point(g, spec, x0, 200).x0_star;
    } else if (linearize_arg != "mu") {
      x0 = parse_point(linearize_arg);
    }
    h = jacobian_fd(g, x0, fd_step);
  } else {
    throw ParseError(std::string("the forward model is nonlinear; pass --linearize "
                                 "mu|opt|x0 to run ") +
                     cmd_name + " on its Taylor surrogate");
  }
  const double tau2 = *spec.spec.input.isotropic_tau2;
  return LinearContext{std::move(spec), std::move(h), tau2};
}

int cmd_fisher(const std::string& spec_path, const std::string& json_out,
               const std::string& linearize_arg, double fd_step) {
  const LinearContext ctx = linear_context(spec_path, linearize_arg, fd_step, "fisher");
  const Matrix& sigma = ctx.spec.spec.noise.sigma;
  const int q = ctx.spec.q();

  const Vector spectrum = psi_eigenvalues(ctx.h, sigma);
  const double i_signal = fisher_signal_tau2(q, ctx.tau2);
  const double i_obs = fisher_observed_tau2_from_spectrum(spectrum, ctx.tau2);

  if (!json_out.empty()) {
    json j;
    j["tool_version"] = kToolVersion;
    j["input_digest"] = file_digest(spec_path);
    j["fisher_signal_tau2"] = i_signal;
    j["fisher_observed_tau2"] = i_obs;
    j["psi_spectrum"] = json::array();
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
      j["psi_spectrum"].push_back(spectrum[i]);
    }
    std::ostream* out = &std::cout;
    std::ofstream f;
    if (json_out != "-") {
      f.open(json_out);
      out = &f;
    }
    *out << j.dump(2) << "\n";
  }
  std::cout << "I_signal(tau2) = " << i_signal << "\n";
  std::cout << "I_observed(tau2) = " << i_obs << "\n";
  std::cout << "psi spectrum:";
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) std::cout << " " << spectrum[i];
  std::cout << "\n";
  return kExitWellPosed;
}

int cmd_linearize(const std::string& spec_path, const std::string& strategy,
                  const std::string& x0_arg, int opt_budget, int samples,
                  double fd_step) {
  const ValidatedSpec spec = validate_spec(load_spec_file(spec_path));
  const ForwardModel& fwd = spec.spec.forward;
  const Evaluator g = [&fwd](const Vector& x) { return fwd(x); };
  const Matrix& sigma = spec.spec.noise.sigma;
  const double c = spec.spec.c;
  const std::uint64_t seed = spec.spec.oracle.seed;
  const int n = samples > 0 ? samples : spec.spec.oracle.n_samples;

  if (!spec.spec.input.isotropic_tau2) {
    throw ParseError("linearize requires gamma = tau2 I");
  }
  const double tau2 = *spec.spec.input.isotropic_tau2;

  Matrix h;
  if (strategy == "taylor") {
    Vector x0 = spec.spec.input.mu;
    if (x0_arg == "opt") {
      const auto opt = optimize_linearization_point(g, spec, x0, opt_budget);
      x0 = opt.x0_star;
      std::cerr << "optimized linearization point, objective " << opt.objective << "\n";
    } else if (!x0_arg.empty() && x0_arg != "mu") {
      x0 = parse_point(x0_arg);
    }
    const LinearizedModel lin = taylor_linearize(g, x0, fd_step);
    h = lin.h_x0;
    std::cout << "strategy: taylor\nx0:";
    for (Eigen::Index i = 0; i < x0.size(); ++i) std::cout << " " << x0[i];
    std::cout << "\nH:\n" << lin.h_x0 << "\noffset: " << lin.offset.transpose() << "\n";
  } else if (strategy == "mse") {
    const MseFitResult fit = mse_linear_approx(g, spec.spec.input.mu,
                                               spec.spec.input.gamma, sigma, tau2, c, n,
                                               seed);
    h = fit.h;
    std::cout << "strategy: mse\nH:\n" << fit.h << "\nu: " << fit.u.transpose()
              << "\nmse: " << fit.quality.mse << "\n";
    std::cout << "fisher feasibility (" << fit.fisher_feasibility.equation
              << "): " << (fit.fisher_feasibility.holds ? "holds" : "fails");
    if (!fit.fisher_feasibility.note.empty()) {
      std::cout << " [" << fit.fisher_feasibility.note << "]";
    }
    std::cout << "\n";
  } else if (strategy == "kl") {
    const KlFitResult fit = kl_optimal_fit(g, spec.spec.input.mu, spec.spec.input.gamma,
                                           spec.q(), n, seed);
    h = fit.h;
    std::cout << "strategy: kl\nH:\n" << fit.h << "\nkl_residual: "
              << fit.quality.kl_residual << "\n";
  } else {
    throw ParseError("unknown strategy '" + strategy + "' (taylor|mse|kl)");
  }

  try {
    const ConditionVerdict suff = sufficient_condition(h, sigma, tau2, c);
    const ConditionVerdict nec = necessary_condition(h, sigma, tau2, c);
    std::cout << "sufficient " << suff.equation << ": lhs=" << suff.lhs
              << " rhs=" << suff.rhs << " -> " << (suff.holds ? "holds" : "fails") << "\n";
    std::cout << "necessary " << nec.equation << ": lhs=" << nec.lhs
              << " rhs=" << nec.rhs << " -> " << (nec.holds ? "holds" : "fails") << "\n";
  } catch (const RankDeficient& e) {
    std::cout << "surrogate is rank deficient: " << e.what() << "\n";
    return kExitInconclusive;
  }
  return kExitWellPosed;
}

int cmd_oracle(const std::string& spec_path, const std::string& what, int n_arg,
               std::uint64_t seed_arg, const std::string& linearize_arg,
               double fd_step) {
  const ValidatedSpec spec = validate_spec(load_spec_file(spec_path));
  const int n = n_arg > 0 ? n_arg : spec.spec.oracle.n_samples;
  const std::uint64_t seed = seed_arg != 0 ? seed_arg : spec.spec.oracle.seed;

  if (what == "sobol") {
    if (spec.q() != 1) {
      throw ParseError("the Sobol oracle is defined for scalar output (q = 1)");
    }
    const SobolEstimate est =
        mc_sobol_indices(spec.spec.forward, spec.spec.input, spec.spec.noise, n, seed);
    std::cout << "S_X (MC) = " << est.s_x << " +- " << est.std_error
              << ", S_eps (MC) = " << est.s_eps << "\n";
    if (spec.spec.forward.is_linear()) {
      const Vector a = spec.spec.forward.linear_matrix().row(0).transpose();
      const auto sobol =
          sobol_wellposed_scalar(a, spec.spec.input.gamma, spec.spec.noise.sigma(0, 0));
      const double diff = std::abs(est.s_x - sobol.s_x);
      std::cout << "S_X (closed form) = " << sobol.s_x << ", |diff| = " << diff
                << (diff <= 0.02 ? "  [agrees]" : "  [DISAGREES]") << "\n";
    }
    return kExitWellPosed;
  }

  if (what == "m2") {
    const ForwardModel& fwd = spec.spec.forward;
    const Evaluator g = [&fwd](const Vector& x) { return fwd(x); };
    const Matrix m2 = mc_second_moment(g, spec.spec.input.gamma, spec.q(), n, seed);
    std::cout << "E[g(X) g(X)'] (MC):\n" << m2 << "\n";
    return kExitWellPosed;
  }

  const LinearContext ctx = linear_context(spec_path, linearize_arg, fd_step, "oracle");
  const Matrix& sigma = ctx.spec.spec.noise.sigma;
  const double closed = fisher_observed_tau2(ctx.h, sigma, ctx.tau2);

  if (what == "fi-fd") {
    const double fd = fd_fisher_tau2(ctx.h, sigma, ctx.tau2);
    const double rel = std::abs(fd - closed) / std::max(std::abs(closed), 1e-300);
    std::cout << "closed form = " << closed << ", finite difference = " << fd
              << ", rel diff = " << rel << (rel <= 1e-4 ? "  [agrees]" : "  [DISAGREES]")
              << "\n";
    return kExitWellPosed;
  }
  if (what == "fi-score") {
    const OracleResult mc = score_variance_fi(ctx.h, sigma, ctx.tau2, n, seed);
    const double z = std::abs(mc.estimate - closed) / std::max(mc.std_error, 1e-300);
    std::cout << "closed form = " << closed << ", score variance (MC) = " << mc.estimate
              << " +- " << mc.std_error << ", |z| = " << z
              << (z <= 3.0 ? "  [agrees]" : "  [DISAGREES]") << "\n";
    return kExitWellPosed;
  }
  throw ParseError("unknown oracle '" + what + "' (sobol|fi-fd|fi-score|m2)");
}

int cmd_sample_prior(const std::string& lambda_path, double nu,
                     const std::string& a_arg, double sigma2, int n,
                     std::uint64_t seed, std::int64_t max_draws,
                     const std::string& out_path) {
  std::ifstream in(lambda_path);
  if (!in) throw ParseError("cannot open lambda file '" + lambda_path + "'");
  json jl;
  try {
    jl = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ParseError(std::string("lambda file is not valid JSON: ") + e.what());
  }
  const Vector a = parse_point(a_arg);
  const int p = static_cast<int>(a.size());
  const Matrix lambda = matrix_from_json(jl, p, p, "lambda");

  IwSampleResult result;
  try {
    result = constrained_iw_prior_sample(lambda, nu, a, sigma2, n, seed, max_draws);
  } catch (const AcceptanceTooLow& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIllPosed;
  }

  json j;
  j["acceptance_rate"] = result.acceptance_rate;
  j["total_draws"] = result.total_draws;
  j["samples"] = json::array();
  for (const auto& gamma : result.samples) j["samples"].push_back(matrix_to_json(gamma));
  std::ostream* out = &std::cout;
  std::ofstream f;
  if (!out_path.empty() && out_path != "-") {
    f.open(out_path);
    out = &f;
  }
  *out << j.dump(2) << "\n";
  std::cerr << "acceptance rate: " << result.acceptance_rate << " (" << result.total_draws
            << " draws)\n";
  return kExitWellPosed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Well-posedness diagnostics for stochastic inversion problems"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string json_out;
  std::string linearize_arg;
  std::string strategy = "taylor";
  std::string x0_arg;
  std::string what;
  std::string lambda_path;
  std::string a_arg;
  std::string out_path;
  double c_override = -1.0;
  double fd_step = 1e-5;
  double nu = 0.0;
  double sigma2 = 0.0;
  int opt_budget = 200;
  int samples = 0;
  int n_arg = 0;
  std::uint64_t seed_arg = 0;
  std::int64_t max_draws = 1000000;
  int n_prior = 1;

  auto* check = app.add_subcommand("check", "Run the full well-posedness report");
  check->add_option("spec", spec_path, "problem spec file")->required();
  check->add_option("--c", c_override, "override the Fisher fraction constant c");
  check->add_option("--json", json_out, "write the JSON report here ('-' for stdout)");
  check->add_option("--linearize", linearize_arg,
                    "linearize a black-box forward model: mu, opt, or x0 as v1,v2,...");
  check->add_option("--fd-step", fd_step, "relative finite-difference step");
  check->add_option("--opt-budget", opt_budget, "evaluation budget for --linearize opt");

  auto* fisher = app.add_subcommand("fisher", "Print the Fisher information quantities");
  fisher->add_option("spec", spec_path, "problem spec file")->required();
  fisher->add_option("--json", json_out, "write JSON output here ('-' for stdout)");
  fisher->add_option("--linearize", linearize_arg, "linearization point for black boxes");
  fisher->add_option("--fd-step", fd_step, "relative finite-difference step");

  auto* linearize = app.add_subcommand("linearize", "Fit a linear surrogate");
  linearize->add_option("spec", spec_path, "problem spec file")->required();
  linearize->add_option("--strategy", strategy, "taylor|mse|kl");
  linearize->add_option("--x0", x0_arg, "linearization point (taylor): mu, opt, v1,v2,...");
  linearize->add_option("--opt-budget", opt_budget, "evaluation budget for --x0 opt");
  linearize->add_option("--samples", samples, "Monte-Carlo sample count (mse/kl)");
  linearize->add_option("--fd-step", fd_step, "relative finite-difference step");

  auto* oracle = app.add_subcommand("oracle", "Check closed forms against oracles");
  oracle->add_option("spec", spec_path, "problem spec file")->required();
  oracle->add_option("--what", what, "sobol|fi-fd|fi-score|m2")->required();
  oracle->add_option("--n", n_arg, "sample count");
  oracle->add_option("--seed", seed_arg, "RNG seed");
  oracle->add_option("--linearize", linearize_arg, "linearization point for black boxes");
  oracle->add_option("--fd-step", fd_step, "relative finite-difference step");

  auto* prior = app.add_subcommand("sample-prior",
                                   "Draw constrained inverse-Wishart covariances");
  prior->add_option("--lambda", lambda_path, "JSON file with the row-major scale matrix")
      ->required();
  prior->add_option("--nu", nu, "degrees of freedom")->required();
  prior->add_option("--a", a_arg, "direction vector v1,v2,...")->required();
  prior->add_option("--sigma2", sigma2, "noise variance in the constraint")->required();
  prior->add_option("--n", n_prior, "number of accepted draws");
  prior->add_option("--seed", seed_arg, "RNG seed");
  prior->add_option("--max-draws", max_draws, "rejection budget");
  prior->add_option("--out", out_path, "output file ('-' for stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) {
      return cmd_check(spec_path, c_override, json_out, linearize_arg, fd_step,
                       opt_budget);
    }
    if (fisher->parsed()) {
      return cmd_fisher(spec_path, json_out, linearize_arg, fd_step);
    }
    if (linearize->parsed()) {
      return cmd_linearize(spec_path, strategy, x0_arg, opt_budget, samples, fd_step);
    }
    if (oracle->parsed()) {
      return cmd_oracle(spec_path, what, n_arg, seed_arg, linearize_arg, fd_step);
    }
    if (prior->parsed()) {
      const std::uint64_t seed = seed_arg != 0 ? seed_arg : 20240101;
      return cmd_sample_prior(lambda_path, nu, a_arg, sigma2, n_prior, seed, max_draws,
                              out_path);
    }
  } catch (const AcceptanceTooLow& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIllPosed;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wellposed/linalg.hpp"

namespace wellposed {

/// Pure, reentrant map from R^p to R^q.
using Evaluator = std::function<Vector(const Vector&)>;

struct LinearForward {
  Matrix h;  // q x p
};

struct BlackBoxForward {
  Evaluator evaluate;
  std::string source;  // builtin name or subprocess command, for reporting
};

struct ForwardModel {
  std::variant<LinearForward, BlackBoxForward> kind;

  bool is_linear() const { return std::holds_alternative<LinearForward>(kind); }
  const Matrix& linear_matrix() const { return std::get<LinearForward>(kind).h; }

  Vector operator()(const Vector& x) const;

  static ForwardModel linear(Matrix h);
  static ForwardModel black_box(Evaluator g, std::string source = "black-box");
};

/// Parameters for a builtin forward map (see make_builtin_forward).
struct BuiltinParams {
  std::optional<Matrix> h;        // linear
  std::optional<Vector> curvature;  // quadratic_diag
};

/// Registry of builtin forward maps used by the CLI and tests:
///   linear            g(x) = Hx                     (params: h)
///   sin1d             g(x) = sin(x1), p = q = 1
///   exp_componentwise g(x) = (exp(x1), ..., exp(xp)), q = p
///   quadratic_diag    g(x) = (d1 x1^2, ..., dp xp^2) (params: curvature)
///   cubic1d           g(x) = x1^3, p = q = 1
ForwardModel make_builtin_forward(const std::string& name, const BuiltinParams& params,
                                  int p, int q);

/// Analytic Jacobian of a builtin map, for test oracles.
Matrix builtin_jacobian(const std::string& name, const BuiltinParams& params,
                        const Vector& x, int q);

std::vector<std::string> builtin_forward_names();

/// Forward model backed by a child process speaking the line protocol:
/// p whitespace-separated decimals in, q decimals out, one evaluation per line.
/// Each evaluation is bounded by WELLPOSED_EVAL_TIMEOUT_MS (default 30000).
class SubprocessForward {
 public:
  SubprocessForward(std::vector<std::string> argv, int p, int q);
  ~SubprocessForward();

  SubprocessForward(const SubprocessForward&) = delete;
  SubprocessForward& operator=(const SubprocessForward&) = delete;

  Vector evaluate(const Vector& x);

  static ForwardModel make(std::vector<std::string> argv, int p, int q);

 private:
  void spawn();
  void shutdown();

  std::vector<std::string> argv_;
  int p_;
  int q_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string read_buffer_;
  long timeout_ms_;
};

}  // namespace wellposed

#include "wellposed/forward.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

namespace wellposed {

Vector ForwardModel::operator()(const Vector& x) const {
  if (is_linear()) {
    return linear_matrix() * x;
  }
  const auto& bb = std::get<BlackBoxForward>(kind);
  Vector y = bb.evaluate(x);
  if (!y.allFinite()) {
    throw EvaluatorFailure("forward model returned non-finite values (" + bb.source + ")");
  }
  return y;
}

ForwardModel ForwardModel::linear(Matrix h) {
  return ForwardModel{LinearForward{std::move(h)}};
}

ForwardModel ForwardModel::black_box(Evaluator g, std::string source) {
  return ForwardModel{BlackBoxForward{std::move(g), std::move(source)}};
}

namespace {

void check_dims(const std::string& name, int p, int q, int need_p, int need_q) {
  if ((need_p > 0 && p != need_p) || (need_q > 0 && q != need_q)) {
    throw DimensionMismatch("builtin '" + name + "' does not support p=" +
                            std::to_string(p) + ", q=" + std::to_string(q));
  }
}

}  // namespace

ForwardModel make_builtin_forward(const std::string& name, const BuiltinParams& params,
                                  int p, int q) {
  if (name == "linear") {
    if (!params.h) throw ParseError("builtin 'linear' requires an H parameter");
    const Matrix& h = *params.h;
    if (h.rows() != q || h.cols() != p) {
      throw DimensionMismatch("builtin 'linear': H is " + std::to_string(h.rows()) +
                              "x" + std::to_string(h.cols()));
    }
    return ForwardModel::linear(h);
  }
  if (name == "sin1d") {
    check_dims(name, p, q, 1, 1);
    return ForwardModel::black_box(
        [](const Vector& x) { return Vector::Constant(1, std::sin(x[0])); }, "sin1d");
  }
  if (name == "exp_componentwise") {
    check_dims(name, p, q, p, p);
    if (q != p) check_dims(name, p, q, q, q);
    return ForwardModel::black_box(
        [](const Vector& x) { return x.array().exp().matrix().eval(); },
        "exp_componentwise");
  }
  if (name == "quadratic_diag") {
    if (!params.curvature) {
      throw ParseError("builtin 'quadratic_diag' requires a curvature parameter");
    }
    const Vector d = *params.curvature;
    if (d.size() != p || q != p) {
      throw DimensionMismatch("builtin 'quadratic_diag' needs q=p=len(curvature)");
    }
    return ForwardModel::black_box(
        [d](const Vector& x) { return (d.array() * x.array().square()).matrix().eval(); },
        "quadratic_diag");
  }
  if (name == "cubic1d") {
    check_dims(name, p, q, 1, 1);
    return ForwardModel::black_box(
        [](const Vector& x) { return Vector::Constant(1, x[0] * x[0] * x[0]); },
        "cubic1d");
  }
  throw ParseError("unknown builtin forward model '" + name + "'");
}

Matrix builtin_jacobian(const std::string& name, const BuiltinParams& params,
                        const Vector& x, int q) {
  const int p = static_cast<int>(x.size());
  if (name == "linear") return *params.h;
  if (name == "sin1d") return Matrix::Constant(1, 1, std::cos(x[0]));
  if (name == "exp_componentwise") return x.array().exp().matrix().asDiagonal();
  if (name == "quadratic_diag") {
    return (2.0 * params.curvature->array() * x.array()).matrix().asDiagonal();
  }
  if (name == "cubic1d") return Matrix::Constant(1, 1, 3.0 * x[0] * x[0]);
  (void)q;
  throw ParseError("unknown builtin forward model '" + name + "'");
}

std::vector<std::string> builtin_forward_names() {
  return {"linear", "sin1d", "exp_componentwise", "quadratic_diag", "cubic1d"};
}

SubprocessForward::SubprocessForward(std::vector<std::string> argv, int p, int q)
    : argv_(std::move(argv)), p_(p), q_(q) {
  if (argv_.empty()) throw EvaluatorFailure("empty subprocess command");
  timeout_ms_ = 30000;
  if (const char* env = std::getenv("WELLPOSED_EVAL_TIMEOUT_MS")) {
    timeout_ms_ = std::strtol(env, nullptr, 10);
    if (timeout_ms_ <= 0) timeout_ms_ = 30000;
  }
  spawn();
}

SubprocessForward::~SubprocessForward() { shutdown(); }

void SubprocessForward::spawn() {
  int in_pipe[2];   // parent -> child
  int out_pipe[2];  // child -> parent
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) {
    throw EvaluatorFailure("failed to create pipes for subprocess forward model");
  }
  const int pid = fork();
  if (pid < 0) throw EvaluatorFailure("fork failed");
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    std::vector<char*> cargv;
    cargv.reserve(argv_.size() + 1);
    for (auto& a : argv_) cargv.push_back(a.data());
    cargv.push_back(nullptr);
    execvp(cargv[0], cargv.data());
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

void SubprocessForward::shutdown() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    if (waitpid(pid_, &status, WNOHANG) == 0) {
      kill(pid_, SIGTERM);
      waitpid(pid_, &status, 0);
    }
    pid_ = -1;
  }
}

Vector SubprocessForward::evaluate(const Vector& x) {
  std::ostringstream line;
  line.precision(17);
  for (int i = 0; i < p_; ++i) {
    if (i) line << ' ';
    line << x[i];
  }
  line << '\n';
  const std::string payload = line.str();
  size_t written = 0;
  while (written < payload.size()) {
    const ssize_t n = write(to_child_, payload.data() + written, payload.size() - written);
    if (n <= 0) throw EvaluatorFailure("subprocess forward model closed its input");
    written += static_cast<size_t>(n);
  }

  // Read one full line, respecting the per-evaluation timeout.
  while (read_buffer_.find('\n') == std::string::npos) {
    pollfd pfd{from_child_, POLLIN, 0};
    const int rv = poll(&pfd, 1, static_cast<int>(timeout_ms_));
    if (rv == 0) throw EvaluatorFailure("subprocess forward model timed out");
    if (rv < 0) throw EvaluatorFailure("poll failed while waiting for subprocess");
    char buf[4096];
    const ssize_t n = read(from_child_, buf, sizeof(buf));
    if (n <= 0) throw EvaluatorFailure("subprocess forward model exited before replying");
    read_buffer_.append(buf, static_cast<size_t>(n));
  }
  const size_t eol = read_buffer_.find('\n');
  const std::string reply = read_buffer_.substr(0, eol);
  read_buffer_.erase(0, eol + 1);

  std::istringstream in(reply);
  Vector y(q_);
  for (int i = 0; i < q_; ++i) {
    if (!(in >> y[i])) {
      throw EvaluatorFailure("malformed subprocess reply: '" + reply + "'");
    }
  }
  return y;
}

ForwardModel SubprocessForward::make(std::vector<std::string> argv, int p, int q) {
  auto proc = std::make_shared<SubprocessForward>(std::move(argv), p, q);
  const std::string source = "subprocess: " + proc->argv_[0];
  return ForwardModel::black_box(
      [proc](const Vector& x) { return proc->evaluate(x); }, source);
}

}  // namespace wellposed

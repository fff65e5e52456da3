#pragma once

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstddef>
#include <cstring>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "gsa/errors.hpp"
#include "gsa/linalg.hpp"

namespace gsa {

enum class ModelKind { coffee_cup, linear, product, external };

inline const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::coffee_cup: return "coffee_cup";
    case ModelKind::linear: return "linear";
    case ModelKind::product: return "product";
    case ModelKind::external: return "external";
  }
  return "unknown";
}

/// Declaration of the model under analysis. time_grid doubles as the output
/// labeling for synthetic models with abstract outputs.
struct ModelSpec {
  ModelKind kind = ModelKind::coffee_cup;
  std::vector<std::string> param_names;
  std::vector<double> time_grid;  // minutes, strictly increasing

  // coffee_cup
  double initial_temperature = 95.0;

  // linear
  std::vector<double> coefficients;  // empty means all ones

  // external
  std::string command;
  double timeout_seconds = 60.0;
  unsigned workers = 1;

  std::size_t output_count() const noexcept { return time_grid.size(); }
};

/// Uniform grid of `steps` intervals over [0, t_end]; includes both endpoints.
inline std::vector<double> uniform_time_grid(double t_end, std::size_t steps) {
  std::vector<double> grid(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i)
    grid[i] = t_end * static_cast<double>(i) / static_cast<double>(steps);
  return grid;
}

/// Newton cooling with constant ambient temperature, closed form
///   T(t) = t_env + (t0 - t_env)·exp(-kappa·t).
/// Negative kappa draws (possible far in the Gaussian tail) are evaluated
/// as-is rather than clipped, so the input distribution stays unbiased.
inline std::vector<double> coffee_cup(std::span<const double> t_grid, double kappa,
                                      double t_env, double t0) {
  std::vector<double> temps(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    temps[i] = t_env + (t0 - t_env) * std::exp(-kappa * t_grid[i]);
  return temps;
}

/// Weighted sum of the inputs; the workhorse analytic test model.
inline double linear_model(std::span<const double> coefficients,
                           std::span<const double> x) {
  double y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    y += (i < coefficients.size() ? coefficients[i] : 1.0) * x[i];
  return y;
}

/// Product of the inputs; pure-interaction test model.
inline double product_model(std::span<const double> x) {
  double y = 1.0;
  for (double v : x) y *= v;
  return y;
}

namespace detail {

inline void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

struct Pipe {
  int fds[2] = {-1, -1};
  Pipe() {
    if (::pipe(fds) != 0) throw ProcessFailed("pipe() failed");
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  Pipe(const Pipe&) = delete;
  Pipe& operator=(const Pipe&) = delete;
  void close_read() {
    if (fds[0] >= 0) ::close(fds[0]);
    fds[0] = -1;
  }
  void close_write() {
    if (fds[1] >= 0) ::close(fds[1]);
    fds[1] = -1;
  }
};

/// Run one request/response exchange with a fresh child process:
/// one JSON line to its stdin, one JSON line back from its stdout.
/// stderr is captured for diagnostics. The wall clock is bounded.
inline std::string exchange_with_process(const std::string& command,
                                         const std::string& request,
                                         double timeout_seconds) {
  ignore_sigpipe_once();
  Pipe to_child, from_child, err_child;

  const pid_t pid = ::fork();
  if (pid < 0) throw ProcessFailed("fork() failed");
  if (pid == 0) {
    ::dup2(to_child.fds[0], STDIN_FILENO);
    ::dup2(from_child.fds[1], STDOUT_FILENO);
    ::dup2(err_child.fds[1], STDERR_FILENO);
    to_child.close_read();
    to_child.close_write();
    from_child.close_read();
    from_child.close_write();
    err_child.close_read();
    err_child.close_write();
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }

  to_child.close_read();
  from_child.close_write();
  err_child.close_write();

  const auto deadline =
      std::chrono::steady_clock::now() +
      std::chrono::milliseconds(static_cast<long long>(timeout_seconds * 1000.0));
  const auto expired = [&] { return std::chrono::steady_clock::now() >= deadline; };
  const auto fail_timeout = [&]() -> std::string {
    ::kill(pid, SIGKILL);
    int status = 0;
    ::waitpid(pid, &status, 0);
    throw EvaluationTimeout("external model exceeded the evaluation wall limit of " +
                            std::to_string(timeout_seconds) + " s");
  };

  {
    const std::string line = request + "\n";
    std::size_t written = 0;
    while (written < line.size()) {
      const ssize_t n =
          ::write(to_child.fds[1], line.data() + written, line.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        break;  // child closed stdin early; its exit status will tell
      }
      written += static_cast<std::size_t>(n);
    }
  }
  to_child.close_write();

  std::string out, err;
  char buf[4096];
  bool out_open = true, err_open = true;
  while (out_open || err_open) {
    if (expired()) fail_timeout();
    struct pollfd fds[2];
    nfds_t nfds = 0;
    if (out_open) fds[nfds++] = {from_child.fds[0], POLLIN, 0};
    if (err_open) fds[nfds++] = {err_child.fds[0], POLLIN, 0};
    const int rc = ::poll(fds, nfds, 100);
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw ProcessFailed("poll() failed while reading model output");
    }
    if (rc == 0) continue;
    for (nfds_t i = 0; i < nfds; ++i) {
      if (!(fds[i].revents & (POLLIN | POLLHUP))) continue;
      const bool is_out = (fds[i].fd == from_child.fds[0]);
      const ssize_t n = ::read(fds[i].fd, buf, sizeof buf);
      if (n > 0) {
        (is_out ? out : err).append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || (n < 0 && errno != EINTR)) {
        (is_out ? out_open : err_open) = false;
      }
    }
  }

  int status = 0;
  for (;;) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR)
      throw ProcessFailed("waitpid() failed for the model process");
    if (expired()) fail_timeout();
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    const std::string code = WIFEXITED(status)
                                 ? "exit status " + std::to_string(WEXITSTATUS(status))
                                 : "abnormal termination";
    throw ProcessFailed("external model failed (" + code + "); stderr: " + err);
  }
  return out;
}

inline std::vector<double> parse_model_response(const std::string& raw,
                                                std::size_t expected_len) {
  const std::size_t nl = raw.find('\n');
  const std::string line = (nl == std::string::npos) ? raw : raw.substr(0, nl);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedOutput(std::string("model response is not valid JSON: ") + e.what());
  }
  if (!j.contains("outputs") || !j["outputs"].is_array())
    throw MalformedOutput("model response lacks an \"outputs\" array");
  std::vector<double> outputs;
  outputs.reserve(j["outputs"].size());
  for (const auto& v : j["outputs"]) {
    if (!v.is_number()) throw MalformedOutput("model output entry is not a number");
    outputs.push_back(v.get<double>());
  }
  if (outputs.size() != expected_len)
    throw MalformedOutput("model returned " + std::to_string(outputs.size()) +
                          " outputs, expected " + std::to_string(expected_len));
  return outputs;
}

}  // namespace detail

/// Evaluate an external black-box model over a batch of physical samples.
/// Protocol, per sample: spawn the command, write one UTF-8 JSON line
/// {"params": {name: value, ...}} to its stdin, read one JSON line
/// {"outputs": [...]} from its stdout, require exit status 0.
/// At most spec.workers processes run concurrently; results land in their
/// sample's row regardless of completion order. Any failure aborts the
/// whole batch.
inline Matrix external_eval(const ModelSpec& spec, const Matrix& physical) {
  if (spec.kind != ModelKind::external)
    throw DomainError("external_eval: model kind is not external");
  if (spec.command.empty()) throw ValidationError("model.command", "missing command");
  if (spec.param_names.size() != physical.cols())
    throw DimensionMismatch("external_eval: parameter name count differs from sample dim");
  const std::size_t n = physical.rows();
  const std::size_t t = spec.output_count();
  Matrix results(n, t);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  const auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        nlohmann::json params;
        for (std::size_t j = 0; j < physical.cols(); ++j)
          params[spec.param_names[j]] = physical(i, j);
        nlohmann::json request;
        request["params"] = std::move(params);
        const std::string raw = detail::exchange_with_process(
            spec.command, request.dump(), spec.timeout_seconds);
        const auto outputs = detail::parse_model_response(raw, t);
        for (std::size_t k = 0; k < t; ++k) results(i, k) = outputs[k];
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  const unsigned pool = std::max(1u, spec.workers);
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (unsigned w = 0; w < pool; ++w) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

/// Batch evaluation front end: n×D physical samples to n×T outputs.
inline Matrix evaluate_model(const ModelSpec& spec, const Matrix& physical) {
  const std::size_t n = physical.rows();
  switch (spec.kind) {
    case ModelKind::coffee_cup: {
      if (physical.cols() != 2)
        throw DimensionMismatch("coffee_cup expects exactly 2 parameters (kappa, t_env)");
      Matrix out(n, spec.output_count());
      for (std::size_t i = 0; i < n; ++i) {
        const auto series = coffee_cup(spec.time_grid, physical(i, 0), physical(i, 1),
                                       spec.initial_temperature);
        for (std::size_t k = 0; k < series.size(); ++k) out(i, k) = series[k];
      }
      return out;
    }
    case ModelKind::linear: {
      Matrix out(n, spec.output_count());
      for (std::size_t i = 0; i < n; ++i) {
        const double y = linear_model(spec.coefficients, physical.row(i));
        for (std::size_t k = 0; k < spec.output_count(); ++k) out(i, k) = y;
      }
      return out;
    }
    case ModelKind::product: {
      Matrix out(n, spec.output_count());
      for (std::size_t i = 0; i < n; ++i) {
        const double y = product_model(physical.row(i));
        for (std::size_t k = 0; k < spec.output_count(); ++k) out(i, k) = y;
      }
      return out;
    }
    case ModelKind::external:
      return external_eval(spec, physical);
  }
  throw DomainError("evaluate_model: unknown model kind");
}

}  // namespace gsa
